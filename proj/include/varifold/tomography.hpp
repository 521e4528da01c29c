#pragma once

// Reconstruction of atomic conic 1-varifolds from band masses of their
// weighted projections onto 2-planes.
//
// Fix a unit normal v and P = v^perp. The gnomonic pushforward gamma sends an
// atom (theta, phi) with <theta,v> > 0 to x = pi_P(theta / <theta,v>) with
// mass phi <theta,v>. For xi in P and Q = span(v, xi), the weighted projection
// of the cone onto Q, restricted to the band {1/2 <= z1 <= 3/2, s <= z2/z1 < t},
// has mass
//     int_{[s,t)} (1 + lambda^2) d gamma_xi(lambda),
// where gamma_xi is the marginal of gamma along xi. Band masses therefore
// determine every marginal gamma_xi; finitely many marginals determine an
// atomic gamma; lifting gamma back to the hemisphere recovers the cone.

#include <algorithm>
#include <complex>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "varifold/conic.hpp"
#include "varifold/geometry.hpp"
#include "varifold/parallel.hpp"
#include "varifold/projection.hpp"

namespace varifold {

struct PlaneAtom {
  Vec point;  // intrinsic coordinates in the plane
  double mass;
};

struct PlaneMeasure {
  Subspace plane;
  std::vector<PlaneAtom> atoms;

  explicit PlaneMeasure(Subspace p, std::vector<PlaneAtom> a = {}) : plane(std::move(p)), atoms(std::move(a)) {
    for (const auto& x : atoms) {
      require_dim(x.point, plane.dim(), "PlaneMeasure atom");
      if (!(x.mass > 0.0) || !std::isfinite(x.mass)) throw InvalidInput("PlaneMeasure: atom masses must be positive");
    }
  }

  double total_mass() const {
    double m = 0.0;
    for (const auto& a : atoms) m += a.mass;
    return m;
  }
};

struct LineAtom {
  double coord;
  double mass;
};

struct DensityInterval {
  double lo;
  double hi;
  double value;
};

/// A measure on the line spanned by `direction`: atoms plus an optional
/// piecewise-constant density on sorted disjoint intervals.
struct LineMeasure {
  Vec direction;
  std::vector<LineAtom> atoms;
  std::vector<DensityInterval> piecewise_density;

  LineMeasure(Vec dir, std::vector<LineAtom> a, std::vector<DensityInterval> d = {})
      : direction(std::move(dir)), atoms(std::move(a)), piecewise_density(std::move(d)) {
    if (!is_unit(direction)) throw InvalidInput("LineMeasure: direction must be a unit vector");
    for (const auto& x : atoms) {
      if (!(x.mass >= 0.0) || !std::isfinite(x.coord)) throw InvalidInput("LineMeasure: invalid atom");
    }
    std::sort(atoms.begin(), atoms.end(), [](const LineAtom& l, const LineAtom& r) { return l.coord < r.coord; });
    for (std::size_t i = 0; i < piecewise_density.size(); ++i) {
      const auto& iv = piecewise_density[i];
      if (!(iv.lo < iv.hi) || !(iv.value >= 0.0)) throw InvalidInput("LineMeasure: invalid density interval");
      if (i > 0 && piecewise_density[i - 1].hi > iv.lo) {
        throw InvalidInput("LineMeasure: density intervals must be sorted and disjoint");
      }
    }
  }

  /// Mass of [s, t).
  double mass_in(double s, double t) const {
    double m = 0.0;
    for (const auto& a : atoms) {
      if (a.coord >= s && a.coord < t) m += a.mass;
    }
    for (const auto& iv : piecewise_density) {
      const double lo = std::max(s, iv.lo), hi = std::min(t, iv.hi);
      if (hi > lo) m += iv.value * (hi - lo);
    }
    return m;
  }

  /// int_{[s,t)} (1 + lambda^2) d(this).
  double weighted_band_mass(double s, double t) const {
    double m = 0.0;
    for (const auto& a : atoms) {
      if (a.coord >= s && a.coord < t) m += (1.0 + a.coord * a.coord) * a.mass;
    }
    for (const auto& iv : piecewise_density) {
      const double lo = std::max(s, iv.lo), hi = std::min(t, iv.hi);
      if (hi > lo) m += iv.value * ((hi - lo) + (hi * hi * hi - lo * lo * lo) / 3.0);
    }
    return m;
  }

  double total_mass() const {
    return mass_in(-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  }
};

struct BandSpec {
  double s;
  double t;
  BandSpec(double s_, double t_) : s(s_), t(t_) {
    if (!(s < t)) throw InvalidInput("BandSpec: need s < t");
  }
};

struct FourierSample {
  Vec frequency;
  std::complex<double> value;
};

// ---------------------------------------------------------------------------
// Gnomonic pushforward and marginals

inline constexpr double kEquatorCutoff = 1e-6;

struct GnomonicResult {
  PlaneMeasure gamma;
  std::vector<ConicAtom> excluded;  // atoms with |<theta,v>| <= cutoff
};

inline GnomonicResult gnomonic_pushforward(const ConicVarifold& C, const Vec& v, double cutoff = kEquatorCutoff) {
  require_dim(v, C.ambient_dim(), "gnomonic_pushforward normal");
  if (!is_unit(v)) throw InvalidInput("gnomonic_pushforward: v must be a unit vector");
  Subspace plane = Subspace::hyperplane(v);
  std::vector<PlaneAtom> atoms;
  std::vector<ConicAtom> excluded;
  for (const auto& a : C.discretized()) {
    const double h = a.direction.dot(v);
    if (std::abs(h) <= cutoff) {
      excluded.push_back(a);
      continue;
    }
    if (h < 0.0) continue;
    atoms.push_back({plane.coordinates(a.direction / h), a.mass * h});
  }
  return {PlaneMeasure(std::move(plane), std::move(atoms)), std::move(excluded)};
}

/// pi_{L_xi}# gamma for a unit direction xi in intrinsic plane coordinates.
inline LineMeasure marginal(const PlaneMeasure& gamma, const Vec& xi) {
  require_dim(xi, gamma.plane.dim(), "marginal direction");
  std::vector<LineAtom> atoms;
  for (const auto& a : gamma.atoms) atoms.push_back({a.point.dot(xi), a.mass});
  return LineMeasure(xi, std::move(atoms));
}

/// gamma^(xi) = sum mass * exp(-i <x, xi>).
inline FourierSample plane_fourier(const PlaneMeasure& gamma, const Vec& freq) {
  require_dim(freq, gamma.plane.dim(), "plane_fourier frequency");
  std::complex<double> acc = 0.0;
  for (const auto& a : gamma.atoms) acc += a.mass * std::exp(std::complex<double>(0.0, -a.point.dot(freq)));
  return {freq, acc};
}

/// int exp(-i lambda freq) dm(lambda), piecewise-constant parts in closed form.
inline std::complex<double> fourier_of_marginal(const LineMeasure& m, double freq) {
  using cd = std::complex<double>;
  cd acc = 0.0;
  for (const auto& a : m.atoms) acc += a.mass * std::exp(cd(0.0, -a.coord * freq));
  for (const auto& iv : m.piecewise_density) {
    if (freq == 0.0) {
      acc += iv.value * (iv.hi - iv.lo);
    } else {
      acc += iv.value * (std::exp(cd(0.0, -iv.lo * freq)) - std::exp(cd(0.0, -iv.hi * freq))) / cd(0.0, freq);
    }
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Band measurements

/// Band mass |pi_Q**(W)|(B_{s,t}) for one fixed (v, xi), per unit slab width.
using BandProbe = std::function<double(double s, double t)>;
/// Produces the probe for a unit normal v and a unit xi orthogonal to v
/// (both in ambient coordinates).
using MeasurementOracle = std::function<BandProbe(const Vec& v, const Vec& xi)>;

namespace detail {

/// Image rays of the weighted projection onto Q = span(v, xi) as
/// (slope z2/z1, band contribution weight/z1), sorted by slope, with partial
/// sums for O(log m) band queries. The sums run outward from slope 0: rays
/// near the equator of v carry huge contributions at huge slopes, and a
/// plain prefix sum would let them swamp every band that comes after.
class ProjectedCone {
 public:
  ProjectedCone(const ConicVarifold& C, const Vec& v, const Vec& xi) {
    const int n = C.ambient_dim();
    require_dim(v, n, "band normal");
    require_dim(xi, n, "band direction");
    if (!is_unit(v) || !is_unit(xi)) throw InvalidInput("band probe: v and xi must be unit vectors");
    if (std::abs(v.dot(xi)) > kUnitTol) throw InvalidInput("band probe: xi must be orthogonal to v");
    std::vector<std::pair<double, double>> rays;
    auto add = [&](const Vec& dir, double weight) {
      if (dir[0] <= 0.0) return;  // the slab 1/2 <= z1 <= 3/2 needs z1 > 0
      // ray length inside the slab is 1/dir[0]
      rays.emplace_back(dir[1] / dir[0], weight / dir[0]);
    };
    if (n > 2) {
      const ConicVarifold image = weighted_projection_conic(C, Subspace(n, {v, xi}));
      for (const auto& a : image.atoms()) add(a.direction, a.mass);
    } else {
      // Q is the whole plane: the weighted projection is the identity.
      for (const auto& a : C.discretized()) {
        Vec d(2);
        d << a.direction.dot(v), a.direction.dot(xi);
        add(d, a.mass);
      }
    }
    std::sort(rays.begin(), rays.end());
    for (const auto& [slope, w] : rays) {
      slopes_.push_back(slope);
      weights_.push_back(w);
    }
    // cum_[i]: sum of weights_[i, c) for i < c, of weights_[c, i) for i >= c.
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(rays.size());
    center_ = std::lower_bound(slopes_.begin(), slopes_.end(), 0.0) - slopes_.begin();
    cum_.assign(m + 1, 0.0);
    for (std::ptrdiff_t i = center_ - 1; i >= 0; --i) cum_[i] = cum_[i + 1] + weights_[i];
    for (std::ptrdiff_t i = center_ + 1; i <= m; ++i) cum_[i] = cum_[i - 1] + weights_[i - 1];
  }

  double band(double s, double t) const {
    if (!(s < t)) return 0.0;
    const auto lo = std::lower_bound(slopes_.begin(), slopes_.end(), s) - slopes_.begin();
    const auto hi = std::lower_bound(slopes_.begin(), slopes_.end(), t) - slopes_.begin();
    if (hi <= lo) return 0.0;
    // Sum directly for short ranges so empty/single bands are exact.
    if (hi - lo <= 8) {
      double m = 0.0;
      for (auto i = lo; i < hi; ++i) m += weights_[i];
      return m;
    }
    if (lo >= center_) return cum_[hi] - cum_[lo];
    if (hi <= center_) return cum_[lo] - cum_[hi];
    return cum_[lo] + cum_[hi];
  }

 private:
  std::vector<double> slopes_;
  std::vector<double> weights_;
  std::vector<double> cum_;
  std::ptrdiff_t center_ = 0;
};

}  // namespace detail

/// Measurement oracle computing band masses through the weighted projection
/// of C onto each 2-plane Q = span(v, xi).
inline MeasurementOracle forward_oracle(const ConicVarifold& C) {
  return [C](const Vec& v, const Vec& xi) -> BandProbe {
    auto cone = std::make_shared<detail::ProjectedCone>(C, v, xi);
    return [cone](double s, double t) { return cone->band(s, t); };
  };
}

/// Single band mass of the forward operator.
inline double forward_band_mass(const ConicVarifold& C, const Vec& v, const Vec& xi, const BandSpec& band) {
  return detail::ProjectedCone(C, v, xi).band(band.s, band.t);
}

struct BandLeaf {
  double s;
  double t;
  double mass;  // raw band mass (includes the 1 + lambda^2 factor)
};

/// Dyadic refinement of [lo, hi) down to bands of width
/// max(1e-13, 1e-15 |lambda|) around every band with positive mass.
inline std::vector<BandLeaf> refine_bands(const BandProbe& probe, double lo, double hi) {
  std::vector<BandLeaf> leaves;
  std::vector<BandLeaf> stack;
  const double top = probe(lo, hi);
  if (top > 0.0) stack.push_back({lo, hi, top});
  while (!stack.empty()) {
    const BandLeaf b = stack.back();
    stack.pop_back();
    const double mid = b.s + 0.5 * (b.t - b.s);
    const double floor = std::max(1e-13, 1e-15 * std::max(std::abs(b.s), std::abs(b.t)));
    if (b.t - b.s <= floor || mid <= b.s || mid >= b.t) {
      leaves.push_back(b);
      continue;
    }
    const double left = probe(b.s, mid);
    const double right = probe(mid, b.t);
    // Right first so leaves pop out in increasing order.
    if (right > 0.0) stack.push_back({mid, b.t, right});
    if (left > 0.0) stack.push_back({b.s, mid, left});
  }
  return leaves;
}

/// Marginal atoms from refined leaves: lambda at the leaf midpoint, mass
/// divided by 1 + lambda^2 there.
inline LineMeasure marginal_from_leaves(const Vec& direction, const std::vector<BandLeaf>& leaves) {
  std::vector<LineAtom> atoms;
  for (const auto& l : leaves) {
    const double lambda = l.s + 0.5 * (l.t - l.s);
    atoms.push_back({lambda, l.mass / (1.0 + lambda * lambda)});
  }
  return LineMeasure(direction, std::move(atoms));
}

/// The marginal gamma_xi restricted to the given bands, recovered from
/// forward band masses alone. `xi` is a unit vector orthogonal to v.
inline LineMeasure band_marginal(const ConicVarifold& C, const Vec& v, const Vec& xi,
                                 const std::vector<BandSpec>& bands) {
  const auto probe = forward_oracle(C)(v, xi);
  std::vector<BandSpec> sorted = bands;
  std::sort(sorted.begin(), sorted.end(), [](const BandSpec& a, const BandSpec& b) { return a.s < b.s; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].s < sorted[i - 1].t) throw InvalidInput("band_marginal: bands must not overlap");
  }
  std::vector<BandLeaf> leaves;
  for (const auto& b : sorted) {
    auto part = refine_bands(probe, b.s, b.t);
    leaves.insert(leaves.end(), part.begin(), part.end());
  }
  return marginal_from_leaves(xi, leaves);
}

// ---------------------------------------------------------------------------
// Plane measure reconstruction

/// dim(P)(dim(P)+1)/2 + 1 unit directions in intrinsic coordinates: the axes
/// first, then quasi-random generic directions. The last one is held out.
inline std::vector<Vec> marginal_directions(int d) {
  std::vector<Vec> dirs;
  for (int i = 0; i < d; ++i) dirs.push_back(basis_vector(d, i));
  if (d == 1) return dirs;
  const int total = d * (d + 1) / 2 + 1;
  for (long k = 1; static_cast<int>(dirs.size()) < total; ++k) dirs.push_back(quasi_random_direction(d, k));
  return dirs;
}

struct PlaneReconstructionOptions {
  std::size_t k_max = 64;
  double match_tol = 1e-9;    // relative coordinate match, max(1, |lambda|) scaled
  double mass_tol = 1e-8;     // relative consistency of masses
  double rank_threshold = 1e-10;
};

/// Recovers an atomic plane measure from marginals whose directions are
/// given in intrinsic plane coordinates. The first dim(P) directions must be
/// independent; they generate candidate points. When more than dim(P)+1
/// marginals are supplied the last is held out for verification.
inline PlaneMeasure reconstruct_plane_measure(const Subspace& plane, const std::vector<LineMeasure>& marginals,
                                              const PlaneReconstructionOptions& opt = {}) {
  const int d = plane.dim();
  if (static_cast<int>(marginals.size()) < d) {
    throw InvalidInput("reconstruct_plane_measure: need at least dim(P) marginals");
  }
  for (const auto& m : marginals) require_dim(m.direction, d, "reconstruct_plane_measure direction");
  const bool hold_out = static_cast<int>(marginals.size()) > d + 1;
  const std::size_t used = hold_out ? marginals.size() - 1 : marginals.size();

  double scale = 0.0;
  for (const auto& m : marginals) scale = std::max(scale, m.total_mass());
  if (scale == 0.0) return PlaneMeasure(plane);

  for (std::size_t i = 0; i < used; ++i) {
    if (marginals[i].atoms.size() > opt.k_max) {
      throw AmbiguousReconstruction("reconstruct_plane_measure: marginal has more atoms than the budget k_max");
    }
  }

  Mat D(d, d);
  for (int i = 0; i < d; ++i) D.row(i) = marginals[i].direction.transpose();
  Eigen::FullPivLU<Mat> lu(D);
  if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-8) {
    throw InvalidInput("reconstruct_plane_measure: leading directions are not independent");
  }

  auto matches = [&](double value, double lambda) {
    return std::abs(value - lambda) <= opt.match_tol * std::max(1.0, std::abs(lambda));
  };
  // Index of the marginal atom matching `value`, or -1.
  auto find_atom = [&](const LineMeasure& m, double value) -> int {
    const double slack = opt.match_tol * std::max(1.0, std::abs(value)) * 2.0;
    auto it = std::lower_bound(m.atoms.begin(), m.atoms.end(), value - slack,
                               [](const LineAtom& a, double x) { return a.coord < x; });
    int best = -1;
    double best_err = std::numeric_limits<double>::infinity();
    for (; it != m.atoms.end() && it->coord <= value + slack; ++it) {
      const double err = std::abs(it->coord - value);
      if (matches(value, it->coord) && err < best_err) {
        best = static_cast<int>(it - m.atoms.begin());
        best_err = err;
      }
    }
    return best;
  };

  // Candidate points: one per combination of atoms of the leading marginals.
  std::vector<Vec> candidates;
  std::vector<std::size_t> index(d, 0);
  bool any = true;
  for (int i = 0; i < d; ++i) any = any && !marginals[i].atoms.empty();
  while (any) {
    Vec rhs(d);
    for (int i = 0; i < d; ++i) rhs[i] = marginals[i].atoms[index[i]].coord;
    Vec x = lu.solve(rhs);
    bool ok = true;
    for (std::size_t j = 0; j < used && ok; ++j) ok = find_atom(marginals[j], x.dot(marginals[j].direction)) >= 0;
    if (ok) candidates.push_back(std::move(x));
    int k = 0;
    while (k < d && ++index[k] == marginals[k].atoms.size()) index[k++] = 0;
    if (k == d) break;
  }
  if (candidates.empty()) {
    throw AmbiguousReconstruction("reconstruct_plane_measure: no candidate point is consistent with all marginals");
  }

  // Incidence system: one row per (marginal, atom), one column per candidate.
  std::vector<std::size_t> row_offset(used + 1, 0);
  for (std::size_t j = 0; j < used; ++j) row_offset[j + 1] = row_offset[j] + marginals[j].atoms.size();
  const auto rows = static_cast<Eigen::Index>(row_offset[used]);
  const auto cols = static_cast<Eigen::Index>(candidates.size());
  Mat A = Mat::Zero(rows, cols);
  Vec b(rows);
  for (std::size_t j = 0; j < used; ++j) {
    for (std::size_t a = 0; a < marginals[j].atoms.size(); ++a) b[row_offset[j] + a] = marginals[j].atoms[a].mass;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const int a = find_atom(marginals[j], candidates[c].dot(marginals[j].direction));
      A(row_offset[j] + a, c) = 1.0;
    }
  }
  Eigen::ColPivHouseholderQR<Mat> qr(A);
  qr.setThreshold(opt.rank_threshold);
  if (qr.rank() < cols) {
    throw AmbiguousReconstruction("reconstruct_plane_measure: incidence system is rank deficient (" +
                                  std::to_string(qr.rank()) + " < " + std::to_string(cols) +
                                  "); supply another direction");
  }
  const Vec x = qr.solve(b);
  const double tol = opt.mass_tol * std::max(1.0, scale);
  if ((A * x - b).cwiseAbs().maxCoeff() > tol) {
    throw AmbiguousReconstruction("reconstruct_plane_measure: marginals are inconsistent with any atomic measure");
  }
  std::vector<PlaneAtom> atoms;
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (x[c] < -tol) throw AmbiguousReconstruction("reconstruct_plane_measure: negative mass assignment");
    if (x[c] > tol) atoms.push_back({candidates[c], x[c]});
  }
  if (atoms.size() > opt.k_max) throw AmbiguousReconstruction("reconstruct_plane_measure: atom budget exceeded");

  if (hold_out) {
    const LineMeasure& held = marginals.back();
    std::vector<double> mass(held.atoms.size(), 0.0);
    for (const auto& a : atoms) {
      const int k = find_atom(held, a.point.dot(held.direction));
      if (k < 0) throw AmbiguousReconstruction("reconstruct_plane_measure: held-out direction disagrees");
      mass[k] += a.mass;
    }
    for (std::size_t k = 0; k < mass.size(); ++k) {
      if (std::abs(mass[k] - held.atoms[k].mass) > tol) {
        throw AmbiguousReconstruction("reconstruct_plane_measure: held-out direction disagrees");
      }
    }
  }
  return PlaneMeasure(plane, std::move(atoms));
}

/// Inverse of the gnomonic pushforward: (x, m) lifts to theta = (x+v)/|x+v|
/// with mass m |x+v|.
inline ConicVarifold lift_to_sphere(const PlaneMeasure& gamma, const Vec& v) {
  require_dim(v, gamma.plane.ambient_dim(), "lift_to_sphere normal");
  if (!is_unit(v)) throw InvalidInput("lift_to_sphere: v must be a unit vector");
  if (gamma.plane.coordinates(v).norm() > 1e-10) throw InvalidInput("lift_to_sphere: plane is not v^perp");
  std::vector<ConicAtom> atoms;
  for (const auto& a : gamma.atoms) {
    const Vec p = gamma.plane.embed(a.point) + v;
    const double len = p.norm();
    atoms.push_back({p / len, a.mass * len});
  }
  return ConicVarifold(gamma.plane.ambient_dim(), std::move(atoms));
}

// ---------------------------------------------------------------------------
// Conic reconstruction

/// 2n signed coordinate axes plus generic vectors, `count` in total
/// (default 2n + 1).
inline std::vector<Vec> normal_battery(int n, int count = -1) {
  if (count < 0) count = 2 * n + 1;
  std::vector<Vec> out;
  for (int i = 0; i < n && static_cast<int>(out.size()) < count; ++i) {
    out.push_back(basis_vector(n, i));
    if (static_cast<int>(out.size()) < count) out.push_back(-basis_vector(n, i));
  }
  for (long k = 7; static_cast<int>(out.size()) < count; k += 3) out.push_back(quasi_random_direction(n, k));
  return out;
}

struct ConicReconstructionOptions {
  double cutoff = kEquatorCutoff;
  double merge_angle = 1e-6;
  double merge_mass_tol = 1e-8;
  double coverage_tol = 1e-8;
  PlaneReconstructionOptions plane;
};

struct ConicReconstruction {
  ConicVarifold cone;
  std::size_t duplicates_merged = 0;
  std::size_t mass_disagreements = 0;  // duplicates whose masses differed by more than merge_mass_tol
  double coverage_residual = 0.0;      // max relative window-mass mismatch over all (v, xi)
};

/// One band-mass table row, as read from or written to a measurement CSV.
struct BandRow {
  Vec v;
  Vec xi;
  double s;
  double t;
  double band_mass;
};

namespace detail {

struct HemisphereAtom {
  ConicAtom atom;
  double elevation;
};

inline std::vector<HemisphereAtom> hemisphere_atoms(const Subspace& plane, const Vec& v,
                                                    const std::vector<LineMeasure>& marginals,
                                                    const ConicReconstructionOptions& opt) {
  const PlaneMeasure gamma = reconstruct_plane_measure(plane, marginals, opt.plane);
  std::vector<HemisphereAtom> out;
  if (gamma.atoms.empty()) return out;
  const ConicVarifold lifted = lift_to_sphere(gamma, v);
  for (const auto& a : lifted.atoms()) {
    const double e = a.direction.dot(v);
    if (e > opt.cutoff) out.push_back({a, e});
  }
  return out;
}

inline ConicReconstruction merge_hemispheres(int n, std::vector<std::vector<HemisphereAtom>> per_normal,
                                             const ConicReconstructionOptions& opt) {
  std::vector<HemisphereAtom> all;
  for (auto& p : per_normal) all.insert(all.end(), p.begin(), p.end());
  // Best-conditioned view first.
  std::stable_sort(all.begin(), all.end(),
                   [](const HemisphereAtom& a, const HemisphereAtom& b) { return a.elevation > b.elevation; });
  ConicReconstruction out;
  std::vector<ConicAtom> kept;
  for (const auto& h : all) {
    bool dup = false;
    for (const auto& k : kept) {
      if (angular_distance(k.direction, h.atom.direction) < opt.merge_angle) {
        dup = true;
        ++out.duplicates_merged;
        if (std::abs(k.mass - h.atom.mass) > opt.merge_mass_tol * std::max(1.0, k.mass)) ++out.mass_disagreements;
        break;
      }
    }
    if (!dup) kept.push_back(h.atom);
  }
  std::sort(kept.begin(), kept.end(), [](const ConicAtom& a, const ConicAtom& b) { return lex_less(a.direction, b.direction); });
  out.cone = ConicVarifold(n, std::move(kept));
  return out;
}

}  // namespace detail

/// Half-width of the slope window probed for each (v, xi).
inline double probe_window(double cutoff = kEquatorCutoff) { return 0.5 / cutoff; }

/// Runs the reconstruction against a measurement oracle: for each normal v,
/// extracts the marginal battery of gamma from band masses, reconstructs
/// gamma, lifts it to the hemisphere <theta,v> > cutoff, then merges the
/// hemispheres. Throws CoverageGap when the result does not account for the
/// measured window masses.
inline ConicReconstruction reconstruct_conic(const MeasurementOracle& forward, const std::vector<Vec>& normals,
                                             const ConicReconstructionOptions& opt = {}) {
  if (normals.empty()) throw InvalidInput("reconstruct_conic: need at least one normal");
  const int n = static_cast<int>(normals.front().size());
  if (n < 2) throw InvalidInput("reconstruct_conic: ambient dimension must be >= 2");
  for (const auto& v : normals) {
    require_dim(v, n, "reconstruct_conic normal");
    if (!is_unit(v)) throw InvalidInput("reconstruct_conic: normals must be unit vectors");
  }
  const double window = probe_window(opt.cutoff);
  const auto dirs = marginal_directions(n - 1);

  std::vector<std::vector<detail::HemisphereAtom>> per_normal(normals.size());
  std::vector<std::vector<double>> measured_total(normals.size());
  parallel_for(normals.size(), [&](std::size_t i) {
    const Vec& v = normals[i];
    const Subspace plane = Subspace::hyperplane(v);
    std::vector<LineMeasure> marginals;
    for (const Vec& dir : dirs) {
      const BandProbe probe = forward(v, plane.embed(dir));
      measured_total[i].push_back(probe(-window, window));
      marginals.push_back(marginal_from_leaves(dir, refine_bands(probe, -window, window)));
    }
    per_normal[i] = detail::hemisphere_atoms(plane, v, marginals, opt);
  });

  ConicReconstruction out = detail::merge_hemispheres(n, std::move(per_normal), opt);
  const MeasurementOracle predicted = forward_oracle(out.cone);
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const Subspace plane = Subspace::hyperplane(normals[i]);
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      const double got = predicted(normals[i], plane.embed(dirs[j]))(-window, window);
      const double want = measured_total[i][j];
      out.coverage_residual = std::max(out.coverage_residual, std::abs(got - want) / std::max(1.0, want));
    }
  }
  if (out.coverage_residual > opt.coverage_tol) {
    throw CoverageGap("reconstruct_conic: projected mass unaccounted for (relative residual " +
                      std::to_string(out.coverage_residual) + ")");
  }
  return out;
}

/// Band-mass table for the default marginal battery: the refined leaves of
/// every (normal, direction) pair, suitable for reconstruct_conic_from_table.
inline std::vector<BandRow> measurement_table(const MeasurementOracle& forward, const std::vector<Vec>& normals,
                                              double cutoff = kEquatorCutoff) {
  std::vector<BandRow> rows;
  if (normals.empty()) return rows;
  const int n = static_cast<int>(normals.front().size());
  const double window = probe_window(cutoff);
  for (const Vec& v : normals) {
    const Subspace plane = Subspace::hyperplane(v);
    for (const Vec& dir : marginal_directions(n - 1)) {
      const Vec xi = plane.embed(dir);
      for (const auto& leaf : refine_bands(forward(v, xi), -window, window)) {
        rows.push_back({v, xi, leaf.s, leaf.t, leaf.mass});
      }
    }
  }
  return rows;
}

/// Reconstruction from an externally produced band-mass table. Rows are
/// grouped by normal v and direction xi (exact coordinate equality, order of
/// first appearance); every positive row is read as one marginal atom at the
/// band midpoint.
inline ConicReconstruction reconstruct_conic_from_table(const std::vector<BandRow>& rows,
                                                        const ConicReconstructionOptions& opt = {}) {
  if (rows.empty()) throw InvalidInput("reconstruct_conic_from_table: empty table");
  const int n = static_cast<int>(rows.front().v.size());
  auto same = [](const Vec& a, const Vec& b) { return a.size() == b.size() && a == b; };
  struct Group {
    Vec v;
    std::vector<Vec> xis;
    std::vector<std::vector<BandLeaf>> leaves;
  };
  std::vector<Group> groups;
  for (const auto& r : rows) {
    require_dim(r.v, n, "measurement row v");
    require_dim(r.xi, n, "measurement row xi");
    if (!(r.s < r.t) || !(r.band_mass >= 0.0)) throw InvalidInput("measurement row: need s < t and band_mass >= 0");
    auto g = std::find_if(groups.begin(), groups.end(), [&](const Group& x) { return same(x.v, r.v); });
    if (g == groups.end()) {
      groups.push_back({r.v, {}, {}});
      g = groups.end() - 1;
    }
    auto x = std::find_if(g->xis.begin(), g->xis.end(), [&](const Vec& q) { return same(q, r.xi); });
    std::size_t k = static_cast<std::size_t>(x - g->xis.begin());
    if (x == g->xis.end()) {
      g->xis.push_back(r.xi);
      g->leaves.emplace_back();
    }
    if (r.band_mass > 0.0) g->leaves[k].push_back({r.s, r.t, r.band_mass});
  }
  std::vector<std::vector<detail::HemisphereAtom>> per_normal;
  for (const auto& g : groups) {
    if (!is_unit(g.v)) throw InvalidInput("measurement table: normals must be unit vectors");
    const Subspace plane = Subspace::hyperplane(g.v);
    std::vector<LineMeasure> marginals;
    for (std::size_t k = 0; k < g.xis.size(); ++k) {
      Vec dir = plane.coordinates(g.xis[k]);
      if (std::abs(dir.norm() - 1.0) > 1e-9) throw InvalidInput("measurement table: xi must be a unit vector orthogonal to v");
      dir.normalize();
      marginals.push_back(marginal_from_leaves(dir, g.leaves[k]));
    }
    per_normal.push_back(detail::hemisphere_atoms(plane, g.v, marginals, opt));
  }
  ConicReconstruction out = detail::merge_hemispheres(n, std::move(per_normal), opt);
  // Coverage per (v, xi): the result must reproduce the tabulated mass over
  // the span of the positive bands, widened by 1e-9 relative. Single leaves
  // are narrower than the rounding of a reconstructed slope, so they are not
  // compared one by one.
  for (const auto& g : groups) {
    for (std::size_t k = 0; k < g.xis.size(); ++k) {
      if (g.leaves[k].empty()) continue;
      double want = 0.0, lo = g.leaves[k].front().s, hi = g.leaves[k].front().t;
      for (const auto& l : g.leaves[k]) {
        want += l.mass;
        lo = std::min(lo, l.s);
        hi = std::max(hi, l.t);
      }
      lo -= 1e-9 * std::max(1.0, std::abs(lo));
      hi += 1e-9 * std::max(1.0, std::abs(hi));
      const double got = forward_band_mass(out.cone, g.v, g.xis[k], BandSpec(lo, hi));
      out.coverage_residual = std::max(out.coverage_residual, std::abs(got - want) / std::max(1.0, want));
    }
  }
  if (out.coverage_residual > opt.coverage_tol) {
    throw CoverageGap("reconstruct_conic_from_table: tabulated band mass unaccounted for (relative residual " +
                      std::to_string(out.coverage_residual) + ")");
  }
  return out;
}

}  // namespace varifold

#pragma once

// Tangent varifolds by dilation, a computable weak-* surrogate, the density
// bounds for weighted projections of localized cones, and the dense-lines
// stress fixture.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "varifold/conic.hpp"
#include "varifold/projection.hpp"
#include "varifold/variation.hpp"
#include "varifold/varifold.hpp"

namespace varifold {

/// f(x, s) = scale * profile(x) * <s, axis>^2 (axis optional). Symmetric in
/// s -> -s, as unoriented directions require.
struct BatteryFunction {
  Profile spatial;
  std::optional<Vec> axis;
  double scale = 1.0;

  double evaluate(const Vec& x, const Vec& s) const {
    const double p = spatial.value(x);
    if (p == 0.0) return 0.0;
    const double d = axis ? std::pow(s.dot(*axis), 2) : 1.0;
    return scale * p * d;
  }
  double support_radius() const { return spatial.outer; }
};

struct TestBattery {
  double radius = 1.0;
  std::vector<BatteryFunction> functions;

  /// max |beta'| of exp(-1/(1-t^2)) on [0,1).
  static constexpr double kBumpSlope = 0.79842975183;
  /// max slope of the plateau's smooth step on [0,1].
  static constexpr double kStepSlope = 2.0;

  /// 64 functions: radial bumps at 8 dyadic scales R, R/2, ..., R/128 times
  /// <s,u>^2 for 8 quasi-random u, scaled to Lipschitz constant 1 for the
  /// metric |x - x'| + |s - s'|. With `with_constant`, a smooth cut-off
  /// constant (1 on B(0,R/2)) is appended, scaled down if R < 4.
  static TestBattery standard(int n, double R, bool with_constant = false) {
    if (!(R > 0.0)) throw InvalidInput("TestBattery: radius must be positive");
    TestBattery b;
    b.radius = R;
    const Vec origin = Vec::Zero(n);
    for (int j = 0; j < 8; ++j) {
      const double rho = R / std::pow(2.0, j);
      const double lip = kBumpSlope / rho + 2.0 * std::exp(-1.0);
      for (int k = 0; k < 8; ++k) {
        b.functions.push_back({Profile::bump(origin, rho), quasi_random_direction(n, k), 1.0 / lip});
      }
    }
    if (with_constant) {
      const double lip = kStepSlope / (0.5 * R);
      b.functions.push_back({Profile::plateau(origin, 0.5 * R, R), std::nullopt, std::min(1.0, 1.0 / lip)});
    }
    return b;
  }
};

/// Sampled check of the battery invariants: support inside B(0,R), symmetry
/// in s, and Lipschitz constant <= 1 (5% slack) on random pairs.
inline bool validate_battery(const TestBattery& b, int n, std::mt19937_64& rng, int samples = 200) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto random_unit = [&] {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = gauss(rng);
    return Vec(u.normalized());
  };
  for (const auto& f : b.functions) {
    if (f.support_radius() > b.radius * (1.0 + 1e-12)) return false;
    for (int k = 0; k < samples; ++k) {
      const Vec s = random_unit();
      const Vec out = (1.0 + unif(rng)) * b.radius * random_unit();
      if (f.evaluate(out, s) != 0.0) return false;
      const Vec x = f.support_radius() * unif(rng) * random_unit();
      if (std::abs(f.evaluate(x, s) - f.evaluate(x, -s)) > 1e-15) return false;
      const double h = f.support_radius() * 1e-3 * unif(rng);
      const Vec x2 = x + h * random_unit();
      const Vec s2 = (s + 1e-3 * unif(rng) * random_unit()).normalized();
      const double dist = (x - x2).norm() + (s - s2).norm();
      if (dist > 0.0 && std::abs(f.evaluate(x, s) - f.evaluate(x2, s2)) > 1.05 * dist) return false;
    }
  }
  return true;
}

namespace detail {

// 8-point Gauss-Legendre on [-1, 1].
inline constexpr std::array<double, 8> kGaussNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGaussWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
inline constexpr int kPanels = 32;

}  // namespace detail

/// int f(x, s(x)) d|V| by composite Gauss-Legendre along each piece clipped
/// to the support of f.
inline double pair_with(const DiscreteVarifold& V, const BatteryFunction& f) {
  const Vec center = Vec::Zero(V.ambient_dim);
  double total = 0.0;
  V.for_each_piece([&](const PieceView& p) {
    const auto chord = ball_chord(*p.origin, p.dir, center, f.support_radius());
    if (!chord) return;
    const double lo = std::max(0.0, chord->enter);
    const double hi = std::min(p.length, chord->exit);
    if (!(hi > lo)) return;
    const double h = (hi - lo) / detail::kPanels;
    double acc = 0.0;
    for (int k = 0; k < detail::kPanels; ++k) {
      const double mid = lo + (k + 0.5) * h;
      for (std::size_t q = 0; q < detail::kGaussNodes.size(); ++q) {
        const double tau = mid + 0.5 * h * detail::kGaussNodes[q];
        acc += detail::kGaussWeights[q] * f.evaluate(*p.origin + tau * p.dir, p.dir);
      }
    }
    total += p.weight * 0.5 * h * acc;
  });
  return total;
}

inline double weak_star_distance(const DiscreteVarifold& V1, const DiscreteVarifold& V2, const TestBattery& battery) {
  if (V1.ambient_dim != V2.ambient_dim) throw InvalidInput("weak_star_distance: dimension mismatch");
  double d = 0.0;
  for (const auto& f : battery.functions) d = std::max(d, std::abs(pair_with(V1, f) - pair_with(V2, f)));
  return d;
}

struct TangentEstimate {
  ConicVarifold cone;
  std::vector<std::pair<double, double>> diagnostics;  // (lambda, weak-* distance)
  std::optional<double> stabilization_lambda;          // first lambda from which all distances are 0
};

/// Cone of the pieces incident to x, with the weak-* distances between the
/// dilations eta_{x,lambda}# V and that cone on a battery of radius
/// `battery_radius`.
inline TangentEstimate tangent_estimate(const DiscreteVarifold& V, const Vec& x, const std::vector<double>& lambdas,
                                        double battery_radius = 1.0) {
  require_dim(x, V.ambient_dim, "tangent_estimate point");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || (i > 0 && !(lambdas[i] < lambdas[i - 1]))) {
      throw InvalidInput("tangent_estimate: lambdas must be positive and strictly decreasing");
    }
  }
  if (!(density(V, x).value.value_or(0.0) > 0.0)) {
    throw ZeroDensity("tangent_estimate: x is not in the support of V");
  }
  // Pieces through x are split and oriented to issue from x, so that the
  // dilated pieces start exactly at the origin.
  const DiscreteVarifold split = split_at(V, x);
  DiscreteVarifold oriented(V.ambient_dim);
  std::vector<ConicAtom> atoms;
  for (const auto& s : split.segments) {
    if ((s.a - x).norm() <= kVertexMerge) {
      oriented.add(s);
      atoms.push_back({(s.b - s.a).normalized(), s.weight});
    } else if ((s.b - x).norm() <= kVertexMerge) {
      oriented.add(SegmentPiece(s.b, s.a, s.weight));
      atoms.push_back({(s.a - s.b).normalized(), s.weight});
    } else {
      oriented.add(s);
    }
  }
  for (const auto& r : split.rays) {
    oriented.add(r);
    if ((r.origin - x).norm() <= kVertexMerge) atoms.push_back({r.direction, r.weight});
  }
  TangentEstimate out{ConicVarifold(V.ambient_dim, merge_atoms(atoms)), {}, std::nullopt};
  const DiscreteVarifold cone_pieces = conic_to_discrete(out.cone);
  const TestBattery battery = TestBattery::standard(V.ambient_dim, battery_radius);
  for (double lambda : lambdas) {
    out.diagnostics.emplace_back(lambda, weak_star_distance(dilate(oriented, x, lambda), cone_pieces, battery));
  }
  for (std::size_t i = out.diagnostics.size(); i-- > 0;) {
    if (out.diagnostics[i].second != 0.0) break;
    out.stabilization_lambda = out.diagnostics[i].first;
  }
  return out;
}

struct DensityBoundReport {
  double lower;
  double upper;
  double projected_norm;  // |pi_P(y)|
  double atom_mass;       // phi(y)
  double lower_bound;     // |pi_P(y)| phi(y)
  double upper_bound;     // 1.5 eps + |pi_P(y)| phi(y)
  bool lower_holds;
  bool upper_holds;
};

/// Largest admissible localization radius r0 <= 1e-5 with
/// mu(S cap B(y, r)) < phi(y) + eps for all r < r0.
inline double admissible_radius(const ConicVarifold& C, const Vec& y, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("admissible_radius: eps must be positive");
  std::vector<std::pair<double, double>> around;  // (chord distance, mass), excluding y itself
  for (const auto& a : C.discretized()) {
    if (angular_distance(a.direction, y) <= kAtomSeparation) continue;
    around.emplace_back((a.direction - y).norm(), a.mass);
  }
  std::sort(around.begin(), around.end());
  double r0 = 1e-5;
  double acc = 0.0;
  for (const auto& [d, m] : around) {
    if (d >= r0) break;
    acc += m;
    if (acc >= eps) {
      r0 = d;
      break;
    }
  }
  return r0;
}

/// Lower and upper 1-density at pi_P(y) of the weighted projection of the
/// cone restricted to B(y, r), compared with |pi_P y| phi(y) and
/// 1.5 eps + |pi_P y| phi(y).
inline DensityBoundReport density_bound_check(const ConicVarifold& C, const Vec& y, const Subspace& P, double r,
                                              double eps) {
  require_dim(y, C.ambient_dim(), "density_bound_check point");
  if (!is_unit(y)) throw InvalidInput("density_bound_check: y must lie on the unit sphere");
  if (P.dim() != C.ambient_dim() - 1) throw InvalidInput("density_bound_check: P must be a hyperplane");
  if (!(r > 0.0) || !(eps > 0.0)) throw InvalidInput("density_bound_check: r and eps must be positive");
  const double proj = P.projected_norm(y);
  if (!(proj > 10.0 * r)) throw PreconditionViolated("density_bound_check: requires |pi_P(y)| > 10 r");
  if (!(r < 0.5)) throw PreconditionViolated("density_bound_check: requires r < 1/2");
  const double phi = C.atom_mass(y);
  if (!(C.ball_mass(y, r) < phi + eps)) {
    throw PreconditionViolated("density_bound_check: requires mu(B(y,r) cap S) < phi(y) + eps");
  }
  // Each ray t z meets B(y, r) in t0 < t < t1. The image segment is built
  // from z itself; recovering the direction from endpoints 2r apart would
  // cost a factor 1/r in rounding.
  DiscreteVarifold image(P.dim());
  for (const auto& a : C.discretized()) {
    const double zy = a.direction.dot(y);
    const double disc = zy * zy - (1.0 - r * r);
    if (!(disc > 0.0) || zy <= 0.0) continue;
    const double contraction = P.projected_norm(a.direction);
    if (contraction <= kDropTol) continue;
    const double half = std::sqrt(disc);
    const Vec pz = P.coordinates(a.direction);
    image.add(SegmentPiece((zy - half) * pz, (zy + half) * pz, a.mass * contraction));
  }
  const DensityValue d = image.empty() ? DensityValue{} : density(image, P.coordinates(y));
  DensityBoundReport rep{d.lower, d.upper, proj, phi, proj * phi, 1.5 * eps + proj * phi, false, false};
  rep.lower_holds = rep.lower >= rep.lower_bound - 1e-12;
  rep.upper_holds = rep.upper <= rep.upper_bound + 1e-12;
  return rep;
}

// ---------------------------------------------------------------------------
// Dense lines: translates L_i + z_i of a dense direction sequence through the
// nonzero lattice points.

struct DenseLine {
  Vec point;
  Vec direction;
};

/// Z^n minus the origin, by increasing max-norm shells, lexicographic inside
/// each shell.
inline std::vector<Vec> lattice_points(int n, std::size_t count) {
  std::vector<Vec> out;
  for (int m = 1; out.size() < count; ++m) {
    std::vector<int> c(n, -m);
    while (true) {
      int mx = 0;
      for (int v : c) mx = std::max(mx, std::abs(v));
      if (mx == m) {
        Vec z(n);
        for (int i = 0; i < n; ++i) z[i] = c[i];
        out.push_back(z);
        if (out.size() == count) return out;
      }
      int i = n - 1;
      while (i >= 0 && c[i] == m) c[i--] = -m;
      if (i < 0) break;
      ++c[i];
    }
  }
  return out;
}

inline std::vector<DenseLine> dense_lines(int n, int k, long seed = 0) {
  if (k < 1) throw InvalidInput("dense_lines: k must be >= 1");
  if (n != 2 && n != 3) throw InvalidInput("dense_lines: supported for n = 2, 3");
  const auto pts = lattice_points(n, static_cast<std::size_t>(k));
  std::vector<DenseLine> out;
  long index = seed;
  for (const Vec& z : pts) {
    Vec d = quasi_random_direction(n, index++);
    // skip directions nearly through the origin
    while ((z - z.dot(d) * d).norm() < 1e-3 * z.norm()) d = quasi_random_direction(n, index++);
    out.push_back({z, d});
  }
  return out;
}

inline DiscreteVarifold dense_lines_fixture(int n, int k, long seed = 0) {
  DiscreteVarifold V(n);
  for (const auto& l : dense_lines(n, k, seed)) add_line(V, l.point, l.direction);
  return V;
}

/// Length of the radial image of a line (a great half-circle) inside the
/// spherical cap {sigma : <sigma, c> > cos(angle)}.
inline double radial_cap_length(const DenseLine& line, const Vec& c, double angle) {
  const Vec p = line.point - line.point.dot(line.direction) * line.direction;
  const Vec ph = p.normalized();
  const double a = ph.dot(c), b = line.direction.dot(c);
  const double amp = std::hypot(a, b);
  const double cr = std::cos(angle);
  if (amp <= cr) return 0.0;
  const double center = std::atan2(b, a);
  const double half = std::acos(cr / amp);
  const double lo = std::max(center - half, -0.5 * std::numbers::pi);
  const double hi = std::min(center + half, 0.5 * std::numbers::pi);
  return std::max(0.0, hi - lo);
}

struct GrowthRow {
  int k;
  double projection_mass;  // mapping projection onto e_n^perp, mass of B(0, ball_radius)
  double cap_mass;         // radial image on S^{n-1}, mass of the cap around e_1
};

inline std::vector<GrowthRow> dense_lines_growth(int n, int k, long seed = 0, double ball_radius = 1.0,
                                                 double cap_angle = 0.5) {
  const auto lines = dense_lines(n, k, seed);
  std::vector<Vec> basis;
  for (int i = 0; i + 1 < n; ++i) basis.push_back(basis_vector(n, i));
  const Subspace P(n, basis);
  const Vec c = basis_vector(n, 0);
  std::vector<GrowthRow> rows;
  double proj = 0.0, cap = 0.0;
  for (int i = 0; i < k; ++i) {
    DiscreteVarifold one(n);
    add_line(one, lines[i].point, lines[i].direction);
    const DiscreteVarifold image = mapping_projection(one, P);
    if (!image.empty()) proj += mass(image, Vec::Zero(n - 1), ball_radius);
    cap += radial_cap_length(lines[i], c, cap_angle);
    rows.push_back({i + 1, proj, cap});
  }
  return rows;
}

}  // namespace varifold

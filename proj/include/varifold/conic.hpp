#pragma once

// Conic 1-varifolds W = int V_{R_z} dmu(z): a measure mu on the unit sphere
// made of atoms plus an optional quadrature-sampled density.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "varifold/geometry.hpp"
#include "varifold/varifold.hpp"

namespace varifold {

struct ConicAtom {
  Vec direction;
  double mass;
};

/// Nonnegative density on S^1 or S^2 sampled on a fixed quadrature grid.
///
/// Grids are named "trapezoid:N" (uniform angles 2*pi*j/N on the circle) or
/// "product:PxA" (P polar midpoints with sin weights times A azimuths on the
/// 2-sphere). On the circle the samples also define a trigonometric
/// interpolant, which gives point values and exact arc integrals for
/// band-limited densities.
class SphereDensity {
 public:
  static constexpr int kDefaultCircleNodes = 720;
  static constexpr int kDefaultPolar = 64;
  static constexpr int kDefaultAzimuth = 128;

  SphereDensity(const std::string& grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    build_grid();
    if (values_.size() != nodes_.size()) {
      throw InvalidInput("SphereDensity: grid '" + grid_ + "' has " + std::to_string(nodes_.size()) +
                         " nodes but " + std::to_string(values_.size()) + " values were given");
    }
    for (double v : values_) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("SphereDensity: values must be finite and >= 0");
    }
    if (dim_ == 2) build_fourier();
  }

  /// Samples f(node) on the named grid.
  template <class F>
  static SphereDensity sample(const std::string& grid, F&& f) {
    SphereDensity probe(grid);
    std::vector<double> vals;
    vals.reserve(probe.nodes_.size());
    for (const Vec& z : probe.nodes_) vals.push_back(f(z));
    return SphereDensity(grid, std::move(vals));
  }

  static std::string circle_grid(int n = kDefaultCircleNodes) { return "trapezoid:" + std::to_string(n); }
  static std::string sphere_grid(int polar = kDefaultPolar, int azimuth = kDefaultAzimuth) {
    return "product:" + std::to_string(polar) + "x" + std::to_string(azimuth);
  }

  const std::string& grid() const { return grid_; }
  int ambient_dim() const { return dim_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Vec>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& values() const { return values_; }

  double total_mass() const {
    double m = 0.0;
    for (std::size_t j = 0; j < values_.size(); ++j) m += weights_[j] * values_[j];
    return m;
  }

  /// Trigonometric interpolant at angle theta (circle grids only).
  double evaluate_angle(double theta) const {
    require_circle("evaluate_angle");
    double h = a_[0];
    for (std::size_t k = 1; k < a_.size(); ++k) {
      h += a_[k] * std::cos(k * theta) + b_[k] * std::sin(k * theta);
    }
    return h;
  }

  /// Exact integral of the interpolant over the arc [from, to] (radians).
  double arc_integral(double from, double to) const {
    require_circle("arc_integral");
    double m = a_[0] * (to - from);
    for (std::size_t k = 1; k < a_.size(); ++k) {
      const double kk = static_cast<double>(k);
      m += a_[k] * (std::sin(kk * to) - std::sin(kk * from)) / kk;
      m -= b_[k] * (std::cos(kk * to) - std::cos(kk * from)) / kk;
    }
    return m;
  }

  /// Exact int_{-pi/2}^{pi/2} h(alpha + phi) cos(phi) dphi for the
  /// interpolant. Only even harmonics and k = 1 survive:
  ///   c_0 = 2, c_1 = pi/2, c_k = 2 (-1)^(k/2+1) / (k^2 - 1) for even k.
  double cosine_lobe(double alpha) const {
    require_circle("cosine_lobe");
    double m = 2.0 * a_[0];
    if (a_.size() > 1) m += 0.5 * std::numbers::pi * (a_[1] * std::cos(alpha) + b_[1] * std::sin(alpha));
    for (std::size_t k = 2; k < a_.size(); k += 2) {
      const double kk = static_cast<double>(k);
      const double c = ((k / 2) % 2 == 0 ? -2.0 : 2.0) / (kk * kk - 1.0);
      m += c * (a_[k] * std::cos(kk * alpha) + b_[k] * std::sin(kk * alpha));
    }
    return m;
  }

 private:
  explicit SphereDensity(const std::string& grid) : grid_(grid) { build_grid(); }

  void require_circle(const char* what) const {
    if (dim_ != 2) throw InvalidInput(std::string("SphereDensity::") + what + " needs a circle grid");
  }

  void build_grid() {
    const auto colon = grid_.find(':');
    if (colon == std::string::npos) throw InvalidInput("SphereDensity: malformed grid '" + grid_ + "'");
    const std::string kind = grid_.substr(0, colon);
    const std::string spec = grid_.substr(colon + 1);
    try {
      if (kind == "trapezoid") {
        const int n = std::stoi(spec);
        if (n < 2) throw InvalidInput("SphereDensity: trapezoid grid needs >= 2 nodes");
        dim_ = 2;
        for (int j = 0; j < n; ++j) {
          const double t = 2.0 * std::numbers::pi * j / n;
          Vec z(2);
          z << std::cos(t), std::sin(t);
          nodes_.push_back(z);
          weights_.push_back(2.0 * std::numbers::pi / n);
        }
        return;
      }
      if (kind == "product") {
        const auto x = spec.find('x');
        if (x == std::string::npos) throw InvalidInput("SphereDensity: malformed product grid");
        const int np = std::stoi(spec.substr(0, x));
        const int na = std::stoi(spec.substr(x + 1));
        if (np < 1 || na < 1) throw InvalidInput("SphereDensity: product grid needs positive counts");
        dim_ = 3;
        for (int i = 0; i < np; ++i) {
          const double th = (i + 0.5) * std::numbers::pi / np;
          const double w = (std::numbers::pi / np) * std::sin(th) * (2.0 * std::numbers::pi / na);
          for (int j = 0; j < na; ++j) {
            const double ph = 2.0 * std::numbers::pi * j / na;
            Vec z(3);
            z << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
            nodes_.push_back(z);
            weights_.push_back(w);
          }
        }
        return;
      }
    } catch (const std::logic_error&) {
      throw InvalidInput("SphereDensity: malformed grid '" + grid_ + "'");
    }
    throw InvalidInput("SphereDensity: unknown grid kind '" + kind + "'");
  }

  void build_fourier() {
    const std::size_t n = values_.size();
    const std::size_t kmax = n / 2;
    std::vector<double> ct(n), st(n);
    for (std::size_t j = 0; j < n; ++j) {
      ct[j] = std::cos(2.0 * std::numbers::pi * j / n);
      st[j] = std::sin(2.0 * std::numbers::pi * j / n);
    }
    a_.assign(kmax + 1, 0.0);
    b_.assign(kmax + 1, 0.0);
    for (std::size_t k = 0; k <= kmax; ++k) {
      double sa = 0.0, sb = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t idx = (k * j) % n;
        sa += values_[j] * ct[idx];
        sb += values_[j] * st[idx];
      }
      const bool edge = k == 0 || (n % 2 == 0 && k == kmax);
      a_[k] = (edge ? 1.0 : 2.0) * sa / n;
      b_[k] = edge ? 0.0 : 2.0 * sb / n;
    }
  }

  std::string grid_;
  int dim_ = 0;
  std::vector<Vec> nodes_;
  std::vector<double> weights_;
  std::vector<double> values_;
  std::vector<double> a_, b_;
};

/// Merges atoms whose directions are within `tol` radians by mass addition;
/// the first direction of each cluster is kept.
inline std::vector<ConicAtom> merge_atoms(const std::vector<ConicAtom>& atoms, double tol = kAtomSeparation) {
  std::vector<ConicAtom> out;
  for (const auto& a : atoms) {
    bool merged = false;
    for (auto& o : out) {
      if (angular_distance(o.direction, a.direction) <= tol) {
        o.mass += a.mass;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(a);
  }
  return out;
}

class ConicVarifold {
 public:
  ConicVarifold() = default;
  ConicVarifold(int n, std::vector<ConicAtom> atoms, std::optional<SphereDensity> density = std::nullopt)
      : n_(n), atoms_(std::move(atoms)), density_(std::move(density)) {
    if (n < 1) throw InvalidInput("ConicVarifold: ambient dimension must be positive");
    for (const auto& a : atoms_) {
      require_dim(a.direction, n, "ConicVarifold atom");
      require_finite(a.direction, "ConicVarifold atom");
      if (!is_unit(a.direction)) throw InvalidInput("ConicVarifold: atom direction must be a unit vector");
      if (!(a.mass > 0.0) || !std::isfinite(a.mass)) throw InvalidInput("ConicVarifold: atom mass must be positive");
    }
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
        if (angular_distance(atoms_[i].direction, atoms_[j].direction) <= kAtomSeparation) {
          throw InvalidInput("ConicVarifold: atom directions must be pairwise distinct");
        }
      }
    }
    if (density_ && density_->ambient_dim() != n) throw InvalidInput("ConicVarifold: density grid dimension mismatch");
  }

  int ambient_dim() const { return n_; }
  const std::vector<ConicAtom>& atoms() const { return atoms_; }
  const std::optional<SphereDensity>& density() const { return density_; }
  bool empty() const { return atoms_.empty() && !density_; }

  double total_mass() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.mass;
    if (density_) m += density_->total_mass();
    return m;
  }

  /// Atom mass phi(z) at direction z (0 when no atom is there).
  double atom_mass(const Vec& z) const {
    for (const auto& a : atoms_) {
      if (angular_distance(a.direction, z) <= kAtomSeparation) return a.mass;
    }
    return 0.0;
  }

  /// mu(B(y, r) cap S^{n-1}) for the open Euclidean ball.
  double ball_mass(const Vec& y, double r) const {
    double m = 0.0;
    for (const auto& a : atoms_) {
      if ((a.direction - y).norm() < r) m += a.mass;
    }
    if (density_) {
      for (std::size_t j = 0; j < density_->size(); ++j) {
        if ((density_->nodes()[j] - y).norm() < r) m += density_->weights()[j] * density_->values()[j];
      }
    }
    return m;
  }

  /// mu of the open arc (from, to) on S^1: atoms counted directly, the density
  /// through its interpolant.
  double arc_mass(double from, double to) const {
    if (n_ != 2) throw InvalidInput("arc_mass: needs a conic varifold in R^2");
    double m = 0.0;
    for (const auto& a : atoms_) {
      double t = std::atan2(a.direction[1], a.direction[0]);
      while (t <= from) t += 2.0 * std::numbers::pi;
      while (t - 2.0 * std::numbers::pi > from) t -= 2.0 * std::numbers::pi;
      if (t < to) m += a.mass;
    }
    if (density_) m += density_->arc_integral(from, to);
    return m;
  }

  /// Atoms and density nodes as one weighted direction list.
  std::vector<ConicAtom> discretized() const {
    std::vector<ConicAtom> out = atoms_;
    if (density_) {
      for (std::size_t j = 0; j < density_->size(); ++j) {
        const double m = density_->weights()[j] * density_->values()[j];
        if (m > 0.0) out.push_back({density_->nodes()[j], m});
      }
    }
    return out;
  }

  ConicVarifold scaled(double c) const {
    std::vector<ConicAtom> a = atoms_;
    for (auto& x : a) x.mass *= c;
    std::optional<SphereDensity> d;
    if (density_) {
      std::vector<double> v = density_->values();
      for (double& x : v) x *= c;
      d.emplace(density_->grid(), std::move(v));
    }
    return ConicVarifold(n_, std::move(a), std::move(d));
  }

 private:
  int n_ = 0;
  std::vector<ConicAtom> atoms_;
  std::optional<SphereDensity> density_;
};

/// Rays from the origin: one per atom and one per density node.
inline DiscreteVarifold conic_to_discrete(const ConicVarifold& C, double r_max = 1.0) {
  if (!(r_max > 0.0)) throw InvalidInput("conic_to_discrete: r_max must be positive");
  if (C.empty()) throw InvalidInput("conic_to_discrete: conic varifold has neither atoms nor density");
  DiscreteVarifold out(C.ambient_dim());
  const Vec origin = Vec::Zero(C.ambient_dim());
  for (const auto& a : C.discretized()) out.add(RayPiece(origin, a.direction, a.mass));
  return out;
}

}  // namespace varifold

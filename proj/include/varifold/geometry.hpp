#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "varifold/errors.hpp"

namespace varifold {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Predicate tolerances.
inline constexpr double kUnitTol = 1e-12;
inline constexpr double kAtomSeparation = 1e-9;
inline constexpr double kVertexMerge = 1e-9;
inline constexpr double kTangencyTol = 1e-9;
inline constexpr double kDropTol = 1e-12;

inline void require_dim(const Vec& x, int n, const char* what) {
  if (x.size() != n) {
    throw InvalidInput(std::string(what) + ": expected dimension " + std::to_string(n) +
                       ", got " + std::to_string(x.size()));
  }
}

inline void require_finite(const Vec& x, const char* what) {
  if (!x.allFinite()) throw InvalidInput(std::string(what) + ": non-finite coordinate");
}

inline Vec normalized(const Vec& x) {
  const double n = x.norm();
  if (!(n > 0.0)) throw InvalidInput("cannot normalize a zero vector");
  return x / n;
}

inline bool is_unit(const Vec& x) { return std::abs(x.norm() - 1.0) <= kUnitTol; }

/// Angle between two unit vectors, stable near 0 and pi.
inline double angular_distance(const Vec& a, const Vec& b) {
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

inline Vec basis_vector(int n, int i) {
  Vec e = Vec::Zero(n);
  e[i] = 1.0;
  return e;
}

/// Strict lexicographic order on coordinates; used for canonical output.
inline bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

/// Parameter range along a line where it lies in an open ball.
struct Chord {
  double enter;
  double exit;
};

/// Solves |origin + tau*dir - center| < radius for a unit `dir`.
/// Returns nullopt when the line misses or touches the ball.
inline std::optional<Chord> ball_chord(const Vec& origin, const Vec& dir, const Vec& center,
                                       double radius) {
  const Vec rel = origin - center;
  const double b = dir.dot(rel);
  const double c = rel.squaredNorm() - radius * radius;
  const double disc = b * b - c;
  if (!(disc > 0.0)) return std::nullopt;
  const double sq = std::sqrt(disc);
  if (b == 0.0) return Chord{-sq, sq};
  // Cancellation-free roots of tau^2 + 2 b tau + c.
  const double q = b > 0.0 ? -(b + sq) : (sq - b);
  double t0 = q;
  double t1 = c / q;
  if (t0 > t1) std::swap(t0, t1);
  return Chord{t0, t1};
}

/// Discriminant of the chord equation normalised by radius^2; small values
/// flag near-tangency.
inline double chord_discriminant(const Vec& origin, const Vec& dir, const Vec& center,
                                 double radius) {
  const Vec rel = origin - center;
  const double b = dir.dot(rel);
  return (b * b - (rel.squaredNorm() - radius * radius)) / (radius * radius);
}

/// A linear subspace P of R^n given by an orthonormal basis (1 <= k < n).
/// Projections can be reported in ambient coordinates or in the intrinsic
/// coordinates relative to the basis.
class Subspace {
 public:
  Subspace(int ambient_dim, std::vector<Vec> basis) : n_(ambient_dim) {
    if (ambient_dim < 1) throw InvalidInput("Subspace: ambient dimension must be positive");
    const int k = static_cast<int>(basis.size());
    if (k < 1 || k >= ambient_dim) {
      throw InvalidInput("Subspace: need 1 <= k < n basis vectors");
    }
    basis_ = Mat(ambient_dim, k);
    for (int j = 0; j < k; ++j) {
      require_dim(basis[j], ambient_dim, "Subspace basis");
      require_finite(basis[j], "Subspace basis");
      basis_.col(j) = basis[j];
    }
    const Mat gram = basis_.transpose() * basis_;
    if ((gram - Mat::Identity(k, k)).cwiseAbs().maxCoeff() > kUnitTol) {
      throw InvalidInput("Subspace: basis is not orthonormal within 1e-12");
    }
  }

  /// Orthonormalises `spanning` (modified Gram-Schmidt, twice).
  static Subspace span(int ambient_dim, const std::vector<Vec>& spanning) {
    std::vector<Vec> out;
    for (const Vec& v : spanning) {
      require_dim(v, ambient_dim, "Subspace::span");
      Vec w = v;
      for (int pass = 0; pass < 2; ++pass) {
        for (const Vec& e : out) w -= e.dot(w) * e;
      }
      if (w.norm() <= 1e-10 * std::max(1.0, v.norm())) {
        throw InvalidInput("Subspace::span: vectors are linearly dependent");
      }
      out.push_back(w.normalized());
    }
    return Subspace(ambient_dim, std::move(out));
  }

  /// The hyperplane normal^perp; basis completed from the coordinate axes,
  /// least aligned with the normal first. Deterministic.
  static Subspace hyperplane(const Vec& normal) {
    const int n = static_cast<int>(normal.size());
    if (n < 2) throw InvalidInput("Subspace::hyperplane: need n >= 2");
    const Vec v = normalized(normal);
    std::vector<Vec> out;
    // Visit axes from the least aligned with v to avoid near-dependence.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return std::abs(v[a]) < std::abs(v[b]); });
    for (int i : order) {
      if (static_cast<int>(out.size()) == n - 1) break;
      Vec w = varifold::basis_vector(n, i);
      for (int pass = 0; pass < 2; ++pass) {
        w -= v.dot(w) * v;
        for (const Vec& e : out) w -= e.dot(w) * e;
      }
      if (w.norm() > 1e-6) out.push_back(w.normalized());
    }
    return Subspace(n, std::move(out));
  }

  int ambient_dim() const { return n_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Mat& basis() const { return basis_; }
  Vec basis_vector(int j) const { return basis_.col(j); }

  /// Intrinsic coordinates of pi_P(x).
  Vec coordinates(const Vec& x) const { return basis_.transpose() * x; }
  /// pi_P(x) in ambient coordinates.
  Vec project(const Vec& x) const { return basis_ * coordinates(x); }
  /// Ambient point of intrinsic coordinates c.
  Vec embed(const Vec& c) const { return basis_ * c; }
  /// Length of the projection of x.
  double projected_norm(const Vec& x) const { return coordinates(x).norm(); }

  bool contains(const Vec& x, double tol = kUnitTol) const {
    return (x - project(x)).norm() <= tol * std::max(1.0, x.norm());
  }

  /// Expresses a subspace Q contained in *this in intrinsic coordinates.
  Subspace relative(const Subspace& q) const {
    if (q.ambient_dim() != n_) throw InvalidInput("Subspace::relative: dimension mismatch");
    std::vector<Vec> b;
    for (int j = 0; j < q.dim(); ++j) {
      if (!contains(q.basis_vector(j), 1e-10)) {
        throw InvalidInput("Subspace::relative: Q is not contained in P");
      }
      b.push_back(coordinates(q.basis_vector(j)));
    }
    return Subspace::span(dim(), b);
  }

 private:
  int n_;
  Mat basis_;
};

/// Deterministic low-discrepancy unit vectors in R^n (golden-angle sequence
/// on the circle, golden spiral on S^2, additive recurrence otherwise).
inline Vec quasi_random_direction(int n, long index) {
  constexpr double golden = std::numbers::phi;
  const double i = static_cast<double>(index) + 0.5;
  if (n == 1) return Vec::Constant(1, 1.0);
  if (n == 2) {
    const double a = 2.0 * std::numbers::pi * (i / golden - std::floor(i / golden));
    Vec u(2);
    u << std::cos(a), std::sin(a);
    return u;
  }
  if (n == 3) {
    // Golden spiral: z uniform in (-1,1) via the fractional part of i/phi^2,
    // azimuth by the golden angle.
    const double fz = i / (golden * golden) - std::floor(i / (golden * golden));
    const double zz = 1.0 - 2.0 * fz;
    const double az = 2.0 * std::numbers::pi * (i / golden - std::floor(i / golden));
    const double rho = std::sqrt(std::max(0.0, 1.0 - zz * zz));
    Vec u(3);
    u << rho * std::cos(az), rho * std::sin(az), zz;
    return u;
  }
  // Kronecker sequence with the generalized golden ratio, mapped to the cube.
  double phi_n = 2.0;
  for (int it = 0; it < 64; ++it) phi_n = std::pow(1.0 + phi_n, 1.0 / (n + 1));
  Vec u(n);
  double a = 1.0;
  for (int k = 0; k < n; ++k) {
    a /= phi_n;
    const double f = 0.5 + i * a;
    u[k] = 2.0 * (f - std::floor(f)) - 1.0;
  }
  if (u.norm() < 1e-3) u[0] += 1.0;
  return u.normalized();
}

}  // namespace varifold

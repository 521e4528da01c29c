#pragma once

// First variation of discrete 1-varifolds and its Riesz representation.
//
// For a segment [a,b] with unit direction s and weight theta,
//   int div_S g = theta * (<g(b), s> - <g(a), s>),
// so delta V is carried by piece endpoints. At a vertex x the residual
// r(x) = sum theta_i s_i over away-pointing directions gives
//   delta V(g) = sum_x <g(x), -r(x)>,
// reported as atoms (x, -r/|r|, |r|).

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "varifold/geometry.hpp"
#include "varifold/varifold.hpp"

namespace varifold {

/// Radial profiles: the standard bump exp(-1/(1-t^2)) on B(c, outer), and a
/// smooth plateau equal to 1 on B(c, inner) and 0 outside B(c, outer).
struct Profile {
  enum class Kind { Bump, Plateau };
  Kind kind = Kind::Bump;
  Vec center;
  double inner = 0.0;
  double outer = 1.0;

  static Profile bump(Vec c, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInput("bump: radius must be positive and finite");
    return {Kind::Bump, std::move(c), 0.0, radius};
  }
  static Profile plateau(Vec c, double inner, double outer) {
    if (!(inner > 0.0) || !(outer > inner) || !std::isfinite(outer)) {
      throw InvalidInput("plateau: need 0 < inner < outer < inf");
    }
    return {Kind::Plateau, std::move(c), inner, outer};
  }

  double value(const Vec& x) const { return value_and_gradient(x).first; }

  std::pair<double, Vec> value_and_gradient(const Vec& x) const {
    const Vec rel = x - center;
    const double r = rel.norm();
    Vec grad = Vec::Zero(x.size());
    if (r >= outer) return {0.0, grad};
    if (kind == Kind::Bump) {
      const double t = r / outer;
      const double u = 1.0 - t * t;
      const double v = std::exp(-1.0 / u);
      if (r > 0.0) grad = v * (-2.0 * t / (u * u)) / outer * (rel / r);
      return {v, grad};
    }
    if (r <= inner) return {1.0, grad};
    // smooth step from 1 (at inner) to 0 (at outer)
    const double s = (r - inner) / (outer - inner);
    const double p = std::exp(-1.0 / (1.0 - s));
    const double q = std::exp(-1.0 / s);
    const double val = p / (p + q);
    const double dp = p / ((1.0 - s) * (1.0 - s)) * -1.0;
    const double dq = q / (s * s);
    const double dval = (dp * (p + q) - p * (dp + dq)) / ((p + q) * (p + q));
    grad = dval / (outer - inner) * (rel / r);
    return {val, grad};
  }
};

/// Compactly supported vector field g(x) = profile(x) * (A x + b).
/// Constant fields use A = 0, coordinate fields a projector, rotation fields
/// a skew matrix.
struct TestField {
  Profile profile;
  Mat linear;
  Vec offset;

  Vec evaluate(const Vec& x) const {
    const double p = profile.value(x);
    if (p == 0.0) return Vec::Zero(x.size());
    return p * (linear * x + offset);
  }

  Mat jacobian(const Vec& x) const {
    const auto [p, grad] = profile.value_and_gradient(x);
    if (p == 0.0 && grad.isZero()) return Mat::Zero(x.size(), x.size());
    return (linear * x + offset) * grad.transpose() + p * linear;
  }

  /// div_S g = s^T Dg s for a unit direction s.
  double tangential_divergence(const Vec& x, const Vec& s) const { return s.dot(jacobian(x) * s); }

  const Vec& support_center() const { return profile.center; }
  double support_radius() const { return profile.outer; }

  static TestField constant(Profile p, const Vec& value) {
    const int n = static_cast<int>(value.size());
    return {std::move(p), Mat::Zero(n, n), value};
  }
  static TestField affine(Profile p, Mat a, Vec b) { return {std::move(p), std::move(a), std::move(b)}; }
  /// Rotation in the (i, j) coordinate plane.
  static TestField rotation(Profile p, int n, int i, int j) {
    Mat a = Mat::Zero(n, n);
    a(i, j) = -1.0;
    a(j, i) = 1.0;
    return {std::move(p), std::move(a), Vec::Zero(n)};
  }
};

/// Checks the TestField invariants: g vanishes on the sphere of twice the
/// support radius, and the Jacobian matches central differences (relative
/// error 1e-6) at random points of the support.
inline bool validate_test_field(const TestField& g, std::mt19937_64& rng, int samples = 32) {
  const int n = static_cast<int>(g.support_center().size());
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < samples; ++k) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = gauss(rng);
    u.normalize();
    if (g.evaluate(g.support_center() + 2.0 * g.support_radius() * u).norm() != 0.0) return false;
  }
  for (int k = 0; k < samples; ++k) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = gauss(rng);
    u.normalize();
    const Vec x = g.support_center() + 0.95 * g.support_radius() * std::pow(unif(rng), 1.0 / n) * u;
    const double h = 1e-6 * g.support_radius();
    Mat fd(n, n);
    for (int j = 0; j < n; ++j) {
      Vec e = Vec::Zero(n);
      e[j] = h;
      fd.col(j) = (g.evaluate(x + e) - g.evaluate(x - e)) / (2.0 * h);
    }
    const Mat jac = g.jacobian(x);
    const double scale = std::max(jac.norm(), 1e-3);
    if ((fd - jac).norm() > 1e-6 * scale) return false;
  }
  return true;
}

/// delta V(g) = int div_S g dV, evaluated in closed form at piece endpoints.
inline double first_variation(const DiscreteVarifold& V, const TestField& g) {
  if (!std::isfinite(g.support_radius())) throw InvalidInput("first_variation: test field support must be bounded");
  require_dim(g.support_center(), V.ambient_dim, "first_variation field");
  double total = 0.0;
  for (const auto& s : V.segments) {
    const Vec dir = s.direction();
    total += s.weight * (g.evaluate(s.b).dot(dir) - g.evaluate(s.a).dot(dir));
  }
  for (const auto& r : V.rays) total -= r.weight * g.evaluate(r.origin).dot(r.direction);
  return total;
}

struct VariationAtom {
  Vec location;
  Vec omega;
  double mass;
};

namespace detail {

struct Endpoint {
  Vec point;
  Vec away;  // weighted unit vector pointing along the piece away from point
};

inline std::vector<Endpoint> endpoints(const DiscreteVarifold& V) {
  std::vector<Endpoint> out;
  for (const auto& s : V.segments) {
    const Vec dir = s.direction();
    out.push_back({s.a, s.weight * dir});
    out.push_back({s.b, -s.weight * dir});
  }
  for (const auto& r : V.rays) out.push_back({r.origin, r.weight * r.direction});
  return out;
}

/// Groups points closer than `tol` (transitively). Returns a cluster label
/// per point, labels ordered by first appearance.
inline std::vector<int> cluster_points(const std::vector<const Vec*>& pts, double tol) {
  const std::size_t m = pts.size();
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  // Sort along the first coordinate so only nearby pairs are compared.
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return (*pts[a])[0] < (*pts[b])[0]; });
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if ((*pts[order[j]])[0] - (*pts[order[i]])[0] > tol) break;
      if ((*pts[order[i]] - *pts[order[j]]).norm() <= tol) parent[find(order[i])] = find(order[j]);
    }
  }
  std::vector<int> label(m, -1);
  std::vector<int> root_label(m, -1);
  int next = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t r = find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    label[i] = root_label[r];
  }
  return label;
}

}  // namespace detail

/// Riesz representation of delta V: one atom per unbalanced vertex, with
/// delta V(g) = sum mass * <g(location), omega>. Endpoints within 1e-9 form
/// one vertex; atoms with residual at most `tol` are omitted.
inline std::vector<VariationAtom> vertex_residuals(const DiscreteVarifold& V, double tol = 1e-12) {
  const auto ends = detail::endpoints(V);
  std::vector<const Vec*> pts;
  pts.reserve(ends.size());
  for (const auto& e : ends) pts.push_back(&e.point);
  const auto label = detail::cluster_points(pts, kVertexMerge);
  const int clusters = label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
  std::vector<Vec> residual(clusters, Vec::Zero(V.ambient_dim));
  std::vector<const Vec*> where(clusters, nullptr);
  for (std::size_t i = 0; i < ends.size(); ++i) {
    residual[label[i]] += ends[i].away;
    if (!where[label[i]]) where[label[i]] = &ends[i].point;
  }
  std::vector<VariationAtom> out;
  for (int c = 0; c < clusters; ++c) {
    const double m = residual[c].norm();
    if (m > tol) out.push_back({*where[c], -residual[c] / m, m});
  }
  return out;
}

struct StationarityReport {
  bool stationary;
  double max_residual;
};

inline StationarityReport is_stationary(const DiscreteVarifold& V, double tol) {
  if (!(tol > 0.0)) throw InvalidInput("is_stationary: tol must be positive");
  double worst = 0.0;
  for (const auto& a : vertex_residuals(V, 0.0)) worst = std::max(worst, a.mass);
  return {worst <= tol, worst};
}

/// Boundary part of delta(V restricted to B(y,r)): one atom per transversal
/// crossing of a piece with the sphere, oriented along the piece outwards.
/// Throws DegenerateGeometry on tangency or an endpoint on the sphere.
inline std::vector<VariationAtom> boundary_variation(const DiscreteVarifold& V, const Vec& y, double r) {
  if (!(r > 0.0)) throw InvalidInput("boundary_variation: radius must be positive");
  require_dim(y, V.ambient_dim, "boundary_variation center");
  std::vector<VariationAtom> out;
  auto on_sphere = [&](const Vec& p) { return std::abs((p - y).norm() - r) <= kTangencyTol * std::max(1.0, r); };
  V.for_each_piece([&](const PieceView& p) {
    if (on_sphere(*p.origin) || (p.end && on_sphere(*p.end))) {
      throw DegenerateGeometry("boundary_variation: a piece endpoint lies on the sphere");
    }
    const double disc = chord_discriminant(*p.origin, p.dir, y, r);
    const Vec rel = *p.origin - y;
    const double closest = -p.dir.dot(rel);
    const bool closest_on_piece = closest > 0.0 && closest < p.length;
    if (std::abs(disc) <= kTangencyTol && closest_on_piece) {
      throw DegenerateGeometry("boundary_variation: a piece is tangent to the sphere");
    }
    const auto chord = ball_chord(*p.origin, p.dir, y, r);
    if (!chord) return;
    auto crossing = [&](double tau, const Vec& outward) {
      if (tau > 0.0 && tau < p.length) out.push_back({*p.origin + tau * p.dir, outward, p.weight});
    };
    crossing(chord->enter, -p.dir);
    crossing(chord->exit, p.dir);
  });
  return out;
}

}  // namespace varifold

#pragma once

// Shared generators and independent oracles for the test suite.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "varifold/varifold_lab.hpp"

namespace vt {

using namespace varifold;

inline Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}
inline Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

inline Vec random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec u(n);
  do {
    for (int i = 0; i < n; ++i) u[i] = g(rng);
  } while (u.norm() < 1e-3);
  return u.normalized();
}

inline Vec random_point(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = u(rng);
  return x;
}

inline Subspace random_subspace(int n, int k, std::mt19937_64& rng) {
  std::vector<Vec> vs;
  for (int i = 0; i < k; ++i) vs.push_back(random_unit(n, rng));
  return Subspace::span(n, vs);
}

/// Three unit rays at 120 degrees from `c` in the (e1, e2) plane.
inline DiscreteVarifold y_junction(int n = 2, const Vec* c = nullptr) {
  DiscreteVarifold V(n);
  const Vec o = c ? *c : Vec::Zero(n);
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 3.0;
    Vec d = Vec::Zero(n);
    d[0] = std::cos(a);
    d[1] = std::sin(a);
    V.add(RayPiece(o, d, 1.0));
  }
  return V;
}

/// Random tree of segments whose vertices are balanced by one exit ray each:
/// the ray at vertex p has direction -r/|r| and weight |r| where r is the
/// weighted sum of away-pointing unit directions at p.
inline DiscreteVarifold balanced_network(int n, std::mt19937_64& rng, int vertices = 6) {
  std::uniform_real_distribution<double> w(0.5, 2.0);
  std::uniform_int_distribution<int> pick(0, 1 << 20);
  std::vector<Vec> pts{random_point(n, rng, 2.0)};
  DiscreteVarifold V(n);
  std::vector<Vec> residual{Vec::Zero(n)};
  for (int i = 1; i < vertices; ++i) {
    const int parent = pick(rng) % i;
    pts.push_back(pts[parent] + (0.5 + std::uniform_real_distribution<double>(0.0, 1.5)(rng)) * random_unit(n, rng));
    residual.push_back(Vec::Zero(n));
    const double weight = w(rng);
    SegmentPiece s(pts[parent], pts[i], weight);
    residual[parent] += weight * s.direction();
    residual[i] -= weight * s.direction();
    V.add(std::move(s));
  }
  for (int i = 0; i < vertices; ++i) {
    const double m = residual[i].norm();
    if (m > 1e-12) V.add(RayPiece(pts[i], -residual[i] / m, m));
  }
  return V;
}

/// Random segments and rays, no balancing.
inline DiscreteVarifold random_varifold(int n, std::mt19937_64& rng, int segments = 5, int rays = 3) {
  std::uniform_real_distribution<double> w(0.1, 3.0);
  DiscreteVarifold V(n);
  for (int i = 0; i < segments; ++i) {
    const Vec a = random_point(n, rng, 2.0);
    V.add(SegmentPiece(a, a + (0.2 + w(rng)) * random_unit(n, rng), w(rng)));
  }
  for (int i = 0; i < rays; ++i) V.add(RayPiece(random_point(n, rng, 2.0), random_unit(n, rng), w(rng)));
  return V;
}

/// Atomic cone with pairwise separation >= min_sep radians.
inline ConicVarifold random_cone(int n, std::mt19937_64& rng, int atoms, double min_sep = 1e-3, double mlo = 0.1,
                                 double mhi = 2.0) {
  std::uniform_real_distribution<double> m(mlo, mhi);
  std::vector<ConicAtom> out;
  while (static_cast<int>(out.size()) < atoms) {
    const Vec z = random_unit(n, rng);
    bool ok = true;
    for (const auto& a : out) ok = ok && angular_distance(a.direction, z) >= min_sep;
    if (ok) out.push_back({z, m(rng)});
  }
  return ConicVarifold(n, std::move(out));
}

/// Composite Simpson rule with `intervals` (even) subintervals.
template <class F>
double simpson(F&& f, double a, double b, int intervals = 10000) {
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Quadrature of div_S g along every piece, rays cut where they leave the
/// support ball. Divergence from central differences of <g, s> along s,
/// independent of the analytic Jacobian.
inline double first_variation_quadrature(const DiscreteVarifold& V, const TestField& g, int nodes = 10000) {
  double total = 0.0;
  V.for_each_piece([&](const PieceView& p) {
    double len = p.length;
    if (!std::isfinite(len)) {
      const auto c = ball_chord(*p.origin, p.dir, g.support_center(), g.support_radius());
      if (!c || c->exit <= 0.0) return;
      len = c->exit;
    }
    // fourth-order central difference; h balances truncation against roundoff
    const double h = 1e-3 * g.support_radius();
    auto f = [&](const Vec& x, double dt) { return g.evaluate(x + dt * p.dir).dot(p.dir); };
    auto div = [&](double t) {
      const Vec x = *p.origin + t * p.dir;
      return (8.0 * (f(x, h) - f(x, -h)) - (f(x, 2 * h) - f(x, -2 * h))) / (12.0 * h);
    };
    total += p.weight * simpson(div, 0.0, len, nodes);
  });
  return total;
}

/// Segment/ray multisets equal up to ordering, coordinates within tol.
inline bool same_pieces(const DiscreteVarifold& A, const DiscreteVarifold& B, double tol = 1e-12) {
  if (A.ambient_dim != B.ambient_dim || A.segments.size() != B.segments.size() || A.rays.size() != B.rays.size()) {
    return false;
  }
  std::vector<bool> used(B.segments.size(), false);
  for (const auto& s : A.segments) {
    bool found = false;
    for (std::size_t j = 0; j < B.segments.size() && !found; ++j) {
      if (used[j]) continue;
      const auto& t = B.segments[j];
      const bool direct = (s.a - t.a).norm() <= tol && (s.b - t.b).norm() <= tol;
      const bool flipped = (s.a - t.b).norm() <= tol && (s.b - t.a).norm() <= tol;
      if ((direct || flipped) && std::abs(s.weight - t.weight) <= tol * std::max(1.0, s.weight)) {
        used[j] = found = true;
      }
    }
    if (!found) return false;
  }
  std::vector<bool> used_r(B.rays.size(), false);
  for (const auto& r : A.rays) {
    bool found = false;
    for (std::size_t j = 0; j < B.rays.size() && !found; ++j) {
      if (used_r[j]) continue;
      const auto& q = B.rays[j];
      if ((r.origin - q.origin).norm() <= tol && (r.direction - q.direction).norm() <= tol &&
          std::abs(r.weight - q.weight) <= tol * std::max(1.0, r.weight)) {
        used_r[j] = found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

/// Atom sets equal within angular and mass tolerances.
inline bool same_atoms(const std::vector<ConicAtom>& a, const std::vector<ConicAtom>& b, double ang, double mass) {
  if (a.size() != b.size()) return false;
  for (const auto& x : a) {
    bool found = false;
    for (const auto& y : b) {
      if (angular_distance(x.direction, y.direction) <= ang && std::abs(x.mass - y.mass) <= mass) found = true;
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace vt

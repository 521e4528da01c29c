#pragma once

// Discrete 1-varifolds: finite families of weighted segments and rays in R^n,
// with exact mass, density, restriction and dilation.

#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "varifold/geometry.hpp"

namespace varifold {

struct SegmentPiece {
  Vec a;
  Vec b;
  double weight;

  SegmentPiece(Vec a_, Vec b_, double w) : a(std::move(a_)), b(std::move(b_)), weight(w) {
    if (a.size() != b.size()) throw InvalidInput("SegmentPiece: endpoint dimensions differ");
    require_finite(a, "SegmentPiece");
    require_finite(b, "SegmentPiece");
    if (!((b - a).norm() > 0.0)) throw InvalidInput("SegmentPiece: degenerate segment a == b");
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidInput("SegmentPiece: weight must be positive");
  }

  Vec direction() const { return (b - a).normalized(); }
  double length() const { return (b - a).norm(); }
};

struct RayPiece {
  Vec origin;
  Vec direction;
  double weight;

  RayPiece(Vec o, Vec d, double w) : origin(std::move(o)), direction(std::move(d)), weight(w) {
    if (origin.size() != direction.size()) throw InvalidInput("RayPiece: dimensions differ");
    require_finite(origin, "RayPiece");
    require_finite(direction, "RayPiece");
    if (!is_unit(direction)) throw InvalidInput("RayPiece: direction must be a unit vector");
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidInput("RayPiece: weight must be positive");
  }
};

/// Uniform view of a piece as {origin + tau*dir : 0 <= tau <= length}.
struct PieceView {
  const Vec* origin;
  Vec dir;
  double length;  // +inf for rays
  double weight;
  const Vec* end;  // null for rays
};

inline PieceView view(const SegmentPiece& s) {
  return {&s.a, s.direction(), s.length(), s.weight, &s.b};
}
inline PieceView view(const RayPiece& r) {
  return {&r.origin, r.direction, std::numeric_limits<double>::infinity(), r.weight, nullptr};
}

/// A finite superposition of weighted segments and rays. Coincident pieces
/// stay separate entries; every measurement sums over entries.
struct DiscreteVarifold {
  int ambient_dim = 0;
  std::vector<SegmentPiece> segments;
  std::vector<RayPiece> rays;

  DiscreteVarifold() = default;
  explicit DiscreteVarifold(int n) : ambient_dim(n) {
    if (n < 1) throw InvalidInput("DiscreteVarifold: ambient dimension must be positive");
  }
  DiscreteVarifold(int n, std::vector<SegmentPiece> segs, std::vector<RayPiece> rs)
      : ambient_dim(n), segments(std::move(segs)), rays(std::move(rs)) {
    if (n < 1) throw InvalidInput("DiscreteVarifold: ambient dimension must be positive");
    for (const auto& s : segments) require_dim(s.a, n, "DiscreteVarifold segment");
    for (const auto& r : rays) require_dim(r.origin, n, "DiscreteVarifold ray");
  }

  bool empty() const { return segments.empty() && rays.empty(); }
  std::size_t size() const { return segments.size() + rays.size(); }

  void add(SegmentPiece s) {
    require_dim(s.a, ambient_dim, "DiscreteVarifold::add");
    segments.push_back(std::move(s));
  }
  void add(RayPiece r) {
    require_dim(r.origin, ambient_dim, "DiscreteVarifold::add");
    rays.push_back(std::move(r));
  }

  template <class F>
  void for_each_piece(F&& f) const {
    for (const auto& s : segments) f(view(s));
    for (const auto& r : rays) f(view(r));
  }

  friend DiscreteVarifold operator+(DiscreteVarifold lhs, const DiscreteVarifold& rhs) {
    if (lhs.ambient_dim != rhs.ambient_dim) throw InvalidInput("varifold sum: dimension mismatch");
    lhs.segments.insert(lhs.segments.end(), rhs.segments.begin(), rhs.segments.end());
    lhs.rays.insert(lhs.rays.end(), rhs.rays.begin(), rhs.rays.end());
    return lhs;
  }
};

/// |V|(B(center, radius)) by exact line/sphere clipping.
inline double mass(const DiscreteVarifold& V, const Vec& center, double radius) {
  if (!(radius > 0.0)) throw InvalidInput("mass: radius must be positive");
  require_dim(center, V.ambient_dim, "mass center");
  double total = 0.0;
  V.for_each_piece([&](const PieceView& p) {
    const auto chord = ball_chord(*p.origin, p.dir, center, radius);
    if (!chord) return;
    const double lo = std::max(0.0, chord->enter);
    const double hi = std::min(p.length, chord->exit);
    if (hi > lo) total += p.weight * (hi - lo);
  });
  return total;
}

struct DensityValue {
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> value;
};

namespace detail {

enum class Incidence { None, Endpoint, Interior };

inline Incidence incidence(const PieceView& p, const Vec& x) {
  if ((*p.origin - x).norm() <= kVertexMerge) return Incidence::Endpoint;
  if (p.end && (*p.end - x).norm() <= kVertexMerge) return Incidence::Endpoint;
  const Vec rel = x - *p.origin;
  const double tau = rel.dot(p.dir);
  if (tau <= 0.0 || tau >= p.length) return Incidence::None;
  if ((rel - tau * p.dir).norm() <= kVertexMerge) return Incidence::Interior;
  return Incidence::None;
}

}  // namespace detail

/// Exact 1-density: interior incidences count the full weight, endpoints half.
inline DensityValue density(const DiscreteVarifold& V, const Vec& x) {
  require_dim(x, V.ambient_dim, "density point");
  double sum = 0.0;
  V.for_each_piece([&](const PieceView& p) {
    switch (detail::incidence(p, x)) {
      case detail::Incidence::Interior: sum += p.weight; break;
      case detail::Incidence::Endpoint: sum += 0.5 * p.weight; break;
      case detail::Incidence::None: break;
    }
  });
  return {sum, sum, sum};
}

/// Image under eta_{x,lambda}(y) = (y - x) / lambda. Weights are unchanged.
inline DiscreteVarifold dilate(const DiscreteVarifold& V, const Vec& x, double lambda) {
  if (!(lambda > 0.0)) throw InvalidInput("dilate: lambda must be positive");
  require_dim(x, V.ambient_dim, "dilate center");
  DiscreteVarifold out(V.ambient_dim);
  for (const auto& s : V.segments) out.add(SegmentPiece((s.a - x) / lambda, (s.b - x) / lambda, s.weight));
  for (const auto& r : V.rays) out.add(RayPiece((r.origin - x) / lambda, r.direction, r.weight));
  return out;
}

enum class Keep { Inside, Outside };

/// Restriction of V to the open ball B(center, radius) or to its complement.
inline DiscreteVarifold restrict(const DiscreteVarifold& V, const Vec& center, double radius,
                                 Keep keep) {
  if (!(radius > 0.0)) throw InvalidInput("restrict: radius must be positive");
  require_dim(center, V.ambient_dim, "restrict center");
  DiscreteVarifold out(V.ambient_dim);

  auto point_at = [](const PieceView& p, double tau) -> Vec {
    if (tau == 0.0) return *p.origin;
    if (p.end && tau == p.length) return *p.end;
    return *p.origin + tau * p.dir;
  };
  auto emit_segment = [&](const PieceView& p, double lo, double hi) {
    if (!(hi > lo)) return;
    Vec a = point_at(p, lo);
    Vec b = point_at(p, hi);
    if ((b - a).norm() > 0.0) out.add(SegmentPiece(std::move(a), std::move(b), p.weight));
  };

  V.for_each_piece([&](const PieceView& p) {
    const auto chord = ball_chord(*p.origin, p.dir, center, radius);
    const bool is_ray = p.end == nullptr;
    if (keep == Keep::Inside) {
      if (!chord) return;
      const double lo = std::max(0.0, chord->enter);
      const double hi = std::min(p.length, chord->exit);
      emit_segment(p, lo, hi);
      return;
    }
    if (!chord || chord->exit <= 0.0 || chord->enter >= p.length) {
      if (is_ray) {
        out.add(RayPiece(*p.origin, p.dir, p.weight));
      } else {
        out.add(SegmentPiece(*p.origin, *p.end, p.weight));
      }
      return;
    }
    emit_segment(p, 0.0, std::max(0.0, chord->enter));
    if (is_ray) {
      const double from = std::max(0.0, chord->exit);
      out.add(RayPiece(point_at(p, from), p.dir, p.weight));
    } else {
      emit_segment(p, std::min(p.length, chord->exit), p.length);
    }
  });
  return out;
}

/// Splits every piece passing through x in its relative interior into pieces
/// issuing from x. The measure is unchanged.
inline DiscreteVarifold split_at(const DiscreteVarifold& V, const Vec& x) {
  require_dim(x, V.ambient_dim, "split_at point");
  DiscreteVarifold out(V.ambient_dim);
  for (const auto& s : V.segments) {
    if (detail::incidence(view(s), x) == detail::Incidence::Interior) {
      out.add(SegmentPiece(x, s.a, s.weight));
      out.add(SegmentPiece(x, s.b, s.weight));
    } else {
      out.add(s);
    }
  }
  for (const auto& r : V.rays) {
    if (detail::incidence(view(r), x) == detail::Incidence::Interior) {
      out.add(SegmentPiece(x, r.origin, r.weight));
      out.add(RayPiece(x, r.direction, r.weight));
    } else {
      out.add(r);
    }
  }
  return out;
}

/// Two rays from `point` in directions +-direction.
inline void add_line(DiscreteVarifold& V, const Vec& point, const Vec& direction, double weight = 1.0) {
  const Vec d = normalized(direction);
  V.add(RayPiece(point, d, weight));
  V.add(RayPiece(point, -d, weight));
}

}  // namespace varifold

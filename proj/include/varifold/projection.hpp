#pragma once

// Mapping projections pi_P# and weighted projections pi_P** of 1-varifolds.
// Results live in the intrinsic coordinates of P.
//
// A piece with unit direction s and weight theta maps to the projected piece
// with weight theta (mapping) or theta*|pi_P s| (weighted): the weighted
// integrand |pi_P o pi_S|^2 = |pi_P s|^2 divided by the length contraction
// |pi_P s| of the image.

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "varifold/conic.hpp"
#include "varifold/geometry.hpp"
#include "varifold/varifold.hpp"

namespace varifold {

namespace detail {

template <bool Weighted>
DiscreteVarifold project_pieces(const DiscreteVarifold& V, const Subspace& P) {
  if (P.ambient_dim() != V.ambient_dim) throw InvalidInput("projection: subspace dimension mismatch");
  DiscreteVarifold out(P.dim());
  for (const auto& s : V.segments) {
    const double contraction = P.projected_norm(s.direction());
    if (contraction <= kDropTol) continue;
    Vec a = P.coordinates(s.a);
    Vec b = P.coordinates(s.b);
    if (!((b - a).norm() > 0.0)) continue;
    out.add(SegmentPiece(std::move(a), std::move(b), Weighted ? s.weight * contraction : s.weight));
  }
  for (const auto& r : V.rays) {
    const Vec d = P.coordinates(r.direction);
    const double contraction = d.norm();
    if (contraction <= kDropTol) continue;
    out.add(RayPiece(P.coordinates(r.origin), d / contraction, Weighted ? r.weight * contraction : r.weight));
  }
  return out;
}

}  // namespace detail

inline DiscreteVarifold mapping_projection(const DiscreteVarifold& V, const Subspace& P) {
  return detail::project_pieces<false>(V, P);
}

inline DiscreteVarifold weighted_projection(const DiscreteVarifold& V, const Subspace& P) {
  return detail::project_pieces<true>(V, P);
}

/// Atom (z, phi) maps to (pi_P z / |pi_P z|, phi |pi_P z|) in P; density
/// nodes are treated as atoms. Colliding image directions are merged.
inline ConicVarifold weighted_projection_conic(const ConicVarifold& C, const Subspace& P) {
  if (P.ambient_dim() != C.ambient_dim()) throw InvalidInput("weighted_projection_conic: dimension mismatch");
  std::vector<ConicAtom> image;
  for (const auto& a : C.discretized()) {
    const Vec c = P.coordinates(a.direction);
    const double len = c.norm();
    if (len <= kDropTol) continue;
    image.push_back({c / len, a.mass * len});
  }
  return ConicVarifold(P.dim(), merge_atoms(image));
}

/// Trapezoid resolution of the counterexample densities.
inline constexpr int kHalflineNodes = 2048;

/// Multiplicity of the +u half-line of the weighted projection of a conic
/// varifold in R^2 onto span(u):
///   m(u) = sum_{<z,u> > 0} phi(z) <z,u> + int h(theta) max(0, cos(theta - alpha_u)) dtheta,
/// the density term integrated exactly through the trigonometric interpolant.
inline double halfline_multiplicity(const ConicVarifold& C, const Vec& u) {
  if (C.ambient_dim() != 2) throw InvalidInput("halfline_multiplicity: needs a conic varifold in R^2");
  require_dim(u, 2, "halfline_multiplicity direction");
  if (!is_unit(u)) throw InvalidInput("halfline_multiplicity: u must be a unit vector");
  double m = 0.0;
  for (const auto& a : C.atoms()) {
    const double c = a.direction.dot(u);
    if (c > 0.0) m += a.mass * c;
  }
  if (const auto& h = C.density()) m += h->cosine_lobe(std::atan2(u[1], u[0]));
  return m;
}

/// Two conic varifolds in R^2 with different arc masses but identical weighted
/// projections on every line: h1 = 1 and h2 = 1 - sin(3 theta).
inline std::pair<ConicVarifold, ConicVarifold> counterexample_pair() {
  const std::string grid = SphereDensity::circle_grid(kHalflineNodes);
  auto v1 = SphereDensity::sample(grid, [](const Vec&) { return 1.0; });
  auto v2 = SphereDensity::sample(grid, [](const Vec& z) {
    const double t = std::atan2(z[1], z[0]);
    return 1.0 - std::sin(3.0 * t);
  });
  return {ConicVarifold(2, {}, std::move(v1)), ConicVarifold(2, {}, std::move(v2))};
}

}  // namespace varifold

#pragma once

// Cut-and-paste stationarization: keep V inside B(y, r) and continue every
// boundary crossing by a ray along the outward boundary-variation direction.

#include <cmath>
#include <optional>
#include <vector>

#include "varifold/variation.hpp"
#include "varifold/varifold.hpp"

namespace varifold {

struct SurgeryResult {
  DiscreteVarifold inner;
  std::vector<RayPiece> pasted_rays;
  DiscreteVarifold combined;
  std::vector<VariationAtom> boundary_atoms;
};

inline SurgeryResult cut_and_paste(const DiscreteVarifold& V, const Vec& y, double r) {
  SurgeryResult out;
  out.boundary_atoms = boundary_variation(V, y, r);
  out.inner = restrict(V, y, r, Keep::Inside);
  out.combined = out.inner;
  for (const auto& atom : out.boundary_atoms) {
    out.pasted_rays.emplace_back(atom.location, atom.omega, atom.mass);
    out.combined.add(out.pasted_rays.back());
  }
  return out;
}

/// First radius of `count` geometrically spaced candidates in [r_lo, r_hi]
/// for which boundary_variation succeeds, or nullopt.
inline std::optional<double> find_regular_radius(const DiscreteVarifold& V, const Vec& y, double r_lo,
                                                 double r_hi, int count = 16) {
  if (!(r_lo > 0.0) || !(r_hi >= r_lo) || count < 1) {
    throw InvalidInput("find_regular_radius: need 0 < r_lo <= r_hi and count >= 1");
  }
  const double ratio = count > 1 ? std::pow(r_hi / r_lo, 1.0 / (count - 1)) : 1.0;
  double r = r_lo;
  for (int i = 0; i < count; ++i, r *= ratio) {
    try {
      boundary_variation(V, y, r);
      return r;
    } catch (const DegenerateGeometry&) {
    }
  }
  return std::nullopt;
}

}  // namespace varifold

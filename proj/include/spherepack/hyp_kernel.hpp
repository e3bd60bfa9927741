#pragma once

#include "spherepack/euclid_kernel.hpp"

namespace spherepack {

struct HypAdmissibility {
  bool admissible;
  /// Smallest distance of any face-angle or dihedral-angle arccos argument
  /// from +-1. Negative when some argument falls outside [-1, 1].
  double margin;
};

/// Margin at or below which a hyperbolic conformal tet counts as degenerate.
inline constexpr double kDegenerateMargin = 1e-12;

/// Realizability of the conformal tet with lengths r_a + r_b in H^3, decided on
/// the four spherical vertex links.
HypAdmissibility hyp_admissible(const TetRadii& rad);

/// Solid angles of the hyperbolic conformal tet. Throws DegenerateTet when
/// hyp_admissible() fails.
SolidAngles hyp_solid_angles(const TetRadii& rad);

}  // namespace spherepack

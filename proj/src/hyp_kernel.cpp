#include "spherepack/hyp_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spherepack/errors.hpp"

namespace spherepack {

namespace {

// Hyperbolic law of cosines for every face angle; cos_face[a][d] as in
// detail::link_solid_angles.
Mat4 hyperbolic_face_cosines(const TetRadii& rad) {
  const EdgeLengths l = conformal_lengths(rad);
  Mat4 cos_face{};
  for (int a = 0; a < 4; ++a)
    for (int d = 0; d < 4; ++d) {
      if (d == a) continue;
      int b = -1, c = -1;
      for (int x = 0; x < 4; ++x) {
        if (x == a || x == d) continue;
        (b < 0 ? b : c) = x;
      }
      const double lab = l(a, b), lac = l(a, c), lbc = l(b, c);
      cos_face[a][d] = (std::cosh(lab) * std::cosh(lac) - std::cosh(lbc)) /
                       (std::sinh(lab) * std::sinh(lac));
    }
  return cos_face;
}

}  // namespace

HypAdmissibility hyp_admissible(const TetRadii& rad) {
  for (double x : rad.r)
    if (!(x > 0.0) || !std::isfinite(x)) return {false, -std::numeric_limits<double>::infinity()};

  const Mat4 cos_face = hyperbolic_face_cosines(rad);
  double margin = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 4; ++a)
    for (int d = 0; d < 4; ++d)
      if (d != a) margin = std::min(margin, 1.0 - std::abs(cos_face[a][d]));

  if (margin > 0.0) {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        if (b == a) continue;
        int c = -1, d = -1;
        for (int x = 0; x < 4; ++x) {
          if (x == a || x == b) continue;
          (c < 0 ? c : d) = x;
        }
        const double cbc = cos_face[a][d], cbd = cos_face[a][c];
        const double arg = (cos_face[a][b] - cbc * cbd) /
                           (std::sqrt(1.0 - cbc * cbc) * std::sqrt(1.0 - cbd * cbd));
        margin = std::min(margin, 1.0 - std::abs(arg));
      }
  }
  if (std::isnan(margin)) margin = -std::numeric_limits<double>::infinity();
  return {margin > kDegenerateMargin, margin};
}

SolidAngles hyp_solid_angles(const TetRadii& rad) {
  const HypAdmissibility check = hyp_admissible(rad);
  if (!check.admissible)
    throw DegenerateTet("hyperbolic conformal tet not realizable", check.margin);
  return detail::link_solid_angles(hyperbolic_face_cosines(rad));
}

}  // namespace spherepack

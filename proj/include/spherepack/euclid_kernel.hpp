#pragma once

#include <array>
#include <optional>

#include <Eigen/Core>

namespace spherepack {

/// Radii attached to the four vertices of one tetrahedron, in the tet's local
/// vertex order. All entries must be strictly positive.
struct TetRadii {
  std::array<double, 4> r;

  double operator[](int i) const { return r[i]; }
};

/// Solid angle (steradians) at each of the four vertices.
using SolidAngles = std::array<double, 4>;

/// Six edge lengths in pair order 01, 02, 03, 12, 13, 23.
struct EdgeLengths {
  std::array<double, 6> l;

  double operator()(int a, int b) const { return l[pair_index(a, b)]; }
  static int pair_index(int a, int b);
};

using Mat4 = std::array<std::array<double, 4>, 4>;

/// Sphere-packing edge lengths l_ab = r_a + r_b.
EdgeLengths conformal_lengths(const TetRadii& rad);

/// Q = (sum 1/r)^2 - 2 sum 1/r^2. The conformal tet embeds in E^3 iff Q > 0.
double realizability(const TetRadii& rad);

/// Q / (sum 1/r)^2: scale-invariant realizability margin in (-1, 1].
double realizability_ratio(const TetRadii& rad);

/// Threshold on realizability_ratio() below which Euclidean kernels throw.
inline constexpr double kDegenerateRatio = 1e-12;

/// Solid angles via spherical vertex links. Throws DegenerateTet when the
/// realizability ratio is at or below kDegenerateRatio.
SolidAngles solid_angles(const TetRadii& rad);

struct CayleyMenger {
  double determinant;            // = 288 V^2
  std::optional<double> volume;  // present iff determinant > 0
};

CayleyMenger cm_volume(const EdgeLengths& lengths);

/// Vertex 0 at the origin, 1 on +x, 2 in the upper xy half-plane, 3 with z > 0.
std::array<Eigen::Vector3d, 4> embed(const EdgeLengths& lengths);

/// Dual structure of a conformal tet in the embed() frame.
///
/// Faces are indexed by the opposite vertex: face f is the triangle not
/// containing local vertex f. Edge quantities use EdgeLengths::pair_index.
struct DualCell {
  std::array<Eigen::Vector3d, 4> vertices;
  Eigen::Vector3d center;  // edge-tangent sphere center
  double tangent_radius;
  double center_residual;  // max |(center - T_ab) . e_ab| over the six edges

  std::array<Eigen::Vector3d, 6> tangency;  // on edge ab at distance r_a from a
  std::array<Eigen::Vector3d, 4> incenter;
  std::array<double, 4> inradius;
  std::array<double, 4> height;  // signed, positive toward the opposite vertex
  std::array<double, 6> area;    // signed area of the dual quad of each edge
};

DualCell dual_cell(const TetRadii& rad);

/// -d(alpha)/d(r) for one tet assembled from dual areas:
/// off-diagonal -2 A_ab / (l_ab r_a r_b), diagonal fixed by degree-zero
/// homogeneity of the solid angles.
Mat4 tet_jacobian_block(const TetRadii& rad);

namespace detail {

/// arccos with arguments clamped when within 1e-12 of [-1, 1]; larger
/// violations throw DegenerateTet.
double checked_acos(double x);

/// Solid angles from the cosines of the twelve face angles. `cos_face[a][d]`
/// is the cosine of the angle at vertex a in the face that omits vertex d.
/// Vertex links are spherical triangles in both E^3 and H^3.
SolidAngles link_solid_angles(const Mat4& cos_face);

}  // namespace detail
}  // namespace spherepack

#include "spherepack/euclid_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "spherepack/errors.hpp"

namespace spherepack {

namespace {

constexpr double kAcosSlack = 1e-12;

void require_positive(const TetRadii& rad) {
  for (double x : rad.r)
    if (!(x > 0.0) || !std::isfinite(x)) throw DegenerateTet("non-positive radius", x);
}

void require_realizable(const TetRadii& rad) {
  require_positive(rad);
  const double ratio = realizability_ratio(rad);
  if (!(ratio > kDegenerateRatio))
    throw DegenerateTet("Euclidean conformal tet not realizable (Q ratio " +
                            std::to_string(ratio) + ")",
                        realizability(rad));
}

}  // namespace

int EdgeLengths::pair_index(int a, int b) {
  if (a > b) std::swap(a, b);
  static constexpr int table[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
  return table[a][b];
}

EdgeLengths conformal_lengths(const TetRadii& rad) {
  EdgeLengths e{};
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) e.l[EdgeLengths::pair_index(a, b)] = rad[a] + rad[b];
  return e;
}

double realizability(const TetRadii& rad) {
  double s = 0.0, s2 = 0.0;
  for (double x : rad.r) {
    s += 1.0 / x;
    s2 += 1.0 / (x * x);
  }
  return s * s - 2.0 * s2;
}

double realizability_ratio(const TetRadii& rad) {
  double s = 0.0;
  for (double x : rad.r) s += 1.0 / x;
  return realizability(rad) / (s * s);
}

namespace detail {

double checked_acos(double x) {
  if (std::isnan(x) || x > 1.0 + kAcosSlack || x < -1.0 - kAcosSlack)
    throw DegenerateTet("arccos argument out of range", x);
  return std::acos(std::clamp(x, -1.0, 1.0));
}

SolidAngles link_solid_angles(const Mat4& cos_face) {
  SolidAngles alpha{};
  for (int a = 0; a < 4; ++a) {
    double sum = 0.0;
    for (int b = 0; b < 4; ++b) {
      if (b == a) continue;
      int c = -1, d = -1;
      for (int x = 0; x < 4; ++x) {
        if (x == a || x == b) continue;
        (c < 0 ? c : d) = x;
      }
      const double cos_cd = cos_face[a][b];  // angle between edges ac, ad
      const double cos_bc = cos_face[a][d];
      const double cos_bd = cos_face[a][c];
      const double sin_bc = std::sqrt(std::max(0.0, 1.0 - cos_bc * cos_bc));
      const double sin_bd = std::sqrt(std::max(0.0, 1.0 - cos_bd * cos_bd));
      if (sin_bc == 0.0 || sin_bd == 0.0) throw DegenerateTet("flat face angle", 0.0);
      sum += checked_acos((cos_cd - cos_bc * cos_bd) / (sin_bc * sin_bd));
    }
    alpha[a] = sum - std::numbers::pi;
  }
  return alpha;
}

}  // namespace detail

SolidAngles solid_angles(const TetRadii& rad) {
  require_realizable(rad);
  const EdgeLengths l = conformal_lengths(rad);
  Mat4 cos_face{};
  for (int a = 0; a < 4; ++a) {
    for (int d = 0; d < 4; ++d) {
      if (d == a) continue;
      int b = -1, c = -1;
      for (int x = 0; x < 4; ++x) {
        if (x == a || x == d) continue;
        (b < 0 ? b : c) = x;
      }
      const double lab = l(a, b), lac = l(a, c), lbc = l(b, c);
      cos_face[a][d] = (lab * lab + lac * lac - lbc * lbc) / (2.0 * lab * lac);
    }
  }
  return detail::link_solid_angles(cos_face);
}

CayleyMenger cm_volume(const EdgeLengths& lengths) {
  Eigen::Matrix<double, 5, 5> m;
  m.setZero();
  for (int i = 1; i < 5; ++i) m(0, i) = m(i, 0) = 1.0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      const double l = lengths(a, b);
      m(a + 1, b + 1) = m(b + 1, a + 1) = l * l;
    }
  CayleyMenger out{m.determinant(), std::nullopt};
  if (out.determinant > 0.0) out.volume = std::sqrt(out.determinant / 288.0);
  return out;
}

std::array<Eigen::Vector3d, 4> embed(const EdgeLengths& lengths) {
  const double l01 = lengths(0, 1), l02 = lengths(0, 2), l03 = lengths(0, 3);
  const double l12 = lengths(1, 2), l13 = lengths(1, 3), l23 = lengths(2, 3);

  std::array<Eigen::Vector3d, 4> p;
  p[0].setZero();
  p[1] = {l01, 0.0, 0.0};

  const double cx = (l01 * l01 + l02 * l02 - l12 * l12) / (2.0 * l01);
  const double cy2 = l02 * l02 - cx * cx;
  if (!(cy2 > 0.0)) throw DegenerateTet("face 012 is degenerate", cy2);
  const double cy = std::sqrt(cy2);
  p[2] = {cx, cy, 0.0};

  const double dx = (l01 * l01 + l03 * l03 - l13 * l13) / (2.0 * l01);
  const double dy = (l03 * l03 - l23 * l23 + cx * cx + cy * cy - 2.0 * dx * cx) / (2.0 * cy);
  const double dz2 = l03 * l03 - dx * dx - dy * dy;
  if (!(dz2 > 0.0)) throw DegenerateTet("tet is flat or not realizable", dz2);
  p[3] = {dx, dy, std::sqrt(dz2)};
  return p;
}

DualCell dual_cell(const TetRadii& rad) {
  require_realizable(rad);
  const EdgeLengths l = conformal_lengths(rad);

  DualCell cell{};
  cell.vertices = embed(l);
  const auto& p = cell.vertices;

  // The tangent-sphere center lies in the plane through each tangency point
  // normal to its edge: six equations, three unknowns.
  Eigen::Matrix<double, 6, 3> normals;
  Eigen::Matrix<double, 6, 1> offsets;
  double l_max = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      const int e = EdgeLengths::pair_index(a, b);
      const Eigen::Vector3d dir = (p[b] - p[a]) / l(a, b);
      cell.tangency[e] = p[a] + rad[a] * dir;
      normals.row(e) = dir.transpose();
      offsets(e) = dir.dot(cell.tangency[e]);
      l_max = std::max(l_max, l(a, b));
    }
  cell.center = normals.colPivHouseholderQr().solve(offsets);
  cell.center_residual = (normals * cell.center - offsets).cwiseAbs().maxCoeff();
  if (cell.center_residual > 1e-9 * l_max)
    throw DegenerateTet("edge-tangent sphere center inconsistent", cell.center_residual);
  cell.tangent_radius = (cell.center - cell.tangency[0]).norm();

  for (int f = 0; f < 4; ++f) {
    std::array<int, 3> v{};
    int k = 0;
    for (int x = 0; x < 4; ++x)
      if (x != f) v[k++] = x;
    const double la = l(v[1], v[2]), lb = l(v[0], v[2]), lc = l(v[0], v[1]);
    cell.incenter[f] = (la * p[v[0]] + lb * p[v[1]] + lc * p[v[2]]) / (la + lb + lc);
    cell.inradius[f] = std::sqrt(rad[v[0]] * rad[v[1]] * rad[v[2]] /
                                 (rad[v[0]] + rad[v[1]] + rad[v[2]]));
    Eigen::Vector3d n = (p[v[1]] - p[v[0]]).cross(p[v[2]] - p[v[0]]).normalized();
    if (n.dot(p[f] - p[v[0]]) < 0.0) n = -n;
    cell.height[f] = n.dot(cell.center - p[v[0]]);
  }

  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      double sum = 0.0;
      for (int f = 0; f < 4; ++f)
        if (f != a && f != b) sum += cell.inradius[f] * cell.height[f];
      cell.area[EdgeLengths::pair_index(a, b)] = 0.5 * sum;
    }
  return cell;
}

Mat4 tet_jacobian_block(const TetRadii& rad) {
  const DualCell cell = dual_cell(rad);
  Mat4 block{};
  for (int a = 0; a < 4; ++a) {
    double diag = 0.0;
    for (int b = 0; b < 4; ++b) {
      if (b == a) continue;
      // r_b * d(alpha_a)/d(r_b)
      const double w = 2.0 * cell.area[EdgeLengths::pair_index(a, b)] / ((rad[a] + rad[b]) * rad[a]);
      block[a][b] = -w / rad[b];
      diag += w;
    }
    block[a][a] = diag / rad[a];
  }
  return block;
}

}  // namespace spherepack

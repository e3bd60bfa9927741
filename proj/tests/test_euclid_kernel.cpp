#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "spherepack/errors.hpp"
#include "spherepack/euclid_kernel.hpp"

using namespace spherepack;

namespace {

Eigen::Matrix4d to_matrix(const Mat4& m) {
  Eigen::Matrix4d out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out(i, j) = m[i][j];
  return out;
}

}  // namespace

TEST_CASE("realizability examples") {
  CHECK(realizability({{1, 1, 1, 1}}) == doctest::Approx(8.0).epsilon(1e-15));

  // Q(1,1,1,t) * t^2 = 3 t^2 + 6 t - 1, positive root 2/sqrt(3) - 1; bisect for it.
  double lo = 1e-6, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (realizability({{1, 1, 1, mid}}) < 0 ? lo : hi) = mid;
  }
  CHECK(lo == doctest::Approx(2.0 / std::sqrt(3.0) - 1.0).epsilon(1e-12));
  CHECK(realizability({{1, 1, 1, 0.1}}) < 0);
  CHECK(realizability({{1, 1, 1, 0.2}}) > 0);
  CHECK(realizability({{1, 1, 1, 1e-4}}) < -1e7);
  for (double t : {0.05, 0.15, 0.3, 2.0}) {
    const double q = realizability({{1, 1, 1, t}});
    CHECK(q * t * t == doctest::Approx(3 * t * t + 6 * t - 1).epsilon(1e-12));
  }
}

TEST_CASE("sign of Q matches the Cayley-Menger determinant") {
  std::mt19937_64 gen(11);
  int positive = 0;
  for (int n = 0; n < 1000; ++n) {
    TetRadii rad{};
    for (double& x : rad.r) x = 0.1 + 9.9 * oracle::unit(gen);
    const double q = realizability(rad);
    const CayleyMenger cm = cm_volume(conformal_lengths(rad));
    if (std::abs(realizability_ratio(rad)) < 1e-9) continue;
    CHECK((q > 0) == (cm.determinant > 0));
    CHECK(cm.volume.has_value() == (q > 0));
    positive += q > 0;
  }
  CHECK(positive > 100);
  CHECK(positive < 1000);
}

TEST_CASE("cm_volume") {
  const CayleyMenger reg = cm_volume(conformal_lengths({{1, 1, 1, 1}}));
  REQUIRE(reg.volume);
  CHECK(*reg.volume == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-12));

  // l_12 = l_01 + l_02: face 012 is flat.
  const CayleyMenger flat = cm_volume(EdgeLengths{{1, 1, 1.5, 2, 1.5, 1.5}});
  CHECK(flat.determinant <= 1e-12);
  CHECK_FALSE(flat.volume.has_value());
}

TEST_CASE("embed") {
  const auto p = embed(conformal_lengths({{1, 1, 1, 1}}));
  CHECK(p[0].norm() == doctest::Approx(0.0));
  CHECK((p[1] - Eigen::Vector3d(2, 0, 0)).norm() < 1e-14);
  CHECK((p[2] - Eigen::Vector3d(1, std::sqrt(3.0), 0)).norm() < 1e-14);
  CHECK((p[3] - Eigen::Vector3d(1, 1 / std::sqrt(3.0), 2 * std::sqrt(2.0) / std::sqrt(3.0))).norm() <
        1e-14);

  std::mt19937_64 gen(3);
  for (int n = 0; n < 200; ++n) {
    const TetRadii rad = oracle::random_admissible_tet(gen);
    const EdgeLengths l = conformal_lengths(rad);
    const auto q = embed(l);
    CHECK(q[3].z() > 0);
    CHECK(q[2].y() > 0);
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        CHECK(std::abs((q[a] - q[b]).norm() - l(a, b)) <= 1e-12 * l(a, b) + 1e-12);
  }
  CHECK_THROWS_AS(embed(conformal_lengths({{1, 1, 1, 0.1}})), DegenerateTet);
}

TEST_CASE("solid angles") {
  const SolidAngles reg = solid_angles({{1, 1, 1, 1}});
  for (double a : reg) {
    CHECK(a == doctest::Approx(oracle::regular_solid_angle()).epsilon(1e-13));
    CHECK(a == doctest::Approx(0.5512855984).epsilon(1e-10));
  }

  std::mt19937_64 gen(5);
  for (int n = 0; n < 500; ++n) {
    const TetRadii rad = oracle::random_admissible_tet(gen);
    const SolidAngles got = solid_angles(rad);
    const SolidAngles want = oracle::embedded_solid_angles(rad);
    for (int a = 0; a < 4; ++a) CHECK(std::abs(got[a] - want[a]) <= 1e-10);
  }
}

TEST_CASE("solid angles are permutation equivariant") {
  std::mt19937_64 gen(17);
  for (int n = 0; n < 50; ++n) {
    const TetRadii rad = oracle::random_admissible_tet(gen);
    const SolidAngles base = solid_angles(rad);
    std::array<int, 4> perm{0, 1, 2, 3};
    do {
      TetRadii permuted{};
      for (int i = 0; i < 4; ++i) permuted.r[i] = rad[perm[i]];
      const SolidAngles got = solid_angles(permuted);
      for (int i = 0; i < 4; ++i) CHECK(std::abs(got[i] - base[perm[i]]) <= 1e-12);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST_CASE("solid angles are scale invariant") {
  std::mt19937_64 gen(19);
  for (int n = 0; n < 100; ++n) {
    const TetRadii rad = oracle::random_admissible_tet(gen);
    const SolidAngles base = solid_angles(rad);
    for (double c : {0.5, 2.0, 10.0}) {
      TetRadii scaled = rad;
      for (double& x : scaled.r) x *= c;
      const SolidAngles got = solid_angles(scaled);
      for (int i = 0; i < 4; ++i) CHECK(std::abs(got[i] - base[i]) <= 1e-12);
    }
  }
}

TEST_CASE("degenerate tets throw with a diagnostic") {
  try {
    solid_angles({{1, 1, 1, 0.1}});
    FAIL("expected DegenerateTet");
  } catch (const DegenerateTet& e) {
    CHECK(e.diagnostic() < 0);
  }
  // At the root Q = 0 and just above it.
  const double root = 2.0 / std::sqrt(3.0) - 1.0;
  CHECK_THROWS_AS(solid_angles({{1, 1, 1, root}}), DegenerateTet);
  CHECK_NOTHROW(solid_angles({{1, 1, 1, root + 1e-6}}));
}

TEST_CASE("checked_acos clamps round-off only") {
  CHECK(detail::checked_acos(1.0 + 5e-13) == 0.0);
  CHECK(detail::checked_acos(-1.0 - 5e-13) == doctest::Approx(M_PI));
  CHECK_THROWS_AS(detail::checked_acos(1.0 + 1e-9), DegenerateTet);
}

TEST_CASE("dual cell of the regular tet") {
  const DualCell dc = dual_cell({{1, 1, 1, 1}});
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& v : dc.vertices) centroid += v / 4.0;
  CHECK((dc.center - centroid).norm() < 1e-13);
  // Centroid to edge midpoint.
  const double oracle_radius = (centroid - 0.5 * (dc.vertices[0] + dc.vertices[1])).norm();
  CHECK(dc.tangent_radius == doctest::Approx(oracle_radius).epsilon(1e-13));
  CHECK(dc.tangent_radius == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
  for (double a : dc.area) {
    CHECK(a > 0);
    CHECK(a == doctest::Approx(dc.area[0]).epsilon(1e-12));
  }
}

TEST_CASE("dual cell geometry") {
  std::mt19937_64 gen(23);
  for (int n = 0; n < 100; ++n) {
    const TetRadii rad = oracle::random_admissible_tet(gen);
    const DualCell dc = dual_cell(rad);
    const EdgeLengths lengths = conformal_lengths(rad);
    const double lmax = *std::max_element(lengths.l.begin(), lengths.l.end());
    CHECK(dc.center_residual <= 1e-9 * lmax);
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        const Eigen::Vector3d e = (dc.vertices[b] - dc.vertices[a]).normalized();
        // Tangency point at distance r_a from a.
        const Eigen::Vector3d foot = dc.vertices[a] + rad[a] * e;
        const int p = EdgeLengths::pair_index(a, b);
        CHECK((dc.tangency[p] - foot).norm() <= 1e-10 * lmax);
        // Center is at the tangent radius from every edge line.
        const Eigen::Vector3d w = dc.center - dc.vertices[a];
        const double dist = (w - w.dot(e) * e).norm();
        CHECK(std::abs(dist - dc.tangent_radius) <= 1e-9 * lmax);
      }
    // Incircle of each face touches its edges at the tangency points.
    for (int f = 0; f < 4; ++f)
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
          if (a == f || b == f) continue;
          const double d = (dc.incenter[f] - dc.tangency[EdgeLengths::pair_index(a, b)]).norm();
          CHECK(std::abs(d - dc.inradius[f]) <= 1e-9 * lmax);
        }
  }
}

TEST_CASE("dual areas give the solid-angle derivatives") {
  std::mt19937_64 gen(29);
  for (int n = 0; n < 100; ++n) {
    const TetRadii rad = oracle::random_admissible_tet(gen, 0.1, 10.0, 1e-2);
    const DualCell dc = dual_cell(rad);
    const Mat4 fd = oracle::fd_solid_angle_jacobian(rad, [](const TetRadii& x) { return solid_angles(x); });
    double scale = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) scale = std::max(scale, std::abs(fd[a][b]));
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        if (a == b) continue;
        const double l = rad[a] + rad[b];
        const double from_area = 2.0 * dc.area[EdgeLengths::pair_index(a, b)] / (l * rad[a] * rad[b]);
        CHECK(std::abs(from_area - fd[a][b]) <= 1e-6 * scale);
      }
    const Mat4 block = tet_jacobian_block(rad);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) CHECK(std::abs(block[a][b] + fd[a][b]) <= 1e-6 * scale);
  }
}

TEST_CASE("dual areas are permutation equivariant") {
  std::mt19937_64 gen(31);
  for (int n = 0; n < 30; ++n) {
    const TetRadii rad = oracle::random_admissible_tet(gen);
    const DualCell base = dual_cell(rad);
    std::array<int, 4> perm{0, 1, 2, 3};
    do {
      TetRadii permuted{};
      for (int i = 0; i < 4; ++i) permuted.r[i] = rad[perm[i]];
      const DualCell got = dual_cell(permuted);
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
          const double want = base.area[EdgeLengths::pair_index(perm[a], perm[b])];
          CHECK(std::abs(got.area[EdgeLengths::pair_index(a, b)] - want) <= 1e-10 * (1 + std::abs(want)));
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST_CASE("Euler identity on finite-difference derivatives") {
  std::mt19937_64 gen(37);
  for (int n = 0; n < 200; ++n) {
    const TetRadii rad = oracle::random_admissible_tet(gen);
    const Mat4 J = oracle::fd_solid_angle_jacobian(rad, [](const TetRadii& x) { return solid_angles(x); });
    for (int w = 0; w < 4; ++w) {
      double sum = 0, scale = 0;
      for (int v = 0; v < 4; ++v) {
        sum += rad[v] * J[w][v];
        scale = std::max(scale, std::abs(rad[v] * J[w][v]));
      }
      CHECK(std::abs(sum) <= 1e-7 * scale);
    }
  }
}

TEST_CASE("per-tet Lambda block is symmetric PSD with rank 3 and kernel r") {
  std::mt19937_64 gen(41);
  for (int n = 0; n < 100; ++n) {
    const TetRadii rad = oracle::random_admissible_tet(gen, 0.1, 10.0, 1e-2);
    const Mat4 J = oracle::fd_solid_angle_jacobian(rad, [](const TetRadii& x) { return solid_angles(x); });
    const Eigen::Matrix4d lam = -to_matrix(J);
    const double scale = lam.cwiseAbs().maxCoeff();
    CHECK((lam - lam.transpose()).cwiseAbs().maxCoeff() <= 1e-6 * scale);
    const Eigen::Vector4d r(rad[0], rad[1], rad[2], rad[3]);
    CHECK((lam * r).cwiseAbs().maxCoeff() <= 1e-7 * scale * r.maxCoeff());
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(0.5 * (lam + lam.transpose()));
    CHECK(std::abs(es.eigenvalues()[0]) <= 1e-6 * scale);
    CHECK(es.eigenvalues()[1] > 1e-6 * scale);

    const Eigen::Matrix4d block = to_matrix(tet_jacobian_block(rad));
    CHECK((block - block.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  }
}

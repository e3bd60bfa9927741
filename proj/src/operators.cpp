#include "spherepack/operators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "spherepack/errors.hpp"
#include "spherepack/euclid_kernel.hpp"

namespace spherepack {

std::string_view to_string(AssemblyMethod m) {
  return m == AssemblyMethod::DualGeometry ? "dual_geometry" : "finite_difference";
}

AssemblyMethod parse_method(std::string_view name) {
  if (name == "dual_geometry" || name == "dual") return AssemblyMethod::DualGeometry;
  if (name == "finite_difference" || name == "fd") return AssemblyMethod::FiniteDifference;
  throw std::invalid_argument("unknown assembly method: " + std::string(name));
}

AssemblyMethod default_method(Geometry g) {
  return g == Geometry::Euclidean ? AssemblyMethod::DualGeometry
                                  : AssemblyMethod::FiniteDifference;
}

std::string_view to_string(AttractorClass c) {
  return c == AttractorClass::Attractor ? "attractor" : "inconclusive";
}

namespace {

// Off-diagonal B and l* from dual areas; everything else follows from
// L_ii = sum_k B_ik.
void assemble_dual(const Triangulation& t, const PackingMetric& m, OperatorSet& ops) {
  const Eigen::Index n = m.size();
  const Eigen::VectorXd& r = m.r();
  Eigen::MatrixXd dual = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < t.tets().size(); ++k) {
    DualCell cell;
    try {
      cell = dual_cell(tet_radii(t, r, k));
    } catch (const DegenerateTet& e) {
      throw DegenerateTet("tet " + std::to_string(k) + ": " + e.what(), e.diagnostic(), k);
    }
    const Tet& v = t.tets()[k];
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        const double area = cell.area[EdgeLengths::pair_index(a, b)];
        dual(v[a], v[b]) += area;
        dual(v[b], v[a]) += area;
      }
  }

  ops.B = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : t.edges()) {
    const int i = e[0], j = e[1];
    const double w = 2.0 * dual(i, j) / (r[i] + r[j]);  // r_i B_ij = r_j B_ji
    ops.B(i, j) = w / r[i];
    ops.B(j, i) = w / r[j];
  }
  ops.L = -ops.B;
  for (Eigen::Index i = 0; i < n; ++i) ops.L(i, i) = ops.B.row(i).sum();
  ops.Lambda = ops.L * r.cwiseInverse().asDiagonal();
  ops.dual_length = std::move(dual);
}

void assemble_fd(const Triangulation& t, const PackingMetric& m, OperatorSet& ops) {
  const Eigen::Index n = m.size();
  Eigen::MatrixXd J(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = 1e-5 * m.r()[j];
    Eigen::VectorXd rp = m.r(), rm = m.r();
    rp[j] += h;
    rm[j] -= h;
    J.col(j) = (curvature_vector(t, PackingMetric(m.geometry(), rp)) -
                curvature_vector(t, PackingMetric(m.geometry(), rm))) /
               (2.0 * h);
  }
  ops.asymmetry_residual = (J - J.transpose()).cwiseAbs().maxCoeff();
  ops.Lambda = 0.5 * (J + J.transpose());
  ops.L = ops.Lambda * ops.weight.asDiagonal();
  ops.B = -ops.L;
  ops.B.diagonal().setZero();
}

}  // namespace

OperatorSet assemble(const Triangulation& t, const PackingMetric& m, AssemblyMethod method) {
  if (m.size() != t.vertex_count())
    throw std::invalid_argument("metric length does not match vertex count");
  if (method == AssemblyMethod::DualGeometry && m.geometry() == Geometry::Hyperbolic)
    throw std::invalid_argument("dual-geometry assembly is only defined for Euclidean metrics");

  OperatorSet ops;
  ops.geometry = m.geometry();
  ops.method = method;
  ops.r = m.r();
  ops.weight = m.weight();
  ops.C = curvature_vector(t, m).cwiseProduct(ops.weight);

  if (method == AssemblyMethod::DualGeometry)
    assemble_dual(t, m, ops);
  else
    assemble_fd(t, m, ops);

  ops.L_tilde = ops.weight.asDiagonal() * ops.Lambda * ops.weight.asDiagonal();
  if (m.geometry() == Geometry::Euclidean) {
    Eigen::MatrixXd G = ops.L_tilde;
    G.diagonal() += ops.C;
    ops.G = std::move(G);
  }
  return ops;
}

OperatorSet assemble(const Triangulation& t, const PackingMetric& m) {
  return assemble(t, m, default_method(m.geometry()));
}

Eigen::MatrixXd lambda_from_tet_blocks(const Triangulation& t, const PackingMetric& m) {
  if (m.geometry() != Geometry::Euclidean)
    throw std::invalid_argument("per-tet dual blocks are Euclidean only");
  const Eigen::Index n = m.size();
  Eigen::MatrixXd Lambda = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < t.tets().size(); ++k) {
    const Mat4 block = tet_jacobian_block(tet_radii(t, m.r(), k));
    const Tet& v = t.tets()[k];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) Lambda(v[a], v[b]) += block[a][b];
  }
  return Lambda;
}

Eigen::MatrixXd orthogonal_complement(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  Eigen::MatrixXd basis(n, n);
  basis.col(0) = v.normalized();
  Eigen::Index count = 1;
  for (Eigen::Index axis = 0; axis < n && count < n; ++axis) {
    Eigen::VectorXd q = Eigen::VectorXd::Unit(n, axis);
    // Two passes of modified Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index k = 0; k < count; ++k) q -= basis.col(k).dot(q) * basis.col(k);
    const double norm = q.norm();
    if (norm > 1e-8) basis.col(count++) = q / norm;
  }
  return basis.rightCols(n - 1);
}

Spectrum spectrum(const OperatorSet& ops) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(ops.Lambda);
  const Eigen::MatrixXd P = orthogonal_complement(ops.r);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> restricted(P.transpose() * ops.Lambda * P,
                                                            Eigen::EigenvaluesOnly);
  return Spectrum{full.eigenvalues(), full.eigenvectors(), restricted.eigenvalues()[0]};
}

DqeStabilityReport dqe_stability_report(const Triangulation& t, const PackingMetric& m,
                                        double tolerance) {
  if (m.geometry() != Geometry::Euclidean)
    throw std::invalid_argument("DQE stability report is Euclidean only");
  const Eigen::VectorXd K = curvature_vector(t, m);
  const Eigen::VectorXd& r = m.r();
  const double norm2 = r.squaredNorm();
  DqeStabilityReport rep{};
  rep.lambda_star = K.dot(r) / norm2;
  rep.residual = (K - rep.lambda_star * r).cwiseAbs().maxCoeff();
  if (!(rep.residual <= tolerance))
    throw NotDQE("metric is not a DQE metric: |K - lambda r|_inf = " +
                 std::to_string(rep.residual));

  const OperatorSet ops = assemble(t, m);
  rep.lambda1 = spectrum(ops).lambda1;
  rep.attractor_class = (rep.lambda_star <= 0.0 || rep.lambda1 > rep.lambda_star)
                            ? AttractorClass::Attractor
                            : AttractorClass::Inconclusive;
  const Eigen::Index n = r.size();
  const Eigen::MatrixXd D =
      rep.lambda_star * (Eigen::MatrixXd::Identity(n, n) - r * r.transpose() / norm2) - ops.Lambda;
  rep.jacobian_eigenvalues =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(D, Eigen::EigenvaluesOnly).eigenvalues();
  return rep;
}

}  // namespace spherepack

#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "spherepack/complex.hpp"
#include "spherepack/curvature.hpp"

namespace spherepack {

enum class AssemblyMethod { DualGeometry, FiniteDifference };

std::string_view to_string(AssemblyMethod m);
AssemblyMethod parse_method(std::string_view name);
/// Dual geometry for Euclidean metrics, finite differences for hyperbolic.
AssemblyMethod default_method(Geometry g);

/// Jacobians of the curvature map at one metric.
///
///   Lambda  = dK/dr           (symmetric)
///   L       = dK/du = Lambda * diag(weight)
///   L_tilde = R Lambda R      (weighted dual Laplacian, Euclidean)
///   G       = diag(C) + R Lambda R   (Hessian of S in u, Euclidean)
///
/// with weight = r (Euclidean) or sinh r (hyperbolic).
struct OperatorSet {
  Geometry geometry;
  AssemblyMethod method;
  Eigen::VectorXd r;
  Eigen::VectorXd weight;
  Eigen::VectorXd C;

  Eigen::MatrixXd Lambda;
  Eigen::MatrixXd L;
  Eigen::MatrixXd L_tilde;
  /// Edge weights B_ij = -L_ij off the diagonal; zero diagonal.
  Eigen::MatrixXd B;
  std::optional<Eigen::MatrixXd> G;
  /// l*_ij: summed signed dual areas per edge (dual-geometry assembly only).
  std::optional<Eigen::MatrixXd> dual_length;

  /// max |Lambda - Lambda^T| before symmetrisation (zero for dual geometry).
  double asymmetry_residual = 0.0;
};

/// Throws std::invalid_argument for dual geometry in hyperbolic background.
OperatorSet assemble(const Triangulation& t, const PackingMetric& m, AssemblyMethod method);
OperatorSet assemble(const Triangulation& t, const PackingMetric& m);

/// Lambda as the sum of per-tet 4x4 blocks extended by zero (Euclidean).
Eigen::MatrixXd lambda_from_tet_blocks(const Triangulation& t, const PackingMetric& m);

struct Spectrum {
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;
  /// Smallest eigenvalue of Lambda restricted to span{r}^perp.
  double lambda1;
};

Spectrum spectrum(const OperatorSet& ops);

/// Orthonormal basis (N x N-1) of span{v}^perp, Gram-Schmidt from coordinate axes.
Eigen::MatrixXd orthogonal_complement(const Eigen::VectorXd& v);

enum class AttractorClass { Attractor, Inconclusive };
std::string_view to_string(AttractorClass c);

struct DqeStabilityReport {
  double lambda_star;  // S / |r|^2
  double lambda1;      // first eigenvalue of Lambda transverse to r
  double residual;     // |K - lambda_star r|_inf
  AttractorClass attractor_class;
  /// Eigenvalues (ascending) of lambda_star (I - r r^T/|r|^2) - Lambda, the
  /// linearisation of the normalised second-order flow at the metric.
  Eigen::VectorXd jacobian_eigenvalues;
};

/// Euclidean only. Throws NotDQE when |K - lambda r|_inf exceeds `tolerance`.
DqeStabilityReport dqe_stability_report(const Triangulation& t, const PackingMetric& m,
                                        double tolerance);

}  // namespace spherepack

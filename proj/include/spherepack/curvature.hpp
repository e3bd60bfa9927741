#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "spherepack/complex.hpp"
#include "spherepack/euclid_kernel.hpp"

namespace spherepack {

enum class Geometry { Euclidean, Hyperbolic };

std::string_view to_string(Geometry g);
Geometry parse_geometry(std::string_view name);

/// Sphere packing metric: one positive radius per vertex plus the background
/// geometry. The chart is u = ln r (Euclidean) or u = ln tanh(r/2)
/// (hyperbolic).
class PackingMetric {
 public:
  PackingMetric(Geometry geometry, Eigen::VectorXd radii);
  static PackingMetric from_chart(Geometry geometry, const Eigen::VectorXd& u);

  Geometry geometry() const noexcept { return geometry_; }
  const Eigen::VectorXd& r() const noexcept { return r_; }
  Eigen::Index size() const noexcept { return r_.size(); }
  Eigen::VectorXd u() const;
  /// dr/du per vertex: r (Euclidean) or sinh r (hyperbolic). Also the G-curvature weight.
  Eigen::VectorXd weight() const;

 private:
  Geometry geometry_;
  Eigen::VectorXd r_;
};

TetRadii tet_radii(const Triangulation& t, const Eigen::VectorXd& r, std::size_t tet);
SolidAngles tet_solid_angles(Geometry g, const TetRadii& rad);

struct AdmissibilityMargin {
  double margin;    // realizability ratio (Euclidean) or link margin (hyperbolic)
  std::size_t tet;  // tet attaining the minimum
};

/// Smallest per-tet admissibility margin over the complex.
AdmissibilityMargin admissibility(const Triangulation& t, const PackingMetric& m);

struct CurvatureTargets {
  std::optional<Eigen::VectorXd> K;
  std::optional<Eigen::VectorXd> C;
};

struct CurvatureState {
  Geometry geometry;
  Eigen::VectorXd K;  // 4 pi minus incident solid angles
  Eigen::VectorXd C;  // K * weight
  std::optional<double> S;       // sum K_i r_i, Euclidean only
  std::optional<double> lambda;  // S / |r|^2, Euclidean only
  Eigen::VectorXd K_target;      // zero unless supplied
  Eigen::VectorXd C_target;
  double energy_K;  // |K - K_target|^2
  double energy_C;  // |C - C_target|^2
};

/// Throws DegenerateTet (with the tet index) if any tet is not admissible.
CurvatureState cr_curvature(const Triangulation& t, const PackingMetric& m,
                            const CurvatureTargets& targets = {});

/// Only the curvature vector; the flows' hot path.
Eigen::VectorXd curvature_vector(const Triangulation& t, const PackingMetric& m);

/// S / |r|^tau. Euclidean only.
double total_functional_tau(const Triangulation& t, const PackingMetric& m, double tau);

/// Analytic r-gradient of S_tau: (K - tau S r / |r|^2) / |r|^tau.
Eigen::VectorXd total_functional_tau_gradient(const Triangulation& t, const PackingMetric& m,
                                              double tau);

double quadratic_energy(const Triangulation& t, const PackingMetric& m,
                        const std::optional<Eigen::VectorXd>& target = std::nullopt);

}  // namespace spherepack

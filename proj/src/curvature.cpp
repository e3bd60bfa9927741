#include "spherepack/curvature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spherepack/errors.hpp"
#include "spherepack/hyp_kernel.hpp"

namespace spherepack {

std::string_view to_string(Geometry g) {
  return g == Geometry::Euclidean ? "euclidean" : "hyperbolic";
}

Geometry parse_geometry(std::string_view name) {
  if (name == "euclidean") return Geometry::Euclidean;
  if (name == "hyperbolic") return Geometry::Hyperbolic;
  throw std::invalid_argument("unknown geometry: " + std::string(name));
}

PackingMetric::PackingMetric(Geometry geometry, Eigen::VectorXd radii)
    : geometry_(geometry), r_(std::move(radii)) {
  for (Eigen::Index i = 0; i < r_.size(); ++i)
    if (!(r_[i] > 0.0) || !std::isfinite(r_[i]))
      throw std::invalid_argument("radius " + std::to_string(i) + " is not positive and finite");
}

PackingMetric PackingMetric::from_chart(Geometry geometry, const Eigen::VectorXd& u) {
  if (geometry == Geometry::Euclidean) return PackingMetric(geometry, u.array().exp().matrix());
  Eigen::VectorXd r(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!(u[i] < 0.0))
      throw std::invalid_argument("hyperbolic chart coordinate must be negative");
    r[i] = 2.0 * std::atanh(std::exp(u[i]));
  }
  return PackingMetric(geometry, std::move(r));
}

Eigen::VectorXd PackingMetric::u() const {
  if (geometry_ == Geometry::Euclidean) return r_.array().log().matrix();
  return (0.5 * r_.array()).tanh().log().matrix();
}

Eigen::VectorXd PackingMetric::weight() const {
  if (geometry_ == Geometry::Euclidean) return r_;
  return r_.array().sinh().matrix();
}

TetRadii tet_radii(const Triangulation& t, const Eigen::VectorXd& r, std::size_t tet) {
  const Tet& v = t.tets()[tet];
  return TetRadii{{r[v[0]], r[v[1]], r[v[2]], r[v[3]]}};
}

SolidAngles tet_solid_angles(Geometry g, const TetRadii& rad) {
  return g == Geometry::Euclidean ? solid_angles(rad) : hyp_solid_angles(rad);
}

AdmissibilityMargin admissibility(const Triangulation& t, const PackingMetric& m) {
  AdmissibilityMargin worst{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t k = 0; k < t.tets().size(); ++k) {
    const TetRadii rad = tet_radii(t, m.r(), k);
    const double margin = m.geometry() == Geometry::Euclidean ? realizability_ratio(rad)
                                                              : hyp_admissible(rad).margin;
    if (margin < worst.margin || std::isnan(margin)) {
      worst = {std::isnan(margin) ? -std::numeric_limits<double>::infinity() : margin, k};
    }
  }
  return worst;
}

namespace {

void require_size(const Triangulation& t, const PackingMetric& m) {
  if (m.size() != t.vertex_count())
    throw std::invalid_argument("metric has " + std::to_string(m.size()) + " radii, complex has " +
                                std::to_string(t.vertex_count()) + " vertices");
}

}  // namespace

Eigen::VectorXd curvature_vector(const Triangulation& t, const PackingMetric& m) {
  require_size(t, m);
  Eigen::VectorXd K = Eigen::VectorXd::Constant(m.size(), 4.0 * std::numbers::pi);
  // Fixed tet order keeps the reduction bit-reproducible.
  for (std::size_t k = 0; k < t.tets().size(); ++k) {
    SolidAngles alpha;
    try {
      alpha = tet_solid_angles(m.geometry(), tet_radii(t, m.r(), k));
    } catch (const DegenerateTet& e) {
      const Tet& v = t.tets()[k];
      throw DegenerateTet("tet " + std::to_string(k) + " [" + std::to_string(v[0]) + "," +
                              std::to_string(v[1]) + "," + std::to_string(v[2]) + "," +
                              std::to_string(v[3]) + "]: " + e.what(),
                          e.diagnostic(), k);
    }
    const Tet& v = t.tets()[k];
    for (int a = 0; a < 4; ++a) K[v[a]] -= alpha[a];
  }
  return K;
}

CurvatureState cr_curvature(const Triangulation& t, const PackingMetric& m,
                            const CurvatureTargets& targets) {
  const Eigen::Index n = t.vertex_count();
  for (const auto* target : {&targets.K, &targets.C})
    if (*target && (*target)->size() != n)
      throw std::invalid_argument("curvature target has wrong length");

  CurvatureState st;
  st.geometry = m.geometry();
  st.K = curvature_vector(t, m);
  st.C = st.K.cwiseProduct(m.weight());
  if (m.geometry() == Geometry::Euclidean) {
    st.S = st.K.dot(m.r());
    st.lambda = *st.S / m.r().squaredNorm();
  }
  st.K_target = targets.K.value_or(Eigen::VectorXd::Zero(n));
  st.C_target = targets.C.value_or(Eigen::VectorXd::Zero(n));
  st.energy_K = (st.K - st.K_target).squaredNorm();
  st.energy_C = (st.C - st.C_target).squaredNorm();
  return st;
}

namespace {

void require_euclidean(const PackingMetric& m) {
  if (m.geometry() != Geometry::Euclidean)
    throw std::invalid_argument("total functional is only available in Euclidean geometry");
}

}  // namespace

double total_functional_tau(const Triangulation& t, const PackingMetric& m, double tau) {
  require_euclidean(m);
  const double S = curvature_vector(t, m).dot(m.r());
  return S / std::pow(m.r().norm(), tau);
}

Eigen::VectorXd total_functional_tau_gradient(const Triangulation& t, const PackingMetric& m,
                                              double tau) {
  require_euclidean(m);
  const Eigen::VectorXd K = curvature_vector(t, m);
  const double S = K.dot(m.r());
  const double norm2 = m.r().squaredNorm();
  return (K - tau * S / norm2 * m.r()) / std::pow(std::sqrt(norm2), tau);
}

double quadratic_energy(const Triangulation& t, const PackingMetric& m,
                        const std::optional<Eigen::VectorXd>& target) {
  const Eigen::VectorXd K = curvature_vector(t, m);
  if (!target) return K.squaredNorm();
  if (target->size() != K.size()) throw std::invalid_argument("curvature target has wrong length");
  return (K - *target).squaredNorm();
}

}  // namespace spherepack

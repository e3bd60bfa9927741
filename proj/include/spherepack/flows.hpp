#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "spherepack/complex.hpp"
#include "spherepack/curvature.hpp"

namespace spherepack {

/// Curvature flows. u-flows integrate in the chart u (ln r or ln tanh(r/2)),
/// r-flows integrate the radii directly.
///
///   CR4            u' = -L^T K
///   CR4Normalized  u' =  L^T (K* - K)      target: K* of a DQE metric
///   CR4Prescribed  u' =  L^T (Kbar - K)    target: Kbar
///   CR4RCoord      r' = -Lambda K
///   CR2            r' = -K
///   CR2Normalized  r' = lambda r - K,  lambda = S / |r|^2
///   G4             u' = -G^T C
///   G4Prescribed   u' =  G^T (Cbar - C)    target: Cbar
enum class FlowType { CR4, CR4Normalized, CR4Prescribed, CR4RCoord, CR2, CR2Normalized, G4, G4Prescribed };

std::string_view to_string(FlowType f);
FlowType parse_flow_type(std::string_view name);
bool integrates_in_u(FlowType f);
bool needs_target(FlowType f);
/// Hyperbolic background supports CR2, CR4 and CR4RCoord only.
bool supports(FlowType f, Geometry g);

struct FlowKind {
  FlowType type;
  std::optional<Eigen::VectorXd> target;
};

struct StepControl {
  double dt0 = 1e-3;
  double dt_min = 1e-10;
  double dt_max = 1.0;
  /// Step-doubling error bound relative to the step increment; an absolute
  /// floor of 1e-14 max(1, |y|) covers increments at round-off level.
  double rel_tol = 1e-8;
};

struct StopCriteria {
  /// Sup-norm bound on the driving vector. Default 1e-10 for u-flows and
  /// 1e-10 * max r for r-flows.
  std::optional<double> tol;
  std::size_t max_steps = 200000;
  double max_wall_seconds = 0.0;  // 0 disables the wall-clock limit
};

struct FlowConfig {
  FlowKind kind;
  PackingMetric initial;
  StepControl step{};
  StopCriteria stop{};
  double admissibility_floor = 1e-12;
  std::size_t log_stride = 1;
};

enum class Verdict { Converged, MaxSteps, HitDegeneracy, Diverged };
std::string_view to_string(Verdict v);

struct TrajectorySample {
  std::size_t step;
  double t;
  Eigen::VectorXd r;
  Eigen::VectorXd K;
  std::optional<double> S;
  double energy;
  std::optional<double> drift_product_r;  // prod r / prod r(0) - 1
  std::optional<double> drift_norm_r_sq;  // |r|^2 / |r(0)|^2 - 1
};

struct DriftReport {
  /// Largest |relative drift| over accepted steps, present when conserved.
  std::optional<double> product_r;
  std::optional<double> norm_r_sq;
  std::size_t monotonicity_violations = 0;
  double max_energy_increase = 0.0;  // relative, over accepted steps
};

enum class DqeSign { Flat, Positive, Negative };
std::string_view to_string(DqeSign s);

struct DqeSummary {
  double lambda;    // S / |r|^2
  double residual;  // |K - lambda r|_inf
  DqeSign sign;
};

struct FlowResult {
  FlowResult(FlowType flow, PackingMetric start)
      : type(flow), final_metric(std::move(start)) {}

  FlowType type;
  std::vector<TrajectorySample> trajectory;
  Verdict verdict = Verdict::MaxSteps;
  PackingMetric final_metric;
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
  double final_time = 0.0;
  double driving_norm = 0.0;  // sup-norm of the driving vector at the end
  double final_energy = 0.0;
  DriftReport drift;
  std::optional<DqeSummary> dqe;
  std::optional<double> target_residual;
  std::string message;
};

/// One evaluation of a flow's vector field at chart coordinates y.
struct FieldEval {
  Eigen::VectorXd field;
  Eigen::VectorXd K;
  Eigen::VectorXd r;
  std::optional<double> S;
  double energy;
};

/// Throws DegenerateTet when y is outside the admissible region.
FieldEval evaluate_field(const Triangulation& t, const FlowKind& kind, Geometry g,
                         const Eigen::VectorXd& y);

/// Chart coordinates used by the flow: u for u-flows, r otherwise.
Eigen::VectorXd to_flow_coordinates(FlowType f, const PackingMetric& m);
PackingMetric from_flow_coordinates(FlowType f, Geometry g, const Eigen::VectorXd& y);

/// Throws InadmissibleInitialMetric or ConfigError.
FlowResult run_flow(const Triangulation& t, const FlowConfig& cfg);

/// Runs CR4 from `initial`; the step/stop fields of `overrides` are used,
/// its kind and metric are ignored.
FlowResult find_dqe(const Triangulation& t, const PackingMetric& initial,
                    const FlowConfig* overrides = nullptr);

struct PrescribedTarget {
  enum class Kind { CR, G } kind;
  Eigen::VectorXd values;
};

enum class PrescribeStrategy { Flow, GradientDescent };
PrescribeStrategy parse_strategy(std::string_view name);

/// Flow strategy integrates CR4Prescribed / G4Prescribed. Gradient descent
/// minimises the matching quadratic energy in u with Newton directions and
/// Armijo backtracking; throws LineSearchStalled if backtracking fails.
FlowResult prescribe_curvature(const Triangulation& t, const PrescribedTarget& target,
                               const PackingMetric& initial, PrescribeStrategy strategy,
                               const FlowConfig* overrides = nullptr);

}  // namespace spherepack

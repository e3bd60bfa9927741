#include "spherepack/flows.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "spherepack/errors.hpp"
#include "spherepack/operators.hpp"

namespace spherepack {

namespace {

constexpr double kMonotonicitySlack = 1e-12;
constexpr int kMaxConsecutiveDegenerate = 40;
constexpr double kRadiusLow = 1e-8;
constexpr double kRadiusHigh = 1e8;
constexpr double kAbsoluteErrorFloor = 1e-14;

struct FlowName {
  FlowType type;
  std::string_view name;
};

constexpr FlowName kFlowNames[] = {
    {FlowType::CR4, "cr4"},
    {FlowType::CR4Normalized, "cr4_normalized"},
    {FlowType::CR4Prescribed, "cr4_prescribed"},
    {FlowType::CR4RCoord, "cr4_rcoord"},
    {FlowType::CR2, "cr2"},
    {FlowType::CR2Normalized, "cr2_normalized"},
    {FlowType::G4, "g4"},
    {FlowType::G4Prescribed, "g4_prescribed"},
};

bool conserves_product(FlowType f, Geometry g) {
  return g == Geometry::Euclidean &&
         (f == FlowType::CR4 || f == FlowType::CR4Normalized || f == FlowType::CR4Prescribed);
}

bool conserves_norm(FlowType f, Geometry g) {
  return g == Geometry::Euclidean && (f == FlowType::CR2Normalized || f == FlowType::CR4RCoord);
}

DqeSign classify(double lambda, double r_max) {
  if (std::abs(lambda) * r_max <= 1e-8) return DqeSign::Flat;
  return lambda > 0.0 ? DqeSign::Positive : DqeSign::Negative;
}

}  // namespace

std::string_view to_string(FlowType f) {
  for (const auto& entry : kFlowNames)
    if (entry.type == f) return entry.name;
  return "unknown";
}

FlowType parse_flow_type(std::string_view name) {
  for (const auto& entry : kFlowNames)
    if (entry.name == name) return entry.type;
  throw ConfigError("unknown flow kind: " + std::string(name));
}

bool integrates_in_u(FlowType f) {
  return f == FlowType::CR4 || f == FlowType::CR4Normalized || f == FlowType::CR4Prescribed ||
         f == FlowType::G4 || f == FlowType::G4Prescribed;
}

bool needs_target(FlowType f) {
  return f == FlowType::CR4Normalized || f == FlowType::CR4Prescribed ||
         f == FlowType::G4Prescribed;
}

bool supports(FlowType f, Geometry g) {
  if (g == Geometry::Euclidean) return true;
  return f == FlowType::CR2 || f == FlowType::CR4 || f == FlowType::CR4RCoord;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Converged: return "Converged";
    case Verdict::MaxSteps: return "MaxSteps";
    case Verdict::HitDegeneracy: return "HitDegeneracy";
    case Verdict::Diverged: return "Diverged";
  }
  return "unknown";
}

std::string_view to_string(DqeSign s) {
  switch (s) {
    case DqeSign::Flat: return "flat";
    case DqeSign::Positive: return "positive";
    case DqeSign::Negative: return "negative";
  }
  return "unknown";
}

Eigen::VectorXd to_flow_coordinates(FlowType f, const PackingMetric& m) {
  return integrates_in_u(f) ? m.u() : m.r();
}

PackingMetric from_flow_coordinates(FlowType f, Geometry g, const Eigen::VectorXd& y) {
  if (!y.allFinite()) throw DegenerateTet("non-finite flow state", 0.0);
  try {
    return integrates_in_u(f) ? PackingMetric::from_chart(g, y) : PackingMetric(g, y);
  } catch (const std::invalid_argument& e) {
    throw DegenerateTet(std::string("flow state left the metric chart: ") + e.what(), 0.0);
  }
}

FieldEval evaluate_field(const Triangulation& t, const FlowKind& kind, Geometry g,
                         const Eigen::VectorXd& y) {
  const PackingMetric m = from_flow_coordinates(kind.type, g, y);
  FieldEval out;
  out.r = m.r();
  out.K = curvature_vector(t, m);
  if (g == Geometry::Euclidean) out.S = out.K.dot(out.r);

  switch (kind.type) {
    case FlowType::CR4: {
      const OperatorSet ops = assemble(t, m);
      out.field = -ops.L.transpose() * out.K;
      out.energy = out.K.squaredNorm();
      break;
    }
    case FlowType::CR4Normalized:
    case FlowType::CR4Prescribed: {
      const OperatorSet ops = assemble(t, m);
      const Eigen::VectorXd gap = *kind.target - out.K;
      out.field = ops.L.transpose() * gap;
      out.energy = gap.squaredNorm();
      break;
    }
    case FlowType::CR4RCoord: {
      const OperatorSet ops = assemble(t, m);
      out.field = -ops.Lambda * out.K;
      out.energy = out.K.squaredNorm();
      break;
    }
    case FlowType::CR2:
      out.field = -out.K;
      out.energy = out.K.squaredNorm();
      break;
    case FlowType::CR2Normalized: {
      // lambda is recomputed at every evaluation.
      const double lambda = *out.S / out.r.squaredNorm();
      out.field = lambda * out.r - out.K;
      out.energy = *out.S;
      break;
    }
    case FlowType::G4: {
      const OperatorSet ops = assemble(t, m);
      const Eigen::VectorXd C = out.K.cwiseProduct(out.r);
      out.field = -ops.G->transpose() * C;
      out.energy = C.squaredNorm();
      break;
    }
    case FlowType::G4Prescribed: {
      const OperatorSet ops = assemble(t, m);
      const Eigen::VectorXd gap = *kind.target - out.K.cwiseProduct(out.r);
      out.field = ops.G->transpose() * gap;
      out.energy = gap.squaredNorm();
      break;
    }
  }
  return out;
}

namespace {

void validate_config(const Triangulation& t, const FlowConfig& cfg) {
  const FlowType f = cfg.kind.type;
  const Geometry g = cfg.initial.geometry();
  if (!supports(f, g))
    throw ConfigError(std::string(to_string(f)) + " is not available in " +
                      std::string(to_string(g)) + " geometry");
  if (cfg.initial.size() != t.vertex_count())
    throw ConfigError("initial metric length does not match vertex count");
  if (needs_target(f)) {
    if (!cfg.kind.target) throw ConfigError(std::string(to_string(f)) + " requires a target");
    if (cfg.kind.target->size() != t.vertex_count())
      throw ConfigError("target length does not match vertex count");
  }
  const StepControl& s = cfg.step;
  if (!(s.dt_min > 0.0 && s.dt_min <= s.dt0 && s.dt0 <= s.dt_max))
    throw ConfigError("step sizes must satisfy 0 < dt_min <= dt0 <= dt_max");
  if (!(s.rel_tol > 0.0)) throw ConfigError("rel_tol must be positive");
  if (cfg.stop.tol && !(*cfg.stop.tol > 0.0)) throw ConfigError("tol must be positive");
  if (!(cfg.admissibility_floor >= 0.0)) throw ConfigError("admissibility floor must be >= 0");
  if (cfg.log_stride == 0) throw ConfigError("log stride must be positive");
}

double driving_tolerance(const FlowConfig& cfg, const Eigen::VectorXd& r) {
  if (cfg.stop.tol) return integrates_in_u(cfg.kind.type) ? *cfg.stop.tol
                                                          : *cfg.stop.tol * r.maxCoeff();
  return integrates_in_u(cfg.kind.type) ? 1e-10 : 1e-10 * r.maxCoeff();
}

struct DriftTracker {
  bool track_product;
  bool track_norm;
  double log_product0;
  double norm0;

  DriftTracker(FlowType f, Geometry g, const Eigen::VectorXd& r0)
      : track_product(conserves_product(f, g)),
        track_norm(conserves_norm(f, g)),
        log_product0(r0.array().log().sum()),
        norm0(r0.squaredNorm()) {}

  std::optional<double> product(const Eigen::VectorXd& r) const {
    if (!track_product) return std::nullopt;
    return std::expm1(r.array().log().sum() - log_product0);
  }
  std::optional<double> norm(const Eigen::VectorXd& r) const {
    if (!track_norm) return std::nullopt;
    return r.squaredNorm() / norm0 - 1.0;
  }
};

void record_drift(const TrajectorySample& s, DriftReport& rep) {
  if (s.drift_product_r)
    rep.product_r = std::max(rep.product_r.value_or(0.0), std::abs(*s.drift_product_r));
  if (s.drift_norm_r_sq)
    rep.norm_r_sq = std::max(rep.norm_r_sq.value_or(0.0), std::abs(*s.drift_norm_r_sq));
}

TrajectorySample make_sample(std::size_t step, double time, const FieldEval& ev,
                             const DriftTracker& drift) {
  return TrajectorySample{step, time, ev.r, ev.K, ev.S, ev.energy, drift.product(ev.r),
                          drift.norm(ev.r)};
}

bool radii_in_range(const Eigen::VectorXd& r) {
  return r.allFinite() && r.minCoeff() >= kRadiusLow && r.maxCoeff() <= kRadiusHigh;
}

void finish(const Triangulation& t, const FlowKind& kind, FlowResult& res) {
  if (res.verdict != Verdict::Converged) return;
  const PackingMetric& m = res.final_metric;
  const Eigen::VectorXd K = curvature_vector(t, m);
  if (kind.type == FlowType::CR4Prescribed) {
    res.target_residual = (K - *kind.target).cwiseAbs().maxCoeff();
  } else if (kind.type == FlowType::G4Prescribed) {
    res.target_residual = (K.cwiseProduct(m.r()) - *kind.target).cwiseAbs().maxCoeff();
  } else if (m.geometry() == Geometry::Euclidean) {
    const double lambda = K.dot(m.r()) / m.r().squaredNorm();
    res.dqe = DqeSummary{lambda, (K - lambda * m.r()).cwiseAbs().maxCoeff(),
                         classify(lambda, m.r().maxCoeff())};
  }
}

}  // namespace

FlowResult run_flow(const Triangulation& t, const FlowConfig& cfg) {
  validate_config(t, cfg);
  const FlowKind& kind = cfg.kind;
  const Geometry g = cfg.initial.geometry();

  const AdmissibilityMargin init = admissibility(t, cfg.initial);
  if (!(init.margin > cfg.admissibility_floor))
    throw InadmissibleInitialMetric(
        "initial metric is not admissible at tet " + std::to_string(init.tet) +
            " (margin " + std::to_string(init.margin) + ")",
        init.tet);

  const auto clock_start = std::chrono::steady_clock::now();
  const DriftTracker drift(kind.type, g, cfg.initial.r());

  Eigen::VectorXd y = to_flow_coordinates(kind.type, cfg.initial);
  FieldEval current = evaluate_field(t, kind, g, y);

  FlowResult res(kind.type, cfg.initial);
  res.trajectory.push_back(make_sample(0, 0.0, current, drift));
  record_drift(res.trajectory.back(), res.drift);

  auto field_at = [&](const Eigen::VectorXd& z) { return evaluate_field(t, kind, g, z).field; };
  auto rk4 = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& f0, double h) {
    const Eigen::VectorXd k2 = field_at(z + 0.5 * h * f0);
    const Eigen::VectorXd k3 = field_at(z + 0.5 * h * k2);
    const Eigen::VectorXd k4 = field_at(z + h * k3);
    return Eigen::VectorXd(z + h / 6.0 * (f0 + 2.0 * k2 + 2.0 * k3 + k4));
  };

  double time = 0.0;
  double dt = cfg.step.dt0;
  int consecutive_degenerate = 0;
  bool logged_last = true;

  while (true) {
    res.driving_norm = current.field.cwiseAbs().maxCoeff();
    if (res.driving_norm <= driving_tolerance(cfg, current.r)) {
      res.verdict = Verdict::Converged;
      break;
    }
    if (res.steps >= cfg.stop.max_steps) {
      res.verdict = Verdict::MaxSteps;
      res.message = "step budget exhausted";
      break;
    }
    if (cfg.stop.max_wall_seconds > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count() >
            cfg.stop.max_wall_seconds) {
      res.verdict = Verdict::MaxSteps;
      res.message = "wall-clock budget exhausted";
      break;
    }
    if (dt < cfg.step.dt_min) {
      res.verdict = Verdict::HitDegeneracy;
      res.message = "step size fell below dt_min";
      break;
    }

    Eigen::VectorXd y_next;
    FieldEval next;
    double err = 0.0;
    try {
      const Eigen::VectorXd y_full = rk4(y, current.field, dt);
      const Eigen::VectorXd y_half = rk4(y, current.field, 0.5 * dt);
      y_next = rk4(y_half, field_at(y_half), 0.5 * dt);
      next = evaluate_field(t, kind, g, y_next);
      const PackingMetric m_next = from_flow_coordinates(kind.type, g, y_next);
      if (!(admissibility(t, m_next).margin > cfg.admissibility_floor))
        throw DegenerateTet("below admissibility floor", 0.0);
      // Error relative to the increment, floored at round-off level. Scaling by
      // |y| instead lets dt drift to the RK4 stability limit near fixed points.
      const double scale = cfg.step.rel_tol * (y_next - y).cwiseAbs().maxCoeff() +
                           kAbsoluteErrorFloor * std::max(1.0, y.cwiseAbs().maxCoeff());
      err = (y_next - y_full).cwiseAbs().maxCoeff() / scale;
    } catch (const DegenerateTet& e) {
      ++res.rejected_steps;
      dt *= 0.5;
      if (++consecutive_degenerate >= kMaxConsecutiveDegenerate) {
        res.verdict = Verdict::HitDegeneracy;
        res.message = e.what();
        break;
      }
      continue;
    }
    consecutive_degenerate = 0;

    if (err > 1.0) {
      ++res.rejected_steps;
      dt *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      continue;
    }

    if (!radii_in_range(next.r)) {
      res.verdict = Verdict::Diverged;
      res.message = "radii left [1e-8, 1e8]";
      break;
    }

    const double increase = next.energy - current.energy;
    if (increase > kMonotonicitySlack * std::abs(current.energy)) {
      ++res.drift.monotonicity_violations;
      res.drift.max_energy_increase =
          std::max(res.drift.max_energy_increase, increase / std::max(std::abs(current.energy), 1e-300));
    }

    time += dt;
    ++res.steps;
    y = std::move(y_next);
    current = std::move(next);
    res.final_metric = from_flow_coordinates(kind.type, g, y);

    TrajectorySample sample = make_sample(res.steps, time, current, drift);
    record_drift(sample, res.drift);
    logged_last = res.steps % cfg.log_stride == 0;
    if (logged_last) res.trajectory.push_back(std::move(sample));

    const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    dt = std::min(cfg.step.dt_max, dt * std::clamp(grow, 1.0, 5.0));
  }

  if (!logged_last) res.trajectory.push_back(make_sample(res.steps, time, current, drift));
  res.final_time = time;
  res.final_energy = current.energy;
  finish(t, kind, res);
  return res;
}

FlowResult find_dqe(const Triangulation& t, const PackingMetric& initial,
                    const FlowConfig* overrides) {
  FlowConfig cfg = overrides ? *overrides : FlowConfig{FlowKind{FlowType::CR4, {}}, initial};
  cfg.kind = FlowKind{FlowType::CR4, std::nullopt};
  cfg.initial = initial;
  return run_flow(t, cfg);
}

PrescribeStrategy parse_strategy(std::string_view name) {
  if (name == "flow") return PrescribeStrategy::Flow;
  if (name == "gradient_descent") return PrescribeStrategy::GradientDescent;
  throw ConfigError("unknown strategy: " + std::string(name));
}

namespace {

FlowResult descend(const Triangulation& t, const FlowConfig& cfg) {
  validate_config(t, cfg);
  const FlowKind& kind = cfg.kind;
  const bool g_target = kind.type == FlowType::G4Prescribed;
  const Geometry geom = cfg.initial.geometry();

  const AdmissibilityMargin init = admissibility(t, cfg.initial);
  if (!(init.margin > cfg.admissibility_floor))
    throw InadmissibleInitialMetric("initial metric is not admissible at tet " +
                                        std::to_string(init.tet),
                                    init.tet);

  const DriftTracker drift(kind.type, geom, cfg.initial.r());
  const Eigen::VectorXd& target = *kind.target;
  const double tol = cfg.stop.tol.value_or(1e-11 * std::max(1.0, target.cwiseAbs().maxCoeff()));

  // Residual and energy at chart point u; throws DegenerateTet outside the
  // admissible region.
  struct Point {
    FieldEval eval;
    Eigen::VectorXd residual;
  };
  auto at = [&](const Eigen::VectorXd& u) {
    const PackingMetric m = PackingMetric::from_chart(geom, u);
    if (!(admissibility(t, m).margin > cfg.admissibility_floor))
      throw DegenerateTet("below admissibility floor", 0.0);
    Point p;
    p.eval.r = m.r();
    p.eval.K = curvature_vector(t, m);
    p.eval.S = p.eval.K.dot(p.eval.r);
    const Eigen::VectorXd value = g_target ? Eigen::VectorXd(p.eval.K.cwiseProduct(p.eval.r))
                                           : p.eval.K;
    p.residual = value - target;
    p.eval.energy = p.residual.squaredNorm();
    return p;
  };

  Eigen::VectorXd u = cfg.initial.u();
  Point cur = at(u);
  FlowResult res(kind.type, cfg.initial);
  res.trajectory.push_back(make_sample(0, 0.0, cur.eval, drift));
  record_drift(res.trajectory.back(), res.drift);
  double arclength = 0.0;

  while (true) {
    res.driving_norm = cur.residual.cwiseAbs().maxCoeff();
    if (res.driving_norm <= tol) {
      res.verdict = Verdict::Converged;
      break;
    }
    if (res.steps >= cfg.stop.max_steps) break;

    const PackingMetric m = PackingMetric::from_chart(geom, u);
    const OperatorSet ops = assemble(t, m);
    const Eigen::MatrixXd& J = g_target ? *ops.G : ops.L;
    const Eigen::VectorXd grad = 2.0 * J.transpose() * cur.residual;

    // Newton direction for the square system; minimum-norm so that the
    // scaling direction (kernel of L) is left untouched.
    Eigen::VectorXd dir = -J.completeOrthogonalDecomposition().solve(cur.residual);
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      dir = -grad;
      slope = grad.dot(dir);
    }

    double step = 1.0;
    bool accepted = false;
    Point trial;
    while (step > 1e-16) {
      try {
        trial = at(u + step * dir);
        if (trial.eval.energy <= cur.eval.energy + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
      } catch (const DegenerateTet&) {
      }
      step *= 0.5;
    }
    if (!accepted)
      throw LineSearchStalled("Armijo backtracking failed at residual " +
                              std::to_string(res.driving_norm));

    u += step * dir;
    cur = std::move(trial);
    arclength += step;
    ++res.steps;
    TrajectorySample sample = make_sample(res.steps, arclength, cur.eval, drift);
    record_drift(sample, res.drift);
    res.trajectory.push_back(std::move(sample));
  }

  res.final_metric = PackingMetric::from_chart(geom, u);
  res.final_time = arclength;
  res.final_energy = cur.eval.energy;
  if (res.verdict == Verdict::Converged) res.target_residual = res.driving_norm;
  else res.message = "iteration budget exhausted";
  return res;
}

}  // namespace

FlowResult prescribe_curvature(const Triangulation& t, const PrescribedTarget& target,
                               const PackingMetric& initial, PrescribeStrategy strategy,
                               const FlowConfig* overrides) {
  const FlowType type =
      target.kind == PrescribedTarget::Kind::CR ? FlowType::CR4Prescribed : FlowType::G4Prescribed;
  FlowConfig cfg = overrides ? *overrides : FlowConfig{FlowKind{type, {}}, initial};
  cfg.kind = FlowKind{type, target.values};
  cfg.initial = initial;
  return strategy == PrescribeStrategy::Flow ? run_flow(t, cfg) : descend(t, cfg);
}

}  // namespace spherepack

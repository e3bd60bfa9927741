// spherepack: command-line front end for curvature evaluation, operator
// export and curvature flows on sphere-packed triangulated 3-manifolds.
//
// Exit codes: 0 success, 1 validation failed, 2 usage/I-O/parse error,
// 3 inadmissible metric, 4 flow hit degeneracy, 5 flow hit max steps,
// 6 flow diverged.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "spherepack/complex.hpp"
#include "spherepack/curvature.hpp"
#include "spherepack/errors.hpp"
#include "spherepack/flows.hpp"
#include "spherepack/io.hpp"
#include "spherepack/operators.hpp"

namespace sp = spherepack;
using nlohmann::json;

namespace {

enum Exit : int {
  kOk = 0,
  kInvalid = 1,
  kUsage = 2,
  kInadmissible = 3,
  kDegenerate = 4,
  kMaxSteps = 5,
  kDiverged = 6,
};

struct CommonInputs {
  std::string triangulation;
  std::string metric;
  std::string geometry = "euclidean";
};

sp::PackingMetric load_metric(const CommonInputs& in, const sp::Triangulation& t) {
  Eigen::VectorXd r = sp::parse_metric(sp::read_file(in.metric));
  if (r.size() != t.vertex_count())
    throw sp::ParseError("metric has " + std::to_string(r.size()) + " radii, complex has " +
                         std::to_string(t.vertex_count()) + " vertices");
  return sp::PackingMetric(sp::parse_geometry(in.geometry), std::move(r));
}

json vector_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void print_vector(std::ostream& os, std::string_view name, const Eigen::VectorXd& v) {
  os << name << ':';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << sp::format_number(v[i]);
  os << '\n';
}

void add_common(CLI::App* cmd, CommonInputs& in) {
  cmd->add_option("triangulation", in.triangulation, "Triangulation JSON or builtin:<name>")
      ->required();
  cmd->add_option("metric", in.metric, "Metric JSON {\"r\": [...]}")->required();
  cmd->add_option("--geometry", in.geometry, "euclidean | hyperbolic")
      ->check(CLI::IsMember({"euclidean", "hyperbolic"}));
}

int exit_for(sp::Verdict v) {
  switch (v) {
    case sp::Verdict::Converged: return kOk;
    case sp::Verdict::HitDegeneracy: return kDegenerate;
    case sp::Verdict::MaxSteps: return kMaxSteps;
    case sp::Verdict::Diverged: return kDiverged;
  }
  return kUsage;
}

void print_summary(std::ostream& os, const sp::FlowResult& res) {
  os << "verdict: " << sp::to_string(res.verdict) << '\n';
  os << "kind: " << sp::to_string(res.type) << '\n';
  os << "steps: " << res.steps << " (rejected " << res.rejected_steps << ")\n";
  os << "final_time: " << sp::format_number(res.final_time) << '\n';
  os << "driving_norm: " << sp::format_number(res.driving_norm) << '\n';
  os << "energy: " << sp::format_number(res.final_energy) << '\n';
  os << "monotonicity_violations: " << res.drift.monotonicity_violations << '\n';
  if (res.drift.product_r)
    os << "max_drift_product_r: " << sp::format_number(*res.drift.product_r) << '\n';
  if (res.drift.norm_r_sq)
    os << "max_drift_norm_r_sq: " << sp::format_number(*res.drift.norm_r_sq) << '\n';
  if (res.dqe) {
    os << "dqe_lambda: " << sp::format_number(res.dqe->lambda) << '\n';
    os << "dqe_residual: " << sp::format_number(res.dqe->residual) << '\n';
    os << "dqe_sign: " << sp::to_string(res.dqe->sign) << '\n';
  }
  if (res.target_residual)
    os << "target_residual: " << sp::format_number(*res.target_residual) << '\n';
  if (!res.message.empty()) os << "message: " << res.message << '\n';
  print_vector(os, "r", res.final_metric.r());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string trajectory_csv(const sp::FlowResult& res) {
  std::ostringstream os;
  sp::write_trajectory_csv(os, res);
  return os.str();
}

struct FlowOptions {
  CommonInputs in;
  std::string kind;
  std::optional<std::string> target;
  std::optional<double> tol;
  std::size_t max_steps = sp::StopCriteria{}.max_steps;
  std::optional<std::string> out;
  std::optional<std::string> manifest;
  std::uint64_t seed = 0;
  double perturb = 0.0;
  sp::StepControl step{};
  std::size_t log_stride = 1;
};

void add_flow_options(CLI::App* cmd, FlowOptions& o, bool with_kind) {
  add_common(cmd, o.in);
  if (with_kind)
    cmd->add_option("--kind", o.kind,
                    "cr4 | cr4_normalized | cr4_prescribed | cr4_rcoord | cr2 | cr2_normalized | "
                    "g4 | g4_prescribed")
        ->required();
  cmd->add_option("--tol", o.tol, "Sup-norm tolerance on the driving vector");
  cmd->add_option("--max-steps", o.max_steps, "Accepted-step budget");
  cmd->add_option("--out", o.out, "Trajectory CSV path");
  cmd->add_option("--seed", o.seed, "Seed for --perturb");
  cmd->add_option("--perturb", o.perturb, "Multiply r_i by exp(U(-x, x))")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--dt0", o.step.dt0, "Initial step");
  cmd->add_option("--dt-min", o.step.dt_min, "Smallest step");
  cmd->add_option("--dt-max", o.step.dt_max, "Largest step");
  cmd->add_option("--rel-tol", o.step.rel_tol, "Step-doubling error tolerance");
  cmd->add_option("--log-stride", o.log_stride, "Log every n-th accepted step");
}

sp::RunManifest to_manifest(const FlowOptions& o) {
  sp::RunManifest mf;
  // Absolute paths so the manifest replays from any working directory.
  auto absolute = [](const std::string& p) {
    return p.rfind("builtin:", 0) == 0 ? p : std::filesystem::absolute(p).lexically_normal().string();
  };
  mf.triangulation_path = absolute(o.in.triangulation);
  mf.metric_path = absolute(o.in.metric);
  if (o.target) mf.target_path = absolute(*o.target);
  mf.geometry = sp::parse_geometry(o.in.geometry);
  mf.kind = sp::parse_flow_type(o.kind);
  mf.seed = o.seed;
  mf.perturb = o.perturb;
  mf.step = o.step;
  mf.stop.tol = o.tol;
  mf.stop.max_steps = o.max_steps;
  mf.log_stride = o.log_stride;
  mf.trajectory_path = o.out ? absolute(*o.out) : "";
  return mf;
}

int finish_flow(const sp::FlowResult& res, const std::optional<std::string>& out) {
  print_summary(std::cout, res);
  if (out) write_text(*out, trajectory_csv(res));
  return exit_for(res.verdict);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Combinatorial curvature and curvature flows for sphere packing metrics"};
  app.set_version_flag("--version", std::string(sp::kToolVersion));
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a triangulation for closedness and connectivity");
  validate->add_option("triangulation", validate_path)->required();

  CommonInputs curv_in;
  std::optional<std::string> curv_target, curv_out;
  auto* curvature = app.add_subcommand("curvature", "Per-vertex curvatures and energies");
  add_common(curvature, curv_in);
  curvature->add_option("--target", curv_target, "Target {\"K\": ...} or {\"C\": ...}");
  curvature->add_option("--out", curv_out, "Write the result as JSON");

  CommonInputs op_in;
  std::string op_method = "default";
  std::optional<std::string> op_dump;
  std::string op_matrix = "Lambda";
  auto* operators = app.add_subcommand("operators", "Assemble Lambda, L, G and dump a matrix");
  add_common(operators, op_in);
  operators->add_option("--method", op_method, "dual_geometry | finite_difference | both | default");
  operators->add_option("--matrix", op_matrix, "Lambda | L | L_tilde | B | G | dual_length");
  operators->add_option("--dump", op_dump, "Write the selected matrix (row-major CSV)");

  CommonInputs sp_in;
  std::string sp_method = "default";
  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues of Lambda and lambda_1");
  add_common(spectrum, sp_in);
  spectrum->add_option("--method", sp_method, "dual_geometry | finite_difference | both | default");

  CommonInputs dqe_in;
  double dqe_tol = 1e-8;
  auto* dqe = app.add_subcommand("dqe-report", "Stability report at a DQE metric");
  add_common(dqe, dqe_in);
  dqe->add_option("--tol", dqe_tol, "Tolerance on |K - lambda r|_inf");

  FlowOptions flow_opts;
  auto* flow = app.add_subcommand("flow", "Integrate a curvature flow");
  add_flow_options(flow, flow_opts, true);
  flow->add_option("--target", flow_opts.target, "Target curvature file");
  flow->add_option("--manifest", flow_opts.manifest, "Write a replayable run manifest");

  std::string replay_path;
  std::optional<std::string> replay_out;
  auto* replay = app.add_subcommand("replay", "Re-run a flow from its manifest");
  replay->add_option("manifest", replay_path)->required();
  replay->add_option("--out", replay_out, "Trajectory CSV path (defaults to the manifest's)");

  FlowOptions find_opts;
  auto* find = app.add_subcommand("find-dqe", "Run the fourth-order flow towards a DQE metric");
  add_flow_options(find, find_opts, false);

  FlowOptions pre_opts;
  std::string strategy = "flow";
  auto* prescribe = app.add_subcommand("prescribe", "Find the metric with a prescribed curvature");
  add_flow_options(prescribe, pre_opts, false);
  prescribe->add_option("--target", pre_opts.target, "Target curvature file")->required();
  prescribe->add_option("--strategy", strategy, "flow | gradient_descent")
      ->check(CLI::IsMember({"flow", "gradient_descent"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) {
      const sp::Triangulation t = sp::load_triangulation(validate_path);
      const sp::ValidationReport rep = sp::validate(t);
      std::cout << "vertices: " << rep.vertex_count << "\nedges: " << rep.edge_count
                << "\nfaces: " << rep.face_count << "\ntets: " << rep.tet_count
                << "\nviolations: " << rep.violations.size() << '\n';
      for (const auto& v : rep.violations) std::cout << "  - " << v.message << '\n';
      std::cout << "status: " << (rep.ok() ? "ok" : "invalid") << '\n';
      return rep.ok() ? kOk : kInvalid;
    }

    if (*curvature) {
      const sp::Triangulation t = sp::load_triangulation(curv_in.triangulation);
      const sp::PackingMetric m = load_metric(curv_in, t);
      sp::CurvatureTargets targets;
      if (curv_target) {
        sp::PrescribedTarget tg = sp::parse_target(sp::read_file(*curv_target));
        (tg.kind == sp::PrescribedTarget::Kind::CR ? targets.K : targets.C) = tg.values;
      }
      const sp::CurvatureState st = sp::cr_curvature(t, m, targets);
      print_vector(std::cout, "K", st.K);
      print_vector(std::cout, "C", st.C);
      std::cout << "S: " << (st.S ? sp::format_number(*st.S) : "null") << '\n';
      std::cout << "lambda: " << (st.lambda ? sp::format_number(*st.lambda) : "null") << '\n';
      std::cout << "energy_K: " << sp::format_number(st.energy_K) << '\n';
      std::cout << "energy_C: " << sp::format_number(st.energy_C) << '\n';
      if (curv_out) {
        json doc{{"geometry", std::string(sp::to_string(st.geometry))},
                 {"K", vector_json(st.K)},
                 {"C", vector_json(st.C)},
                 {"S", optional_json(st.S)},
                 {"lambda", optional_json(st.lambda)},
                 {"energy_K", st.energy_K},
                 {"energy_C", st.energy_C}};
        write_text(*curv_out, doc.dump(2) + "\n");
      }
      return kOk;
    }

    auto methods_for = [](const std::string& name, sp::Geometry g) {
      std::vector<sp::AssemblyMethod> out;
      if (name == "default") out.push_back(sp::default_method(g));
      else if (name == "both") out = {sp::AssemblyMethod::DualGeometry, sp::AssemblyMethod::FiniteDifference};
      else out.push_back(sp::parse_method(name));
      return out;
    };

    auto print_discrepancy = [](const std::vector<sp::OperatorSet>& sets) {
      if (sets.size() != 2) return;
      const double scale = sets[1].Lambda.cwiseAbs().maxCoeff();
      const double diff = (sets[0].Lambda - sets[1].Lambda).cwiseAbs().maxCoeff();
      std::cout << "max_discrepancy: " << sp::format_number(diff) << '\n';
      std::cout << "max_relative_discrepancy: " << sp::format_number(diff / scale) << '\n';
    };

    if (*operators || *spectrum) {
      const CommonInputs& in = *operators ? op_in : sp_in;
      const sp::Triangulation t = sp::load_triangulation(in.triangulation);
      const sp::PackingMetric m = load_metric(in, t);
      std::vector<sp::OperatorSet> sets;
      for (auto method : methods_for(*operators ? op_method : sp_method, m.geometry()))
        sets.push_back(sp::assemble(t, m, method));
      for (const auto& ops : sets) {
        std::cout << "method: " << sp::to_string(ops.method) << '\n';
        std::cout << "asymmetry_residual: " << sp::format_number(ops.asymmetry_residual) << '\n';
        if (*spectrum) {
          const sp::Spectrum s = sp::spectrum(ops);
          print_vector(std::cout, "eigenvalues", s.eigenvalues);
          std::cout << "lambda1: " << sp::format_number(s.lambda1) << '\n';
        }
      }
      print_discrepancy(sets);
      if (*operators && op_dump) {
        const sp::OperatorSet& ops = sets.front();
        const Eigen::MatrixXd* mat = nullptr;
        if (op_matrix == "Lambda") mat = &ops.Lambda;
        else if (op_matrix == "L") mat = &ops.L;
        else if (op_matrix == "L_tilde") mat = &ops.L_tilde;
        else if (op_matrix == "B") mat = &ops.B;
        else if (op_matrix == "G" && ops.G) mat = &*ops.G;
        else if (op_matrix == "dual_length" && ops.dual_length) mat = &*ops.dual_length;
        if (!mat) throw sp::ConfigError("matrix " + op_matrix + " is not available for this assembly");
        std::ostringstream os;
        sp::write_matrix(os, *mat);
        write_text(*op_dump, os.str());
      }
      return kOk;
    }

    if (*dqe) {
      const sp::Triangulation t = sp::load_triangulation(dqe_in.triangulation);
      const sp::PackingMetric m = load_metric(dqe_in, t);
      const sp::DqeStabilityReport rep = sp::dqe_stability_report(t, m, dqe_tol);
      std::cout << "lambda_star: " << sp::format_number(rep.lambda_star) << '\n';
      std::cout << "lambda1: " << sp::format_number(rep.lambda1) << '\n';
      std::cout << "residual: " << sp::format_number(rep.residual) << '\n';
      std::cout << "attractor_class: " << sp::to_string(rep.attractor_class) << '\n';
      print_vector(std::cout, "jacobian_eigenvalues", rep.jacobian_eigenvalues);
      return kOk;
    }

    if (*flow) {
      const sp::RunManifest mf = to_manifest(flow_opts);
      if (sp::needs_target(mf.kind) && !mf.target_path)
        throw sp::ConfigError(flow_opts.kind + " requires --target");
      const sp::FlowResult res = sp::execute_manifest(mf);
      if (flow_opts.manifest) write_text(*flow_opts.manifest, sp::serialize_manifest(mf));
      return finish_flow(res, flow_opts.out);
    }

    if (*replay) {
      const std::filesystem::path path(replay_path);
      const sp::RunManifest mf = sp::parse_manifest(sp::read_file(path));
      const sp::FlowResult res = sp::execute_manifest(mf);
      std::optional<std::string> out = replay_out;
      if (!out && !mf.trajectory_path.empty()) out = mf.trajectory_path;
      return finish_flow(res, out);
    }

    auto flow_config = [](const FlowOptions& o, const sp::PackingMetric& m) {
      sp::FlowConfig cfg{sp::FlowKind{sp::FlowType::CR4, std::nullopt}, m, o.step, {}, 1e-12,
                         o.log_stride};
      cfg.stop.tol = o.tol;
      cfg.stop.max_steps = o.max_steps;
      return cfg;
    };

    if (*find || *prescribe) {
      const FlowOptions& o = *find ? find_opts : pre_opts;
      const sp::Triangulation t = sp::load_triangulation(o.in.triangulation);
      sp::PackingMetric m = load_metric(o.in, t);
      if (o.perturb > 0.0)
        m = sp::PackingMetric(m.geometry(), sp::perturb_radii(m.r(), o.perturb, o.seed));
      const sp::FlowConfig cfg = flow_config(o, m);
      const sp::FlowResult res =
          *find ? sp::find_dqe(t, m, &cfg)
                : sp::prescribe_curvature(t, sp::parse_target(sp::read_file(*o.target)), m,
                                          sp::parse_strategy(strategy), &cfg);
      return finish_flow(res, o.out);
    }
  } catch (const sp::DegenerateTet& e) {
    std::cerr << "inadmissible metric: " << e.what() << '\n';
    return kInadmissible;
  } catch (const sp::InadmissibleInitialMetric& e) {
    std::cerr << "inadmissible metric: " << e.what() << '\n';
    return kInadmissible;
  } catch (const sp::LineSearchStalled& e) {
    std::cerr << "line search stalled: " << e.what() << '\n';
    return kDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only if
// every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "spherepack/complex.hpp"
#include "spherepack/curvature.hpp"
#include "spherepack/errors.hpp"
#include "spherepack/flows.hpp"
#include "spherepack/io.hpp"
#include "spherepack/operators.hpp"

using namespace spherepack;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

PackingMetric euclid(const Eigen::VectorXd& r) { return PackingMetric(Geometry::Euclidean, r); }

const char* const kComplexes[] = {"pentachoron", "cross16"};

// 1. Golden curvature on the symmetric pentachoron.
Outcome golden_curvature() {
  const Triangulation t = generate_builtin("pentachoron");
  const Eigen::VectorXd K = cr_curvature(t, euclid(Eigen::VectorXd::Ones(5))).K;
  const double closed = oracle::pentachoron_constant_K();
  const SolidAngles a = oracle::embedded_solid_angles({{1, 1, 1, 1}});
  const double from_embed = 4 * M_PI - 4 * a[0];
  double err = 0;
  for (int i = 0; i < 5; ++i)
    err = std::max({err, std::abs(K[i] - closed) / closed, std::abs(K[i] - from_embed) / from_embed});
  return {err <= 1e-10, "max rel err " + fmt(err) + " (K = " + format_number(K[0]) + ")"};
}

// 2. Schlafli: finite-difference dS/dr equals K.
Outcome schlafli() {
  std::mt19937_64 gen(2024);
  double worst = 0;
  int metrics = 0;
  for (const char* name : kComplexes) {
    const Triangulation t = generate_builtin(name);
    const Eigen::VectorXd base = Eigen::VectorXd::Ones(t.vertex_count());
    for (int n = 0; n < 100; ++n, ++metrics) {
      const Eigen::VectorXd r = oracle::random_admissible_metric(t, Geometry::Euclidean, gen, 0.4, base, 1e-2);
      const Eigen::VectorXd K = curvature_vector(t, euclid(r));
      const Eigen::VectorXd g = oracle::fd_gradient(
          r, [&](const Eigen::VectorXd& x) { return curvature_vector(t, euclid(x)).dot(x); });
      for (Eigen::Index i = 0; i < r.size(); ++i) worst = std::max(worst, std::abs(g[i] - K[i]) / std::abs(K[i]));
    }
  }
  return {worst <= 1e-5, std::to_string(metrics) + " metrics, max rel err " + fmt(worst)};
}

// 3. Operator structure and cross-validation of the two assemblies.
Outcome operator_structure() {
  std::mt19937_64 gen(3033);
  double kernel_res = 0, sym = 0, min_eig = 0, kernel_angle = 0, disagreement = 0;
  bool rank_ok = true;
  int metrics = 0;
  for (const char* name : kComplexes) {
    const Triangulation t = generate_builtin(name);
    const Eigen::Index n = t.vertex_count();
    for (int k = 0; k < 50; ++k, ++metrics) {
      const Eigen::VectorXd base = Eigen::VectorXd::Ones(n);
      const PackingMetric m = euclid(oracle::random_admissible_metric(t, Geometry::Euclidean, gen, 0.4, base, 1e-2));
      const OperatorSet dual = assemble(t, m, AssemblyMethod::DualGeometry);
      const OperatorSet fd = assemble(t, m, AssemblyMethod::FiniteDifference);
      const double lmax = dual.L.cwiseAbs().maxCoeff();
      const double scale = dual.Lambda.cwiseAbs().maxCoeff();
      kernel_res = std::max({kernel_res, (dual.L * base).cwiseAbs().maxCoeff() / lmax,
                             (m.r().transpose() * dual.L).cwiseAbs().maxCoeff() / (lmax * m.r().maxCoeff())});
      sym = std::max(sym, (dual.Lambda - dual.Lambda.transpose()).cwiseAbs().maxCoeff() / scale);
      const Spectrum sp = spectrum(dual);
      min_eig = std::min(min_eig, sp.eigenvalues[0] / scale);
      int rank = 0;
      for (Eigen::Index i = 0; i < n; ++i) rank += sp.eigenvalues[i] > 1e-9 * scale;
      rank_ok = rank_ok && rank == n - 1;
      const Eigen::VectorXd v = sp.eigenvectors.col(0);
      kernel_angle = std::max(kernel_angle,
                              std::acos(std::min(1.0, std::abs(v.dot(m.r())) / (v.norm() * m.r().norm()))));
      disagreement = std::max(disagreement, (dual.Lambda - fd.Lambda).cwiseAbs().maxCoeff() / scale);
    }
  }
  const bool pass = kernel_res <= 1e-9 && sym <= 1e-8 && min_eig >= -1e-9 && rank_ok && kernel_angle <= 1e-6 &&
                    disagreement <= 1e-5;
  return {pass, std::to_string(metrics) + " metrics, kernel res " + fmt(kernel_res) + ", asym " + fmt(sym) +
                    ", min eig " + fmt(min_eig) + ", rank " + (rank_ok ? "N-1" : "wrong") + ", kernel angle " +
                    fmt(kernel_angle) + ", dual vs fd " + fmt(disagreement)};
}

// 4. Euler identity for the finite-difference solid-angle derivatives.
Outcome euler_identity() {
  std::mt19937_64 gen(4044);
  double worst = 0;
  for (int n = 0; n < 200; ++n) {
    const TetRadii rad = oracle::random_admissible_tet(gen);
    const Mat4 J = oracle::fd_solid_angle_jacobian(rad, [](const TetRadii& x) { return solid_angles(x); });
    for (int w = 0; w < 4; ++w) {
      double sum = 0, scale = 0;
      for (int v = 0; v < 4; ++v) {
        sum += rad[v] * J[w][v];
        scale = std::max(scale, std::abs(rad[v] * J[w][v]));
      }
      worst = std::max(worst, std::abs(sum) / scale);
    }
  }
  return {worst <= 1e-7, "200 tets, max scaled residual " + fmt(worst)};
}

struct SuiteStats {
  int runs = 0, converged = 0;
  double residual = 0, drift = 0;
  std::size_t violations = 0;
  std::vector<std::string> verdicts;
};

std::string summarize(const SuiteStats& s) {
  std::string v;
  for (const auto& x : s.verdicts) v += (v.empty() ? "" : ",") + x;
  return std::to_string(s.converged) + "/" + std::to_string(s.runs) + " converged, max |K - lambda r| " +
         fmt(s.residual) + ", max drift " + fmt(s.drift) + ", monotonicity violations " +
         std::to_string(s.violations) + (v.empty() ? "" : " [" + v + "]");
}

// Runs `type` from 20 seeded 5% perturbations of the constant metric on each builtin.
SuiteStats perturbation_suite(FlowType type, bool with_target, double wall_seconds = 5.0) {
  SuiteStats s;
  for (const char* name : kComplexes) {
    const Triangulation t = generate_builtin(name);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(t.vertex_count());
    std::optional<Eigen::VectorXd> target;
    if (with_target) target = curvature_vector(t, euclid(ones));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      FlowConfig cfg{FlowKind{type, target}, euclid(perturb_radii(ones, 0.05, seed))};
      cfg.stop.max_wall_seconds = wall_seconds;
      const FlowResult res = run_flow(t, cfg);
      ++s.runs;
      if (res.verdict == Verdict::Converged) {
        ++s.converged;
        s.residual = std::max(s.residual, res.dqe ? res.dqe->residual : INFINITY);
      } else {
        s.verdicts.push_back(std::string(name) + "#" + std::to_string(seed) + ":" + std::string(to_string(res.verdict)));
      }
      s.drift = std::max({s.drift, res.drift.product_r.value_or(0.0), res.drift.norm_r_sq.value_or(0.0)});
      s.violations += res.drift.monotonicity_violations;
    }
  }
  return s;
}

// 5. Fourth-order flow convergence (normalized flow towards K* of the symmetric metric).
Outcome cr4_convergence() {
  const SuiteStats s = perturbation_suite(FlowType::CR4Normalized, true);
  const bool pass = s.converged == s.runs && s.residual <= 1e-8 && s.drift <= 1e-6 && s.violations == 0;
  return {pass, summarize(s)};
}

// Informational: unnormalized CR4 from the same starts, short wall budget per run.
std::string cr4_unnormalized_info() {
  return summarize(perturbation_suite(FlowType::CR4, false, 0.5));
}

// 6. Normalized second-order flow convergence.
Outcome cr2_normalized_convergence() {
  const SuiteStats s = perturbation_suite(FlowType::CR2Normalized, false);
  const bool pass = s.converged == s.runs && s.residual <= 1e-8 && s.drift <= 1e-6 && s.violations == 0;
  return {pass, summarize(s)};
}

// 7. G-flow closed form from the constant pentachoron metric.
Outcome g_flow_closed_form() {
  const Triangulation t = generate_builtin("pentachoron");
  FlowConfig cfg{FlowKind{FlowType::G4, std::nullopt}, euclid(Eigen::VectorXd::Ones(5))};
  cfg.step.dt0 = 1e-4;
  cfg.step.dt_max = 5e-4;
  cfg.stop.max_steps = 100;
  const FlowResult res = run_flow(t, cfg);
  const double lambda = res.trajectory.front().energy / 5.0;
  double worst = 0;
  int samples = 0;
  for (const auto& s : res.trajectory) {
    if (s.t > 0.01) break;
    const double want = 1 / std::sqrt(1 + 2 * lambda * s.t);
    worst = std::max(worst, (s.r.array() / want - 1).abs().maxCoeff());
    ++samples;
  }
  const bool covered = res.final_time >= 0.01;
  return {covered && worst <= 1e-6 && res.drift.monotonicity_violations == 0,
          "lambda " + format_number(lambda) + ", " + std::to_string(samples) + " samples on [0, 0.01], max rel err " +
              fmt(worst)};
}

// 8. Prescribed curvature recovery, both targets and both strategies.
Outcome prescribed_curvature() {
  const Triangulation t = generate_builtin("pentachoron");
  std::mt19937_64 gen(8088);
  const Eigen::VectorXd r_bar =
      oracle::random_admissible_metric(t, Geometry::Euclidean, gen, 0.1, Eigen::VectorXd::Ones(5), 1e-2);
  const Eigen::VectorXd start = perturb_radii(r_bar, 0.02, 88);
  Eigen::VectorXd matched = start;
  matched *= std::exp((r_bar.array().log().sum() - start.array().log().sum()) / 5.0);

  const CurvatureState bar = cr_curvature(t, euclid(r_bar));
  const PrescribedTarget cr{PrescribedTarget::Kind::CR, bar.K};
  const PrescribedTarget g{PrescribedTarget::Kind::G, bar.C};

  double err_cr = INFINITY, err_g = INFINITY, agree = INFINITY;
  bool converged = false;
  try {
    const FlowResult cr_flow = prescribe_curvature(t, cr, euclid(matched), PrescribeStrategy::Flow);
    const FlowResult cr_gd = prescribe_curvature(t, cr, euclid(matched), PrescribeStrategy::GradientDescent);
    const FlowResult g_flow = prescribe_curvature(t, g, euclid(start), PrescribeStrategy::Flow);
    const FlowResult g_gd = prescribe_curvature(t, g, euclid(start), PrescribeStrategy::GradientDescent);
    converged = cr_flow.verdict == Verdict::Converged && cr_gd.verdict == Verdict::Converged &&
                g_flow.verdict == Verdict::Converged && g_gd.verdict == Verdict::Converged;
    err_cr = (cr_flow.final_metric.r() - r_bar).cwiseAbs().maxCoeff();
    err_g = (g_flow.final_metric.r() - r_bar).cwiseAbs().maxCoeff();
    agree = std::max((cr_flow.final_metric.r() - cr_gd.final_metric.r()).cwiseAbs().maxCoeff(),
                     (g_flow.final_metric.r() - g_gd.final_metric.r()).cwiseAbs().maxCoeff());
  } catch (const std::exception& e) {
    return {false, std::string("threw: ") + e.what()};
  }
  return {converged && err_cr <= 1e-6 && err_g <= 1e-6 && agree <= 1e-6,
          "CR err " + fmt(err_cr) + ", G err " + fmt(err_g) + ", strategies differ by " + fmt(agree)};
}

// 9. Hyperbolic positivity and monotone hyperbolic CR4.
Outcome hyperbolic_positivity() {
  const Triangulation t = generate_builtin("pentachoron");
  std::mt19937_64 gen(9099);
  double min_eig = INFINITY;
  for (int k = 0; k < 50; ++k) {
    const PackingMetric m(Geometry::Hyperbolic, oracle::random_admissible_metric(
                                                    t, Geometry::Hyperbolic, gen, 0.5, Eigen::VectorXd::Constant(5, 0.8)));
    const Spectrum sp = spectrum(assemble(t, m));
    min_eig = std::min(min_eig, sp.eigenvalues[0]);
  }
  std::size_t violations = 0;
  int decreased = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const PackingMetric m(Geometry::Hyperbolic, perturb_radii(Eigen::VectorXd::Constant(5, 0.8), 0.2, seed));
    FlowConfig cfg{FlowKind{FlowType::CR4, std::nullopt}, m};
    cfg.stop.max_steps = 300;
    const FlowResult res = run_flow(t, cfg);
    violations += res.drift.monotonicity_violations;
    decreased += res.final_energy < res.trajectory.front().energy;
  }
  return {min_eig > 0 && violations == 0 && decreased == 10,
          "50 metrics, min eigenvalue " + fmt(min_eig) + "; 10 runs, monotonicity violations " +
              std::to_string(violations)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 10. Replaying manifests reproduces the trajectory CSV byte for byte, through
// the library and, when available, through the command-line tool.
Outcome reproducibility(const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / ("spherepack_accept_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  std::ofstream(dir / "ones5.json") << serialize_metric(Eigen::VectorXd::Ones(5));
  std::ofstream(dir / "ones8.json") << serialize_metric(Eigen::VectorXd::Ones(8));
  {
    const Triangulation t = generate_builtin("pentachoron");
    std::ofstream(dir / "target.json")
        << "{\"K\": [" << [&] {
             std::string s;
             const Eigen::VectorXd K = curvature_vector(t, euclid(Eigen::VectorXd::Ones(5)));
             for (Eigen::Index i = 0; i < K.size(); ++i) s += (i ? "," : "") + format_number(K[i]);
             return s;
           }() << "]}";
  }

  struct Case {
    const char* tri;
    const char* metric;
    FlowType kind;
    bool target;
  };
  const Case cases[] = {{"builtin:pentachoron", "ones5.json", FlowType::CR4, false},
                        {"builtin:pentachoron", "ones5.json", FlowType::CR4Normalized, true},
                        {"builtin:cross16", "ones8.json", FlowType::CR2Normalized, false},
                        {"builtin:cross16", "ones8.json", FlowType::CR4RCoord, false},
                        {"builtin:pentachoron", "ones5.json", FlowType::G4, false}};
  int identical = 0, total = 0;
  for (const Case& c : cases) {
    RunManifest mf;
    mf.triangulation_path = c.tri;
    mf.metric_path = c.metric;
    if (c.target) mf.target_path = "target.json";
    mf.kind = c.kind;
    mf.seed = 10;
    mf.perturb = 0.05;
    mf.stop.max_steps = 40;
    mf.trajectory_path = "out.csv";
    auto csv = [&](const RunManifest& x) {
      std::ostringstream os;
      write_trajectory_csv(os, execute_manifest(x, dir));
      return os.str();
    };
    const std::string first = csv(mf);
    const std::string second = csv(parse_manifest(serialize_manifest(mf)));
    ++total;
    identical += !first.empty() && first == second;
  }

  std::string cli_note = "; command-line replay not checked";
  if (!cli.empty()) {
    const fs::path manifest = dir / "run.json", a = dir / "a.csv", b = dir / "b.csv";
    const std::string run = "\"" + cli + "\" flow builtin:cross16 \"" + (dir / "ones8.json").string() +
                            "\" --kind cr4 --perturb 0.05 --seed 7 --max-steps 30 --out \"" + a.string() +
                            "\" --manifest \"" + manifest.string() + "\" > /dev/null";
    const std::string rerun =
        "\"" + cli + "\" replay \"" + manifest.string() + "\" --out \"" + b.string() + "\" > /dev/null";
    // Both runs stop on the step budget (exit 5); only the CSVs are compared.
    const int first_status = std::system(run.c_str());
    const int second_status = std::system(rerun.c_str());
    (void)first_status;
    (void)second_status;
    ++total;
    const std::string x = slurp(a), y = slurp(b);
    identical += !x.empty() && x == y;
    cli_note = "; command-line flow/replay " + std::string(!x.empty() && x == y ? "identical" : "differs");
  }
  fs::remove_all(dir);
  return {identical == total, std::to_string(identical) + "/" + std::to_string(total) + " replays identical" + cli_note};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? fs::absolute(argv[1]).string() : "";
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "golden curvature", 1, golden_curvature},
      {2, "Schlafli gradient", 10, schlafli},
      {3, "operator structure", 10, operator_structure},
      {4, "Euler identity", 5, euler_identity},
      {5, "CR4 convergence", 30, cr4_convergence},
      {6, "CR2_normalized convergence", 30, cr2_normalized_convergence},
      {7, "G-flow closed form", 5, g_flow_closed_form},
      {8, "prescribed curvature", 30, prescribed_curvature},
      {9, "hyperbolic positivity", 20, hyperbolic_positivity},
      {10, "reproducibility", 30, [&] { return reproducibility(cli); }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs <= c.budget_seconds;
    const bool pass = out.pass && in_budget;
    failures += !pass;
    std::printf("[%s] criterion %d (%s): %s; %.2f s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(),
                secs, in_budget ? "" : " (over budget)");
    std::fflush(stdout);
    if (c.id == 5) {
      std::printf("[INFO] unnormalized CR4 from the same starts: %s\n", cr4_unnormalized_info().c_str());
      std::fflush(stdout);
    }
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

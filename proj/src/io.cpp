#include "spherepack/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "spherepack/errors.hpp"

namespace spherepack {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Triangulation load_triangulation(const std::string& source,
                                 const std::filesystem::path& base_dir) {
  constexpr std::string_view prefix = "builtin:";
  if (source.rfind(prefix, 0) == 0) return generate_builtin(source.substr(prefix.size()));
  const std::filesystem::path path(source);
  return parse_triangulation(
      read_file(path.is_absolute() || base_dir.empty() ? path : base_dir / path));
}

namespace {

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

Eigen::VectorXd number_array(const json& arr, const char* what) {
  if (!arr.is_array() || arr.empty())
    throw ParseError(std::string(what) + ": expected a non-empty array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ParseError(std::string(what) + ": entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

}  // namespace

Eigen::VectorXd parse_metric(std::string_view text) {
  const json doc = parse_json(text, "metric");
  if (!doc.is_object() || !doc.contains("r")) throw ParseError("metric: expected {\"r\": [...]}");
  return number_array(doc["r"], "metric");
}

std::string serialize_metric(const Eigen::VectorXd& r) {
  std::string out = "{\"r\": [";
  for (Eigen::Index i = 0; i < r.size(); ++i) out += (i ? ", " : "") + format_number(r[i]);
  return out + "]}\n";
}

PrescribedTarget parse_target(std::string_view text) {
  const json doc = parse_json(text, "target");
  if (doc.is_object() && doc.contains("K") && !doc.contains("C"))
    return {PrescribedTarget::Kind::CR, number_array(doc["K"], "target")};
  if (doc.is_object() && doc.contains("C") && !doc.contains("K"))
    return {PrescribedTarget::Kind::G, number_array(doc["C"], "target")};
  throw ParseError("target: expected exactly one of {\"K\": [...]} or {\"C\": [...]}");
}

Eigen::VectorXd perturb_radii(const Eigen::VectorXd& r, double amplitude, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Eigen::VectorXd out = r;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    out[i] *= std::exp(amplitude * (2.0 * unit - 1.0));
  }
  return out;
}

void write_trajectory_csv(std::ostream& os, const FlowResult& result) {
  if (result.trajectory.empty()) return;
  const Eigen::Index n = result.trajectory.front().r.size();
  os << "step,t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",r_" << i;
  for (Eigen::Index i = 0; i < n; ++i) os << ",K_" << i;
  os << ",S,energy,drift_product_r,drift_norm_r_sq\n";

  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const TrajectorySample& s : result.trajectory) {
    os << s.step << ',' << format_number(s.t);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_number(s.r[i]);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_number(s.K[i]);
    os << ',' << opt(s.S) << ',' << format_number(s.energy) << ',' << opt(s.drift_product_r)
       << ',' << opt(s.drift_norm_r_sq) << '\n';
  }
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_number(m(i, j));
    os << '\n';
  }
}

std::string serialize_manifest(const RunManifest& mf) {
  json doc;
  doc["tool"] = "spherepack";
  doc["tool_version"] = mf.tool_version;
  doc["inputs"] = {{"triangulation", mf.triangulation_path},
                   {"metric", mf.metric_path},
                   {"target", mf.target_path ? json(*mf.target_path) : json(nullptr)}};
  doc["geometry"] = std::string(to_string(mf.geometry));
  doc["kind"] = std::string(to_string(mf.kind));
  doc["seed"] = mf.seed;
  doc["perturb"] = mf.perturb;
  doc["config"] = {{"dt0", mf.step.dt0},
                   {"dt_min", mf.step.dt_min},
                   {"dt_max", mf.step.dt_max},
                   {"rel_tol", mf.step.rel_tol},
                   {"tol", mf.stop.tol ? json(*mf.stop.tol) : json(nullptr)},
                   {"max_steps", mf.stop.max_steps},
                   {"max_wall_seconds", mf.stop.max_wall_seconds},
                   {"admissibility_floor", mf.admissibility_floor},
                   {"log_stride", mf.log_stride}};
  doc["outputs"] = {{"trajectory", mf.trajectory_path}};
  return doc.dump(2) + "\n";
}

RunManifest parse_manifest(std::string_view text) {
  const json doc = parse_json(text, "manifest");
  RunManifest mf;
  try {
    const json& in = doc.at("inputs");
    mf.triangulation_path = in.at("triangulation").get<std::string>();
    mf.metric_path = in.at("metric").get<std::string>();
    if (in.contains("target") && !in["target"].is_null())
      mf.target_path = in["target"].get<std::string>();
    mf.geometry = parse_geometry(doc.at("geometry").get<std::string>());
    mf.kind = parse_flow_type(doc.at("kind").get<std::string>());
    mf.seed = doc.at("seed").get<std::uint64_t>();
    mf.perturb = doc.at("perturb").get<double>();
    const json& c = doc.at("config");
    mf.step.dt0 = c.at("dt0").get<double>();
    mf.step.dt_min = c.at("dt_min").get<double>();
    mf.step.dt_max = c.at("dt_max").get<double>();
    mf.step.rel_tol = c.at("rel_tol").get<double>();
    if (!c.at("tol").is_null()) mf.stop.tol = c["tol"].get<double>();
    mf.stop.max_steps = c.at("max_steps").get<std::size_t>();
    mf.stop.max_wall_seconds = c.at("max_wall_seconds").get<double>();
    mf.admissibility_floor = c.at("admissibility_floor").get<double>();
    mf.log_stride = c.at("log_stride").get<std::size_t>();
    mf.trajectory_path = doc.at("outputs").at("trajectory").get<std::string>();
    mf.tool_version = doc.at("tool_version").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  return mf;
}

FlowResult execute_manifest(const RunManifest& mf, const std::filesystem::path& base_dir) {
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  const Triangulation tri = load_triangulation(mf.triangulation_path, base_dir);
  Eigen::VectorXd r = parse_metric(read_file(resolve(mf.metric_path)));
  if (mf.perturb > 0.0) r = perturb_radii(r, mf.perturb, mf.seed);

  FlowKind kind{mf.kind, std::nullopt};
  if (mf.target_path) {
    PrescribedTarget target = parse_target(read_file(resolve(*mf.target_path)));
    const bool wants_g = mf.kind == FlowType::G4Prescribed;
    if (wants_g != (target.kind == PrescribedTarget::Kind::G))
      throw ConfigError(std::string(to_string(mf.kind)) + " needs a " + (wants_g ? "\"C\"" : "\"K\"") +
                        " target");
    kind.target = std::move(target.values);
  }

  FlowConfig cfg{kind, PackingMetric(mf.geometry, r), mf.step, mf.stop, mf.admissibility_floor,
                 mf.log_stride};
  return run_flow(tri, cfg);
}

}  // namespace spherepack

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "spherepack/curvature.hpp"
#include "spherepack/flows.hpp"

namespace spherepack {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Shortest round-trip form with 17 significant digits, C locale.
std::string format_number(double x);

std::string read_file(const std::filesystem::path& path);

/// Reads a triangulation file, or generates one for "builtin:pentachoron" /
/// "builtin:cross16".
Triangulation load_triangulation(const std::string& source,
                                 const std::filesystem::path& base_dir = {});

/// `{"r": [...]}`.
Eigen::VectorXd parse_metric(std::string_view text);
std::string serialize_metric(const Eigen::VectorXd& r);

/// `{"K": [...]}` or `{"C": [...]}`.
PrescribedTarget parse_target(std::string_view text);

/// Multiplies each radius by exp(eta_i), eta_i uniform in (-amplitude,
/// amplitude) drawn from mt19937_64 seeded with `seed`. The uniform variate
/// uses the top 53 bits of each draw so results do not depend on the standard
/// library's distribution implementation.
Eigen::VectorXd perturb_radii(const Eigen::VectorXd& r, double amplitude, std::uint64_t seed);

/// Columns: step, t, r_0..r_{N-1}, K_0..K_{N-1}, S, energy, drift_product_r,
/// drift_norm_r_sq. Absent values are empty fields.
void write_trajectory_csv(std::ostream& os, const FlowResult& result);

/// Row-major, one row per line, comma separated, 17 significant digits.
void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);

/// Everything needed to replay a `flow` run.
struct RunManifest {
  std::string triangulation_path;
  std::string metric_path;
  std::optional<std::string> target_path;
  Geometry geometry = Geometry::Euclidean;
  FlowType kind = FlowType::CR4;
  std::uint64_t seed = 0;
  double perturb = 0.0;
  StepControl step{};
  StopCriteria stop{};
  double admissibility_floor = 1e-12;
  std::size_t log_stride = 1;
  std::string trajectory_path;
  std::string tool_version{kToolVersion};
};

std::string serialize_manifest(const RunManifest& manifest);
RunManifest parse_manifest(std::string_view text);

/// Loads the inputs named in the manifest, applies the perturbation and runs
/// the flow. Paths are resolved relative to `base_dir`.
FlowResult execute_manifest(const RunManifest& manifest,
                            const std::filesystem::path& base_dir = {});

}  // namespace spherepack

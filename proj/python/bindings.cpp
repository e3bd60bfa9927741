#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spherepack/complex.hpp"
#include "spherepack/curvature.hpp"
#include "spherepack/errors.hpp"
#include "spherepack/flows.hpp"
#include "spherepack/io.hpp"
#include "spherepack/operators.hpp"

namespace py = pybind11;
namespace sp = spherepack;

namespace {

sp::PackingMetric metric(const Eigen::VectorXd& r, const std::string& geometry) {
  return sp::PackingMetric(sp::parse_geometry(geometry), r);
}

sp::FlowConfig flow_config(const std::string& kind, const Eigen::VectorXd& r, const std::string& geometry,
                           std::optional<Eigen::VectorXd> target, std::optional<double> tol,
                           std::size_t max_steps, double dt0, double dt_max, std::size_t log_stride) {
  sp::FlowConfig cfg{sp::FlowKind{sp::parse_flow_type(kind), std::move(target)}, metric(r, geometry)};
  cfg.stop.tol = tol;
  cfg.stop.max_steps = max_steps;
  cfg.step.dt0 = dt0;
  cfg.step.dt_max = dt_max;
  cfg.log_stride = log_stride;
  return cfg;
}

py::dict result_dict(const sp::FlowResult& res) {
  py::dict d;
  d["verdict"] = std::string(sp::to_string(res.verdict));
  d["kind"] = std::string(sp::to_string(res.type));
  d["r"] = res.final_metric.r();
  d["steps"] = res.steps;
  d["rejected_steps"] = res.rejected_steps;
  d["final_time"] = res.final_time;
  d["driving_norm"] = res.driving_norm;
  d["energy"] = res.final_energy;
  d["monotonicity_violations"] = res.drift.monotonicity_violations;
  d["drift_product_r"] = res.drift.product_r;
  d["drift_norm_r_sq"] = res.drift.norm_r_sq;
  d["target_residual"] = res.target_residual;
  if (res.dqe) {
    d["dqe_lambda"] = res.dqe->lambda;
    d["dqe_residual"] = res.dqe->residual;
    d["dqe_sign"] = std::string(sp::to_string(res.dqe->sign));
  }
  py::list t, r, K, energy;
  for (const auto& s : res.trajectory) {
    t.append(s.t);
    r.append(s.r);
    K.append(s.K);
    energy.append(s.energy);
  }
  d["t"] = t;
  d["trajectory_r"] = r;
  d["trajectory_K"] = K;
  d["trajectory_energy"] = energy;
  d["message"] = res.message;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Combinatorial curvature and curvature flows for sphere packing metrics";

  py::register_exception<sp::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<sp::DegenerateTet>(m, "DegenerateTet", PyExc_ArithmeticError);
  py::register_exception<sp::InadmissibleInitialMetric>(m, "InadmissibleInitialMetric", PyExc_ValueError);
  py::register_exception<sp::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<sp::NotDQE>(m, "NotDQE", PyExc_ValueError);
  py::register_exception<sp::LineSearchStalled>(m, "LineSearchStalled", PyExc_RuntimeError);

  py::class_<sp::Triangulation>(m, "Triangulation")
      .def(py::init<int, std::vector<sp::Tet>>(), py::arg("vertices"), py::arg("tets"))
      .def_static("parse", [](const std::string& text) { return sp::parse_triangulation(text); })
      .def_static("builtin", [](const std::string& name) { return sp::generate_builtin(name); })
      .def_static("load", [](const std::string& source) { return sp::load_triangulation(source); })
      .def_property_readonly("vertex_count", &sp::Triangulation::vertex_count)
      .def_property_readonly("tets", &sp::Triangulation::tets)
      .def_property_readonly("edges", &sp::Triangulation::edges)
      .def_property_readonly("faces", &sp::Triangulation::faces)
      .def("to_json", [](const sp::Triangulation& t) { return sp::serialize_triangulation(t); })
      .def("validate", [](const sp::Triangulation& t) {
        const sp::ValidationReport rep = sp::validate(t);
        py::list violations;
        for (const auto& v : rep.violations) violations.append(v.message);
        py::dict d;
        d["ok"] = rep.ok();
        d["counts"] = py::make_tuple(rep.vertex_count, rep.edge_count, rep.face_count, rep.tet_count);
        d["violations"] = violations;
        return d;
      })
      .def("__eq__", &sp::Triangulation::operator==)
      .def("__repr__", [](const sp::Triangulation& t) {
        return "<Triangulation vertices=" + std::to_string(t.vertex_count()) +
               " tets=" + std::to_string(t.tets().size()) + ">";
      });

  m.def("solid_angles", [](const std::array<double, 4>& r, const std::string& geometry) {
        return sp::tet_solid_angles(sp::parse_geometry(geometry), sp::TetRadii{r});
      }, py::arg("r"), py::arg("geometry") = "euclidean");

  m.def("realizability", [](const std::array<double, 4>& r) { return sp::realizability(sp::TetRadii{r}); });

  m.def("curvature", [](const sp::Triangulation& t, const Eigen::VectorXd& r, const std::string& geometry) {
        const sp::CurvatureState s = sp::cr_curvature(t, metric(r, geometry));
        py::dict d;
        d["K"] = s.K;
        d["C"] = s.C;
        d["S"] = s.S;
        d["lambda"] = s.lambda;
        d["energy_K"] = s.energy_K;
        d["energy_C"] = s.energy_C;
        return d;
      }, py::arg("triangulation"), py::arg("r"), py::arg("geometry") = "euclidean");

  m.def("operators", [](const sp::Triangulation& t, const Eigen::VectorXd& r, const std::string& geometry,
                        const std::string& method) {
        const sp::PackingMetric pm = metric(r, geometry);
        const sp::OperatorSet ops = method == "default" ? sp::assemble(t, pm)
                                                        : sp::assemble(t, pm, sp::parse_method(method));
        py::dict d;
        d["method"] = std::string(sp::to_string(ops.method));
        d["Lambda"] = ops.Lambda;
        d["L"] = ops.L;
        d["L_tilde"] = ops.L_tilde;
        d["B"] = ops.B;
        d["G"] = ops.G;
        d["dual_length"] = ops.dual_length;
        d["asymmetry_residual"] = ops.asymmetry_residual;
        return d;
      }, py::arg("triangulation"), py::arg("r"), py::arg("geometry") = "euclidean", py::arg("method") = "default");

  m.def("spectrum", [](const sp::Triangulation& t, const Eigen::VectorXd& r, const std::string& geometry) {
        const sp::Spectrum s = sp::spectrum(sp::assemble(t, metric(r, geometry)));
        return py::make_tuple(s.eigenvalues, s.lambda1);
      }, py::arg("triangulation"), py::arg("r"), py::arg("geometry") = "euclidean");

  m.def("dqe_stability_report", [](const sp::Triangulation& t, const Eigen::VectorXd& r, double tol) {
        const sp::DqeStabilityReport rep = sp::dqe_stability_report(t, metric(r, "euclidean"), tol);
        py::dict d;
        d["lambda_star"] = rep.lambda_star;
        d["lambda1"] = rep.lambda1;
        d["residual"] = rep.residual;
        d["attractor_class"] = std::string(sp::to_string(rep.attractor_class));
        d["jacobian_eigenvalues"] = rep.jacobian_eigenvalues;
        return d;
      }, py::arg("triangulation"), py::arg("r"), py::arg("tol") = 1e-8);

  m.def("run_flow", [](const sp::Triangulation& t, const std::string& kind, const Eigen::VectorXd& r,
                       const std::string& geometry, std::optional<Eigen::VectorXd> target,
                       std::optional<double> tol, std::size_t max_steps, double dt0, double dt_max,
                       std::size_t log_stride) {
        const sp::FlowConfig cfg =
            flow_config(kind, r, geometry, std::move(target), tol, max_steps, dt0, dt_max, log_stride);
        sp::FlowResult res = [&] {
          py::gil_scoped_release release;
          return sp::run_flow(t, cfg);
        }();
        return result_dict(res);
      }, py::arg("triangulation"), py::arg("kind"), py::arg("r"), py::arg("geometry") = "euclidean",
      py::arg("target") = py::none(), py::arg("tol") = py::none(), py::arg("max_steps") = 200000,
      py::arg("dt0") = 1e-3, py::arg("dt_max") = 1.0, py::arg("log_stride") = 1);

  m.def("find_dqe", [](const sp::Triangulation& t, const Eigen::VectorXd& r, std::size_t max_steps) {
        sp::FlowConfig cfg = flow_config("cr4", r, "euclidean", std::nullopt, std::nullopt, max_steps, 1e-3, 1.0, 1);
        return result_dict(sp::find_dqe(t, cfg.initial, &cfg));
      }, py::arg("triangulation"), py::arg("r"), py::arg("max_steps") = 200000);

  m.def("prescribe_curvature", [](const sp::Triangulation& t, const Eigen::VectorXd& r,
                                  std::optional<Eigen::VectorXd> K, std::optional<Eigen::VectorXd> C,
                                  const std::string& strategy) {
        if (K.has_value() == C.has_value()) throw sp::ConfigError("give exactly one of K or C");
        const sp::PrescribedTarget target = K ? sp::PrescribedTarget{sp::PrescribedTarget::Kind::CR, *K}
                                              : sp::PrescribedTarget{sp::PrescribedTarget::Kind::G, *C};
        return result_dict(
            sp::prescribe_curvature(t, target, metric(r, "euclidean"), sp::parse_strategy(strategy)));
      }, py::arg("triangulation"), py::arg("r"), py::arg("K") = py::none(), py::arg("C") = py::none(),
      py::arg("strategy") = "flow");

  m.def("perturb_radii", &sp::perturb_radii, py::arg("r"), py::arg("amplitude"), py::arg("seed"));

  m.attr("__version__") = std::string(sp::kToolVersion);
}

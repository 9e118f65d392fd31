#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "stathyp/deformation.hpp"
#include "stathyp/dynamics.hpp"
#include "stathyp/error.hpp"
#include "stathyp/geometry.hpp"
#include "stathyp/integral.hpp"
#include "stathyp/io.hpp"
#include "stathyp/model.hpp"
#include "stathyp/potential.hpp"
#include "stathyp/verify.hpp"

namespace py = pybind11;
using namespace stathyp;

namespace {

py::dict evaluation_dict(const Evaluation& e) {
  py::dict d;
  d["x"] = e.x;
  d["f"] = e.f;
  d["grad"] = e.grad;
  d["F"] = e.F;
  d["w"] = e.w;
  d["S"] = e.S;
  d["fbar"] = e.fbar;
  d["fbar_i"] = e.fbar_i;
  d["fbar_ik"] = e.fbar_ik;
  return d;
}

py::dict geometry_dict(const GeometryReport& r) {
  py::dict d;
  d["g"] = r.g;
  d["det_g"] = r.det_g;
  d["X"] = r.X;
  d["N"] = r.N;
  d["hessF"] = r.hessF;
  d["Omega"] = r.Omega;
  d["W"] = r.W;
  d["kappa"] = r.kappa;
  d["K"] = r.K;
  d["K_weingarten"] = r.K_weingarten;
  d["scalar_R"] = r.scalar_R;
  d["S"] = r.S;
  d["S_geom"] = r.S_geom;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Entropy geometry of log-sum-exp surfaces";
  m.attr("__version__") = "0.1.0";

  static py::exception<Error> error_type(m, "StathypError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      err.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type.ptr(), err.ptr());
    }
  });

  py::class_<StatisticalModel>(m, "Model")
      .def_static("affine", &StatisticalModel::affine, py::arg("A"), py::arg("b"))
      .def_static("super_ideal", &StatisticalModel::super_ideal, py::arg("n"))
      .def_static("expressions",
                  py::overload_cast<std::size_t, const std::vector<std::string>&>(&StatisticalModel::expressions),
                  py::arg("n"), py::arg("f"))
      .def_static("from_json", &parse_model, py::arg("text"))
      .def("to_json", &model_to_json)
      .def_property_readonly("n", &StatisticalModel::n)
      .def_property_readonly("m", &StatisticalModel::m)
      .def_property_readonly("is_affine", &StatisticalModel::is_affine)
      .def_property_readonly("is_linear", &StatisticalModel::is_linear)
      .def("values", &StatisticalModel::values, py::arg("x"));

  m.def("log_sum_exp", &log_sum_exp, py::arg("f"));
  m.def("gibbs_weights", [](const Vector& f) { return gibbs(f).w; }, py::arg("f"));
  m.def("shannon_entropy", &shannon_entropy, py::arg("w"));
  m.def("tropical_sum", &tropical_sum, py::arg("x"), py::arg("y"), py::arg("eps"));
  m.def("evaluate", [](const StatisticalModel& model, const Vector& x) { return evaluation_dict(evaluate(model, x)); },
        py::arg("model"), py::arg("x"));
  m.def("geometry_at",
        [](const StatisticalModel& model, const Vector& x) { return geometry_dict(geometry_at(evaluate(model, x))); },
        py::arg("model"), py::arg("x"));

  m.def("delta_weights",
        [](const StatisticalModel& model, const Vector& x, const Vector& df) {
          return delta_weights(evaluate(model, x), df);
        },
        py::arg("model"), py::arg("x"), py::arg("df"));
  m.def("delta_entropy",
        [](const StatisticalModel& model, const Vector& x, const Vector& df) {
          return delta_entropy(evaluate(model, x), df);
        },
        py::arg("model"), py::arg("x"), py::arg("df"));
  m.def("classify",
        [](const StatisticalModel& model, const Vector& x, const Vector& df) {
          return std::string(to_string(classify(evaluate(model, x), df).kind));
        },
        py::arg("model"), py::arg("x"), py::arg("df"));
  m.def("complete_reversible",
        [](const StatisticalModel& model, const Vector& x, const Vector& partial, std::size_t pivot) {
          return complete_reversible(evaluate(model, x), partial, pivot);
        },
        py::arg("model"), py::arg("x"), py::arg("partial"), py::arg("pivot"));
  m.def("delta_geometry",
        [](const StatisticalModel& model, const Vector& x, const std::string& deformation_json) {
          const Evaluation e = evaluate(model, x);
          const Deformation d = parse_deformation(deformation_json, model.n());
          return variation_to_json(delta_geometry(e, DeformationAt::resolve(d, model, e)));
        },
        py::arg("model"), py::arg("x"), py::arg("deformation_json"));

  m.def("replicator_orbit",
        [](const StatisticalModel& model, const Vector& x, std::size_t steps, py::object shift) {
          ShiftChoice choice;
          if (py::isinstance<py::str>(shift) && shift.cast<std::string>() == "auto") {
            choice = AutoShift{};
          } else if (!shift.is_none()) {
            choice = shift.cast<double>();
          }
          std::vector<Vector> out;
          for (const TrajectoryPoint& p : replicator_orbit(model, x, steps, choice).steps) out.push_back(p.w);
          return out;
        },
        py::arg("model"), py::arg("x"), py::arg("steps"), py::arg("shift") = py::none());
  m.def("laplacian", [](const Vector& w) { return laplacian(product_joint(w)); }, py::arg("w"));

  m.def("closed_form_weights",
        [](const Vector& f, double gamma, const Vector& sigma) {
          return closed_form_weights(f, PotentialParams{gamma, sigma});
        },
        py::arg("f"), py::arg("gamma"), py::arg("sigma"));
  m.def("fit_params",
        [](const Vector& f, const Vector& h) {
          const PotentialParams p = fit_params(f, h);
          return py::make_tuple(p.gamma, p.sigma);
        },
        py::arg("f"), py::arg("h"));
  m.def("integrate_weight_pde", &integrate_weight_pde, py::arg("f_start"), py::arg("f_end"), py::arg("h_start"),
        py::arg("steps"));

  m.def("li2", &li2, py::arg("x"));
  m.def("li3", &li3, py::arg("x"));
  m.def("zeta3", &zeta3);
  m.def("closed_S2", &closed_S2, py::arg("c"));
  m.def("asymptote_S2", &asymptote_S2, py::arg("c"));
  m.def("entropy_integral",
        [](const StatisticalModel& model, const Vector& lower, const Vector& upper, double tol) {
          const QuadratureResult q = entropy_integral(model, lower, upper, tol);
          return py::make_tuple(q.value, q.error_estimate, q.evaluations);
        },
        py::arg("model"), py::arg("lower"), py::arg("upper"), py::arg("tol") = 1e-10);
  m.def("volume_check",
        [](const std::string& region_json, std::size_t samples, std::uint64_t seed) {
          const VolumeCheck v = linear_entropy_volume_check(parse_region(region_json), samples, seed);
          py::dict d;
          d["delta_S"] = v.delta_S;
          d["volume_times"] = v.volume_times;
          d["mc_sigma"] = v.mc_sigma;
          d["volume"] = v.volume;
          d["face_flux"] = v.face_flux;
          return d;
        },
        py::arg("region_json"), py::arg("samples"), py::arg("seed"));

  m.def("run_criteria",
        [](std::uint64_t seed, double fraction) {
          SuiteOptions o;
          o.seed = seed;
          o.fraction = fraction;
          if (fraction < 1.0) o.mc_samples = 200'000;
          py::list out;
          for (const Criterion& c : criteria()) {
            CriterionResult r;
            {
              py::gil_scoped_release release;
              r = run_criterion(c, o);
            }
            py::dict d;
            d["id"] = r.id;
            d["module"] = r.module;
            d["name"] = r.name;
            d["passed"] = r.passed;
            d["detail"] = r.detail;
            out.append(d);
          }
          return out;
        },
        py::arg("seed") = 0xC0FFEE, py::arg("fraction") = 1.0);
}

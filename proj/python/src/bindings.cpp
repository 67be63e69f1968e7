#include "prescurv/calculus.hpp"
#include "prescurv/io.hpp"
#include "prescurv/pipeline.hpp"
#include "prescurv/presets.hpp"
#include "prescurv/run.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace prescurv;

namespace {

Eigen::VectorXd to_numpy(const Vec& v) { return Eigen::VectorXd(v); }

ParamCurve make_curve(const Eigen::MatrixXd& samples, double a, double b, bool closed) {
  if (samples.rows() < 3) throw Error(ErrorKind::InvalidArgument, "samples must have shape (nodes, dim) with nodes >= 3");
  const Domain d = closed ? Domain::circle(a, b) : Domain::interval(a, b);
  return ParamCurve(d, samples);
}

CurvatureSpec kappa_from(const py::object& kappa) {
  if (py::isinstance<py::str>(kappa)) return parse_kappa(kappa.cast<std::string>());
  return CurvatureSpec::constant(kappa.cast<double>());
}

PipelineOptions options_from(const py::dict& d) {
  PipelineOptions o;
  for (auto item : d) {
    const auto key = item.first.cast<std::string>();
    const py::handle v = item.second;
    if (key == "k") o.k = v.cast<int>();
    else if (key == "solver_tol") o.solver_tol = v.cast<double>();
    else if (key == "max_iter") o.max_iter = v.cast<int>();
    else if (key == "R_min") o.R_min = v.cast<double>();
    else if (key == "flat_tol") o.flat_tol = v.cast<double>();
    else if (key == "min_pieces") o.min_pieces = v.cast<int>();
    else if (key == "loop_cap_fraction") o.loop_cap_fraction = v.cast<double>();
    else if (key == "output_refine") o.output_refine = v.cast<int>();
    else if (key == "max_output_refine") o.max_output_refine = v.cast<int>();
    else if (key == "threads") o.threads = v.cast<int>();
    else throw Error(ErrorKind::InvalidArgument, "unknown option '" + key + "'");
  }
  return o;
}

py::object json_to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Curves with prescribed curvature, C1-close to a given curve";

  static py::exception<Error> error(m, "PrescurvError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      py::object instance = exc(e.what());
      instance.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error.ptr(), instance.ptr());
    }
  });

  py::class_<ParamCurve>(m, "Curve")
      .def(py::init(&make_curve), py::arg("samples"), py::arg("a"), py::arg("b"), py::arg("closed") = false,
           "Curve through `samples` (shape (nodes, dim)) at uniform parameters of [a, b]. Closed curves "
           "list each point once; the node at b is the node at a.")
      .def_property_readonly("samples", [](const ParamCurve& f) { return f.samples(); })
      .def_property_readonly("a", [](const ParamCurve& f) { return f.domain().a; })
      .def_property_readonly("b", [](const ParamCurve& f) { return f.domain().b; })
      .def_property_readonly("closed", [](const ParamCurve& f) { return f.domain().periodic(); })
      .def_property_readonly("dim", &ParamCurve::dim)
      .def("params", [](const ParamCurve& f) {
        Eigen::VectorXd t(f.node_count());
        for (int j = 0; j < f.node_count(); ++j) t[j] = f.param(j);
        return t;
      })
      .def("eval", [](const ParamCurve& f, double t, int d) { return to_numpy(f.eval(t, d)); }, py::arg("t"),
           py::arg("derivative") = 0)
      .def("curvature", [](const ParamCurve& f, double t) { return curvature_at(f, t); })
      .def("length", [](const ParamCurve& f) { return length(f); })
      .def("__repr__", [](const ParamCurve& f) {
        std::ostringstream os;
        os << "Curve(nodes=" << f.node_count() << ", dim=" << f.dim() << ", [" << f.domain().a << ", "
           << f.domain().b << "], closed=" << (f.domain().periodic() ? "True" : "False") << ")";
        return os.str();
      });

  m.def("circle", &preset_circle, py::arg("intervals"), py::arg("radius") = 1.0);
  m.def("helix", &preset_helix, py::arg("intervals"), py::arg("radius") = 0.70710678118654752,
        py::arg("pitch") = 0.70710678118654752, py::arg("turns") = 1.0);
  m.def("torus_knot", &preset_torus_knot, py::arg("intervals"), py::arg("p") = 2, py::arg("q") = 3,
        py::arg("R") = 2.0, py::arg("r") = 1.0);
  m.def("fourier_knot", &preset_fourier_knot, py::arg("intervals"), py::arg("seed"), py::arg("modes") = 4,
        py::arg("amplitude") = 0.3);

  m.def("read_csv", [](const std::string& path) { return read_curve_csv(path); });
  m.def("write_csv", [](const std::string& path, const ParamCurve& f) { write_curve_csv(path, f); });
  m.def("c1_distance", &c1_distance);
  m.def("min_self_distance", &min_self_distance, py::arg("curve"), py::arg("window"), py::arg("sub") = 1);

  m.def(
      "verify",
      [](const ParamCurve& f, const ParamCurve& g, const py::object& kappa, const std::vector<double>& pinned) {
        return json_to_python(to_json(verify(f, g, kappa_from(kappa), pinned)));
      },
      py::arg("curve"), py::arg("output"), py::arg("kappa"), py::arg("pinned") = std::vector<double>{},
      "Metrics of `output` against `curve` and the target curvature.");

  m.def(
      "prescribe",
      [](const ParamCurve& f, const py::object& kappa, double epsilon, const std::vector<double>& pinned,
         const py::dict& options) {
        PrescribeResult r;
        {
          py::gil_scoped_release release;
          r = prescribe_curvature(ProblemSpec{f, kappa_from(kappa), epsilon, pinned}, options_from(options));
        }
        return py::make_tuple(r.f_tilde, json_to_python(to_json(r)));
      },
      py::arg("curve"), py::arg("kappa"), py::arg("epsilon") = 0.1, py::arg("pinned") = std::vector<double>{},
      py::arg("options") = py::dict(),
      "Curve with curvature `kappa` (number or expression in t), C1-close to `curve` within epsilon, "
      "with value and tangent kept at `pinned`. Returns (curve, report).");

  m.def(
      "constant_curvature_knot",
      [](const ParamCurve& f, double kappa, int intervals, double epsilon) {
        KnotResult k;
        {
          py::gil_scoped_release release;
          k = constant_curvature_knot(f, kappa, intervals, 2.0, epsilon);
        }
        nlohmann::json rep = to_json(k.run);
        rep["scale"] = k.scale;
        rep["epsilon"] = k.epsilon;
        rep["certificate"] = {{"min_distance", k.certificate.min_distance}, {"passed", k.certificate.passed}};
        return py::make_tuple(k.knot, json_to_python(rep));
      },
      py::arg("curve"), py::arg("kappa"), py::arg("intervals"), py::arg("epsilon") = 0.5);
}

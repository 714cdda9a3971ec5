#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "localgd/errors.hpp"
#include "localgd/experiment.hpp"

namespace py = pybind11;
using namespace localgd;

namespace {

ObjectiveSuite quadratic_suite(const std::vector<Vector>& targets) {
  if (targets.empty()) throw ArgumentError("quadratic_suite: need at least one target");
  std::vector<LocalFunction> fs;
  for (const auto& b : targets) fs.emplace_back(make_quadratic(b));
  return ObjectiveSuite(std::move(fs), targets.front().size());
}

TrajectoryRecord run(const ObjectiveSuite& suite, const ReferenceSolution& ref, double gamma,
                     std::size_t interval, std::size_t total_steps, std::optional<Vector> x0) {
  const Vector start = x0.value_or(Vector(suite.dim(), 0.0));
  return run_local_gd(suite, ref, gamma, make_schedule_with_tail(interval, total_steps), start);
}

}  // namespace

PYBIND11_MODULE(_localgd, m) {
  m.doc() = "Local gradient descent simulator and bound checks";

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);

  py::class_<SparseDataset>(m, "SparseDataset")
      .def_property_readonly("n", &SparseDataset::n)
      .def_readonly("d", &SparseDataset::d)
      .def_readonly("labels", &SparseDataset::labels)
      .def_property_readonly("rows", [](const SparseDataset& ds) {
        py::list out;
        for (const auto& row : ds.rows) {
          py::list r;
          for (const auto& e : row) r.append(py::make_tuple(e.index, e.value));
          out.append(r);
        }
        return out;
      })
      .def("__eq__", [](const SparseDataset& a, const SparseDataset& b) { return a == b; });

  m.def("parse_libsvm", [](const std::string& text) { return parse_libsvm(std::string_view(text)); });
  m.def("load_libsvm", &load_libsvm, py::arg("path"));
  m.def("serialize_libsvm", &serialize_libsvm);

  py::class_<ObjectiveSuite>(m, "ObjectiveSuite")
      .def_property_readonly("dim", &ObjectiveSuite::dim)
      .def_property_readonly("workers", &ObjectiveSuite::workers)
      .def_property_readonly("smoothness", &ObjectiveSuite::smoothness)
      .def("value", [](const ObjectiveSuite& s, const Vector& x) { return s.value(x); })
      .def("grad", [](const ObjectiveSuite& s, const Vector& x) { return s.grad(x); });

  m.def("quadratic_suite", &quadratic_suite, py::arg("targets"));
  m.def("logistic_suite",
        [](const SparseDataset& ds, std::size_t workers, double lambda) {
          return shards_to_suite(ds, partition_by_index(ds, workers), lambda);
        },
        py::arg("dataset"), py::arg("workers"), py::arg("lambda_"));
  m.def("synthetic_suite",
        [](const std::string& variant, std::size_t workers, std::size_t dim, std::uint64_t seed) {
          return parse_variant(variant) == Variant::Quadratic
                     ? make_quadratic_suite(workers, dim, seed)
                     : make_logistic_suite(workers, dim, seed);
        },
        py::arg("variant"), py::arg("workers"), py::arg("dim"), py::arg("seed"));

  py::class_<ReferenceSolution>(m, "ReferenceSolution")
      .def_readonly("x_star", &ReferenceSolution::x_star)
      .def_readonly("f_star", &ReferenceSolution::f_star)
      .def_readonly("sigma2", &ReferenceSolution::sigma2)
      .def_readonly("grad_norm_residual", &ReferenceSolution::grad_norm_residual);
  m.def("solve_reference",
        [](const ObjectiveSuite& s, double tol) { return solve_reference(s, tol); },
        py::arg("suite"), py::arg("tol") = kDefaultReferenceTolerance);

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_readonly("gamma", &TrajectoryRecord::gamma)
      .def_property_readonly("steps", &TrajectoryRecord::steps)
      .def_property_readonly("sync_times",
                             [](const TrajectoryRecord& t) { return t.schedule.sync_times(); })
      .def_readonly("hat_x", &TrajectoryRecord::hat_x)
      .def_readonly("V", &TrajectoryRecord::V)
      .def_readonly("D", &TrajectoryRecord::D)
      .def_readonly("r2", &TrajectoryRecord::r2)
      .def_readonly("f_hat", &TrajectoryRecord::f_hat)
      .def_readonly("f_bar", &TrajectoryRecord::f_bar)
      .def_readonly("f_bar_T", &TrajectoryRecord::f_bar_T);
  m.def("run_local_gd", &run, py::arg("suite"), py::arg("reference"), py::arg("gamma"),
        py::arg("H"), py::arg("T"), py::arg("x0") = py::none());

  py::class_<CheckReport>(m, "CheckReport")
      .def_readonly("name", &CheckReport::name)
      .def_readonly("passed", &CheckReport::pass)
      .def_readonly("total_points", &CheckReport::total_points)
      .def_property_readonly("status", [](const CheckReport& r) { return std::string(to_string(r.status)); })
      .def_property_readonly("violations", [](const CheckReport& r) { return r.violations.size(); });
  m.def("check_all",
        [](const TrajectoryRecord& t, double L, double sigma2) { return check_all(t, L, sigma2); });

  m.def("theorem1_bound", &theorem1_bound, py::arg("gamma"), py::arg("T"), py::arg("H"),
        py::arg("L"), py::arg("sigma2"), py::arg("r0sq"));
  m.def("corollary_bound", &corollary_bound, py::arg("T"), py::arg("M"), py::arg("H"),
        py::arg("L"), py::arg("sigma2"), py::arg("r0sq"));
  m.def("plan",
        [](double eps, double L, double sigma2, double r0sq, std::optional<double> gamma) {
          return to_json(make_plan_report(eps, L, sigma2, r0sq, gamma)).dump();
        },
        py::arg("epsilon"), py::arg("L"), py::arg("sigma2"), py::arg("r0sq"),
        py::arg("gamma") = py::none());
}

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "helmsweep/config.hpp"
#include "helmsweep/experiment.hpp"
#include "helmsweep/frontal.hpp"
#include "helmsweep/ndtree.hpp"
#include "helmsweep/velocity.hpp"

namespace py = pybind11;
using namespace helmsweep;

namespace {

struct SolveResult {
  std::string forcing;
  Int iterations;
  bool converged;
  double final_residual;
  std::vector<double> history;
};

struct RunResult {
  std::string config;
  double omega;
  Int num_nodes;
  Int num_panels;
  double setup_flops;
  double apply_flops;
  Int stored_entries;
  std::vector<SolveResult> solves;
  std::string csv;
  std::string summary;
  std::string ledger_csv;
};

RunResult RunFromJson(const std::string& json) {
  const ExperimentConfig config = ParseConfig(json);
  RunRecord record;
  {
    py::gil_scoped_release release;
    record = Run(config);
  }
  RunResult out{SerializeConfig(record.config), record.omega, record.num_nodes,
                record.num_panels, record.setup_flops, record.apply_flops,
                record.stored_entries, {}, {}, {}, {}};
  for (const ForcingRecord& solve : record.solves) {
    out.solves.push_back({solve.forcing, solve.report.iterations, solve.report.converged,
                          solve.report.final_residual, solve.report.residual_history});
  }
  std::ostringstream csv, summary;
  WriteCsv(record, csv);
  WriteSummary(record, summary);
  out.csv = csv.str();
  out.summary = summary.str();
  if (record.simulation) {
    std::ostringstream ledger;
    record.simulation->ledger.WriteCsv(ledger);
    out.ledger_csv = ledger.str();
  }
  return out;
}

// CSR arrays (offsets, columns, values) of A or J.
py::tuple AssembleFromJson(const std::string& json, bool damped) {
  const Problem problem = BuildProblem(ParseConfig(json));
  const SparseOperator& op = damped ? problem.damped : problem.op;
  const auto offsets = op.RowOffsets();
  const auto columns = op.ColumnIndices();
  const auto values = op.Values();
  return py::make_tuple(py::array_t<Int>(offsets.size(), offsets.data()),
                        py::array_t<Int>(columns.size(), columns.data()),
                        py::array_t<Complex>(values.size(), values.data()));
}

// Multifrontal solve against A (or J) of the configured problem.
py::array_t<Complex> DirectSolve(const std::string& json, py::array_t<Complex> rhs,
                                 bool damped) {
  const ExperimentConfig config = ParseConfig(json);
  const Problem problem = BuildProblem(config);
  const SparseOperator& op = damped ? problem.damped : problem.op;
  if (rhs.ndim() != 1 || rhs.shape(0) != op.Dimension()) {
    throw DimensionError("right-hand side length does not match the operator");
  }
  auto tree = std::make_shared<EliminationTree>(
      NestedDissection(problem.grid.dims, config.leaf_cutoff));
  SymbolicAnalysis(*tree, op);
  const FrontalTree fact = FrontalTree::Factor(std::move(tree), op);
  const auto b = rhs.unchecked<1>();
  std::vector<Complex> x(b.data(0), b.data(0) + b.shape(0));
  fact.SolveInPlace(x);
  return py::array_t<Complex>(x.size(), x.data());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the helmsweep C++ library";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<StageError>(m, "StageError", PyExc_RuntimeError);

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("forcing", &SolveResult::forcing)
      .def_readonly("iterations", &SolveResult::iterations)
      .def_readonly("converged", &SolveResult::converged)
      .def_readonly("final_residual", &SolveResult::final_residual)
      .def_readonly("history", &SolveResult::history);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("config", &RunResult::config)
      .def_readonly("omega", &RunResult::omega)
      .def_readonly("num_nodes", &RunResult::num_nodes)
      .def_readonly("num_panels", &RunResult::num_panels)
      .def_readonly("setup_flops", &RunResult::setup_flops)
      .def_readonly("apply_flops", &RunResult::apply_flops)
      .def_readonly("stored_entries", &RunResult::stored_entries)
      .def_readonly("solves", &RunResult::solves)
      .def_readonly("csv", &RunResult::csv)
      .def_readonly("summary", &RunResult::summary)
      .def_readonly("ledger_csv", &RunResult::ledger_csv);

  m.def("run", &RunFromJson, py::arg("config_json"),
        "Run an experiment described by a JSON config string.");
  m.def("load_config", [](const std::string& path) { return SerializeConfig(LoadConfig(path)); },
        py::arg("path"), "Validate a config file and return it as normalized JSON.");
  m.def("assemble", &AssembleFromJson, py::arg("config_json"), py::arg("damped") = false,
        "CSR arrays (offsets, columns, values) of the undamped or damped operator.");
  m.def("direct_solve", &DirectSolve, py::arg("config_json"), py::arg("rhs"),
        py::arg("damped") = false);
  m.def(
      "speed_at",
      [](const std::string& model, double x1, double x2, double x3) {
        return VelocityModel::Analytic(ParseModelKind(model)).SpeedAt({x1, x2, x3});
      },
      py::arg("model"), py::arg("x1"), py::arg("x2"), py::arg("x3"));
  m.def(
      "pml_sigma",
      [](Int gamma, double amplitude, int exponent, double spacing, double depth) {
        PmlProfile profile;
        profile.gamma = gamma;
        profile.amplitude = amplitude;
        profile.exponent = exponent;
        profile.spacing = spacing;
        return PmlSigma(profile, depth);
      },
      py::arg("gamma"), py::arg("amplitude"), py::arg("exponent"), py::arg("spacing"),
      py::arg("depth"));
}

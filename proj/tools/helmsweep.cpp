// Command-line driver: runs sweeping-preconditioned Helmholtz experiments and
// exports intermediate objects.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "helmsweep/config.hpp"
#include "helmsweep/distsim.hpp"
#include "helmsweep/experiment.hpp"
#include "helmsweep/frontal.hpp"
#include "helmsweep/ndtree.hpp"

namespace {

using helmsweep::ExperimentConfig;
using helmsweep::Int;

struct Overrides {
  std::string config_path;
  std::optional<std::string> model;
  std::optional<Int> nx, ny, nz;
  std::optional<double> omega;
  std::optional<double> wavelengths;
  std::optional<Int> gamma;
  std::optional<double> pml_amp;
  std::optional<double> alpha;
  std::optional<Int> panel_planes;
  std::optional<Int> restart;
  std::optional<double> tol;
  std::optional<Int> max_iters;
  std::vector<std::string> forcings;
  std::optional<bool> selective_inversion;
  std::optional<std::string> sim_grid;
  std::optional<std::string> out;
  std::optional<std::string> timing;
  std::optional<Int> threads;
  std::optional<std::uint64_t> seed;

  void Register(CLI::App& app) {
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--model", model,
                   "homogeneous, barrier, wedge, two-layer, waveguide, gridded");
    app.add_option("--nx", nx, "grid points along x1");
    app.add_option("--ny", ny, "grid points along x2");
    app.add_option("--nz", nz, "grid points along x3");
    app.add_option("--omega", omega, "angular frequency");
    app.add_option("--wavelengths", wavelengths, "wavelengths per side");
    app.add_option("--gamma", gamma, "PML size in grid planes");
    app.add_option("--pml-amp", pml_amp, "PML amplitude C");
    app.add_option("--alpha", alpha, "artificial damping");
    app.add_option("--panel-planes", panel_planes, "planes per panel");
    app.add_option("--restart", restart, "GMRES restart length");
    app.add_option("--tol", tol, "relative residual tolerance");
    app.add_option("--max-iters", max_iters, "GMRES iteration cap");
    app.add_option("--forcing", forcings, "forcings f0..f3 (repeatable)");
    app.add_option("--selective-inversion", selective_inversion,
                   "invert triangular fronts after factoring (true/false)");
    app.add_option("--sim-grid", sim_grid, "simulated process grid RxC");
    app.add_option("--out", out, "output prefix");
    app.add_option("--timing", timing, "wall or none");
    app.add_option("--threads", threads, "worker threads, 0 = all cores");
    app.add_option("--seed", seed, "random seed");
  }

  ExperimentConfig Resolve() const {
    ExperimentConfig c = config_path.empty() ? ExperimentConfig{}
                                             : helmsweep::LoadConfig(config_path);
    if (model) c.model = *model;
    if (nx) c.dims[0] = *nx;
    if (ny) c.dims[1] = *ny;
    if (nz) c.dims[2] = *nz;
    if (omega) c.omega = *omega;
    if (wavelengths) c.wavelengths = *wavelengths;
    if (gamma) c.gamma = *gamma;
    if (pml_amp) c.pml_amplitude = *pml_amp;
    if (alpha) c.alpha = *alpha;
    if (panel_planes) c.planes_per_panel = *panel_planes;
    if (restart) c.restart = *restart;
    if (tol) c.tol = *tol;
    if (max_iters) c.max_iters = *max_iters;
    if (!forcings.empty()) c.forcings = forcings;
    if (selective_inversion) c.selective_inversion = *selective_inversion;
    if (sim_grid) c.sim_grid = *sim_grid;
    if (out) c.output = *out;
    if (timing) c.timing = *timing;
    if (threads) c.threads = *threads;
    if (seed) c.seed = *seed;
    c.Validate();
    return c;
  }
};

int RunCommand(const Overrides& overrides) {
  const ExperimentConfig config = overrides.Resolve();
  const helmsweep::RunRecord record = helmsweep::Run(config);
  helmsweep::WriteSummary(record, std::cout);
  helmsweep::WriteOutputs(record);
  return record.AllConverged() ? EXIT_SUCCESS : 2;
}

int ScanCommand(const Overrides& overrides, const std::vector<double>& amplitudes) {
  const ExperimentConfig config = overrides.Resolve();
  const helmsweep::ScanResult scan = helmsweep::PmlAmplitudeScan(config, amplitudes);
  std::cout << "amplitude,iterations,converged\n";
  for (const auto& row : scan.rows) {
    std::cout << row.amplitude << ',' << row.iterations << ','
              << (row.converged ? 1 : 0) << '\n';
  }
  std::cout << "# best amplitude " << scan.best_amplitude << '\n';
  return EXIT_SUCCESS;
}

int ScalingCommand(const Overrides& overrides, const std::vector<Int>& sizes) {
  const ExperimentConfig config = overrides.Resolve();
  const helmsweep::ScalingResult study = helmsweep::ScalingStudy(config, sizes);
  std::cout << "n,N,setup_flops,apply_flops,iterations\n";
  for (const auto& row : study.rows) {
    std::cout << row.n << ',' << row.num_nodes << ',' << row.setup_flops << ','
              << row.apply_flops << ',' << row.iterations << '\n';
  }
  std::cout << "# setup exponent " << study.setup_exponent << '\n'
            << "# apply exponent " << study.apply_exponent << '\n';
  return EXIT_SUCCESS;
}

int ExportCommand(const Overrides& overrides, bool damped, const std::string& path) {
  const helmsweep::Problem problem = helmsweep::BuildProblem(overrides.Resolve());
  const auto& op = damped ? problem.damped : problem.op;
  if (path.empty() || path == "-") {
    op.WriteTriplets(std::cout);
  } else {
    std::ofstream file(path);
    if (!file) throw helmsweep::ConfigError("cannot write " + path);
    op.WriteTriplets(file);
  }
  return EXIT_SUCCESS;
}

int DumpTreeCommand(const Overrides& overrides) {
  const helmsweep::Problem problem = helmsweep::BuildProblem(overrides.Resolve());
  helmsweep::EliminationTree tree = helmsweep::NestedDissection(
      problem.grid.dims, overrides.Resolve().leaf_cutoff);
  helmsweep::SymbolicAnalysis(tree, problem.damped);
  tree.Dump(std::cout);
  return EXIT_SUCCESS;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving-PML sweeping preconditioner for 3D Helmholtz"};
  app.require_subcommand(0, 1);
  Overrides overrides;
  overrides.Register(app);
  app.fallthrough();

  CLI::App* run = app.add_subcommand("run", "solve every configured forcing");
  CLI::App* scan = app.add_subcommand("scan", "PML amplitude scan");
  std::vector<double> amplitudes{0.5, 1.5, 4.5};
  scan->add_option("--amplitudes", amplitudes, "candidate amplitudes");
  CLI::App* scaling = app.add_subcommand("scaling", "flop scaling study");
  std::vector<Int> sizes{16, 32, 64};
  scaling->add_option("--sizes", sizes, "grid sizes n for n^3 problems");
  CLI::App* export_op = app.add_subcommand("export-operator",
                                           "write the operator as triplets");
  bool damped = false;
  std::string export_path;
  export_op->add_flag("--damped", damped, "export J instead of A");
  export_op->add_option("--file", export_path, "destination, '-' for stdout");
  CLI::App* dump_tree = app.add_subcommand("dump-tree",
                                           "print the nested-dissection tree");

  CLI11_PARSE(app, argc, argv);
  try {
    if (scan->parsed()) return ScanCommand(overrides, amplitudes);
    if (scaling->parsed()) return ScalingCommand(overrides, sizes);
    if (export_op->parsed()) return ExportCommand(overrides, damped, export_path);
    if (dump_tree->parsed()) return DumpTreeCommand(overrides);
    (void)run;
    return RunCommand(overrides);
  } catch (const helmsweep::StageError& e) {
    std::cerr << "error in stage " << e.what() << '\n';
    return EXIT_FAILURE;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
}

#include "helmsweep/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "helmsweep/frontal.hpp"
#include "helmsweep/sweep.hpp"

namespace helmsweep {

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

template <typename F>
auto InStage(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::string FormatDouble(double value) {
  std::ostringstream out;
  out << std::setprecision(17) << value;
  return out.str();
}

void RunSimulation(const ExperimentConfig& config, const SweepPreconditioner& precond,
                   RunRecord& record) {
  const distsim::ProcessGrid grid = distsim::ParseGrid(config.sim_grid);
  const Int m = precond.Panels().NumPanels();
  SimulationRecord sim;
  sim.grid = config.sim_grid;
  sim.panel = m - 1;
  const FrontalTree& fact = precond.Auxiliary(sim.panel).Factorization();
  const Int factor_team = std::max<Int>(1, grid.Size() / m);
  const distsim::SubteamAssignment assignment =
      distsim::SubtreeToSubteam(fact.Tree(), grid.Size(), factor_team);

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::vector<Complex> b(fact.Dimension());
  for (Complex& v : b) v = {uniform(rng), uniform(rng)};

  distsim::SimulatedSolve solved =
      distsim::SimulatedMultifrontalSolve(fact, assignment, b, m);
  const std::vector<Complex> reference = fact.Solve(b);
  double diff = 0, norm = 0;
  for (size_t i = 0; i < b.size(); ++i) {
    diff += std::norm(solved.x[i] - reference[i]);
    norm += std::norm(reference[i]);
  }
  sim.relative_difference = norm > 0 ? std::sqrt(diff / norm) : std::sqrt(diff);
  sim.ledger = std::move(solved.ledger);
  record.simulation = std::move(sim);
}

}  // namespace

Int RunRecord::TotalIterations() const {
  Int total = 0;
  for (const ForcingRecord& solve : solves) total += solve.report.iterations;
  return total;
}

bool RunRecord::AllConverged() const {
  return std::all_of(solves.begin(), solves.end(),
                     [](const ForcingRecord& s) { return s.report.converged; });
}

VelocityModel LoadModel(const ExperimentConfig& config) {
  const ModelKind kind = ParseModelKind(config.model);
  if (kind == ModelKind::kGridded) {
    return VelocityModel::LoadGridded(config.velocity_file,
                                      config.velocity_header);
  }
  return VelocityModel::Analytic(kind);
}

Problem BuildProblem(const ExperimentConfig& config) {
  config.Validate();
  Problem problem{InStage("velocity", [&] { return LoadModel(config); }),
                  {}, {}, {}, {}, {}, {}};
  InStage("assemble", [&] {
    const Point extents = problem.model.Extents();
    problem.grid = GridSpec::ForBox(config.dims, extents);
    problem.grid.pml_faces = config.pml_faces;
    problem.grid.profile.gamma = config.gamma;
    problem.grid.profile.amplitude = config.pml_amplitude;
    problem.grid.profile.exponent = config.pml_exponent;
    problem.grid.points_per_wavelength = config.points_per_wavelength;
    problem.grid.Validate();
    problem.damping.omega =
        config.ResolvedOmega(problem.model.MinSpeed(), extents);
    problem.damping.alpha = config.alpha;
    problem.damping.Validate();
    problem.speeds = NodeSpeeds(problem.grid, problem.model);
    const auto stretches = GridStretches(problem.grid, problem.damping.omega);
    DampingSpec undamped = problem.damping;
    undamped.alpha = 0;
    problem.op = AssembleStretched(problem.grid.dims, problem.grid.spacing,
                                   stretches, problem.speeds, undamped);
    problem.damped = config.alpha == 0
                         ? problem.op
                         : AssembleStretched(problem.grid.dims,
                                             problem.grid.spacing, stretches,
                                             problem.speeds, problem.damping);
    problem.panels = PartitionPanels(problem.grid.dims[2],
                                     config.planes_per_panel, config.gamma);
  });
  return problem;
}

std::vector<Complex> SampleForcing(const Problem& problem, ForcingKind kind) {
  const GridSpec& grid = problem.grid;
  const Point extents = problem.model.Extents();
  const double side = *std::max_element(extents.begin(), extents.end());
  const Forcing forcing =
      MakeForcing(kind, *std::max_element(grid.dims.begin(), grid.dims.end()));
  // Forcings live on the unit cube; physical frequency is rescaled so the
  // phase per wavelength is unchanged.
  const double omega = problem.damping.omega * side;
  const auto stretches = GridStretches(grid, problem.damping.omega);
  std::vector<Complex> b(grid.NumNodes());
  Int index = 0;
  for (Int i3 = 0; i3 < grid.dims[2]; ++i3) {
    for (Int i2 = 0; i2 < grid.dims[1]; ++i2) {
      for (Int i1 = 0; i1 < grid.dims[0]; ++i1) {
        const Point x = grid.Coordinate(i1, i2, i3);
        const Point unit{x[0] / extents[0], x[1] / extents[1],
                         x[2] / extents[2]};
        const Complex scale = stretches[0].node[i1] * stretches[1].node[i2] *
                              stretches[2].node[i3];
        b[index++] = scale * ForcingAt(forcing, unit, omega);
      }
    }
  }
  return b;
}

RunRecord Run(const ExperimentConfig& config) {
  const bool timed = config.timing == "wall";
  RunRecord record;
  record.config = config;
  const Problem problem = InStage("config", [&] { return BuildProblem(config); });
  record.omega = problem.damping.omega;
  record.num_nodes = problem.grid.NumNodes();
  record.num_panels = problem.panels.NumPanels();

  const auto setup_start = Clock::now();
  SweepOptions options;
  options.selective_inversion = config.selective_inversion;
  options.leaf_cutoff = config.leaf_cutoff;
  options.threads = config.threads;
  const SweepPreconditioner precond = InStage("setup", [&] {
    return SweepPreconditioner::Setup(problem.damped, problem.grid,
                                      problem.speeds, problem.damping,
                                      problem.panels, options);
  });
  record.setup_seconds = timed ? Seconds(setup_start) : 0;
  record.setup_flops = precond.SetupFlops();
  record.apply_flops = precond.ApplyFlops();
  record.iteration_flops = record.apply_flops + problem.op.MultiplyFlops();
  record.stored_entries = precond.StoredEntries();
  record.peak_memory_bytes =
      16.0 * static_cast<double>(record.stored_entries) +
      24.0 * static_cast<double>(problem.op.NumNonzeros() +
                                 problem.damped.NumNonzeros());

  const std::vector<ForcingKind> kinds = config.ForcingKinds();
  record.solves.resize(kinds.size());
  SolveConfig solve_config;
  solve_config.restart = config.restart;
  solve_config.tol = config.tol;
  solve_config.max_iters = config.max_iters;
  const LinearOperator apply_a = [&](std::span<const Complex> x,
                                     std::span<Complex> y) {
    problem.op.Multiply(x, y);
  };
  const LinearOperator apply_m = [&](std::span<const Complex> x,
                                     std::span<Complex> y) {
    precond.Apply(x, y);
  };

  std::vector<std::exception_ptr> errors(kinds.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < kinds.size(); k = next++) {
      try {
        ForcingRecord& out = record.solves[k];
        out.forcing = std::string(ForcingName(kinds[k]));
        const std::vector<Complex> b = SampleForcing(problem, kinds[k]);
        const auto start = Clock::now();
        GmresResult result =
            Gmres(apply_a, apply_m, b, solve_config, [&](Int, double) {
              out.iteration_seconds.push_back(timed ? Seconds(start) : 0);
            });
        out.report = std::move(result.report);
        if (!timed) out.report.seconds = 0;
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  Int threads = config.threads > 0
                    ? config.threads
                    : static_cast<Int>(std::thread::hardware_concurrency());
  threads = std::clamp<Int>(threads, 1, static_cast<Int>(kinds.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (Int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (size_t k = 0; k < kinds.size(); ++k) {
    if (!errors[k]) continue;
    const std::string stage = "solve " + std::string(ForcingName(kinds[k]));
    InStage(stage, [&] { std::rethrow_exception(errors[k]); });
  }

  if (!config.sim_grid.empty()) {
    InStage("simulate", [&] { RunSimulation(config, precond, record); });
  }
  return record;
}

void WriteCsv(const RunRecord& record, std::ostream& out) {
  const std::string& model = record.config.model;
  out << "stage,model,forcing,iteration,rel_residual,flops,seconds\n";
  out << "setup," << model << ",,0,," << FormatDouble(record.setup_flops) << ','
      << FormatDouble(record.setup_seconds) << '\n';
  for (const ForcingRecord& solve : record.solves) {
    const auto& history = solve.report.residual_history;
    for (size_t j = 1; j < history.size(); ++j) {
      const double seconds =
          j - 1 < solve.iteration_seconds.size() ? solve.iteration_seconds[j - 1] : 0;
      out << "solve," << model << ',' << solve.forcing << ',' << j << ','
          << FormatDouble(history[j]) << ','
          << FormatDouble(static_cast<double>(j) * record.iteration_flops)
          << ',' << FormatDouble(seconds) << '\n';
    }
  }
}

void WriteSummary(const RunRecord& record, std::ostream& out) {
  const ExperimentConfig& c = record.config;
  out << "model            " << c.model << '\n'
      << "grid             " << c.dims[0] << " x " << c.dims[1] << " x "
      << c.dims[2] << " (" << record.num_nodes << " unknowns)\n"
      << "omega            " << record.omega << '\n'
      << "pml              gamma=" << c.gamma << " amplitude=" << c.pml_amplitude
      << " exponent=" << c.pml_exponent << '\n'
      << "damping alpha    " << c.alpha << '\n'
      << "panels           " << record.num_panels << " of "
      << c.planes_per_panel << " planes\n"
      << "setup            " << record.setup_flops << " flops, "
      << record.setup_seconds << " s\n"
      << "per iteration    " << record.iteration_flops << " flops\n"
      << "memory estimate  " << record.peak_memory_bytes / 1048576.0 << " MiB\n";
  for (const ForcingRecord& solve : record.solves) {
    out << "forcing " << solve.forcing << "       " << solve.report.iterations
        << " iterations, residual " << solve.report.final_residual
        << (solve.report.converged ? "" : " (not converged)") << '\n';
  }
  if (record.simulation) {
    const SimulationRecord& sim = *record.simulation;
    out << "simulation       grid " << sim.grid << ", panel " << sim.panel
        << ", difference " << sim.relative_difference << ", "
        << sim.ledger.TotalEntries() << " entries in "
        << sim.ledger.TotalMessages() << " messages\n";
  }
}

void WritePlotData(const ForcingRecord& solve, std::ostream& out) {
  out << "# iteration relative_residual (" << solve.forcing << ")\n";
  const auto& history = solve.report.residual_history;
  for (size_t j = 0; j < history.size(); ++j) {
    out << j << ' ' << FormatDouble(history[j]) << '\n';
  }
}

void WriteOutputs(const RunRecord& record) {
  const std::string& prefix = record.config.output;
  if (prefix.empty()) return;
  auto open = [](const std::string& path) {
    std::ofstream file(path);
    if (!file) throw StageError("output", "cannot write " + path);
    return file;
  };
  {
    std::ofstream csv = open(prefix + ".csv");
    WriteCsv(record, csv);
  }
  {
    std::ofstream summary = open(prefix + ".txt");
    WriteSummary(record, summary);
  }
  for (const ForcingRecord& solve : record.solves) {
    std::ofstream plot = open(prefix + "_" + solve.forcing + ".dat");
    WritePlotData(solve, plot);
  }
  if (record.simulation) {
    std::ofstream ledger = open(prefix + "_ledger.csv");
    record.simulation->ledger.WriteCsv(ledger);
  }
}

ScanResult PmlAmplitudeScan(const ExperimentConfig& config,
                            std::span<const double> amplitudes) {
  if (amplitudes.empty()) throw ConfigError("scan needs at least one amplitude");
  ScanResult result;
  for (double amplitude : amplitudes) {
    ExperimentConfig trial = config;
    trial.pml_amplitude = amplitude;
    trial.output.clear();
    trial.sim_grid.clear();
    RunRecord record;
    try {
      record = Run(trial);
    } catch (const StageError& e) {
      throw StageError(e.Stage(),
                       "amplitude " + FormatDouble(amplitude) + ": " + e.what());
    }
    result.rows.push_back(
        {amplitude, record.TotalIterations(), record.AllConverged()});
  }
  const auto best = std::min_element(
      result.rows.begin(), result.rows.end(), [](const ScanRow& a, const ScanRow& b) {
        if (a.converged != b.converged) return a.converged;
        return a.iterations < b.iterations;
      });
  result.best_amplitude = best->amplitude;
  return result;
}

double LogLogSlope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ConfigError("log-log fit needs matching samples, at least two");
  }
  const double count = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0) || !(y[k] > 0)) throw ConfigError("log-log fit needs positive data");
    const double lx = std::log(x[k]);
    const double ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denominator = count * sxx - sx * sx;
  if (denominator == 0) throw ConfigError("log-log fit needs distinct sizes");
  return (count * sxy - sx * sy) / denominator;
}

ScalingResult ScalingStudy(const ExperimentConfig& config,
                           std::span<const Int> sizes) {
  if (sizes.size() < 3) throw ConfigError("scaling study needs at least 3 sizes");
  ScalingResult result;
  std::vector<double> nodes, setup, apply;
  for (Int n : sizes) {
    ExperimentConfig trial = config;
    trial.dims = {n, n, n};
    trial.output.clear();
    trial.sim_grid.clear();
    const RunRecord record = Run(trial);
    const Int iterations =
        record.solves.empty() ? 0 : record.solves.front().report.iterations;
    result.rows.push_back({n, record.num_nodes, record.setup_flops,
                           record.apply_flops, iterations});
    nodes.push_back(static_cast<double>(record.num_nodes));
    setup.push_back(record.setup_flops);
    apply.push_back(record.apply_flops);
  }
  result.setup_exponent = LogLogSlope(nodes, setup);
  result.apply_exponent = LogLogSlope(nodes, apply);
  return result;
}

}  // namespace helmsweep

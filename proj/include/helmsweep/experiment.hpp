#ifndef HELMSWEEP_EXPERIMENT_HPP_
#define HELMSWEEP_EXPERIMENT_HPP_

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "helmsweep/config.hpp"
#include "helmsweep/discretize.hpp"
#include "helmsweep/distsim.hpp"
#include "helmsweep/krylov.hpp"
#include "helmsweep/sparse.hpp"
#include "helmsweep/velocity.hpp"

namespace helmsweep {

// Wraps an error raised while running an experiment with the stage that
// failed ("velocity", "assemble", "setup", "solve f2", ...).
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& Stage() const { return stage_; }

 private:
  std::string stage_;
};

// The discretized problem a configuration describes.
struct Problem {
  VelocityModel model;
  GridSpec grid;
  DampingSpec damping;  // alpha as configured, for the preconditioner
  std::vector<double> speeds;
  SparseOperator op;      // A, undamped
  SparseOperator damped;  // J
  PanelPartition panels;
};

VelocityModel LoadModel(const ExperimentConfig& config);
Problem BuildProblem(const ExperimentConfig& config);

// Samples a forcing on the grid nodes, scaled by the node's stretching
// product to match the symmetric form of the operator.
std::vector<Complex> SampleForcing(const Problem& problem, ForcingKind kind);

struct ForcingRecord {
  std::string forcing;
  SolveReport report;
  // Elapsed seconds at each iteration (zeros when timing is "none").
  std::vector<double> iteration_seconds;
};

struct SimulationRecord {
  std::string grid;
  Int panel = 0;
  double relative_difference = 0;  // against the sequential solve
  distsim::CommLedger ledger;
};

struct RunRecord {
  ExperimentConfig config;
  double omega = 0;
  Int num_nodes = 0;
  Int num_panels = 0;
  double setup_flops = 0;
  double setup_seconds = 0;
  double apply_flops = 0;  // one preconditioner application
  // One preconditioner application plus one operator product.
  double iteration_flops = 0;
  Int stored_entries = 0;
  double peak_memory_bytes = 0;
  std::vector<ForcingRecord> solves;
  std::optional<SimulationRecord> simulation;

  Int TotalIterations() const;
  bool AllConverged() const;
};

// Assembles A and J, sets up the preconditioner, solves every configured
// forcing and runs the optional distributed-layout simulation. Errors come
// back as StageError.
RunRecord Run(const ExperimentConfig& config);

// Header "stage,model,forcing,iteration,rel_residual,flops,seconds", one
// setup row and one row per GMRES iteration.
void WriteCsv(const RunRecord& record, std::ostream& out);
void WriteSummary(const RunRecord& record, std::ostream& out);
// Two-column "iteration residual" data for plotting.
void WritePlotData(const ForcingRecord& solve, std::ostream& out);
// Writes <output>.csv, <output>.txt, <output>_<forcing>.dat and, with a
// simulation, <output>_ledger.csv. Does nothing for an empty prefix.
void WriteOutputs(const RunRecord& record);

struct ScanRow {
  double amplitude = 0;
  Int iterations = 0;  // summed over forcings
  bool converged = false;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  double best_amplitude = 0;
};

// Runs the experiment once per PML amplitude and reports the one needing the
// fewest iterations (the first on ties).
ScanResult PmlAmplitudeScan(const ExperimentConfig& config,
                            std::span<const double> amplitudes);

struct ScalingRow {
  Int n = 0;
  Int num_nodes = 0;
  double setup_flops = 0;
  double apply_flops = 0;
  Int iterations = 0;
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  double setup_exponent = 0;
  double apply_exponent = 0;
};

// Runs n x n x n versions of the configuration and fits log-log exponents of
// the setup and per-application flop counts against N.
ScalingResult ScalingStudy(const ExperimentConfig& config,
                           std::span<const Int> sizes);

// Least-squares slope of log(y) against log(x).
double LogLogSlope(std::span<const double> x, std::span<const double> y);

}  // namespace helmsweep

#endif  // HELMSWEEP_EXPERIMENT_HPP_

#include "helmsweep/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <string>
#include <thread>

namespace helmsweep {

AuxiliaryProblem::AuxiliaryProblem(Int panel, Int padding, Dims dims,
                                   SparseOperator op, Int leaf_cutoff,
                                   bool selective_inversion,
                                   const FactorOptions& options)
    : panel_(panel), padding_(padding), dims_(dims), op_(std::move(op)) {
  if (padding < 0 || padding >= dims[2]) {
    throw ConfigError("padding must leave at least one panel plane");
  }
  if (op_.Dimension() != dims[0] * dims[1] * dims[2]) {
    throw DimensionError("auxiliary operator does not match its dims");
  }
  auto tree = std::make_shared<EliminationTree>(NestedDissection(dims, leaf_cutoff));
  SymbolicAnalysis(*tree, op_);
  factorization_ = std::make_unique<FrontalTree>(
      FrontalTree::Factor(std::move(tree), op_, options));
  if (selective_inversion) factorization_->SelectivelyInvert();
}

void AuxiliaryProblem::ApplySchurInverse(std::span<const Complex> u,
                                         std::span<Complex> result) const {
  const Int panel_size = PanelSize();
  if (static_cast<Int>(u.size()) != panel_size ||
      static_cast<Int>(result.size()) != panel_size) {
    throw DimensionError("panel vector length does not match panel " +
                         std::to_string(panel_));
  }
  const Int offset = padding_ * dims_[0] * dims_[1];
  std::vector<Complex> extended(op_.Dimension());
  std::copy(u.begin(), u.end(), extended.begin() + offset);
  factorization_->SolveInPlace(extended);
  std::copy(extended.begin() + offset, extended.end(), result.begin());
}

double AuxiliaryProblem::ApplyFlops() const {
  return factorization_->SolveFlops();
}

SparseOperator AssemblePaddedPanel(const GridSpec& grid,
                                   std::span<const double> speeds,
                                   const DampingSpec& damping,
                                   const PanelPartition& panels, Int panel) {
  if (panel < 0 || panel >= panels.NumPanels()) {
    throw DomainError("panel index out of range");
  }
  const Int plane = grid.PlaneSize();
  const Int begin = panels.ranges[panel][0];
  const Int end = panels.ranges[panel][1];
  const Int length = end - begin;
  const Int padding = panels.pml_size;
  const Dims dims{grid.dims[0], grid.dims[1], padding + length};

  std::array<AxisStretch, 3> global = GridStretches(grid, damping.omega);
  std::array<AxisStretch, 3> stretches;
  stretches[0] = std::move(global[0]);
  stretches[1] = std::move(global[1]);
  const AxisStretch padded =
      MakeAxisStretch(padding + length, grid.spacing[2], /*low_pml=*/true,
                      /*high_pml=*/false, grid.profile, damping.omega);
  AxisStretch& axis = stretches[2];
  axis.node.assign(padded.node.begin(), padded.node.begin() + padding);
  axis.node.insert(axis.node.end(), global[2].node.begin() + begin,
                   global[2].node.begin() + end);
  axis.mid.assign(padded.mid.begin(), padded.mid.begin() + padding + 1);
  axis.mid.insert(axis.mid.end(), global[2].mid.begin() + begin + 1,
                  global[2].mid.begin() + end + 1);

  std::vector<double> local_speeds;
  local_speeds.reserve(dims[0] * dims[1] * dims[2]);
  const auto first_plane = speeds.begin() + begin * plane;
  for (Int p = 0; p < padding; ++p) {
    local_speeds.insert(local_speeds.end(), first_plane, first_plane + plane);
  }
  local_speeds.insert(local_speeds.end(), first_plane,
                      first_plane + length * plane);
  return AssembleStretched(dims, grid.spacing, stretches, local_speeds, damping);
}

SweepPreconditioner SweepPreconditioner::Setup(
    const SparseOperator& damped, const GridSpec& grid,
    std::span<const double> speeds, const DampingSpec& damping,
    const PanelPartition& panels, const SweepOptions& options) {
  grid.Validate();
  if (damped.Dimension() != grid.NumNodes() ||
      static_cast<Int>(speeds.size()) != grid.NumNodes()) {
    throw DimensionError("operator and speeds must match the grid");
  }
  SweepPreconditioner precond;
  precond.panels_ = panels;
  precond.damping_ = damping;
  precond.plane_size_ = grid.PlaneSize();
  precond.dimension_ = grid.NumNodes();

  PanelBlocks blocks = ExtractPanelBlocks(damped, grid.dims, panels);
  precond.couplers_ = std::move(blocks.couplers);

  const Int m = panels.NumPanels();
  precond.auxiliary_.resize(m);
  std::vector<std::exception_ptr> errors(m);
  std::atomic<Int> next{0};
  auto worker = [&] {
    for (Int i = next++; i < m; i = next++) {
      try {
        SparseOperator op =
            i == 0 ? std::move(blocks.diagonal[0])
                   : AssemblePaddedPanel(grid, speeds, damping, panels, i);
        const Int padding = i == 0 ? 0 : panels.pml_size;
        const Dims dims{grid.dims[0], grid.dims[1],
                        padding + panels.NumPlanes(i)};
        precond.auxiliary_[i] = std::make_unique<AuxiliaryProblem>(
            i, padding, dims, std::move(op), options.leaf_cutoff,
            options.selective_inversion, options.factor);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  Int threads = options.threads > 0
                    ? options.threads
                    : static_cast<Int>(std::thread::hardware_concurrency());
  threads = std::clamp<Int>(threads, 1, m);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (Int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (Int i = 0; i < m; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const SingularFrontError& e) {
      throw SingularFrontError(
          e.Supernode(), "panel " + std::to_string(i) + ": " + e.what());
    }
  }
  return precond;
}

void SweepPreconditioner::Apply(std::span<const Complex> r,
                                std::span<Complex> z) const {
  if (static_cast<Int>(r.size()) != dimension_ ||
      static_cast<Int>(z.size()) != dimension_) {
    throw DimensionError("preconditioner vector length mismatch");
  }
  std::copy(r.begin(), r.end(), z.begin());
  const Int m = panels_.NumPanels();
  auto panel = [&](Int i) {
    return z.subspan(panels_.ranges[i][0] * plane_size_,
                     panels_.NumPlanes(i) * plane_size_);
  };
  std::vector<Complex> work;

  // L^{-1} and D^{-1}.
  for (Int i = 0; i < m; ++i) {
    auto u = panel(i);
    work.assign(u.begin(), u.end());
    auxiliary_[i]->ApplySchurInverse(work, u);
    if (i + 1 < m) couplers_[i].MultiplyAdd(-1.0, u, panel(i + 1));
  }
  // L^{-T}.
  std::vector<Complex> coupled;
  for (Int i = m - 2; i >= 0; --i) {
    auto u = panel(i);
    coupled.assign(u.size(), Complex());
    couplers_[i].TransposeMultiplyAdd(1.0, panel(i + 1), coupled);
    work.resize(u.size());
    auxiliary_[i]->ApplySchurInverse(coupled, work);
    for (size_t k = 0; k < u.size(); ++k) u[k] -= work[k];
  }
}

double SweepPreconditioner::SetupFlops() const {
  double total = 0;
  for (const auto& aux : auxiliary_) {
    total += aux->Factorization().FactorFlops() +
             aux->Factorization().InversionFlops();
  }
  return total;
}

double SweepPreconditioner::ApplyFlops() const {
  const Int m = panels_.NumPanels();
  double total = 0;
  for (Int i = 0; i < m; ++i) {
    total += (i + 1 < m ? 2 : 1) * auxiliary_[i]->ApplyFlops();
  }
  for (const SparseOperator& coupler : couplers_) {
    total += 2 * coupler.MultiplyFlops();
  }
  return total;
}

Int SweepPreconditioner::StoredEntries() const {
  Int total = 0;
  for (const auto& aux : auxiliary_) total += aux->Factorization().StoredEntries();
  return total;
}

}  // namespace helmsweep

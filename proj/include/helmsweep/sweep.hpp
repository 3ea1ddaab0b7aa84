#ifndef HELMSWEEP_SWEEP_HPP_
#define HELMSWEEP_SWEEP_HPP_

#include <memory>
#include <span>
#include <vector>

#include "helmsweep/discretize.hpp"
#include "helmsweep/frontal.hpp"
#include "helmsweep/ndtree.hpp"
#include "helmsweep/sparse.hpp"

namespace helmsweep {

// Quasi-2D subdomain problem H_i for one panel. For i >= 1 the first
// 'padding' x3-planes are artificial PML and the remaining planes are the
// panel's physical planes; panel 0 carries no padding.
class AuxiliaryProblem {
 public:
  AuxiliaryProblem(Int panel, Int padding, Dims dims, SparseOperator op,
                   Int leaf_cutoff, bool selective_inversion,
                   const FactorOptions& options);

  Int Panel() const { return panel_; }
  Int Padding() const { return padding_; }
  const Dims& PaddedDims() const { return dims_; }
  const SparseOperator& Operator() const { return op_; }
  const FrontalTree& Factorization() const { return *factorization_; }
  Int PanelSize() const { return (dims_[2] - padding_) * dims_[0] * dims_[1]; }

  // T_i u: extends u by zero over the padding, solves against H_i and
  // restricts the result to the panel planes.
  void ApplySchurInverse(std::span<const Complex> u,
                         std::span<Complex> result) const;
  double ApplyFlops() const;

 private:
  Int panel_;
  Int padding_;
  Dims dims_;
  SparseOperator op_;
  std::unique_ptr<FrontalTree> factorization_;
};

struct SweepOptions {
  bool selective_inversion = true;
  Int leaf_cutoff = kDefaultLeafCutoff;
  // Worker threads for the independent panel factorizations; 0 picks the
  // hardware concurrency.
  Int threads = 0;
  FactorOptions factor;
};

// H_i for panel i >= 1: J restricted to the panel with 'pml_size' PML planes
// prefixed below it. Wave speeds in the padding replicate the panel's first
// plane and the transverse stretching follows the global grid.
SparseOperator AssemblePaddedPanel(const GridSpec& grid,
                                   std::span<const double> speeds,
                                   const DampingSpec& damping,
                                   const PanelPartition& panels, Int panel);

// The moving-PML sweeping preconditioner: an approximate block LDL^T
// factorization of the damped operator J across x3-panels.
class SweepPreconditioner {
 public:
  // Forms and factors H_0 = J_{0,0} and the padded H_i, and extracts the
  // couplers J_{i+1,i}. A SingularFrontError is rethrown naming the panel.
  static SweepPreconditioner Setup(const SparseOperator& damped,
                                   const GridSpec& grid,
                                   std::span<const double> speeds,
                                   const DampingSpec& damping,
                                   const PanelPartition& panels,
                                   const SweepOptions& options = {});

  // z := M^{-1} r with M the approximate factorization of J.
  void Apply(std::span<const Complex> r, std::span<Complex> z) const;

  const PanelPartition& Panels() const { return panels_; }
  const AuxiliaryProblem& Auxiliary(Int panel) const { return *auxiliary_[panel]; }
  const SparseOperator& Coupler(Int panel) const { return couplers_[panel]; }
  const DampingSpec& Damping() const { return damping_; }
  Int Dimension() const { return dimension_; }

  double SetupFlops() const;
  double ApplyFlops() const;
  Int StoredEntries() const;

 private:
  SweepPreconditioner() = default;

  PanelPartition panels_;
  DampingSpec damping_;
  Int plane_size_ = 0;
  Int dimension_ = 0;
  std::vector<std::unique_ptr<AuxiliaryProblem>> auxiliary_;
  std::vector<SparseOperator> couplers_;
};

}  // namespace helmsweep

#endif  // HELMSWEEP_SWEEP_HPP_

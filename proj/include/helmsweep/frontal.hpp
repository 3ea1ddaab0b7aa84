#ifndef HELMSWEEP_FRONTAL_HPP_
#define HELMSWEEP_FRONTAL_HPP_

#include <memory>
#include <span>
#include <vector>

#include "helmsweep/dense.hpp"
#include "helmsweep/ndtree.hpp"
#include "helmsweep/sparse.hpp"
#include "helmsweep/types.hpp"

namespace helmsweep {

// Factored front of one supernode.
//
// top_left holds the strictly-lower part of the unit-lower L_F (or of
// inv(L_F) once selectively inverted); its diagonal and upper triangle are
// unused. bottom_left holds F_BL = \hat F_BL L_F^{-T} D_F^{-1}, the block of L
// coupling the supernode to its lower structure.
struct Front {
  DenseMatrix top_left;
  DenseMatrix bottom_left;
  std::vector<Complex> diagonal;
};

enum class FactorState { kSymbolic, kFactored, kSelectivelyInverted };

struct PivotWarning {
  Int supernode;
  Int index;  // reordered index of the pivot
  double magnitude;
};

struct FactorOptions {
  // Pivots below this multiple of max |diag(A)| produce a warning.
  double pivot_warning_ratio = 1e-14;
};

// Multifrontal LDL^T factorization of a complex-symmetric operator along a
// supernodal elimination tree. Once factored the tree is immutable, so Solve
// may be called concurrently from several threads.
class FrontalTree {
 public:
  // Post-order multifrontal factorization. Throws SingularFrontError naming
  // the supernode that met an exactly-zero pivot.
  static FrontalTree Factor(std::shared_ptr<const EliminationTree> tree,
                            const SparseOperator& op,
                            const FactorOptions& options = {});

  // Replaces every L_F by inv(L_F) so that solves use triangular matrix-vector
  // products instead of triangular solves.
  void SelectivelyInvert();

  FactorState State() const { return state_; }
  const EliminationTree& Tree() const { return *tree_; }
  std::shared_ptr<const EliminationTree> SharedTree() const { return tree_; }
  const std::vector<Front>& Fronts() const { return fronts_; }
  const std::vector<PivotWarning>& Warnings() const { return warnings_; }
  Int Dimension() const { return tree_->NumIndices(); }

  // x := A^{-1} x in the operator's natural ordering.
  void SolveInPlace(std::span<Complex> x) const;
  std::vector<Complex> Solve(std::span<const Complex> b) const;

  // The three phases on a vector already in the tree's reordered indexing.
  void ForwardSolvePermuted(std::span<Complex> x) const;   // L^{-1}
  void DiagonalSolvePermuted(std::span<Complex> x) const;  // D^{-1}
  void BackwardSolvePermuted(std::span<Complex> x) const;  // L^{-T}

  double FactorFlops() const { return factor_flops_; }
  double InversionFlops() const { return inversion_flops_; }
  // Real flops spent by one call to Solve.
  double SolveFlops() const;
  // Stored complex entries across all fronts.
  Int StoredEntries() const;

 private:
  FrontalTree() = default;

  std::shared_ptr<const EliminationTree> tree_;
  std::vector<Front> fronts_;
  std::vector<PivotWarning> warnings_;
  FactorState state_ = FactorState::kSymbolic;
  double factor_flops_ = 0;
  double inversion_flops_ = 0;
};

}  // namespace helmsweep

#endif  // HELMSWEEP_FRONTAL_HPP_

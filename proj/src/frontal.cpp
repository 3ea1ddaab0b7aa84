#include "helmsweep/frontal.hpp"

#include <algorithm>
#include <string>

namespace helmsweep {

FrontalTree FrontalTree::Factor(std::shared_ptr<const EliminationTree> tree,
                                const SparseOperator& op,
                                const FactorOptions& options) {
  if (!tree || !tree->Analyzed()) {
    throw StateError("factorization requires a symbolically analyzed tree");
  }
  const Int n = tree->NumIndices();
  if (op.NumRows() != n || op.NumColumns() != n) {
    throw DimensionError("operator does not match elimination tree");
  }

  FrontalTree result;
  result.tree_ = tree;
  const auto& supernodes = tree->Supernodes();
  const auto& perm = tree->Permutation();
  const auto& inverse = tree->InversePermutation();
  const auto offsets = op.RowOffsets();
  const auto columns = op.ColumnIndices();
  const auto values = op.Values();

  double max_diagonal = 0;
  for (Int i = 0; i < n; ++i) {
    max_diagonal = std::max(max_diagonal, std::abs(op.Entry(i, i)));
  }
  const double warn_threshold = options.pivot_warning_ratio * max_diagonal;

  FlopCount flops;
  std::vector<DenseMatrix> updates(supernodes.size());
  std::vector<Int> position(n, -1);
  result.fronts_.resize(supernodes.size());

  for (const Supernode& node : supernodes) {
    const Int t = node.size;
    const Int b = static_cast<Int>(node.lower_struct.size());
    Front& front = result.fronts_[node.id];
    DenseMatrix top_left(t, t);
    DenseMatrix bottom_left(b, t);
    DenseMatrix bottom_right(b, b);

    for (Int k = 0; k < t; ++k) position[node.start + k] = k;
    for (Int k = 0; k < b; ++k) position[node.lower_struct[k]] = t + k;

    // Original entries of the lower triangle within this front's columns.
    for (Int j = node.start; j < node.start + t; ++j) {
      const Int old = inverse[j];
      const Int col = j - node.start;
      for (Int k = offsets[old]; k < offsets[old + 1]; ++k) {
        const Int row_index = perm[columns[k]];
        if (row_index < j) continue;
        const Int row = position[row_index];
        if (row < 0) {
          throw ConfigError("operator entry outside the symbolic structure");
        }
        if (row < t) {
          top_left(row, col) += values[k];
        } else {
          bottom_left(row - t, col) += values[k];
        }
      }
    }

    // Extend-add of the children's Schur complement updates.
    for (Int child_id : node.children) {
      DenseMatrix& update = updates[child_id];
      const auto& relative = supernodes[child_id].parent_relative;
      const Int m = update.Rows();
      for (Int cj = 0; cj < m; ++cj) {
        const Int c = relative[cj];
        for (Int ci = cj; ci < m; ++ci) {
          const Int r = relative[ci];
          const Complex value = update(ci, cj);
          if (c < t) {
            if (r < t) {
              top_left(r, c) += value;
            } else {
              bottom_left(r - t, c) += value;
            }
          } else {
            bottom_right(r - t, c - t) += value;
          }
        }
      }
      update.Clear();
    }

    for (Int k = 0; k < t; ++k) position[node.start + k] = -1;
    for (Int k = 0; k < b; ++k) position[node.lower_struct[k]] = -1;

    std::vector<Int> small_pivots;
    const Int zero =
        dense::LdltInPlace(top_left, warn_threshold, &small_pivots, &flops);
    if (zero >= 0) {
      throw SingularFrontError(
          node.id, "zero pivot in supernode " + std::to_string(node.id) +
                       " at local column " + std::to_string(zero));
    }
    for (Int k : small_pivots) {
      result.warnings_.push_back(
          {node.id, node.start + k, std::abs(top_left(k, k))});
    }
    front.diagonal.resize(t);
    for (Int k = 0; k < t; ++k) front.diagonal[k] = top_left(k, k);

    if (b > 0) {
      dense::RightSolveUnitLowerTranspose(top_left, bottom_left, &flops);
      DenseMatrix scaled = bottom_left;
      for (Int k = 0; k < t; ++k) {
        const Complex inv_pivot = 1.0 / front.diagonal[k];
        Complex* column = scaled.Column(k);
        for (Int i = 0; i < b; ++i) column[i] *= inv_pivot;
      }
      flops.AddComplexMultiplyAdds(static_cast<double>(b * t));
      // bottom_left is Z_BL here; scaled becomes the finalized F_BL.
      dense::SymmetricUpdateLower(bottom_left, scaled, bottom_right, &flops);
      bottom_left = std::move(scaled);
    }
    if (node.parent >= 0) updates[node.id] = std::move(bottom_right);

    front.top_left = std::move(top_left);
    front.bottom_left = std::move(bottom_left);
  }

  result.factor_flops_ = flops.value;
  result.state_ = FactorState::kFactored;
  return result;
}

void FrontalTree::SelectivelyInvert() {
  if (state_ != FactorState::kFactored) {
    throw StateError("selective inversion requires a factored, uninverted tree");
  }
  FlopCount flops;
  for (Front& front : fronts_) {
    dense::InvertUnitLowerInPlace(front.top_left, &flops);
  }
  inversion_flops_ = flops.value;
  state_ = FactorState::kSelectivelyInverted;
}

void FrontalTree::ForwardSolvePermuted(std::span<Complex> x) const {
  const bool inverted = state_ == FactorState::kSelectivelyInverted;
  std::vector<Complex> coupled;
  for (const Supernode& node : tree_->Supernodes()) {
    const Front& front = fronts_[node.id];
    auto xs = x.subspan(node.start, node.size);
    if (inverted) {
      dense::MultiplyUnitLower(front.top_left, xs);
    } else {
      dense::SolveUnitLower(front.top_left, xs);
    }
    const size_t b = node.lower_struct.size();
    if (b == 0) continue;
    coupled.assign(b, Complex());
    dense::MultiplyAdd(1.0, front.bottom_left, xs, coupled);
    for (size_t k = 0; k < b; ++k) x[node.lower_struct[k]] -= coupled[k];
  }
}

void FrontalTree::DiagonalSolvePermuted(std::span<Complex> x) const {
  for (const Supernode& node : tree_->Supernodes()) {
    const Front& front = fronts_[node.id];
    for (Int k = 0; k < node.size; ++k) x[node.start + k] /= front.diagonal[k];
  }
}

void FrontalTree::BackwardSolvePermuted(std::span<Complex> x) const {
  const bool inverted = state_ == FactorState::kSelectivelyInverted;
  const auto& supernodes = tree_->Supernodes();
  std::vector<Complex> gathered;
  for (auto it = supernodes.rbegin(); it != supernodes.rend(); ++it) {
    const Supernode& node = *it;
    const Front& front = fronts_[node.id];
    auto xs = x.subspan(node.start, node.size);
    const size_t b = node.lower_struct.size();
    if (b > 0) {
      gathered.resize(b);
      for (size_t k = 0; k < b; ++k) gathered[k] = x[node.lower_struct[k]];
      dense::TransposeMultiplyAdd(-1.0, front.bottom_left, gathered, xs);
    }
    if (inverted) {
      dense::MultiplyUnitLowerTranspose(front.top_left, xs);
    } else {
      dense::SolveUnitLowerTranspose(front.top_left, xs);
    }
  }
}

void FrontalTree::SolveInPlace(std::span<Complex> x) const {
  if (state_ == FactorState::kSymbolic) {
    throw StateError("solve requires a factored tree");
  }
  const Int n = Dimension();
  if (static_cast<Int>(x.size()) != n) {
    throw DimensionError("right-hand side length does not match operator");
  }
  const auto& perm = tree_->Permutation();
  std::vector<Complex> work(n);
  for (Int i = 0; i < n; ++i) work[perm[i]] = x[i];
  ForwardSolvePermuted(work);
  DiagonalSolvePermuted(work);
  BackwardSolvePermuted(work);
  for (Int i = 0; i < n; ++i) x[i] = work[perm[i]];
}

std::vector<Complex> FrontalTree::Solve(std::span<const Complex> b) const {
  std::vector<Complex> x(b.begin(), b.end());
  SolveInPlace(x);
  return x;
}

double FrontalTree::SolveFlops() const {
  double cmadds = 0;
  double divides = 0;
  for (const Supernode& node : tree_->Supernodes()) {
    const double t = static_cast<double>(node.size);
    const double b = static_cast<double>(node.lower_struct.size());
    cmadds += 2 * (t * (t - 1) / 2 + b * t);
    divides += t;
  }
  FlopCount flops;
  flops.AddComplexMultiplyAdds(cmadds);
  flops.AddComplexDivides(divides);
  return flops.value;
}

Int FrontalTree::StoredEntries() const {
  Int total = 0;
  for (const Front& front : fronts_) {
    total += front.top_left.Rows() * front.top_left.Cols() +
             front.bottom_left.Rows() * front.bottom_left.Cols() +
             static_cast<Int>(front.diagonal.size());
  }
  return total;
}

}  // namespace helmsweep

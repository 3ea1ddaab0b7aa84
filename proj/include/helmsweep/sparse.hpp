#ifndef HELMSWEEP_SPARSE_HPP_
#define HELMSWEEP_SPARSE_HPP_

#include <iosfwd>
#include <span>
#include <vector>

#include "helmsweep/types.hpp"

namespace helmsweep {

struct Triplet {
  Int row;
  Int column;
  Complex value;
};

// Compressed-row complex matrix. Column indices are sorted within each row.
class SparseOperator {
 public:
  SparseOperator() = default;

  // Duplicate (row, column) pairs are summed.
  static SparseOperator FromTriplets(Int num_rows, Int num_columns,
                                     std::vector<Triplet> entries,
                                     bool symmetric = false);

  // Takes ownership of already-sorted CSR arrays.
  static SparseOperator FromCsr(Int num_rows, Int num_columns,
                                std::vector<Int> row_offsets,
                                std::vector<Int> column_indices,
                                std::vector<Complex> values, bool symmetric);

  Int NumRows() const { return num_rows_; }
  Int NumColumns() const { return num_columns_; }
  Int Dimension() const { return num_rows_; }
  Int NumNonzeros() const { return static_cast<Int>(values_.size()); }
  bool SymmetricFlag() const { return symmetric_; }

  std::span<const Int> RowOffsets() const { return row_offsets_; }
  std::span<const Int> ColumnIndices() const { return column_indices_; }
  std::span<const Complex> Values() const { return values_; }

  // Stored value at (row, column), zero if the entry is structurally absent.
  Complex Entry(Int row, Int column) const;

  // y := A x
  void Multiply(std::span<const Complex> x, std::span<Complex> y) const;
  // y := y + alpha A x
  void MultiplyAdd(Complex alpha, std::span<const Complex> x,
                   std::span<Complex> y) const;
  // y := y + alpha A^T x
  void TransposeMultiplyAdd(Complex alpha, std::span<const Complex> x,
                            std::span<Complex> y) const;

  // Submatrix over rows [row_begin,row_end) and columns [col_begin,col_end),
  // reindexed from zero.
  SparseOperator Block(Int row_begin, Int row_end, Int col_begin,
                       Int col_end) const;

  // max |A(i,j) - A(j,i)| over stored entries; infinity when the pattern is
  // not symmetric.
  double MaxAsymmetry() const;
  bool IsStructurallySymmetric() const;

  // Dense column-major copy; test and debugging use only.
  std::vector<Complex> ToDense() const;

  // "N nnz" header followed by one "row col re im" line per stored entry.
  void WriteTriplets(std::ostream& out) const;

  double MultiplyFlops() const { return 8.0 * static_cast<double>(NumNonzeros()); }

 private:
  Int num_rows_ = 0;
  Int num_columns_ = 0;
  bool symmetric_ = false;
  std::vector<Int> row_offsets_{0};
  std::vector<Int> column_indices_;
  std::vector<Complex> values_;
};

}  // namespace helmsweep

#endif  // HELMSWEEP_SPARSE_HPP_

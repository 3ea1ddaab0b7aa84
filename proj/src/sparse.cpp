#include "helmsweep/sparse.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>

namespace helmsweep {

SparseOperator SparseOperator::FromTriplets(Int num_rows, Int num_columns,
                                            std::vector<Triplet> entries,
                                            bool symmetric) {
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= num_rows || t.column < 0 ||
        t.column >= num_columns) {
      throw DomainError("triplet index out of range");
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.column < b.column;
            });
  std::vector<Int> offsets(num_rows + 1, 0);
  std::vector<Int> columns;
  std::vector<Complex> values;
  columns.reserve(entries.size());
  values.reserve(entries.size());
  for (size_t k = 0; k < entries.size(); ++k) {
    const Triplet& t = entries[k];
    if (k > 0 && entries[k - 1].row == t.row &&
        entries[k - 1].column == t.column) {
      values.back() += t.value;
      continue;
    }
    columns.push_back(t.column);
    values.push_back(t.value);
    ++offsets[t.row + 1];
  }
  for (Int i = 0; i < num_rows; ++i) offsets[i + 1] += offsets[i];
  return FromCsr(num_rows, num_columns, std::move(offsets), std::move(columns),
                 std::move(values), symmetric);
}

SparseOperator SparseOperator::FromCsr(Int num_rows, Int num_columns,
                                       std::vector<Int> row_offsets,
                                       std::vector<Int> column_indices,
                                       std::vector<Complex> values,
                                       bool symmetric) {
  if (static_cast<Int>(row_offsets.size()) != num_rows + 1 ||
      column_indices.size() != values.size() ||
      row_offsets.back() != static_cast<Int>(values.size())) {
    throw DimensionError("inconsistent CSR arrays");
  }
  SparseOperator op;
  op.num_rows_ = num_rows;
  op.num_columns_ = num_columns;
  op.symmetric_ = symmetric;
  op.row_offsets_ = std::move(row_offsets);
  op.column_indices_ = std::move(column_indices);
  op.values_ = std::move(values);
  return op;
}

Complex SparseOperator::Entry(Int row, Int column) const {
  if (row < 0 || row >= num_rows_ || column < 0 || column >= num_columns_) {
    throw DomainError("entry index out of range");
  }
  const auto begin = column_indices_.begin() + row_offsets_[row];
  const auto end = column_indices_.begin() + row_offsets_[row + 1];
  const auto it = std::lower_bound(begin, end, column);
  if (it == end || *it != column) return {};
  return values_[it - column_indices_.begin()];
}

void SparseOperator::Multiply(std::span<const Complex> x,
                              std::span<Complex> y) const {
  std::fill(y.begin(), y.end(), Complex());
  MultiplyAdd(1.0, x, y);
}

void SparseOperator::MultiplyAdd(Complex alpha, std::span<const Complex> x,
                                 std::span<Complex> y) const {
  if (static_cast<Int>(x.size()) != num_columns_ ||
      static_cast<Int>(y.size()) != num_rows_) {
    throw DimensionError("sparse multiply dimension mismatch");
  }
  for (Int i = 0; i < num_rows_; ++i) {
    Complex sum = 0;
    for (Int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      sum += values_[k] * x[column_indices_[k]];
    }
    y[i] += alpha * sum;
  }
}

void SparseOperator::TransposeMultiplyAdd(Complex alpha,
                                          std::span<const Complex> x,
                                          std::span<Complex> y) const {
  if (static_cast<Int>(x.size()) != num_rows_ ||
      static_cast<Int>(y.size()) != num_columns_) {
    throw DimensionError("sparse transpose multiply dimension mismatch");
  }
  for (Int i = 0; i < num_rows_; ++i) {
    const Complex xi = alpha * x[i];
    for (Int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      y[column_indices_[k]] += values_[k] * xi;
    }
  }
}

SparseOperator SparseOperator::Block(Int row_begin, Int row_end, Int col_begin,
                                     Int col_end) const {
  if (row_begin < 0 || row_end > num_rows_ || row_begin > row_end ||
      col_begin < 0 || col_end > num_columns_ || col_begin > col_end) {
    throw DomainError("block range outside the operator");
  }
  std::vector<Int> offsets(row_end - row_begin + 1, 0);
  std::vector<Int> columns;
  std::vector<Complex> values;
  for (Int i = row_begin; i < row_end; ++i) {
    for (Int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const Int j = column_indices_[k];
      if (j >= col_begin && j < col_end) {
        columns.push_back(j - col_begin);
        values.push_back(values_[k]);
      }
    }
    offsets[i - row_begin + 1] = static_cast<Int>(values.size());
  }
  const bool symmetric =
      symmetric_ && row_begin == col_begin && row_end == col_end;
  return FromCsr(row_end - row_begin, col_end - col_begin, std::move(offsets),
                 std::move(columns), std::move(values), symmetric);
}

bool SparseOperator::IsStructurallySymmetric() const {
  if (num_rows_ != num_columns_) return false;
  for (Int i = 0; i < num_rows_; ++i) {
    for (Int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const Int j = column_indices_[k];
      const auto begin = column_indices_.begin() + row_offsets_[j];
      const auto end = column_indices_.begin() + row_offsets_[j + 1];
      if (!std::binary_search(begin, end, i)) return false;
    }
  }
  return true;
}

double SparseOperator::MaxAsymmetry() const {
  if (!IsStructurallySymmetric()) {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0;
  for (Int i = 0; i < num_rows_; ++i) {
    for (Int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      worst = std::max(worst, std::abs(values_[k] - Entry(column_indices_[k], i)));
    }
  }
  return worst;
}

std::vector<Complex> SparseOperator::ToDense() const {
  std::vector<Complex> dense(static_cast<size_t>(num_rows_ * num_columns_));
  for (Int i = 0; i < num_rows_; ++i) {
    for (Int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      dense[i + column_indices_[k] * num_rows_] = values_[k];
    }
  }
  return dense;
}

void SparseOperator::WriteTriplets(std::ostream& out) const {
  out << num_rows_ << ' ' << NumNonzeros() << '\n';
  char line[128];
  for (Int i = 0; i < num_rows_; ++i) {
    for (Int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      std::snprintf(line, sizeof(line), "%lld %lld %.17g %.17g\n",
                    static_cast<long long>(i),
                    static_cast<long long>(column_indices_[k]),
                    values_[k].real(), values_[k].imag());
      out << line;
    }
  }
}

}  // namespace helmsweep

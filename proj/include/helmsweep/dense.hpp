#ifndef HELMSWEEP_DENSE_HPP_
#define HELMSWEEP_DENSE_HPP_

#include <span>
#include <vector>

#include "helmsweep/types.hpp"

namespace helmsweep {

// Column-major dense complex matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(Int rows, Int cols)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows * cols)) {}

  Int Rows() const { return rows_; }
  Int Cols() const { return cols_; }
  bool Empty() const { return data_.empty(); }

  Complex& operator()(Int i, Int j) { return data_[i + j * rows_]; }
  const Complex& operator()(Int i, Int j) const { return data_[i + j * rows_]; }

  Complex* Column(Int j) { return data_.data() + j * rows_; }
  const Complex* Column(Int j) const { return data_.data() + j * rows_; }

  std::span<Complex> Data() { return data_; }
  std::span<const Complex> Data() const { return data_; }

  void Clear() {
    data_.clear();
    data_.shrink_to_fit();
    rows_ = cols_ = 0;
  }

 private:
  Int rows_ = 0;
  Int cols_ = 0;
  std::vector<Complex> data_;
};

// Dense kernels used by the multifrontal factorization. Only the lower
// triangle of symmetric operands is read or written.
namespace dense {

// Unpivoted A = L D L^T over the lower triangle. The strictly-lower part of
// 'a' is overwritten with L (unit diagonal implied) and its diagonal with D.
// Pivots with magnitude below 'warn_threshold' are appended to
// 'small_pivots'. Returns the index of the first exactly-zero pivot, or -1.
Int LdltInPlace(DenseMatrix& a, double warn_threshold,
                std::vector<Int>* small_pivots, FlopCount* flops);

// B := B L^{-T} for unit-lower L (strictly-lower part of 'l' used).
void RightSolveUnitLowerTranspose(const DenseMatrix& l, DenseMatrix& b,
                                  FlopCount* flops);

// Lower triangle of C := C - Z F^T.
void SymmetricUpdateLower(const DenseMatrix& z, const DenseMatrix& f,
                          DenseMatrix& c, FlopCount* flops);

// Overwrites the strictly-lower part of unit-lower L with that of inv(L).
void InvertUnitLowerInPlace(DenseMatrix& l, FlopCount* flops);

// x := L^{-1} x and x := L^{-T} x for unit-lower L.
void SolveUnitLower(const DenseMatrix& l, std::span<Complex> x);
void SolveUnitLowerTranspose(const DenseMatrix& l, std::span<Complex> x);

// x := L x and x := L^T x for unit-lower L.
void MultiplyUnitLower(const DenseMatrix& l, std::span<Complex> x);
void MultiplyUnitLowerTranspose(const DenseMatrix& l, std::span<Complex> x);

// y := y + alpha B x and y := y + alpha B^T x for general B.
void MultiplyAdd(Complex alpha, const DenseMatrix& b,
                 std::span<const Complex> x, std::span<Complex> y);
void TransposeMultiplyAdd(Complex alpha, const DenseMatrix& b,
                          std::span<const Complex> x, std::span<Complex> y);

}  // namespace dense

}  // namespace helmsweep

#endif  // HELMSWEEP_DENSE_HPP_

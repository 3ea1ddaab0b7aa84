#include "helmsweep/dense.hpp"

#include <algorithm>
#include <cmath>

namespace helmsweep::dense {

namespace {

constexpr Int kBlockSize = 48;

// Strided column-major window into a DenseMatrix.
struct View {
  Complex* data;
  Int rows;
  Int cols;
  Int ld;

  Complex& operator()(Int i, Int j) const { return data[i + j * ld]; }
  Complex* Column(Int j) const { return data + j * ld; }
  View Sub(Int i, Int j, Int r, Int c) const {
    return {data + i + j * ld, r, c, ld};
  }
};

View MakeView(DenseMatrix& m) { return {m.Data().data(), m.Rows(), m.Cols(), m.Rows()}; }
View MakeView(const DenseMatrix& m) {
  return {const_cast<Complex*>(m.Data().data()), m.Rows(), m.Cols(), m.Rows()};
}

// Lower triangle (i >= j, in C's own indexing) of C -= Z F^T.
void UpdateLower(const View& z, const View& f, const View& c) {
  const Int m = c.rows;
  const Int n = c.cols;
  const Int k_count = z.cols;
  Int j = 0;
  for (; j + 4 <= n; j += 4) {
    Complex* c0 = c.Column(j);
    Complex* c1 = c.Column(j + 1);
    Complex* c2 = c.Column(j + 2);
    Complex* c3 = c.Column(j + 3);
    for (Int k = 0; k < k_count; ++k) {
      const Complex* zk = z.Column(k);
      const Complex f0 = f(j, k), f1 = f(j + 1, k), f2 = f(j + 2, k),
                    f3 = f(j + 3, k);
      // Triangular corner of the 4-column strip.
      for (Int i = j; i < std::min(j + 4, m); ++i) {
        const Complex zi = zk[i];
        c0[i] -= zi * f0;
        if (i >= j + 1) c1[i] -= zi * f1;
        if (i >= j + 2) c2[i] -= zi * f2;
        if (i >= j + 3) c3[i] -= zi * f3;
      }
      for (Int i = j + 4; i < m; ++i) {
        const Complex zi = zk[i];
        c0[i] -= zi * f0;
        c1[i] -= zi * f1;
        c2[i] -= zi * f2;
        c3[i] -= zi * f3;
      }
    }
  }
  for (; j < n; ++j) {
    Complex* cj = c.Column(j);
    for (Int k = 0; k < k_count; ++k) {
      const Complex* zk = z.Column(k);
      const Complex fjk = f(j, k);
      for (Int i = j; i < m; ++i) cj[i] -= zk[i] * fjk;
    }
  }
}

// B := B L^{-T}, L unit lower (strictly-lower part of l).
void RightSolve(const View& l, const View& b) {
  for (Int j = 0; j < b.cols; ++j) {
    Complex* bj = b.Column(j);
    for (Int k = 0; k < j; ++k) {
      const Complex ljk = l(j, k);
      if (ljk == Complex()) continue;
      const Complex* bk = b.Column(k);
      for (Int i = 0; i < b.rows; ++i) bj[i] -= bk[i] * ljk;
    }
  }
}

Int LdltUnblocked(const View& a, Int offset, double warn_threshold,
                  std::vector<Int>* small_pivots, std::vector<Complex>& work) {
  const Int n = a.rows;
  for (Int k = 0; k < n; ++k) {
    const Complex pivot = a(k, k);
    if (pivot == Complex()) return offset + k;
    if (small_pivots && std::abs(pivot) < warn_threshold) {
      small_pivots->push_back(offset + k);
    }
    Complex* col = a.Column(k);
    const Complex inv_pivot = 1.0 / pivot;
    work.assign(col + k + 1, col + n);
    for (Int i = k + 1; i < n; ++i) col[i] *= inv_pivot;
    for (Int j = k + 1; j < n; ++j) {
      const Complex coef = work[j - k - 1];
      Complex* cj = a.Column(j);
      for (Int i = j; i < n; ++i) cj[i] -= col[i] * coef;
    }
  }
  return -1;
}

}  // namespace

Int LdltInPlace(DenseMatrix& a, double warn_threshold,
                std::vector<Int>* small_pivots, FlopCount* flops) {
  const Int n = a.Rows();
  View full = MakeView(a);
  std::vector<Complex> work;
  DenseMatrix z;
  for (Int k = 0; k < n; k += kBlockSize) {
    const Int nb = std::min(kBlockSize, n - k);
    const Int rest = n - k - nb;
    View diag = full.Sub(k, k, nb, nb);
    const Int zero = LdltUnblocked(diag, k, warn_threshold, small_pivots, work);
    if (zero >= 0) return zero;
    if (rest == 0) break;
    View below = full.Sub(k + nb, k, rest, nb);
    RightSolve(diag, below);
    if (z.Rows() != rest || z.Cols() != nb) z = DenseMatrix(rest, nb);
    View zv = MakeView(z);
    for (Int j = 0; j < nb; ++j) {
      const Complex inv_pivot = 1.0 / diag(j, j);
      Complex* bj = below.Column(j);
      Complex* zj = zv.Column(j);
      for (Int i = 0; i < rest; ++i) {
        zj[i] = bj[i];
        bj[i] *= inv_pivot;
      }
    }
    UpdateLower(zv, below, full.Sub(k + nb, k + nb, rest, rest));
  }
  if (flops) {
    const double nd = static_cast<double>(n);
    flops->AddComplexMultiplyAdds(nd * nd * nd / 3.0);
  }
  return -1;
}

void RightSolveUnitLowerTranspose(const DenseMatrix& l, DenseMatrix& b,
                                  FlopCount* flops) {
  if (l.Rows() != l.Cols() || b.Cols() != l.Rows()) {
    throw DimensionError("triangular solve dimension mismatch");
  }
  RightSolve(MakeView(l), MakeView(b));
  if (flops) {
    const double t = static_cast<double>(l.Rows());
    flops->AddComplexMultiplyAdds(static_cast<double>(b.Rows()) * t * (t - 1) / 2);
  }
}

void SymmetricUpdateLower(const DenseMatrix& z, const DenseMatrix& f,
                          DenseMatrix& c, FlopCount* flops) {
  if (z.Rows() != c.Rows() || f.Rows() != c.Cols() || z.Cols() != f.Cols() ||
      c.Rows() != c.Cols()) {
    throw DimensionError("symmetric update dimension mismatch");
  }
  UpdateLower(MakeView(z), MakeView(f), MakeView(c));
  if (flops) {
    const double b = static_cast<double>(c.Rows());
    flops->AddComplexMultiplyAdds(b * (b + 1) / 2 * static_cast<double>(z.Cols()));
  }
}

void InvertUnitLowerInPlace(DenseMatrix& l, FlopCount* flops) {
  const Int n = l.Rows();
  if (l.Cols() != n) throw DimensionError("inverse of a non-square matrix");
  // Columns are finalized right to left: with X the inverse of the trailing
  // block, X(j+1:, j) = -X(j+1:, j+1:) L(j+1:, j).
  std::vector<Complex> column;
  for (Int j = n - 2; j >= 0; --j) {
    Complex* lj = l.Column(j);
    column.assign(lj + j + 1, lj + n);
    std::fill(lj + j + 1, lj + n, Complex());
    for (Int k = j + 1; k < n; ++k) {
      const Complex coef = column[k - j - 1];
      if (coef == Complex()) continue;
      const Complex* xk = l.Column(k);
      lj[k] -= coef;
      for (Int i = k + 1; i < n; ++i) lj[i] -= xk[i] * coef;
    }
  }
  if (flops) {
    const double nd = static_cast<double>(n);
    flops->AddComplexMultiplyAdds(nd * nd * nd / 6.0);
  }
}

void SolveUnitLower(const DenseMatrix& l, std::span<Complex> x) {
  const Int n = l.Rows();
  for (Int j = 0; j < n; ++j) {
    const Complex xj = x[j];
    if (xj == Complex()) continue;
    const Complex* lj = l.Column(j);
    for (Int i = j + 1; i < n; ++i) x[i] -= lj[i] * xj;
  }
}

void SolveUnitLowerTranspose(const DenseMatrix& l, std::span<Complex> x) {
  const Int n = l.Rows();
  for (Int j = n - 1; j >= 0; --j) {
    const Complex* lj = l.Column(j);
    Complex sum = x[j];
    for (Int i = j + 1; i < n; ++i) sum -= lj[i] * x[i];
    x[j] = sum;
  }
}

void MultiplyUnitLower(const DenseMatrix& l, std::span<Complex> x) {
  const Int n = l.Rows();
  for (Int j = n - 1; j >= 0; --j) {
    const Complex xj = x[j];
    if (xj == Complex()) continue;
    const Complex* lj = l.Column(j);
    for (Int i = j + 1; i < n; ++i) x[i] += lj[i] * xj;
  }
}

void MultiplyUnitLowerTranspose(const DenseMatrix& l, std::span<Complex> x) {
  const Int n = l.Rows();
  for (Int j = 0; j < n; ++j) {
    const Complex* lj = l.Column(j);
    Complex sum = x[j];
    for (Int i = j + 1; i < n; ++i) sum += lj[i] * x[i];
    x[j] = sum;
  }
}

void MultiplyAdd(Complex alpha, const DenseMatrix& b,
                 std::span<const Complex> x, std::span<Complex> y) {
  for (Int j = 0; j < b.Cols(); ++j) {
    const Complex coef = alpha * x[j];
    if (coef == Complex()) continue;
    const Complex* bj = b.Column(j);
    for (Int i = 0; i < b.Rows(); ++i) y[i] += bj[i] * coef;
  }
}

void TransposeMultiplyAdd(Complex alpha, const DenseMatrix& b,
                          std::span<const Complex> x, std::span<Complex> y) {
  for (Int j = 0; j < b.Cols(); ++j) {
    const Complex* bj = b.Column(j);
    Complex sum = 0;
    for (Int i = 0; i < b.Rows(); ++i) sum += bj[i] * x[i];
    y[j] += alpha * sum;
  }
}

}  // namespace helmsweep::dense

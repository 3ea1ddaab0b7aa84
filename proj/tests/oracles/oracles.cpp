#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

DenseMatrix ToDense(const helmsweep::SparseOperator& op) {
  DenseMatrix a(op.NumRows(), op.NumColumns());
  const auto offsets = op.RowOffsets();
  const auto columns = op.ColumnIndices();
  const auto values = op.Values();
  for (Int i = 0; i < op.NumRows(); ++i) {
    for (Int k = offsets[i]; k < offsets[i + 1]; ++k) {
      a(i, columns[k]) += values[k];
    }
  }
  return a;
}

DenseMatrix Multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.Cols() != b.Rows()) throw std::invalid_argument("oracle multiply dims");
  DenseMatrix c(a.Rows(), b.Cols());
  for (Int j = 0; j < b.Cols(); ++j) {
    for (Int k = 0; k < a.Cols(); ++k) {
      const Complex bkj = b(k, j);
      if (bkj == Complex()) continue;
      for (Int i = 0; i < a.Rows(); ++i) c(i, j) += a(i, k) * bkj;
    }
  }
  return c;
}

Vector Multiply(const DenseMatrix& a, std::span<const Complex> x) {
  Vector y(a.Rows());
  for (Int j = 0; j < a.Cols(); ++j) {
    for (Int i = 0; i < a.Rows(); ++i) y[i] += a(i, j) * x[j];
  }
  return y;
}

DenseMatrix Transpose(const DenseMatrix& a) {
  DenseMatrix t(a.Cols(), a.Rows());
  for (Int j = 0; j < a.Cols(); ++j) {
    for (Int i = 0; i < a.Rows(); ++i) t(j, i) = a(i, j);
  }
  return t;
}

DenseMatrix Subtract(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c = a;
  for (Int j = 0; j < a.Cols(); ++j) {
    for (Int i = 0; i < a.Rows(); ++i) c(i, j) -= b(i, j);
  }
  return c;
}

DenseMatrix Block(const DenseMatrix& a, Int r0, Int r1, Int c0, Int c1) {
  DenseMatrix b(r1 - r0, c1 - c0);
  for (Int j = c0; j < c1; ++j) {
    for (Int i = r0; i < r1; ++i) b(i - r0, j - c0) = a(i, j);
  }
  return b;
}

double FrobeniusNorm(const DenseMatrix& a) {
  double sum = 0;
  for (const Complex& v : a.Data()) sum += std::norm(v);
  return std::sqrt(sum);
}

double Norm(std::span<const Complex> x) {
  double sum = 0;
  for (const Complex& v : x) sum += std::norm(v);
  return std::sqrt(sum);
}

double RelativeError(std::span<const Complex> x, std::span<const Complex> ref) {
  double diff = 0;
  for (size_t i = 0; i < x.size(); ++i) diff += std::norm(x[i] - ref[i]);
  const double scale = Norm(ref);
  return scale > 0 ? std::sqrt(diff) / scale : std::sqrt(diff);
}

DenseLu::DenseLu(DenseMatrix a) : lu_(std::move(a)), pivots_(lu_.Rows()) {
  const Int n = lu_.Rows();
  if (lu_.Cols() != n) throw std::invalid_argument("LU needs a square matrix");
  for (Int k = 0; k < n; ++k) {
    Int pivot = k;
    for (Int i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > std::abs(lu_(pivot, k))) pivot = i;
    }
    if (lu_(pivot, k) == Complex()) throw std::runtime_error("singular matrix");
    pivots_[k] = pivot;
    if (pivot != k) {
      for (Int j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(pivot, j));
    }
    const Complex inv = 1.0 / lu_(k, k);
    for (Int i = k + 1; i < n; ++i) lu_(i, k) *= inv;
    for (Int j = k + 1; j < n; ++j) {
      const Complex ukj = lu_(k, j);
      if (ukj == Complex()) continue;
      for (Int i = k + 1; i < n; ++i) lu_(i, j) -= lu_(i, k) * ukj;
    }
  }
}

Vector DenseLu::Solve(std::span<const Complex> b) const {
  const Int n = lu_.Rows();
  Vector x(b.begin(), b.end());
  for (Int k = 0; k < n; ++k) std::swap(x[k], x[pivots_[k]]);
  for (Int j = 0; j < n; ++j) {
    for (Int i = j + 1; i < n; ++i) x[i] -= lu_(i, j) * x[j];
  }
  for (Int j = n - 1; j >= 0; --j) {
    x[j] /= lu_(j, j);
    for (Int i = 0; i < j; ++i) x[i] -= lu_(i, j) * x[j];
  }
  return x;
}

DenseMatrix DenseLu::Solve(const DenseMatrix& b) const {
  DenseMatrix x(b.Rows(), b.Cols());
  for (Int j = 0; j < b.Cols(); ++j) {
    const Vector column(b.Column(j), b.Column(j) + b.Rows());
    const Vector solved = Solve(column);
    std::copy(solved.begin(), solved.end(), x.Column(j));
  }
  return x;
}

DenseMatrix DenseLu::Inverse() const {
  DenseMatrix identity(lu_.Rows(), lu_.Rows());
  for (Int i = 0; i < lu_.Rows(); ++i) identity(i, i) = 1;
  return Solve(identity);
}

NaiveBlockFactor NaiveBlockFact(const DenseMatrix& a, Int plane_size) {
  const Int n = a.Rows();
  if (n % plane_size != 0) throw std::invalid_argument("plane size must divide N");
  const Int planes = n / plane_size;
  NaiveBlockFactor f;
  f.plane = plane_size;
  auto block = [&](Int i, Int j) {
    return Block(a, i * plane_size, (i + 1) * plane_size, j * plane_size,
                 (j + 1) * plane_size);
  };
  f.schur.push_back(block(0, 0));
  for (Int i = 1; i < planes; ++i) {
    f.sub.push_back(block(i, i - 1));
    f.super_block.push_back(block(i - 1, i));
    const DenseMatrix coupling =
        Multiply(f.sub.back(), DenseLu(f.schur.back()).Solve(f.super_block.back()));
    f.schur.push_back(Subtract(block(i, i), coupling));
  }
  return f;
}

Vector NaiveBlockSolve(const NaiveBlockFactor& f, std::span<const Complex> b) {
  const Int p = f.plane;
  const Int m = static_cast<Int>(f.schur.size());
  std::vector<DenseLu> lus;
  for (const DenseMatrix& s : f.schur) lus.emplace_back(s);
  std::vector<Vector> u(m);
  for (Int i = 0; i < m; ++i) u[i].assign(b.begin() + i * p, b.begin() + (i + 1) * p);
  // u := L^{-1} u with L_{i+1,i} = A_{i+1,i} S_i^{-1}.
  for (Int i = 1; i < m; ++i) {
    const Vector coupled = Multiply(f.sub[i - 1], lus[i - 1].Solve(u[i - 1]));
    for (Int k = 0; k < p; ++k) u[i][k] -= coupled[k];
  }
  // u := D^{-1} u.
  for (Int i = 0; i < m; ++i) u[i] = lus[i].Solve(u[i]);
  // u := L^{-T} u with L^T_{i,i+1} = S_i^{-1} A_{i,i+1}.
  for (Int i = m - 2; i >= 0; --i) {
    const Vector coupled = lus[i].Solve(Multiply(f.super_block[i], u[i + 1]));
    for (Int k = 0; k < p; ++k) u[i][k] -= coupled[k];
  }
  Vector x;
  for (const Vector& part : u) x.insert(x.end(), part.begin(), part.end());
  return x;
}

DenseMatrix SchurComplement(const DenseMatrix& a, Int eliminated) {
  const Int n = a.Rows();
  const DenseMatrix a11 = Block(a, 0, eliminated, 0, eliminated);
  const DenseMatrix a12 = Block(a, 0, eliminated, eliminated, n);
  const DenseMatrix a21 = Block(a, eliminated, n, 0, eliminated);
  const DenseMatrix a22 = Block(a, eliminated, n, eliminated, n);
  if (eliminated == 0) return a22;
  return Subtract(a22, Multiply(a21, DenseLu(a11).Solve(a12)));
}

namespace {

Complex Dot(const Vector& a, const Vector& b) {
  Complex sum = 0;
  for (size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
  return sum;
}

// min || rhs - H y || for a (k+1) x k upper Hessenberg H by Householder QR.
// Returns y and the residual norm.
std::pair<Vector, double> LeastSquares(DenseMatrix h, Vector rhs) {
  const Int rows = h.Rows();
  const Int cols = h.Cols();
  for (Int k = 0; k < cols; ++k) {
    double norm = 0;
    for (Int i = k; i < rows; ++i) norm += std::norm(h(i, k));
    norm = std::sqrt(norm);
    if (norm == 0) continue;
    const Complex phase =
        h(k, k) == Complex() ? Complex(1) : h(k, k) / std::abs(h(k, k));
    Vector v(rows - k);
    for (Int i = k; i < rows; ++i) v[i - k] = h(i, k);
    v[0] += phase * norm;
    double vnorm = 0;
    for (const Complex& e : v) vnorm += std::norm(e);
    if (vnorm == 0) continue;
    auto reflect = [&](auto&& get) {
      Complex dot = 0;
      for (Int i = k; i < rows; ++i) dot += std::conj(v[i - k]) * get(i);
      const Complex scale = 2.0 * dot / vnorm;
      for (Int i = k; i < rows; ++i) get(i) -= scale * v[i - k];
    };
    for (Int j = k; j < cols; ++j) reflect([&](Int i) -> Complex& { return h(i, j); });
    reflect([&](Int i) -> Complex& { return rhs[i]; });
  }
  Vector y(cols);
  for (Int i = cols - 1; i >= 0; --i) {
    Complex sum = rhs[i];
    for (Int j = i + 1; j < cols; ++j) sum -= h(i, j) * y[j];
    y[i] = sum / h(i, i);
  }
  double residual = 0;
  for (Int i = cols; i < rows; ++i) residual += std::norm(rhs[i]);
  return {y, std::sqrt(residual)};
}

}  // namespace

ReferenceGmres RunReferenceGmres(
    const std::function<Vector(const Vector&)>& apply_a,
    const std::function<Vector(const Vector&)>& apply_m, const Vector& b,
    Int restart, double tol, Int max_iters) {
  const size_t n = b.size();
  ReferenceGmres out;
  out.x.assign(n, Complex());
  const double b_norm = Norm(b);
  out.history.push_back(1.0);
  Vector r = b;
  double previous = 1.0;
  while (true) {
    const double beta = Norm(r);
    std::vector<Vector> v{Vector(n)};
    for (size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
    DenseMatrix h(restart + 1, restart);
    Vector y;
    Int columns = 0;
    for (Int j = 0; j < restart && out.iterations < max_iters; ++j) {
      Vector w = apply_a(apply_m(v[j]));
      for (int pass = 0; pass < 2; ++pass) {
        Vector coefs(j + 1);
        for (Int i = 0; i <= j; ++i) coefs[i] = Dot(v[i], w);
        for (Int i = 0; i <= j; ++i) {
          h(i, j) += coefs[i];
          for (size_t l = 0; l < n; ++l) w[l] -= coefs[i] * v[i][l];
        }
      }
      const double norm = Norm(w);
      h(j + 1, j) = norm;
      if (norm > 0) {
        for (Complex& e : w) e /= norm;
      }
      v.push_back(w);
      columns = j + 1;
      DenseMatrix hj = Block(h, 0, j + 2, 0, j + 1);
      Vector rhs(j + 2);
      rhs[0] = beta;
      auto [solution, residual] = LeastSquares(hj, rhs);
      y = solution;
      ++out.iterations;
      out.history.push_back(residual / b_norm);
      if (residual / b_norm <= tol || norm == 0) break;
    }
    Vector update(n);
    for (Int j = 0; j < columns; ++j) {
      for (size_t l = 0; l < n; ++l) update[l] += y[j] * v[j][l];
    }
    const Vector correction = apply_m(update);
    for (size_t l = 0; l < n; ++l) out.x[l] += correction[l];
    const Vector ax = apply_a(out.x);
    for (size_t l = 0; l < n; ++l) r[l] = b[l] - ax[l];
    const double relative = Norm(r) / b_norm;
    out.history.back() = relative;
    if (relative <= tol) {
      out.converged = true;
      break;
    }
    if (out.iterations >= max_iters || relative >= previous) break;
    previous = relative;
  }
  return out;
}

Int ReferenceVcRank(Int i, Int r, Int c, Int sigma) { return (i + sigma) % (r * c); }

std::array<Int, 2> ReferenceVrPosition(Int i, Int r, Int c, Int sigma) {
  return {((i + sigma) / c) % r, (i + sigma) % c};
}

std::vector<Int> ReferenceIndexSet(char layout, Int n, Int r, Int c, Int sigma,
                                   Int s, Int t) {
  std::vector<Int> out;
  for (Int i = 0; i < n; ++i) {
    bool owned = false;
    switch (layout) {
      case 'C': {  // VC: rank s + t r
        owned = ReferenceVcRank(i, r, c, sigma) == s + t * r;
        break;
      }
      case 'R': {
        owned = ReferenceVrPosition(i, r, c, sigma) == std::array<Int, 2>{s, t};
        break;
      }
      case 'c':  // MC
        owned = (i + sigma) % r == s;
        break;
      case 'r':  // MR
        owned = (i + sigma) % c == t;
        break;
      default:
        throw std::invalid_argument("unknown layout");
    }
    if (owned) out.push_back(i);
  }
  return out;
}

}  // namespace oracle

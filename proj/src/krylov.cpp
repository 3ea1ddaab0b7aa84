#include "helmsweep/krylov.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace helmsweep {

namespace {

Complex Dot(std::span<const Complex> a, std::span<const Complex> b) {
  Complex sum = 0;
  for (size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
  return sum;
}

double Norm(std::span<const Complex> a) {
  double sum = 0;
  for (const Complex& v : a) sum += std::norm(v);
  return std::sqrt(sum);
}

struct Rotation {
  double c = 1;
  Complex s = 0;

  void Apply(Complex& a, Complex& b) const {
    const Complex top = c * a + s * b;
    b = -std::conj(s) * a + c * b;
    a = top;
  }
};

// Rotation annihilating g in [f; g].
Rotation MakeRotation(Complex f, Complex g) {
  Rotation rot;
  if (g == Complex()) return rot;
  const double abs_f = std::abs(f);
  const double t = std::hypot(abs_f, std::abs(g));
  if (abs_f == 0) {
    rot.c = 0;
    rot.s = std::conj(g) / std::abs(g);
    return rot;
  }
  rot.c = abs_f / t;
  rot.s = (f / abs_f) * std::conj(g) / t;
  return rot;
}

}  // namespace

void SolveConfig::Validate() const {
  if (restart < 1) throw ConfigError("GMRES restart must be >= 1");
  if (!(tol > 0)) throw ConfigError("GMRES tolerance must be positive");
  if (max_iters < 1) throw ConfigError("GMRES max_iters must be >= 1");
}

GmresResult Gmres(const LinearOperator& apply_a,
                  const LinearOperator& precondition,
                  std::span<const Complex> b, const SolveConfig& config,
                  const std::function<void(Int, double)>& on_iteration) {
  config.Validate();
  const auto started = std::chrono::steady_clock::now();
  const Int n = static_cast<Int>(b.size());
  const double nd = static_cast<double>(n);
  GmresResult result;
  result.x.assign(n, Complex());
  SolveReport& report = result.report;
  FlopCount flops;

  auto apply_m = [&](std::span<const Complex> in, std::span<Complex> out) {
    if (precondition) {
      precondition(in, out);
    } else {
      std::copy(in.begin(), in.end(), out.begin());
    }
  };
  auto finish = [&] {
    report.flops = flops.value;
    report.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - started)
                         .count();
  };

  const double b_norm = Norm(b);
  if (b_norm == 0) {
    report.residual_history = {0.0};
    report.converged = true;
    finish();
    return result;
  }

  const Int k = config.restart;
  std::vector<std::vector<Complex>> basis(k + 1, std::vector<Complex>(n));
  std::vector<Complex> hessenberg((k + 1) * k);
  auto h = [&](Int i, Int j) -> Complex& { return hessenberg[i + j * (k + 1)]; };
  std::vector<Rotation> rotations(k);
  std::vector<Complex> g(k + 1);
  std::vector<Complex> work(n), correction(n);

  std::vector<Complex> residual(b.begin(), b.end());
  double beta = b_norm;
  double previous_cycle = 1.0;
  report.residual_history.push_back(1.0);

  while (true) {
    for (Int i = 0; i < n; ++i) basis[0][i] = residual[i] / beta;
    std::fill(g.begin(), g.end(), Complex());
    g[0] = beta;
    Int columns = 0;
    bool breakdown = false;

    for (Int j = 0; j < k && report.iterations < config.max_iters; ++j) {
      apply_m(basis[j], work);
      std::vector<Complex>& w = basis[j + 1];
      apply_a(work, w);
      for (Int i = 0; i <= j; ++i) h(i, j) = 0;
      for (int pass = 0; pass < 2; ++pass) {
        for (Int i = 0; i <= j; ++i) {
          const Complex coef = Dot(basis[i], w);
          h(i, j) += coef;
          for (Int l = 0; l < n; ++l) w[l] -= coef * basis[i][l];
        }
      }
      flops.AddComplexMultiplyAdds(4.0 * static_cast<double>(j + 1) * nd + nd);
      const double next_norm = Norm(w);
      h(j + 1, j) = next_norm;
      const double scale = std::abs(h(j, j)) + next_norm;
      breakdown = next_norm <= 1e-14 * scale;
      if (!breakdown) {
        for (Int l = 0; l < n; ++l) w[l] /= next_norm;
      }

      for (Int i = 0; i < j; ++i) rotations[i].Apply(h(i, j), h(i + 1, j));
      rotations[j] = MakeRotation(h(j, j), h(j + 1, j));
      rotations[j].Apply(h(j, j), h(j + 1, j));
      rotations[j].Apply(g[j], g[j + 1]);

      ++report.iterations;
      columns = j + 1;
      const double estimate = std::abs(g[j + 1]) / b_norm;
      report.residual_history.push_back(estimate);
      if (on_iteration) on_iteration(report.iterations, estimate);
      if (estimate <= config.tol || breakdown) break;
    }

    for (Int i = 0; i < columns; ++i) {
      for (Int j = i + 1; j <= columns; ++j) {
        if (j == columns && breakdown) break;
        report.max_basis_inner_product = std::max(
            report.max_basis_inner_product, std::abs(Dot(basis[i], basis[j])));
      }
    }

    // Back substitution with the rotated Hessenberg factor.
    std::vector<Complex> y(columns);
    for (Int i = columns - 1; i >= 0; --i) {
      Complex sum = g[i];
      for (Int j = i + 1; j < columns; ++j) sum -= h(i, j) * y[j];
      y[i] = sum / h(i, i);
    }
    std::fill(work.begin(), work.end(), Complex());
    for (Int j = 0; j < columns; ++j) {
      for (Int l = 0; l < n; ++l) work[l] += y[j] * basis[j][l];
    }
    flops.AddComplexMultiplyAdds(static_cast<double>(columns) * nd);
    apply_m(work, correction);
    for (Int l = 0; l < n; ++l) result.x[l] += correction[l];

    apply_a(result.x, residual);
    for (Int l = 0; l < n; ++l) residual[l] = b[l] - residual[l];
    beta = Norm(residual);
    const double true_residual = beta / b_norm;
    report.residual_history.back() = true_residual;
    report.final_residual = true_residual;

    if (true_residual <= config.tol) {
      report.converged = true;
      break;
    }
    if (report.iterations >= config.max_iters) break;
    if (true_residual >= previous_cycle) break;  // stagnation over a cycle
    previous_cycle = true_residual;
  }
  finish();
  return result;
}

}  // namespace helmsweep

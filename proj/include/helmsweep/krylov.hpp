#ifndef HELMSWEEP_KRYLOV_HPP_
#define HELMSWEEP_KRYLOV_HPP_

#include <functional>
#include <span>
#include <vector>

#include "helmsweep/types.hpp"

namespace helmsweep {

// y := Op(x)
using LinearOperator =
    std::function<void(std::span<const Complex> x, std::span<Complex> y)>;

struct SolveConfig {
  Int restart = 20;
  double tol = 1e-5;
  Int max_iters = 500;

  void Validate() const;
};

struct SolveReport {
  Int iterations = 0;
  // Entry 0 is the initial relative residual (1 for the zero guess); entry j
  // follows iteration j. Entries closing a restart cycle hold the true
  // ||b - A x|| / ||b||, the others the Arnoldi estimate.
  std::vector<double> residual_history;
  bool converged = false;
  double final_residual = 0;  // recomputed true relative residual
  double seconds = 0;
  double flops = 0;  // orthogonalization and update work only
  // Largest |<v_i, v_j>|, i != j, seen over all cycles.
  double max_basis_inner_product = 0;
};

struct GmresResult {
  std::vector<Complex> x;
  SolveReport report;
};

// Restarted GMRES(k) with right preconditioning from the zero initial guess:
// minimizes ||b - A M z|| over the Krylov space of A M and returns x = M z.
// Modified Gram-Schmidt with one reorthogonalization pass; Givens rotations
// for the small least-squares problem. An empty 'precondition' means M = I.
// 'on_iteration', when set, is called with (iteration, relative residual).
GmresResult Gmres(const LinearOperator& apply_a,
                  const LinearOperator& precondition,
                  std::span<const Complex> b, const SolveConfig& config,
                  const std::function<void(Int, double)>& on_iteration = {});

}  // namespace helmsweep

#endif  // HELMSWEEP_KRYLOV_HPP_

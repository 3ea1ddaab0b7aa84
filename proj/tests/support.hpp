#ifndef HELMSWEEP_TESTS_SUPPORT_HPP_
#define HELMSWEEP_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include "helmsweep/discretize.hpp"
#include "helmsweep/frontal.hpp"
#include "helmsweep/ndtree.hpp"
#include "helmsweep/sparse.hpp"
#include "helmsweep/velocity.hpp"

namespace testing {

using helmsweep::Complex;
using helmsweep::Dims;
using helmsweep::Int;

inline std::vector<Complex> RandomVector(Int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::vector<Complex> v(n);
  for (Complex& e : v) e = {uniform(rng), uniform(rng)};
  return v;
}

struct HelmholtzSetup {
  double omega = 0;
  double alpha = 2 * std::numbers::pi;
  Int gamma = 2;
  double amplitude = 1.0;
  helmsweep::ModelKind model = helmsweep::ModelKind::kHomogeneous;
};

// Damped Helmholtz on the unit cube with PML on every face wide enough to
// hold it; omega defaults to one wavelength per max(dims)/10.
inline helmsweep::GridSpec MakeGrid(const Dims& dims, const HelmholtzSetup& s) {
  helmsweep::GridSpec grid = helmsweep::GridSpec::ForBox(dims, {1.0, 1.0, 1.0});
  grid.profile.gamma = s.gamma;
  grid.profile.amplitude = s.amplitude;
  for (int face = 0; face < 6; ++face) {
    grid.pml_faces[face] = s.gamma > 0 && dims[face / 2] > s.gamma;
  }
  return grid;
}

inline double DefaultOmega(const Dims& dims) {
  const Int n = *std::max_element(dims.begin(), dims.end());
  return 2 * std::numbers::pi * std::max(1.0, static_cast<double>(n) / 10.0);
}

inline helmsweep::SparseOperator DampedHelmholtz(const Dims& dims,
                                                 HelmholtzSetup s = {}) {
  if (s.omega == 0) s.omega = DefaultOmega(dims);
  const helmsweep::GridSpec grid = MakeGrid(dims, s);
  helmsweep::DampingSpec damping;
  damping.omega = s.omega;
  damping.alpha = s.alpha;
  return helmsweep::Assemble(grid, helmsweep::VelocityModel::Analytic(s.model),
                             damping);
}

// -Laplacian with spacing h and no PML or frequency shift.
inline helmsweep::SparseOperator PlainLaplacian(const Dims& dims, double h = 1.0) {
  std::array<helmsweep::AxisStretch, 3> stretches;
  for (int axis = 0; axis < 3; ++axis) {
    stretches[axis] = helmsweep::MakeAxisStretch(dims[axis], h, false, false, {}, 0.0);
  }
  const std::vector<double> speeds(dims[0] * dims[1] * dims[2], 1.0);
  helmsweep::DampingSpec damping;
  damping.omega = 0;
  damping.alpha = 0;
  return helmsweep::AssembleStretched(dims, {h, h, h}, stretches, speeds, damping);
}

inline helmsweep::FrontalTree FactorNested(const helmsweep::SparseOperator& op,
                                           const Dims& dims,
                                           Int leaf_cutoff = helmsweep::kDefaultLeafCutoff) {
  auto tree = std::make_shared<helmsweep::EliminationTree>(
      helmsweep::NestedDissection(dims, leaf_cutoff));
  helmsweep::SymbolicAnalysis(*tree, op);
  return helmsweep::FrontalTree::Factor(std::move(tree), op);
}

}  // namespace testing

#endif  // HELMSWEEP_TESTS_SUPPORT_HPP_

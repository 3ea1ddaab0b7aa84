#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "helmsweep/frontal.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace helmsweep;

namespace {

std::shared_ptr<EliminationTree> AnalyzedTree(const SparseOperator& op,
                                              const Dims& dims, Int cutoff) {
  auto tree = std::make_shared<EliminationTree>(NestedDissection(dims, cutoff));
  SymbolicAnalysis(*tree, op);
  return tree;
}

// Dense L (unit lower) and D of a factored tree in the reordered indexing.
void AssembleFactors(const FrontalTree& fact, DenseMatrix& l, DenseMatrix& d) {
  const Int n = fact.Dimension();
  l = DenseMatrix(n, n);
  d = DenseMatrix(n, n);
  for (const Supernode& node : fact.Tree().Supernodes()) {
    const Front& front = fact.Fronts()[node.id];
    for (Int j = 0; j < node.size; ++j) {
      l(node.start + j, node.start + j) = 1;
      d(node.start + j, node.start + j) = front.diagonal[j];
      for (Int i = j + 1; i < node.size; ++i) {
        l(node.start + i, node.start + j) = front.top_left(i, j);
      }
      for (size_t k = 0; k < node.lower_struct.size(); ++k) {
        l(node.lower_struct[k], node.start + j) = front.bottom_left(k, j);
      }
    }
  }
}

DenseMatrix PermutedDense(const SparseOperator& op, const EliminationTree& tree) {
  const DenseMatrix a = oracle::ToDense(op);
  DenseMatrix pa(a.Rows(), a.Cols());
  for (Int i = 0; i < a.Rows(); ++i) {
    for (Int j = 0; j < a.Cols(); ++j) {
      pa(tree.Permutation()[i], tree.Permutation()[j]) = a(i, j);
    }
  }
  return pa;
}

double ReconstructionError(const SparseOperator& op, const FrontalTree& fact) {
  DenseMatrix l, d;
  AssembleFactors(fact, l, d);
  const DenseMatrix ldlt =
      oracle::Multiply(oracle::Multiply(l, d), oracle::Transpose(l));
  const DenseMatrix pa = PermutedDense(op, fact.Tree());
  return oracle::FrobeniusNorm(oracle::Subtract(pa, ldlt)) /
         oracle::FrobeniusNorm(pa);
}

}  // namespace

TEST_CASE("one-by-one operator") {
  const SparseOperator op = SparseOperator::FromTriplets(1, 1, {{0, 0, {2, 0}}});
  auto tree = AnalyzedTree(op, {1, 1, 1}, 1);
  const FrontalTree fact = FrontalTree::Factor(tree, op);
  CHECK(fact.Fronts()[0].diagonal[0] == Complex(2, 0));
  const std::vector<Complex> b{{4, 0}};
  CHECK(fact.Solve(b)[0] == Complex(2, 0));
}

TEST_CASE("2D Laplacian factors reconstruct the operator") {
  const Dims dims{5, 5, 1};
  GridSpec grid = GridSpec::ForBox(dims, {1, 1, 1});
  const SparseOperator op = Assemble(
      grid, VelocityModel::Analytic(ModelKind::kHomogeneous), {.omega = 0, .alpha = 0});
  const FrontalTree fact = FrontalTree::Factor(AnalyzedTree(op, dims, 3), op);
  CHECK(fact.State() == FactorState::kFactored);
  CHECK(ReconstructionError(op, fact) <= 1e-13);
}

TEST_CASE("damped Helmholtz factors reconstruct the operator") {
  for (ModelKind kind : {ModelKind::kHomogeneous, ModelKind::kWedge,
                         ModelKind::kBarrier}) {
    testing::HelmholtzSetup setup;
    setup.model = kind;
    const Dims dims{6, 5, 4};
    const SparseOperator op = testing::DampedHelmholtz(dims, setup);
    const FrontalTree fact = FrontalTree::Factor(AnalyzedTree(op, dims, 8), op);
    CHECK(ReconstructionError(op, fact) <= 1e-12);
  }
}

TEST_CASE("perturbed Laplacian has a small residual") {
  std::mt19937_64 rng(21);
  const Dims dims{7, 6, 3};
  GridSpec grid = GridSpec::ForBox(dims, {1, 1, 1});
  const SparseOperator lap = Assemble(
      grid, VelocityModel::Analytic(ModelKind::kHomogeneous), {.omega = 0, .alpha = 0});
  // Complex-symmetric perturbation of the existing entries.
  std::uniform_real_distribution<double> uniform(-0.1, 0.1);
  std::vector<Triplet> entries;
  const auto offsets = lap.RowOffsets();
  for (Int i = 0; i < lap.Dimension(); ++i) {
    for (Int e = offsets[i]; e < offsets[i + 1]; ++e) {
      const Int j = lap.ColumnIndices()[e];
      if (j < i) continue;
      const Complex v = lap.Values()[e] * (1.0 + Complex(uniform(rng), uniform(rng)));
      entries.push_back({i, j, v});
      if (j != i) entries.push_back({j, i, v});
    }
  }
  const SparseOperator op =
      SparseOperator::FromTriplets(lap.Dimension(), lap.Dimension(), entries);
  const FrontalTree fact = FrontalTree::Factor(AnalyzedTree(op, dims, 10), op);
  const auto b = testing::RandomVector(op.Dimension(), rng);
  const auto x = fact.Solve(b);
  std::vector<Complex> ax(op.Dimension());
  op.Multiply(x, ax);
  CHECK(oracle::RelativeError(ax, b) <= 1e-12);
}

TEST_CASE("solve agrees with dense LU") {
  std::mt19937_64 rng(8);
  const Dims dims{6, 6, 2};
  const SparseOperator op = testing::DampedHelmholtz(dims);
  const FrontalTree fact = testing::FactorNested(op, dims, 4);
  const oracle::DenseLu lu(oracle::ToDense(op));
  for (int k = 0; k < 5; ++k) {
    const auto b = testing::RandomVector(op.Dimension(), rng);
    CHECK(oracle::RelativeError(fact.Solve(b), lu.Solve(b)) <= 1e-11);
  }
}

TEST_CASE("columns of the inverse") {
  const Dims dims{4, 3, 3};
  const SparseOperator op = testing::DampedHelmholtz(dims);
  const FrontalTree fact = testing::FactorNested(op, dims, 5);
  const DenseMatrix inverse = oracle::DenseLu(oracle::ToDense(op)).Inverse();
  const Int n = op.Dimension();
  for (Int j = 0; j < n; ++j) {
    std::vector<Complex> e(n);
    e[j] = 1;
    const auto column = fact.Solve(e);
    const std::span<const Complex> ref(inverse.Column(j), n);
    REQUIRE(oracle::RelativeError(column, ref) <= 1e-11);
  }
}

TEST_CASE("zero right-hand side gives zero") {
  const Dims dims{5, 4, 2};
  const SparseOperator op = testing::DampedHelmholtz(dims);
  const FrontalTree fact = testing::FactorNested(op, dims, 4);
  std::vector<Complex> zero(op.Dimension());
  for (const Complex& v : fact.Solve(zero)) REQUIRE(v == Complex());
}

TEST_CASE("diagonal operator is exactly inverted") {
  std::vector<Triplet> entries;
  for (Int i = 0; i < 8; ++i) entries.push_back({i, i, {1.0 + i, 0.5}});
  const SparseOperator op = SparseOperator::FromTriplets(8, 8, entries);
  FrontalTree fact = FrontalTree::Factor(AnalyzedTree(op, {2, 2, 2}, 2), op);
  std::vector<Complex> b(8, Complex(1, 0));
  const auto x = fact.Solve(b);
  for (Int i = 0; i < 8; ++i) {
    CHECK(std::abs(x[i] - 1.0 / Complex(1.0 + i, 0.5)) <= 1e-15);
  }
}

TEST_CASE("selective inversion") {
  SUBCASE("diagonal front is unchanged") {
    std::vector<Triplet> entries;
    for (Int i = 0; i < 4; ++i) entries.push_back({i, i, {2, 0}});
    const SparseOperator op = SparseOperator::FromTriplets(4, 4, entries);
    FrontalTree fact =
        FrontalTree::Factor(std::make_shared<EliminationTree>([&] {
                              EliminationTree t = SingleSupernodeTree(4);
                              SymbolicAnalysis(t, op);
                              return t;
                            }()),
                            op);
    fact.SelectivelyInvert();
    const Front& front = fact.Fronts()[0];
    for (Int i = 0; i < 4; ++i) {
      for (Int j = 0; j < i; ++j) CHECK(front.top_left(i, j) == Complex());
    }
  }
  SUBCASE("two-by-two front negates the multiplier") {
    const SparseOperator op = SparseOperator::FromTriplets(
        2, 2, {{0, 0, {4, 0}}, {1, 0, {2, 1}}, {0, 1, {2, 1}}, {1, 1, {5, 0}}});
    auto tree = std::make_shared<EliminationTree>(SingleSupernodeTree(2));
    SymbolicAnalysis(*tree, op);
    FrontalTree fact = FrontalTree::Factor(tree, op);
    const Complex l10 = fact.Fronts()[0].top_left(1, 0);
    CHECK(std::abs(l10 - Complex(2, 1) / 4.0) <= 1e-15);
    fact.SelectivelyInvert();
    CHECK(fact.Fronts()[0].top_left(1, 0) == -l10);
  }
  SUBCASE("solves agree before and after") {
    std::mt19937_64 rng(17);
    const Dims dims{8, 7, 4};
    const SparseOperator op = testing::DampedHelmholtz(dims);
    FrontalTree fact = testing::FactorNested(op, dims, 12);
    std::vector<std::vector<Complex>> rhs, before;
    for (int k = 0; k < 4; ++k) {
      rhs.push_back(testing::RandomVector(op.Dimension(), rng));
      before.push_back(fact.Solve(rhs.back()));
    }
    fact.SelectivelyInvert();
    CHECK(fact.State() == FactorState::kSelectivelyInverted);
    CHECK(fact.InversionFlops() > 0);
    for (int k = 0; k < 4; ++k) {
      CHECK(oracle::RelativeError(fact.Solve(rhs[k]), before[k]) <= 1e-12);
    }
    CHECK_THROWS_AS(fact.SelectivelyInvert(), StateError);
  }
}

TEST_CASE("factorization needs symbolic analysis") {
  const SparseOperator op = testing::DampedHelmholtz({3, 3, 3});
  auto tree = std::make_shared<EliminationTree>(NestedDissection({3, 3, 3}, 4));
  CHECK_THROWS_AS(FrontalTree::Factor(tree, op), StateError);
}

TEST_CASE("wrong right-hand side length") {
  const Dims dims{3, 3, 3};
  const SparseOperator op = testing::DampedHelmholtz(dims);
  const FrontalTree fact = testing::FactorNested(op, dims, 4);
  std::vector<Complex> b(5);
  CHECK_THROWS_AS(fact.Solve(b), DimensionError);
}

TEST_CASE("exactly zero pivot names the supernode") {
  const SparseOperator op = SparseOperator::FromTriplets(
      3, 3,
      {{0, 0, {0, 0}}, {0, 1, {1, 0}}, {1, 0, {1, 0}}, {1, 1, {2, 0}},
       {1, 2, {1, 0}}, {2, 1, {1, 0}}, {2, 2, {2, 0}}});
  auto tree = AnalyzedTree(op, {3, 1, 1}, 1);
  Int expected = -1;
  for (const Supernode& node : tree->Supernodes()) {
    const Int p = tree->Permutation()[0];
    if (p >= node.start && p < node.start + node.size) expected = node.id;
  }
  try {
    FrontalTree::Factor(tree, op);
    FAIL("expected SingularFrontError");
  } catch (const SingularFrontError& e) {
    CHECK(e.Supernode() == expected);
  }
}

TEST_CASE("tiny pivots are reported") {
  const SparseOperator op = SparseOperator::FromTriplets(
      2, 2, {{0, 0, {1e-20, 0}}, {1, 1, {1, 0}}});
  auto tree = std::make_shared<EliminationTree>(SingleSupernodeTree(2));
  SymbolicAnalysis(*tree, op);
  const FrontalTree fact = FrontalTree::Factor(tree, op);
  REQUIRE(fact.Warnings().size() == 1);
  CHECK(fact.Warnings()[0].index == 0);
}

TEST_CASE("factorization flops grow like n^3 on quasi-2D grids") {
  std::vector<double> logs_n, logs_f;
  for (Int n : {8, 16, 32, 64}) {
    // Four planes, the depth of an unpadded panel.
    const Dims dims{n, n, 4};
    const SparseOperator op = testing::DampedHelmholtz(dims);
    const FrontalTree fact = testing::FactorNested(op, dims);
    logs_n.push_back(std::log(static_cast<double>(n)));
    logs_f.push_back(std::log(fact.FactorFlops()));
  }
  // Least-squares slope.
  double mx = 0, my = 0;
  for (size_t k = 0; k < logs_n.size(); ++k) {
    mx += logs_n[k] / logs_n.size();
    my += logs_f[k] / logs_f.size();
  }
  double sxy = 0, sxx = 0;
  for (size_t k = 0; k < logs_n.size(); ++k) {
    sxy += (logs_n[k] - mx) * (logs_f[k] - my);
    sxx += (logs_n[k] - mx) * (logs_n[k] - mx);
  }
  const double slope = sxy / sxx;
  MESSAGE("factor flop exponent " << slope);
  CHECK(slope >= 2.7);
  CHECK(slope <= 3.3);
}

#include <algorithm>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "helmsweep/distsim.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace helmsweep;
using namespace helmsweep::distsim;

namespace {

std::vector<ProcessGrid> SmallGrids() {
  std::vector<ProcessGrid> grids;
  for (Int r = 1; r <= 4; ++r) {
    for (Int c = 1; c <= 4; ++c) grids.emplace_back(r, c);
  }
  return grids;
}

DenseMatrix RandomMatrix(Int n, std::mt19937_64& rng, bool unit_lower) {
  std::uniform_real_distribution<double> uniform(-1, 1);
  DenseMatrix a(n, n);
  for (Int j = 0; j < n; ++j) {
    for (Int i = 0; i < n; ++i) {
      if (unit_lower && i <= j) continue;
      a(i, j) = {uniform(rng), uniform(rng)};
    }
  }
  return a;
}

std::vector<Complex> SequentialUnitLower(const DenseMatrix& l, std::span<const Complex> x,
                                         bool transposed) {
  const Int n = l.Rows();
  std::vector<Complex> y(x.begin(), x.end());
  for (Int i = 0; i < n; ++i) {
    for (Int j = 0; j < i; ++j) {
      if (transposed) {
        y[j] += l(i, j) * x[i];
      } else {
        y[i] += l(i, j) * x[j];
      }
    }
  }
  return y;
}

Int MaxAllGatherVolume(const CommLedger& ledger) {
  Int best = 0;
  for (Int rank = 0; rank < ledger.NumRanks(); ++rank) {
    best = std::max(best, ledger.Entries(rank, Collective::kRowAllGather) +
                              ledger.Entries(rank, Collective::kColAllGather));
  }
  return best;
}

}  // namespace

TEST_CASE("owner formula examples") {
  const ProcessGrid grid(2, 3);
  CHECK(VcOwner(grid, 4, 0) == 4);
  CHECK(grid.Position(4) == std::array<Int, 2>{0, 2});
  CHECK(McRow(grid, 4, 0) == 0);
  std::vector<Int> holders;
  for (Int rank = 0; rank < 6; ++rank) {
    if (Owns(grid, Distribution::kMC, 0, rank, 4)) holders.push_back(rank);
  }
  CHECK(holders == std::vector<Int>{0, 2, 4});

  const auto vr = VrOwnerPosition(grid, 4, 0);
  CHECK(vr == std::array<Int, 2>{1, 1});
  CHECK(grid.Rank(vr[0], vr[1]) == 3);
  CHECK(ParseGrid("2x3").Rows() == 2);
  CHECK(ParseGrid("2x3").Cols() == 3);
  CHECK_THROWS_AS(ParseGrid("2by3"), ConfigError);
  CHECK_THROWS_AS(ProcessGrid(0, 2), ConfigError);
}

TEST_CASE("owner formulas on random tuples") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10000; ++trial) {
    const Int r = 1 + rng() % 8, c = 1 + rng() % 8;
    const ProcessGrid grid(r, c);
    const Int i = rng() % 100000, sigma = rng() % (r * c);
    REQUIRE(VcOwner(grid, i, sigma) == oracle::ReferenceVcRank(i, r, c, sigma));
    REQUIRE(VrOwnerPosition(grid, i, sigma) ==
            oracle::ReferenceVrPosition(i, r, c, sigma));
    REQUIRE(McRow(grid, i, sigma) == (i + sigma) % r);
    REQUIRE(MrCol(grid, i, sigma) == (i + sigma) % c);
  }
}

TEST_CASE("row-wise VC sets partition the MC set") {
  for (const ProcessGrid& grid : SmallGrids()) {
    const Int r = grid.Rows(), c = grid.Cols();
    for (Int n : {1, 7, 64, 1000, 4096}) {
      for (Int sigma = 0; sigma < grid.Size(); ++sigma) {
        const DistVector vc(grid, n, Distribution::kVC, sigma);
        const DistVector vr(grid, n, Distribution::kVR, sigma);
        const DistVector mc(grid, n, Distribution::kMC, sigma);
        const DistVector mr(grid, n, Distribution::kMR, sigma);
        for (Int s = 0; s < r; ++s) {
          std::vector<Int> row_union;
          for (Int t = 0; t < c; ++t) {
            const Int rank = grid.Rank(s, t);
            const auto vc_set = vc.LocalIndices(rank);
            REQUIRE(vc_set == oracle::ReferenceIndexSet('C', n, r, c, sigma, s, t));
            REQUIRE(vr.LocalIndices(rank) ==
                    oracle::ReferenceIndexSet('R', n, r, c, sigma, s, t));
            REQUIRE(mc.LocalIndices(rank) ==
                    oracle::ReferenceIndexSet('c', n, r, c, sigma, s, t));
            REQUIRE(mr.LocalIndices(rank) ==
                    oracle::ReferenceIndexSet('r', n, r, c, sigma, s, t));
            row_union.insert(row_union.end(), vc_set.begin(), vc_set.end());
          }
          std::sort(row_union.begin(), row_union.end());
          REQUIRE(std::adjacent_find(row_union.begin(), row_union.end()) ==
                  row_union.end());
          REQUIRE(row_union == oracle::ReferenceIndexSet('c', n, r, c, sigma, s, 0));
        }
      }
    }
  }
}

TEST_CASE("redistribution round trips are value-exact") {
  std::mt19937_64 rng(1);
  const auto values = testing::RandomVector(1000, rng);
  for (const ProcessGrid& grid : SmallGrids()) {
    for (Int sigma : {Int{0}, grid.Size() - 1, grid.Size() / 2}) {
      CommLedger ledger(grid.Size());
      const auto vc = DistVector::FromGlobal(grid, values, Distribution::kVC, sigma);
      REQUIRE(vc.Gather() == values);
      const auto mc = Redistribute(vc, Distribution::kMC, ledger);
      REQUIRE(mc.Gather() == values);
      REQUIRE(Redistribute(mc, Distribution::kVC, ledger).Gather() == values);
      const auto vr = Redistribute(vc, Distribution::kVR, ledger);
      REQUIRE(vr.Gather() == values);
      const auto mr = Redistribute(vr, Distribution::kMR, ledger);
      REQUIRE(mr.Gather() == values);
      REQUIRE(Redistribute(mr, Distribution::kVR, ledger).Gather() == values);
      const auto back = Redistribute(vr, Distribution::kVC, ledger);
      for (Int rank = 0; rank < grid.Size(); ++rank) {
        REQUIRE(back.Local(rank) == vc.Local(rank));
      }
      if (grid.Size() == 1) CHECK(ledger.Empty());
    }
  }
}

TEST_CASE("unsupported redistribution pairs") {
  const ProcessGrid grid(2, 2);
  CommLedger ledger(4);
  const DistVector mc(grid, 10, Distribution::kMC, 0);
  CHECK_THROWS_AS(Redistribute(mc, Distribution::kMR, ledger), ConfigError);
  const DistVector vc(grid, 10, Distribution::kVC, 0);
  CHECK_THROWS_AS(Redistribute(vc, Distribution::kMR, ledger), ConfigError);
  CHECK_THROWS_AS(Redistribute(vc, Distribution::kStar, ledger), ConfigError);
}

TEST_CASE("reduce-scatter sums partials deterministically") {
  const ProcessGrid grid(2, 3);
  CommLedger ledger(6);
  DistVector partial(grid, 9, Distribution::kMC, 1);
  for (Int rank = 0; rank < 6; ++rank) {
    auto& local = partial.Local(rank);
    for (size_t k = 0; k < local.size(); ++k) local[k] = Complex(rank + 1.0, 0);
  }
  const DistVector summed = RowReduceScatter(partial, ledger);
  CHECK(summed.Dist() == Distribution::kVC);
  const auto global = summed.Gather();
  for (Int i = 0; i < 9; ++i) {
    const Int row = McRow(grid, i, 1);
    double expected = 0;
    for (Int t = 0; t < 3; ++t) expected += grid.Rank(row, t) + 1.0;
    REQUIRE(global[i] == Complex(expected, 0));
  }
  CHECK(ledger.Messages(0, Collective::kRowReduceScatter) == 2);
}

TEST_CASE("identity unit-lower multiply returns its input") {
  std::mt19937_64 rng(2);
  for (const ProcessGrid& grid : SmallGrids()) {
    const Int n = 13;
    const auto x = testing::RandomVector(n, rng);
    const auto l = DistMatrix::FromGlobal(grid, DenseMatrix(n, n), 1);
    const auto vx = DistVector::FromGlobal(grid, x, Distribution::kVC, 1);
    for (bool transposed : {false, true}) {
      CommLedger ledger(grid.Size());
      REQUIRE(DistMultiply(l, MatrixKind::kUnitLower, vx, transposed, ledger).Gather() == x);
    }
  }
}

TEST_CASE("distributed unit-lower products match the sequential product") {
  std::mt19937_64 rng(3);
  SUBCASE("8x8 on a 2x2 grid") {
    const ProcessGrid grid(2, 2);
    const DenseMatrix l = RandomMatrix(8, rng, true);
    const auto x = testing::RandomVector(8, rng);
    const auto dl = DistMatrix::FromGlobal(grid, l);
    const auto vx = DistVector::FromGlobal(grid, x, Distribution::kVC, 0);
    for (bool transposed : {false, true}) {
      CommLedger ledger(4);
      const auto y = DistTriangularMultiply(dl, vx, transposed, ledger).Gather();
      CHECK(oracle::RelativeError(y, SequentialUnitLower(l, x, transposed)) <= 1e-14);
    }
  }
  SUBCASE("random sizes, grids and alignments") {
    for (const ProcessGrid& grid : SmallGrids()) {
      const Int n = 5 + rng() % 40;
      const Int sigma = rng() % grid.Size();
      const DenseMatrix l = RandomMatrix(n, rng, true);
      const auto x = testing::RandomVector(n, rng);
      const auto dl = DistMatrix::FromGlobal(grid, l, sigma);
      REQUIRE(oracle::FrobeniusNorm(oracle::Subtract(dl.Gather(), l)) == 0);
      const auto vx = DistVector::FromGlobal(grid, x, Distribution::kVC, sigma);
      for (bool transposed : {false, true}) {
        CommLedger ledger(grid.Size());
        const auto y = DistTriangularMultiply(dl, vx, transposed, ledger);
        REQUIRE(y.Dist() == Distribution::kVC);
        REQUIRE(oracle::RelativeError(y.Gather(), SequentialUnitLower(l, x, transposed)) <=
                1e-13);
        // The solve path inverts the product.
        CommLedger solve_ledger(grid.Size());
        const auto back = DistTriangularSolve(dl, y, transposed, solve_ledger);
        // Random unit-lower factors are mildly ill-conditioned.
        REQUIRE(oracle::RelativeError(back.Gather(), x) <= 1e-10);
      }
    }
  }
  SUBCASE("general matrices") {
    const ProcessGrid grid(3, 2);
    const DenseMatrix a = RandomMatrix(11, rng, false);
    const auto x = testing::RandomVector(11, rng);
    const auto da = DistMatrix::FromGlobal(grid, a, 2);
    const auto vx = DistVector::FromGlobal(grid, x, Distribution::kVC, 2);
    CommLedger ledger(6);
    CHECK(oracle::RelativeError(DistMultiply(da, MatrixKind::kGeneral, vx, false, ledger).Gather(),
                                oracle::Multiply(a, x)) <= 1e-14);
    CHECK(oracle::RelativeError(DistMultiply(da, MatrixKind::kGeneral, vx, true, ledger).Gather(),
                                oracle::Multiply(oracle::Transpose(a), x)) <= 1e-14);
  }
}

TEST_CASE("all-gather volume halves per grid doubling") {
  std::mt19937_64 rng(4);
  const Int n = 1024;
  const DenseMatrix l = RandomMatrix(n, rng, true);
  const auto x = testing::RandomVector(n, rng);
  std::vector<double> volumes;
  for (Int side : {4, 8, 16}) {
    const ProcessGrid grid(side, side);
    const auto dl = DistMatrix::FromGlobal(grid, l);
    const auto vx = DistVector::FromGlobal(grid, x, Distribution::kVC, 0);
    CommLedger ledger(grid.Size());
    DistTriangularMultiply(dl, vx, false, ledger);
    volumes.push_back(static_cast<double>(MaxAllGatherVolume(ledger)));
  }
  for (size_t k = 1; k < volumes.size(); ++k) {
    const double ratio = volumes[k] / volumes[k - 1];
    MESSAGE("volume ratio " << ratio);
    CHECK(ratio >= 0.375);
    CHECK(ratio <= 0.625);
  }
}

TEST_CASE("ledger csv") {
  CommLedger ledger(2);
  ledger.Record(1, Collective::kPermute, 5, 1);
  ledger.Record(3, Collective::kRowAllGather, 2, 1);  // grows on demand
  CHECK(ledger.NumRanks() == 4);
  CHECK(ledger.TotalEntries() == 7);
  std::ostringstream out;
  ledger.WriteCsv(out);
  CHECK(out.str().rfind("rank,collective,entries_sent,messages\n", 0) == 0);
  CHECK(out.str().find("1,permute,5,1") != std::string::npos);
}

TEST_CASE("team grid shapes") {
  CHECK(TeamGridShape(1) == std::array<Int, 2>{1, 1});
  CHECK(TeamGridShape(4) == std::array<Int, 2>{2, 2});
  CHECK(TeamGridShape(6) == std::array<Int, 2>{2, 3});
  CHECK(TeamGridShape(7) == std::array<Int, 2>{1, 7});
  CHECK(TeamGridShape(16) == std::array<Int, 2>{4, 4});
}

TEST_CASE("subtree to subteam mapping") {
  SUBCASE("single rank") {
    const EliminationTree tree = NestedDissection({9, 9, 1}, 4);
    const auto assignment = SubtreeToSubteam(tree, 1);
    for (const Subteam& team : assignment.teams) {
      CHECK(team.offset == 0);
      CHECK(team.size == 1);
    }
  }
  SUBCASE("four ranks on three supernodes") {
    const EliminationTree tree = NestedDissection({3, 3, 1}, 3);
    const auto assignment = SubtreeToSubteam(tree, 4);
    const Supernode& root = tree.Root();
    CHECK(assignment.teams[root.id].offset == 0);
    CHECK(assignment.teams[root.id].size == 4);
    CHECK(assignment.teams[root.children[0]].offset == 0);
    CHECK(assignment.teams[root.children[0]].size == 2);
    CHECK(assignment.teams[root.children[1]].offset == 2);
    CHECK(assignment.teams[root.children[1]].size == 2);
  }
  SUBCASE("six ranks on a depth-three tree") {
    const EliminationTree tree = NestedDissection({7, 7, 1}, 12);
    REQUIRE(tree.NumSupernodes() == 7);
    const auto assignment = SubtreeToSubteam(tree, 6);
    auto span = [&](Int s) {
      return std::array<Int, 2>{assignment.teams[s].offset, assignment.teams[s].size};
    };
    CHECK(span(6) == std::array<Int, 2>{0, 6});
    CHECK(span(2) == std::array<Int, 2>{0, 3});
    CHECK(span(5) == std::array<Int, 2>{3, 3});
    CHECK(span(0) == std::array<Int, 2>{0, 2});
    CHECK(span(1) == std::array<Int, 2>{2, 1});
    CHECK(span(3) == std::array<Int, 2>{3, 2});
    CHECK(span(4) == std::array<Int, 2>{5, 1});
  }
  SUBCASE("children partition their parent team") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      const Dims dims{Int(1 + rng() % 20), Int(1 + rng() % 20), Int(1 + rng() % 3)};
      const EliminationTree tree = NestedDissection(dims, 1 + rng() % 16);
      const Int p = 1 + rng() % 33;
      const auto assignment = SubtreeToSubteam(tree, p);
      for (const Supernode& node : tree.Supernodes()) {
        const Subteam& team = assignment.teams[node.id];
        REQUIRE(team.grid_rows * team.grid_cols == team.size);
        if (node.children.empty()) continue;
        if (team.size == 1) {
          for (Int child : node.children) REQUIRE(assignment.teams[child].offset == team.offset);
          continue;
        }
        Int covered = 0;
        Int next = team.offset;
        for (Int child : node.children) {
          REQUIRE(assignment.teams[child].offset == next);
          next += assignment.teams[child].size;
          covered += assignment.teams[child].size;
        }
        REQUIRE(covered == team.size);
      }
    }
  }
}

TEST_CASE("alignment policy") {
  CHECK(SupernodeAlignment(0, 8, 3) == 0);
  CHECK(SupernodeAlignment(1, 8, 3) == 3);
  CHECK(SupernodeAlignment(3, 8, 3) == 1);
  CHECK_THROWS_AS(SupernodeAlignment(1, 0, 3), ConfigError);
}

TEST_CASE("simulated multifrontal solve") {
  std::mt19937_64 rng(6);
  const Dims dims{8, 8, 2};
  const SparseOperator op = testing::DampedHelmholtz(dims);
  FrontalTree factored = testing::FactorNested(op, dims, 8);
  FrontalTree inverted = testing::FactorNested(op, dims, 8);
  inverted.SelectivelyInvert();
  const auto b = testing::RandomVector(op.Dimension(), rng);
  const auto reference = factored.Solve(b);

  const auto teams = SubtreeToSubteam(inverted.Tree(), 4);
  const SimulatedSolve fast = SimulatedMultifrontalSolve(inverted, teams, b, 2);
  CHECK(oracle::RelativeError(fast.x, reference) <= 1e-12);
  const SimulatedSolve slow = SimulatedMultifrontalSolve(factored, teams, b, 2);
  CHECK(oracle::RelativeError(slow.x, reference) <= 1e-12);
  MESSAGE("messages inverted " << fast.ledger.TotalMessages() << " triangular "
                               << slow.ledger.TotalMessages());
  CHECK(fast.ledger.TotalMessages() < slow.ledger.TotalMessages());

  const SimulatedSolve single =
      SimulatedMultifrontalSolve(inverted, SubtreeToSubteam(inverted.Tree(), 1), b);
  CHECK(single.ledger.Empty());
  CHECK(oracle::RelativeError(single.x, inverted.Solve(b)) <= 1e-14);

  auto symbolic_tree = std::make_shared<EliminationTree>(NestedDissection(dims, 8));
  CHECK_THROWS_AS(FrontalTree::Factor(symbolic_tree, op), StateError);
}

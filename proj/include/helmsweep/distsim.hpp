#ifndef HELMSWEEP_DISTSIM_HPP_
#define HELMSWEEP_DISTSIM_HPP_

#include <array>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "helmsweep/dense.hpp"
#include "helmsweep/frontal.hpp"
#include "helmsweep/ndtree.hpp"
#include "helmsweep/types.hpp"

// Deterministic in-process model of element-wise cyclic data layouts over an
// r x c process grid. Ranks are logical; collectives run as atomic exchanges
// and are charged to a CommLedger under a volume/latency cost model:
//
//   all-gather over g ranks, local size l:  each rank sends l (g - 1) entries
//                                           in ceil(log2 g) messages
//   reduce-scatter over g ranks:            each rank sends the entries it
//                                           does not keep, ceil(log2 g) messages
//   permutation:                            each entry changing owner is one
//                                           sent entry; one message per
//                                           distinct (source, destination)
namespace helmsweep::distsim {

// Column-major r x c grid: rank k sits at (k mod r, floor(k / r)).
class ProcessGrid {
 public:
  ProcessGrid(Int rows, Int cols);

  Int Rows() const { return rows_; }
  Int Cols() const { return cols_; }
  Int Size() const { return rows_ * cols_; }
  std::array<Int, 2> Position(Int rank) const;
  Int Rank(Int row, Int col) const;

 private:
  Int rows_;
  Int cols_;
};

// Parses "RxC".
ProcessGrid ParseGrid(std::string_view text);

enum class Distribution { kVC, kVR, kMC, kMR, kStar };
std::string_view DistributionName(Distribution dist);

// Owner formulas for entry i under alignment sigma.
Int VcOwner(const ProcessGrid& grid, Int i, Int alignment);
std::array<Int, 2> VrOwnerPosition(const ProcessGrid& grid, Int i,
                                   Int alignment);
Int McRow(const ProcessGrid& grid, Int i, Int alignment);
Int MrCol(const ProcessGrid& grid, Int i, Int alignment);

// True when 'rank' stores entry i under the distribution.
bool Owns(const ProcessGrid& grid, Distribution dist, Int alignment, Int rank,
          Int i);

enum class Collective {
  kRowAllGather,
  kColAllGather,
  kRowReduceScatter,
  kColReduceScatter,
  kPermute,
};
inline constexpr int kNumCollectives = 5;
std::string_view CollectiveName(Collective kind);

class CommLedger {
 public:
  explicit CommLedger(Int num_ranks = 0);

  Int NumRanks() const { return static_cast<Int>(entries_.size()); }
  void Record(Int rank, Collective kind, Int entries, Int messages);

  Int Entries(Int rank, Collective kind) const;
  Int Messages(Int rank, Collective kind) const;
  Int MaxEntries(Collective kind) const;
  Int TotalEntries() const;
  Int TotalMessages() const;
  Int MaxMessagesPerRank() const;
  bool Empty() const { return TotalEntries() == 0 && TotalMessages() == 0; }

  // Header "rank,collective,entries_sent,messages" and one row per
  // (rank, collective) pair.
  void WriteCsv(std::ostream& out) const;

 private:
  std::vector<std::array<Int, kNumCollectives>> entries_;
  std::vector<std::array<Int, kNumCollectives>> messages_;
};

// Vector distributed over a team of ranks [rank_offset, rank_offset + q) that
// forms 'grid'. Each rank stores its owned entries in increasing index order.
class DistVector {
 public:
  DistVector(const ProcessGrid& grid, Int length, Distribution dist,
             Int alignment, Int rank_offset = 0);

  static DistVector FromGlobal(const ProcessGrid& grid,
                               std::span<const Complex> values,
                               Distribution dist, Int alignment,
                               Int rank_offset = 0);

  const ProcessGrid& Grid() const { return grid_; }
  Int Length() const { return length_; }
  Distribution Dist() const { return dist_; }
  Int Alignment() const { return alignment_; }
  Int RankOffset() const { return rank_offset_; }

  // Global indices owned by a team-local rank, increasing.
  std::vector<Int> LocalIndices(Int rank) const;
  std::vector<Complex>& Local(Int rank) { return local_[rank]; }
  const std::vector<Complex>& Local(Int rank) const { return local_[rank]; }

  // Reassembles the global vector from owned entries.
  std::vector<Complex> Gather() const;

 private:
  ProcessGrid grid_;
  Int length_;
  Distribution dist_;
  Int alignment_;
  Int rank_offset_;
  std::vector<std::vector<Complex>> local_;
};

// Supported pairs: VC->MC (row all-gather), VR->MR (column all-gather),
// MC->VC and MR->VR (local selection), VC<->VR (permutation). Any other pair
// throws ConfigError.
DistVector Redistribute(const DistVector& x, Distribution target,
                        CommLedger& ledger);

// Sums per-rank [M_C] partial vectors within each process row in ascending
// rank order and scatters the result to its [V_C] owners.
DistVector RowReduceScatter(const DistVector& partial_mc, CommLedger& ledger);
// Same within process columns, from [M_R] partials to [V_R] owners.
DistVector ColReduceScatter(const DistVector& partial_mr, CommLedger& ledger);

// Element-wise cyclic [M_C,M_R] matrix: entry (i,j) lives at grid position
// ((i + sigma) mod r, (j + sigma) mod c).
class DistMatrix {
 public:
  static DistMatrix FromGlobal(const ProcessGrid& grid, const DenseMatrix& a,
                               Int alignment = 0, Int rank_offset = 0);

  const ProcessGrid& Grid() const { return grid_; }
  Int Rows() const { return rows_; }
  Int Cols() const { return cols_; }
  Int Alignment() const { return alignment_; }
  Int RankOffset() const { return rank_offset_; }

  const DenseMatrix& Local(Int rank) const { return local_[rank]; }
  const std::vector<Int>& LocalRows(Int rank) const;
  const std::vector<Int>& LocalCols(Int rank) const;

  DenseMatrix Gather() const;

 private:
  DistMatrix(const ProcessGrid& grid, Int rows, Int cols, Int alignment,
             Int rank_offset);

  ProcessGrid grid_;
  Int rows_;
  Int cols_;
  Int alignment_;
  Int rank_offset_;
  std::vector<std::vector<Int>> row_sets_;  // per grid row
  std::vector<std::vector<Int>> col_sets_;  // per grid column
  std::vector<DenseMatrix> local_;
};

enum class MatrixKind {
  kGeneral,
  kUnitLower,  // strictly-lower part stored, unit diagonal implied
};

// y[V_C] = A x or A^T x for x[V_C].
//
// Normal path: VC -> VR -> MR, local multiply into [M_C] partials, row
// reduce-scatter to VC. Transposed path: VC -> MC, local multiply with the
// transposed local blocks into [M_R] partials, column reduce-scatter to VR,
// then VR -> VC.
DistVector DistMultiply(const DistMatrix& a, MatrixKind kind,
                        const DistVector& x, bool transposed,
                        CommLedger& ledger);

// Triangular matrix-vector product with F_TL, the selective-inversion path.
DistVector DistTriangularMultiply(const DistMatrix& l, const DistVector& x,
                                  bool transposed, CommLedger& ledger);

// Fan-in triangular solve with a unit-lower L[M_C,M_R]: one reduction and
// one broadcast per column, the path selective inversion replaces.
DistVector DistTriangularSolve(const DistMatrix& l, const DistVector& x,
                               bool transposed, CommLedger& ledger);

struct Subteam {
  Int offset = 0;
  Int size = 1;
  Int grid_rows = 1;
  Int grid_cols = 1;

  ProcessGrid Grid() const { return ProcessGrid(grid_rows, grid_cols); }
  bool Contains(Int rank) const { return rank >= offset && rank < offset + size; }
};

struct SubteamAssignment {
  std::vector<Subteam> teams;  // indexed by supernode id
  Int factor_team_size = 1;    // p_F
  Int solve_team_size = 1;     // p_S
};

// r' = largest divisor of the team size not exceeding floor(sqrt(size)).
std::array<Int, 2> TeamGridShape(Int size);

// Root gets [0, p); each split hands the left child ceil(size/2) ranks and
// the right child the rest, and single-rank teams serve whole subtrees.
SubteamAssignment SubtreeToSubteam(const EliminationTree& tree, Int team_size,
                                   Int factor_team_size = 0);

// Alignment of supernode s's subvectors: (s * ceil(q / m)) mod q.
Int SupernodeAlignment(Int supernode, Int team_size, Int num_panels);

struct SimulatedSolve {
  std::vector<Complex> x;
  CommLedger ledger;
};

// Multifrontal solve with every front distributed over its subteam. A
// selectively inverted tree uses distributed triangular matrix-vector
// products; a factored one uses fan-in triangular solves.
SimulatedSolve SimulatedMultifrontalSolve(const FrontalTree& factorization,
                                          const SubteamAssignment& assignment,
                                          std::span<const Complex> b,
                                          Int num_panels = 1);

}  // namespace helmsweep::distsim

#endif  // HELMSWEEP_DISTSIM_HPP_

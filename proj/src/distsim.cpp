#include "helmsweep/distsim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>

namespace helmsweep::distsim {

namespace {

Int CeilLog2(Int g) {
  Int levels = 0;
  for (Int span = 1; span < g; span *= 2) ++levels;
  return levels;
}

Int Mod(Int a, Int m) { return ((a % m) + m) % m; }

// Records one permutation step: every entry whose source and destination
// differ counts once; messages are distinct (source, destination) pairs.
void RecordMoves(CommLedger& ledger, const std::vector<std::pair<Int, Int>>& moves) {
  std::map<Int, Int> entries;
  std::set<std::pair<Int, Int>> pairs;
  for (const auto& [src, dst] : moves) {
    if (src == dst) continue;
    ++entries[src];
    pairs.insert({src, dst});
  }
  std::map<Int, Int> messages;
  for (const auto& pair : pairs) ++messages[pair.first];
  for (const auto& [rank, count] : entries) {
    ledger.Record(rank, Collective::kPermute, count, messages[rank]);
  }
}

void RequireSameTeam(const ProcessGrid& a, Int offset_a, const ProcessGrid& b,
                     Int offset_b) {
  if (a.Rows() != b.Rows() || a.Cols() != b.Cols() || offset_a != offset_b) {
    throw ConfigError("distributed operands live on different teams");
  }
}

// Position of global index i in the increasing list {k : (k + sigma) mod m == slot}.
Int CyclicPosition(Int i, Int m) { return i / m; }

}  // namespace

ProcessGrid::ProcessGrid(Int rows, Int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw ConfigError("process grid needs r, c >= 1");
}

std::array<Int, 2> ProcessGrid::Position(Int rank) const {
  if (rank < 0 || rank >= Size()) throw DomainError("rank outside the grid");
  return {rank % rows_, rank / rows_};
}

Int ProcessGrid::Rank(Int row, Int col) const {
  if (row < 0 || row >= rows_ || col < 0 || col >= cols_) {
    throw DomainError("grid position outside the grid");
  }
  return row + col * rows_;
}

ProcessGrid ParseGrid(std::string_view text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string_view::npos) {
    throw ConfigError("process grid must look like RxC: " + std::string(text));
  }
  auto parse = [&](std::string_view part) {
    Int value = 0;
    const auto [ptr, ec] =
        std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || ptr != part.data() + part.size()) {
      throw ConfigError("bad process grid: " + std::string(text));
    }
    return value;
  };
  return ProcessGrid(parse(text.substr(0, x)), parse(text.substr(x + 1)));
}

std::string_view DistributionName(Distribution dist) {
  switch (dist) {
    case Distribution::kVC: return "VC";
    case Distribution::kVR: return "VR";
    case Distribution::kMC: return "MC";
    case Distribution::kMR: return "MR";
    case Distribution::kStar: return "STAR";
  }
  return "?";
}

Int VcOwner(const ProcessGrid& grid, Int i, Int alignment) {
  return (i + alignment) % grid.Size();
}

std::array<Int, 2> VrOwnerPosition(const ProcessGrid& grid, Int i,
                                   Int alignment) {
  const Int shifted = i + alignment;
  return {(shifted / grid.Cols()) % grid.Rows(), shifted % grid.Cols()};
}

Int McRow(const ProcessGrid& grid, Int i, Int alignment) {
  return (i + alignment) % grid.Rows();
}

Int MrCol(const ProcessGrid& grid, Int i, Int alignment) {
  return (i + alignment) % grid.Cols();
}

bool Owns(const ProcessGrid& grid, Distribution dist, Int alignment, Int rank,
          Int i) {
  const auto pos = grid.Position(rank);
  switch (dist) {
    case Distribution::kVC: return VcOwner(grid, i, alignment) == rank;
    case Distribution::kVR: return VrOwnerPosition(grid, i, alignment) == pos;
    case Distribution::kMC: return McRow(grid, i, alignment) == pos[0];
    case Distribution::kMR: return MrCol(grid, i, alignment) == pos[1];
    case Distribution::kStar: return true;
  }
  return false;
}

std::string_view CollectiveName(Collective kind) {
  switch (kind) {
    case Collective::kRowAllGather: return "row-allgather";
    case Collective::kColAllGather: return "col-allgather";
    case Collective::kRowReduceScatter: return "row-reduce-scatter";
    case Collective::kColReduceScatter: return "col-reduce-scatter";
    case Collective::kPermute: return "permute";
  }
  return "?";
}

CommLedger::CommLedger(Int num_ranks)
    : entries_(num_ranks, std::array<Int, kNumCollectives>{}),
      messages_(num_ranks, std::array<Int, kNumCollectives>{}) {}

void CommLedger::Record(Int rank, Collective kind, Int entries, Int messages) {
  if (rank < 0) throw DomainError("negative rank");
  if (rank >= NumRanks()) {
    entries_.resize(rank + 1, std::array<Int, kNumCollectives>{});
    messages_.resize(rank + 1, std::array<Int, kNumCollectives>{});
  }
  entries_[rank][static_cast<int>(kind)] += entries;
  messages_[rank][static_cast<int>(kind)] += messages;
}

Int CommLedger::Entries(Int rank, Collective kind) const {
  if (rank >= NumRanks()) return 0;
  return entries_[rank][static_cast<int>(kind)];
}

Int CommLedger::Messages(Int rank, Collective kind) const {
  if (rank >= NumRanks()) return 0;
  return messages_[rank][static_cast<int>(kind)];
}

Int CommLedger::MaxEntries(Collective kind) const {
  Int best = 0;
  for (const auto& row : entries_) best = std::max(best, row[static_cast<int>(kind)]);
  return best;
}

Int CommLedger::TotalEntries() const {
  Int total = 0;
  for (const auto& row : entries_) {
    for (Int v : row) total += v;
  }
  return total;
}

Int CommLedger::TotalMessages() const {
  Int total = 0;
  for (const auto& row : messages_) {
    for (Int v : row) total += v;
  }
  return total;
}

Int CommLedger::MaxMessagesPerRank() const {
  Int best = 0;
  for (const auto& row : messages_) {
    Int sum = 0;
    for (Int v : row) sum += v;
    best = std::max(best, sum);
  }
  return best;
}

void CommLedger::WriteCsv(std::ostream& out) const {
  out << "rank,collective,entries_sent,messages\n";
  for (Int rank = 0; rank < NumRanks(); ++rank) {
    for (int k = 0; k < kNumCollectives; ++k) {
      out << rank << ',' << CollectiveName(static_cast<Collective>(k)) << ','
          << entries_[rank][k] << ',' << messages_[rank][k] << '\n';
    }
  }
}

DistVector::DistVector(const ProcessGrid& grid, Int length, Distribution dist,
                       Int alignment, Int rank_offset)
    : grid_(grid),
      length_(length),
      dist_(dist),
      alignment_(alignment),
      rank_offset_(rank_offset),
      local_(grid.Size()) {
  if (length < 0) throw DimensionError("negative vector length");
  if (alignment < 0) throw ConfigError("alignment must be non-negative");
  if (rank_offset < 0) throw ConfigError("rank offset must be non-negative");
  for (Int rank = 0; rank < grid.Size(); ++rank) {
    local_[rank].resize(LocalIndices(rank).size());
  }
}

DistVector DistVector::FromGlobal(const ProcessGrid& grid,
                                  std::span<const Complex> values,
                                  Distribution dist, Int alignment,
                                  Int rank_offset) {
  DistVector x(grid, static_cast<Int>(values.size()), dist, alignment,
               rank_offset);
  for (Int rank = 0; rank < grid.Size(); ++rank) {
    const std::vector<Int> indices = x.LocalIndices(rank);
    for (size_t k = 0; k < indices.size(); ++k) {
      x.local_[rank][k] = values[indices[k]];
    }
  }
  return x;
}

std::vector<Int> DistVector::LocalIndices(Int rank) const {
  const auto pos = grid_.Position(rank);
  Int first = 0;
  Int stride = 1;
  switch (dist_) {
    case Distribution::kVC:
      stride = grid_.Size();
      first = Mod(rank - alignment_, stride);
      break;
    case Distribution::kMC:
      stride = grid_.Rows();
      first = Mod(pos[0] - alignment_, stride);
      break;
    case Distribution::kMR:
      stride = grid_.Cols();
      first = Mod(pos[1] - alignment_, stride);
      break;
    case Distribution::kVR: {
      // VR rank order is row-major: rank at (s, t) is number s * c + t.
      stride = grid_.Size();
      first = Mod(pos[0] * grid_.Cols() + pos[1] - alignment_, stride);
      break;
    }
    case Distribution::kStar:
      break;
  }
  std::vector<Int> indices;
  for (Int i = first; i < length_; i += stride) indices.push_back(i);
  return indices;
}

std::vector<Complex> DistVector::Gather() const {
  std::vector<Complex> values(length_);
  for (Int rank = 0; rank < grid_.Size(); ++rank) {
    const std::vector<Int> indices = LocalIndices(rank);
    for (size_t k = 0; k < indices.size(); ++k) {
      values[indices[k]] = local_[rank][k];
    }
  }
  return values;
}

DistVector Redistribute(const DistVector& x, Distribution target,
                        CommLedger& ledger) {
  const ProcessGrid& grid = x.Grid();
  const Int offset = x.RankOffset();
  const Distribution source = x.Dist();
  if (source == target) return x;
  DistVector y(grid, x.Length(), target, x.Alignment(), offset);

  // Values a rank can see after the exchange, keyed by global index.
  std::vector<Complex> buffer(x.Length());
  auto fill_from = [&](Int rank) {
    const std::vector<Int> indices = x.LocalIndices(rank);
    for (size_t k = 0; k < indices.size(); ++k) {
      buffer[indices[k]] = x.Local(rank)[k];
    }
  };
  auto take = [&](Int rank) {
    const std::vector<Int> indices = y.LocalIndices(rank);
    for (size_t k = 0; k < indices.size(); ++k) {
      y.Local(rank)[k] = buffer[indices[k]];
    }
  };

  if (source == Distribution::kVC && target == Distribution::kMC) {
    const Int g = grid.Cols();
    for (Int s = 0; s < grid.Rows(); ++s) {
      for (Int t = 0; t < g; ++t) fill_from(grid.Rank(s, t));
      for (Int t = 0; t < g; ++t) {
        const Int rank = grid.Rank(s, t);
        take(rank);
        if (g > 1) {
          ledger.Record(offset + rank, Collective::kRowAllGather,
                        static_cast<Int>(x.Local(rank).size()) * (g - 1),
                        CeilLog2(g));
        }
      }
    }
    return y;
  }
  if (source == Distribution::kVR && target == Distribution::kMR) {
    const Int g = grid.Rows();
    for (Int t = 0; t < grid.Cols(); ++t) {
      for (Int s = 0; s < g; ++s) fill_from(grid.Rank(s, t));
      for (Int s = 0; s < g; ++s) {
        const Int rank = grid.Rank(s, t);
        take(rank);
        if (g > 1) {
          ledger.Record(offset + rank, Collective::kColAllGather,
                        static_cast<Int>(x.Local(rank).size()) * (g - 1),
                        CeilLog2(g));
        }
      }
    }
    return y;
  }
  if ((source == Distribution::kMC && target == Distribution::kVC) ||
      (source == Distribution::kMR && target == Distribution::kVR)) {
    // Each target owner already holds its entries; no communication.
    for (Int rank = 0; rank < grid.Size(); ++rank) {
      fill_from(rank);
      take(rank);
    }
    return y;
  }
  if ((source == Distribution::kVC && target == Distribution::kVR) ||
      (source == Distribution::kVR && target == Distribution::kVC)) {
    std::vector<Int> owner(x.Length());
    for (Int rank = 0; rank < grid.Size(); ++rank) {
      for (Int i : y.LocalIndices(rank)) owner[i] = rank;
    }
    std::vector<std::pair<Int, Int>> moves;
    for (Int rank = 0; rank < grid.Size(); ++rank) {
      fill_from(rank);
      for (Int i : x.LocalIndices(rank)) {
        moves.emplace_back(offset + rank, offset + owner[i]);
      }
    }
    RecordMoves(ledger, moves);
    for (Int rank = 0; rank < grid.Size(); ++rank) take(rank);
    return y;
  }
  throw ConfigError("unsupported redistribution " +
                    std::string(DistributionName(source)) + " -> " +
                    std::string(DistributionName(target)));
}

DistVector RowReduceScatter(const DistVector& partial_mc, CommLedger& ledger) {
  if (partial_mc.Dist() != Distribution::kMC) {
    throw ConfigError("row reduce-scatter needs [MC] partials");
  }
  const ProcessGrid& grid = partial_mc.Grid();
  const Int offset = partial_mc.RankOffset();
  DistVector y(grid, partial_mc.Length(), Distribution::kVC,
               partial_mc.Alignment(), offset);
  const Int g = grid.Cols();
  for (Int s = 0; s < grid.Rows(); ++s) {
    const std::vector<Int> indices = partial_mc.LocalIndices(grid.Rank(s, 0));
    std::vector<Complex> sum(indices.size());
    for (Int t = 0; t < g; ++t) {
      const auto& part = partial_mc.Local(grid.Rank(s, t));
      for (size_t k = 0; k < sum.size(); ++k) sum[k] += part[k];
    }
    for (Int t = 0; t < g; ++t) {
      const Int rank = grid.Rank(s, t);
      const std::vector<Int> own = y.LocalIndices(rank);
      // Each own index sits at position (i - first) / r of the row's list.
      for (size_t k = 0; k < own.size(); ++k) {
        y.Local(rank)[k] = sum[CyclicPosition(own[k], grid.Rows())];
      }
      if (g > 1) {
        ledger.Record(offset + rank, Collective::kRowReduceScatter,
                      static_cast<Int>(indices.size() - own.size()),
                      CeilLog2(g));
      }
    }
  }
  return y;
}

DistVector ColReduceScatter(const DistVector& partial_mr, CommLedger& ledger) {
  if (partial_mr.Dist() != Distribution::kMR) {
    throw ConfigError("column reduce-scatter needs [MR] partials");
  }
  const ProcessGrid& grid = partial_mr.Grid();
  const Int offset = partial_mr.RankOffset();
  DistVector y(grid, partial_mr.Length(), Distribution::kVR,
               partial_mr.Alignment(), offset);
  const Int g = grid.Rows();
  for (Int t = 0; t < grid.Cols(); ++t) {
    const std::vector<Int> indices = partial_mr.LocalIndices(grid.Rank(0, t));
    std::vector<Complex> sum(indices.size());
    for (Int s = 0; s < g; ++s) {
      const auto& part = partial_mr.Local(grid.Rank(s, t));
      for (size_t k = 0; k < sum.size(); ++k) sum[k] += part[k];
    }
    for (Int s = 0; s < g; ++s) {
      const Int rank = grid.Rank(s, t);
      const std::vector<Int> own = y.LocalIndices(rank);
      for (size_t k = 0; k < own.size(); ++k) {
        y.Local(rank)[k] = sum[CyclicPosition(own[k], grid.Cols())];
      }
      if (g > 1) {
        ledger.Record(offset + rank, Collective::kColReduceScatter,
                      static_cast<Int>(indices.size() - own.size()),
                      CeilLog2(g));
      }
    }
  }
  return y;
}

DistMatrix::DistMatrix(const ProcessGrid& grid, Int rows, Int cols,
                       Int alignment, Int rank_offset)
    : grid_(grid),
      rows_(rows),
      cols_(cols),
      alignment_(alignment),
      rank_offset_(rank_offset),
      row_sets_(grid.Rows()),
      col_sets_(grid.Cols()),
      local_(grid.Size()) {
  if (alignment < 0) throw ConfigError("alignment must be non-negative");
  for (Int i = 0; i < rows; ++i) row_sets_[McRow(grid, i, alignment)].push_back(i);
  for (Int j = 0; j < cols; ++j) col_sets_[MrCol(grid, j, alignment)].push_back(j);
  for (Int rank = 0; rank < grid.Size(); ++rank) {
    local_[rank] = DenseMatrix(static_cast<Int>(LocalRows(rank).size()),
                               static_cast<Int>(LocalCols(rank).size()));
  }
}

DistMatrix DistMatrix::FromGlobal(const ProcessGrid& grid, const DenseMatrix& a,
                                  Int alignment, Int rank_offset) {
  DistMatrix m(grid, a.Rows(), a.Cols(), alignment, rank_offset);
  for (Int rank = 0; rank < grid.Size(); ++rank) {
    const auto& rows = m.LocalRows(rank);
    const auto& cols = m.LocalCols(rank);
    DenseMatrix& local = m.local_[rank];
    for (size_t jl = 0; jl < cols.size(); ++jl) {
      for (size_t il = 0; il < rows.size(); ++il) {
        local(il, jl) = a(rows[il], cols[jl]);
      }
    }
  }
  return m;
}

const std::vector<Int>& DistMatrix::LocalRows(Int rank) const {
  return row_sets_[grid_.Position(rank)[0]];
}

const std::vector<Int>& DistMatrix::LocalCols(Int rank) const {
  return col_sets_[grid_.Position(rank)[1]];
}

DenseMatrix DistMatrix::Gather() const {
  DenseMatrix a(rows_, cols_);
  for (Int rank = 0; rank < grid_.Size(); ++rank) {
    const auto& rows = LocalRows(rank);
    const auto& cols = LocalCols(rank);
    for (size_t jl = 0; jl < cols.size(); ++jl) {
      for (size_t il = 0; il < rows.size(); ++il) {
        a(rows[il], cols[jl]) = local_[rank](il, jl);
      }
    }
  }
  return a;
}

DistVector DistMultiply(const DistMatrix& a, MatrixKind kind,
                        const DistVector& x, bool transposed,
                        CommLedger& ledger) {
  RequireSameTeam(a.Grid(), a.RankOffset(), x.Grid(), x.RankOffset());
  if (x.Dist() != Distribution::kVC) throw ConfigError("expected x[VC]");
  if (x.Alignment() != a.Alignment()) {
    throw ConfigError("vector and matrix alignments differ");
  }
  const bool unit = kind == MatrixKind::kUnitLower;
  if (unit && a.Rows() != a.Cols()) {
    throw DimensionError("unit-lower matrix must be square");
  }
  const Int in_length = transposed ? a.Rows() : a.Cols();
  const Int out_length = transposed ? a.Cols() : a.Rows();
  if (x.Length() != in_length) {
    throw DimensionError("vector length does not match the matrix");
  }
  const ProcessGrid& grid = a.Grid();
  const Int offset = a.RankOffset();

  DistVector y = [&] {
    if (!transposed) {
      const DistVector xr = Redistribute(x, Distribution::kVR, ledger);
      const DistVector xm = Redistribute(xr, Distribution::kMR, ledger);
      DistVector partial(grid, out_length, Distribution::kMC, a.Alignment(),
                         offset);
      for (Int rank = 0; rank < grid.Size(); ++rank) {
        const auto& rows = a.LocalRows(rank);
        const auto& cols = a.LocalCols(rank);
        const DenseMatrix& local = a.Local(rank);
        const auto& xl = xm.Local(rank);
        auto& out = partial.Local(rank);
        for (size_t jl = 0; jl < cols.size(); ++jl) {
          const Complex xj = xl[jl];
          for (size_t il = 0; il < rows.size(); ++il) {
            if (unit && rows[il] <= cols[jl]) continue;
            out[il] += local(il, jl) * xj;
          }
        }
      }
      return RowReduceScatter(partial, ledger);
    }
    const DistVector xm = Redistribute(x, Distribution::kMC, ledger);
    DistVector partial(grid, out_length, Distribution::kMR, a.Alignment(),
                       offset);
    for (Int rank = 0; rank < grid.Size(); ++rank) {
      const auto& rows = a.LocalRows(rank);
      const auto& cols = a.LocalCols(rank);
      const DenseMatrix& local = a.Local(rank);
      const auto& xl = xm.Local(rank);
      auto& out = partial.Local(rank);
      for (size_t jl = 0; jl < cols.size(); ++jl) {
        Complex sum = 0;
        for (size_t il = 0; il < rows.size(); ++il) {
          if (unit && rows[il] <= cols[jl]) continue;
          sum += local(il, jl) * xl[il];
        }
        out[jl] = sum;
      }
    }
    const DistVector yr = ColReduceScatter(partial, ledger);
    return Redistribute(yr, Distribution::kVC, ledger);
  }();

  if (unit) {
    for (Int rank = 0; rank < grid.Size(); ++rank) {
      auto& out = y.Local(rank);
      const auto& in = x.Local(rank);
      for (size_t k = 0; k < out.size(); ++k) out[k] += in[k];
    }
  }
  return y;
}

DistVector DistTriangularMultiply(const DistMatrix& l, const DistVector& x,
                                  bool transposed, CommLedger& ledger) {
  return DistMultiply(l, MatrixKind::kUnitLower, x, transposed, ledger);
}

DistVector DistTriangularSolve(const DistMatrix& l, const DistVector& x,
                               bool transposed, CommLedger& ledger) {
  RequireSameTeam(l.Grid(), l.RankOffset(), x.Grid(), x.RankOffset());
  if (x.Dist() != Distribution::kVC) throw ConfigError("expected x[VC]");
  if (x.Alignment() != l.Alignment()) {
    throw ConfigError("vector and matrix alignments differ");
  }
  if (l.Rows() != l.Cols() || x.Length() != l.Rows()) {
    throw DimensionError("triangular solve dimensions disagree");
  }
  const ProcessGrid& grid = l.Grid();
  const Int r = grid.Rows();
  const Int c = grid.Cols();
  const Int offset = l.RankOffset();
  const Int sigma = l.Alignment();
  const Int n = l.Rows();
  const std::vector<Complex> rhs = x.Gather();
  std::vector<Complex> y(n);

  // Per-rank partial sums, indexed by local row (normal) or local column
  // (transposed) position.
  std::vector<std::vector<Complex>> partial(grid.Size());
  for (Int rank = 0; rank < grid.Size(); ++rank) {
    partial[rank].assign(
        transposed ? l.LocalCols(rank).size() : l.LocalRows(rank).size(),
        Complex());
  }

  for (Int step = 0; step < n; ++step) {
    const Int j = transposed ? n - 1 - step : step;
    const Int s_j = McRow(grid, j, sigma);
    const Int t_j = MrCol(grid, j, sigma);
    const Int owner = VcOwner(grid, j, sigma);
    const auto owner_pos = grid.Position(owner);

    // Fan-in of the partial sums for index j.
    Complex sum = 0;
    if (!transposed) {
      const Int pos = CyclicPosition(j, r);
      for (Int t = 0; t < c; ++t) {
        const Int rank = grid.Rank(s_j, t);
        sum += partial[rank][pos];
        if (rank != owner) {
          ledger.Record(offset + rank, Collective::kRowReduceScatter, 1, 1);
        }
      }
    } else {
      const Int pos = CyclicPosition(j, c);
      const Int root = grid.Rank(s_j, t_j);
      for (Int s = 0; s < r; ++s) {
        const Int rank = grid.Rank(s, t_j);
        sum += partial[rank][pos];
        if (rank != root) {
          ledger.Record(offset + rank, Collective::kColReduceScatter, 1, 1);
        }
      }
      if (root != owner) {
        ledger.Record(offset + root, Collective::kPermute, 1, 1);
      }
    }
    y[j] = rhs[j] - sum;

    // Fan-out of y_j to the ranks holding the rest of its column (normal) or
    // row (transposed) of L.
    if (!transposed) {
      const Int root = grid.Rank(owner_pos[0], t_j);
      if (root != owner) ledger.Record(offset + owner, Collective::kPermute, 1, 1);
      if (r > 1) {
        ledger.Record(offset + root, Collective::kColAllGather, r - 1,
                      CeilLog2(r));
      }
      const Int col_pos = CyclicPosition(j, c);
      for (Int s = 0; s < r; ++s) {
        const Int rank = grid.Rank(s, t_j);
        const auto& rows = l.LocalRows(rank);
        const DenseMatrix& local = l.Local(rank);
        for (size_t il = 0; il < rows.size(); ++il) {
          if (rows[il] > j) partial[rank][il] += local(il, col_pos) * y[j];
        }
      }
    } else {
      if (c > 1) {
        ledger.Record(offset + owner, Collective::kRowAllGather, c - 1,
                      CeilLog2(c));
      }
      const Int row_pos = CyclicPosition(j, r);
      for (Int t = 0; t < c; ++t) {
        const Int rank = grid.Rank(s_j, t);
        const auto& cols = l.LocalCols(rank);
        const DenseMatrix& local = l.Local(rank);
        for (size_t jl = 0; jl < cols.size(); ++jl) {
          if (cols[jl] < j) partial[rank][jl] += local(row_pos, jl) * y[j];
        }
      }
    }
  }
  return DistVector::FromGlobal(grid, y, Distribution::kVC, sigma, offset);
}

std::array<Int, 2> TeamGridShape(Int size) {
  if (size < 1) throw ConfigError("team size must be >= 1");
  Int r = static_cast<Int>(std::floor(std::sqrt(static_cast<double>(size))));
  while (r * r > size) --r;
  while ((r + 1) * (r + 1) <= size) ++r;
  while (size % r != 0) --r;
  return {r, size / r};
}

SubteamAssignment SubtreeToSubteam(const EliminationTree& tree, Int team_size,
                                   Int factor_team_size) {
  if (team_size < 1) throw ConfigError("team size must be >= 1");
  if (factor_team_size < 0) throw ConfigError("factor team size must be >= 0");
  if (tree.NumSupernodes() == 0) throw StateError("empty elimination tree");
  SubteamAssignment assignment;
  assignment.solve_team_size = team_size;
  assignment.factor_team_size =
      factor_team_size == 0 ? team_size : factor_team_size;
  const auto& nodes = tree.Supernodes();
  assignment.teams.resize(nodes.size());
  auto make = [](Int offset, Int size) {
    Subteam team;
    team.offset = offset;
    team.size = size;
    const auto shape = TeamGridShape(size);
    team.grid_rows = shape[0];
    team.grid_cols = shape[1];
    return team;
  };
  assignment.teams[tree.Root().id] = make(0, team_size);
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    const Subteam team = assignment.teams[it->id];
    const auto& children = it->children;
    if (children.empty()) continue;
    if (team.size == 1) {
      for (Int child : children) assignment.teams[child] = team;
      continue;
    }
    const Int left = (team.size + 1) / 2;
    assignment.teams[children[0]] = make(team.offset, left);
    for (size_t k = 1; k < children.size(); ++k) {
      assignment.teams[children[k]] =
          make(team.offset + left, team.size - left);
    }
  }
  return assignment;
}

Int SupernodeAlignment(Int supernode, Int team_size, Int num_panels) {
  if (team_size < 1 || num_panels < 1) {
    throw ConfigError("alignment needs q >= 1 and m >= 1");
  }
  const Int spread = (team_size + num_panels - 1) / num_panels;
  return (supernode * spread) % team_size;
}

SimulatedSolve SimulatedMultifrontalSolve(const FrontalTree& factorization,
                                          const SubteamAssignment& assignment,
                                          std::span<const Complex> b,
                                          Int num_panels) {
  if (factorization.State() == FactorState::kSymbolic) {
    throw StateError("simulated solve requires a factored tree");
  }
  const EliminationTree& tree = factorization.Tree();
  const Int n = tree.NumIndices();
  if (static_cast<Int>(b.size()) != n) {
    throw DimensionError("right-hand side length does not match operator");
  }
  if (static_cast<Int>(assignment.teams.size()) != tree.NumSupernodes()) {
    throw ConfigError("subteam assignment does not match the tree");
  }
  const bool inverted =
      factorization.State() == FactorState::kSelectivelyInverted;
  const auto& nodes = tree.Supernodes();
  const auto& fronts = factorization.Fronts();

  Int num_ranks = 0;
  for (const Subteam& team : assignment.teams) {
    num_ranks = std::max(num_ranks, team.offset + team.size);
  }
  SimulatedSolve out;
  out.ledger = CommLedger(num_ranks);
  CommLedger& ledger = out.ledger;

  std::vector<Int> alignment(nodes.size());
  std::vector<Int> home(n);
  for (const Supernode& node : nodes) {
    const Subteam& team = assignment.teams[node.id];
    alignment[node.id] = SupernodeAlignment(node.id, team.size, num_panels);
    const ProcessGrid grid = team.Grid();
    for (Int k = 0; k < node.size; ++k) {
      home[node.start + k] =
          team.offset + VcOwner(grid, k, alignment[node.id]);
    }
  }

  const auto& perm = tree.Permutation();
  std::vector<Complex> work(n);
  for (Int i = 0; i < n; ++i) work[perm[i]] = b[i];

  auto members = [&](const Supernode& node) {
    return std::span<Complex>(work).subspan(node.start, node.size);
  };

  // L^{-1}
  for (const Supernode& node : nodes) {
    const Subteam& team = assignment.teams[node.id];
    const ProcessGrid grid = team.Grid();
    const Int sigma = alignment[node.id];
    const Front& front = fronts[node.id];
    auto xs_global = members(node);
    DistVector xs = DistVector::FromGlobal(grid, xs_global, Distribution::kVC,
                                           sigma, team.offset);
    const DistMatrix l =
        DistMatrix::FromGlobal(grid, front.top_left, sigma, team.offset);
    xs = inverted ? DistTriangularMultiply(l, xs, false, ledger)
                  : DistTriangularSolve(l, xs, false, ledger);
    const std::vector<Complex> solved = xs.Gather();
    std::copy(solved.begin(), solved.end(), xs_global.begin());

    const Int bsize = static_cast<Int>(node.lower_struct.size());
    if (bsize == 0) continue;
    const DistMatrix f =
        DistMatrix::FromGlobal(grid, front.bottom_left, sigma, team.offset);
    const std::vector<Complex> update =
        DistMultiply(f, MatrixKind::kGeneral, xs, false, ledger).Gather();
    std::vector<std::pair<Int, Int>> moves;
    for (Int k = 0; k < bsize; ++k) {
      const Int target = node.lower_struct[k];
      moves.emplace_back(team.offset + VcOwner(grid, k, sigma), home[target]);
      work[target] -= update[k];
    }
    RecordMoves(ledger, moves);
  }

  // D^{-1}, local to each owner.
  for (const Supernode& node : nodes) {
    const Front& front = fronts[node.id];
    for (Int k = 0; k < node.size; ++k) work[node.start + k] /= front.diagonal[k];
  }

  // L^{-T}
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    const Supernode& node = *it;
    const Subteam& team = assignment.teams[node.id];
    const ProcessGrid grid = team.Grid();
    const Int sigma = alignment[node.id];
    const Front& front = fronts[node.id];
    auto xs_global = members(node);
    const Int bsize = static_cast<Int>(node.lower_struct.size());
    if (bsize > 0) {
      std::vector<Complex> gathered(bsize);
      std::vector<std::pair<Int, Int>> moves;
      for (Int k = 0; k < bsize; ++k) {
        const Int source = node.lower_struct[k];
        gathered[k] = work[source];
        moves.emplace_back(home[source], team.offset + VcOwner(grid, k, sigma));
      }
      RecordMoves(ledger, moves);
      const DistVector xu = DistVector::FromGlobal(
          grid, gathered, Distribution::kVC, sigma, team.offset);
      const DistMatrix f =
          DistMatrix::FromGlobal(grid, front.bottom_left, sigma, team.offset);
      const std::vector<Complex> correction =
          DistMultiply(f, MatrixKind::kGeneral, xu, true, ledger).Gather();
      for (Int k = 0; k < node.size; ++k) xs_global[k] -= correction[k];
    }
    DistVector xs = DistVector::FromGlobal(grid, xs_global, Distribution::kVC,
                                           sigma, team.offset);
    const DistMatrix l =
        DistMatrix::FromGlobal(grid, front.top_left, sigma, team.offset);
    xs = inverted ? DistTriangularMultiply(l, xs, true, ledger)
                  : DistTriangularSolve(l, xs, true, ledger);
    const std::vector<Complex> solved = xs.Gather();
    std::copy(solved.begin(), solved.end(), xs_global.begin());
  }

  out.x.resize(n);
  for (Int i = 0; i < n; ++i) out.x[i] = work[perm[i]];
  return out;
}

}  // namespace helmsweep::distsim

#include "helmsweep/ndtree.hpp"

#include <algorithm>
#include <functional>
#include <ostream>
#include <string>

namespace helmsweep {

namespace {

struct Region {
  Int begin[2];
  Int end[2];

  Int Length(int axis) const { return end[axis] - begin[axis]; }
};

class Dissector {
 public:
  Dissector(const Dims& dims, Int leaf_cutoff,
            std::vector<Supernode>& supernodes, std::vector<Int>& permutation)
      : dims_(dims),
        leaf_cutoff_(leaf_cutoff),
        supernodes_(supernodes),
        permutation_(permutation) {}

  // Returns the id of the supernode at the top of the region's subtree.
  Int Recurse(const Region& region) {
    const Int count = region.Length(0) * region.Length(1) * dims_[2];
    const int axis = region.Length(0) >= region.Length(1) ? 0 : 1;
    if (count <= leaf_cutoff_ || region.Length(axis) < 3) {
      return Emit(region, {}, -1);
    }
    const Int cut = region.begin[axis] + region.Length(axis) / 2;
    Region left = region, right = region, separator = region;
    left.end[axis] = cut;
    separator.begin[axis] = cut;
    separator.end[axis] = cut + 1;
    right.begin[axis] = cut + 1;
    const Int left_id = Recurse(left);
    const Int right_id = Recurse(right);
    return Emit(separator, {left_id, right_id}, axis);
  }

 private:
  Int Emit(const Region& region, std::vector<Int> children, int axis) {
    Supernode node;
    node.id = static_cast<Int>(supernodes_.size());
    node.start = next_index_;
    node.separator_axis = axis;
    for (Int i3 = 0; i3 < dims_[2]; ++i3) {
      for (Int i2 = region.begin[1]; i2 < region.end[1]; ++i2) {
        for (Int i1 = region.begin[0]; i1 < region.end[0]; ++i1) {
          permutation_[NaturalIndex(i1, i2, i3, dims_)] = next_index_++;
        }
      }
    }
    node.size = next_index_ - node.start;
    for (Int child : children) supernodes_[child].parent = node.id;
    node.children = std::move(children);
    supernodes_.push_back(std::move(node));
    return supernodes_.back().id;
  }

  const Dims& dims_;
  Int leaf_cutoff_;
  std::vector<Supernode>& supernodes_;
  std::vector<Int>& permutation_;
  Int next_index_ = 0;
};

}  // namespace

Int EliminationTree::Depth() const {
  if (supernodes_.empty()) return 0;
  std::vector<Int> depth(supernodes_.size(), 0);
  Int deepest = 0;
  for (Int s = NumSupernodes() - 1; s >= 0; --s) {
    const Supernode& node = supernodes_[s];
    if (node.parent >= 0) depth[s] = depth[node.parent] + 1;
    deepest = std::max(deepest, depth[s]);
  }
  return deepest + 1;
}

void EliminationTree::Dump(std::ostream& out) const {
  if (supernodes_.empty()) return;
  std::function<void(Int, Int)> visit = [&](Int id, Int level) {
    const Supernode& node = supernodes_[id];
    out << std::string(2 * level, ' ') << node.id << ' ' << node.size << ' '
        << node.lower_struct.size() << '\n';
    for (Int child : node.children) visit(child, level + 1);
  };
  visit(NumSupernodes() - 1, 0);
}

EliminationTree NestedDissection(const Dims& dims, Int leaf_cutoff) {
  for (Int d : dims) {
    if (d < 1) throw ConfigError("nested dissection needs positive dims");
  }
  if (leaf_cutoff < 1) throw ConfigError("leaf cutoff must be >= 1");
  EliminationTree tree;
  tree.leaf_cutoff_ = leaf_cutoff;
  const Int n = dims[0] * dims[1] * dims[2];
  tree.permutation_.assign(n, -1);
  Dissector dissector(dims, leaf_cutoff, tree.supernodes_, tree.permutation_);
  dissector.Recurse(Region{{0, 0}, {dims[0], dims[1]}});
  tree.inverse_permutation_.assign(n, -1);
  for (Int old = 0; old < n; ++old) {
    tree.inverse_permutation_[tree.permutation_[old]] = old;
  }
  return tree;
}

EliminationTree SingleSupernodeTree(Int num_indices) {
  if (num_indices < 1) throw ConfigError("tree needs at least one index");
  EliminationTree tree;
  Supernode node;
  node.size = num_indices;
  tree.supernodes_.push_back(node);
  tree.permutation_.resize(num_indices);
  tree.inverse_permutation_.resize(num_indices);
  for (Int i = 0; i < num_indices; ++i) {
    tree.permutation_[i] = tree.inverse_permutation_[i] = i;
  }
  tree.leaf_cutoff_ = num_indices;
  return tree;
}

void SymbolicAnalysis(EliminationTree& tree, const SparseOperator& op) {
  const Int n = tree.NumIndices();
  if (op.NumRows() != n || op.NumColumns() != n) {
    throw DimensionError("operator does not match elimination tree");
  }
  if (!op.IsStructurallySymmetric()) {
    throw ConfigError("symbolic analysis requires a structurally symmetric operator");
  }
  const auto& perm = tree.permutation_;
  const auto& inverse = tree.inverse_permutation_;
  const auto offsets = op.RowOffsets();
  const auto columns = op.ColumnIndices();
  std::vector<Int> mark(n, -1);

  auto& supernodes = tree.supernodes_;
  for (Supernode& node : supernodes) {
    const Int end = node.start + node.size;
    std::vector<Int> structure;
    auto add = [&](Int index) {
      if (mark[index] != node.id) {
        mark[index] = node.id;
        structure.push_back(index);
      }
    };
    for (Int j = node.start; j < end; ++j) {
      const Int old = inverse[j];
      for (Int k = offsets[old]; k < offsets[old + 1]; ++k) {
        const Int index = perm[columns[k]];
        if (index >= end) add(index);
      }
    }
    for (Int child : node.children) {
      for (Int index : supernodes[child].lower_struct) {
        if (index >= end) {
          add(index);
        } else if (index < node.start) {
          throw ConfigError("elimination tree is inconsistent with operator");
        }
      }
    }
    std::sort(structure.begin(), structure.end());
    node.lower_struct = std::move(structure);
  }

  for (Supernode& node : supernodes) {
    node.parent_relative.clear();
    if (node.parent < 0) {
      if (!node.lower_struct.empty()) {
        throw ConfigError("root supernode couples outside the tree");
      }
      continue;
    }
    const Supernode& parent = supernodes[node.parent];
    node.parent_relative.reserve(node.lower_struct.size());
    for (Int index : node.lower_struct) {
      if (index >= parent.start && index < parent.start + parent.size) {
        node.parent_relative.push_back(index - parent.start);
        continue;
      }
      const auto it = std::lower_bound(parent.lower_struct.begin(),
                                       parent.lower_struct.end(), index);
      if (it == parent.lower_struct.end() || *it != index) {
        throw ConfigError("child structure escapes its parent front");
      }
      node.parent_relative.push_back(parent.size +
                                     (it - parent.lower_struct.begin()));
    }
  }
  tree.analyzed_ = true;
}

}  // namespace helmsweep

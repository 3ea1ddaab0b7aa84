#ifndef HELMSWEEP_NDTREE_HPP_
#define HELMSWEEP_NDTREE_HPP_

#include <iosfwd>
#include <optional>
#include <vector>

#include "helmsweep/discretize.hpp"
#include "helmsweep/sparse.hpp"
#include "helmsweep/types.hpp"

namespace helmsweep {

// A set of columns eliminated together: either a separator slab or a leaf
// region. Members occupy [start, start + size) of the reordered index space.
struct Supernode {
  Int id = 0;
  Int start = 0;
  Int size = 0;
  std::vector<Int> children;  // 0 or 2 entries
  Int parent = -1;
  // Separator axis (0 or 1) for separators, -1 for leaves.
  int separator_axis = -1;

  // Sorted reordered row indices, all past this supernode, that couple it
  // to its ancestors. Filled by SymbolicAnalysis.
  std::vector<Int> lower_struct;
  // Position of each lower_struct entry inside the parent's front, where the
  // parent's own members occupy [0, parent.size) and its lower_struct follows.
  std::vector<Int> parent_relative;
};

class EliminationTree {
 public:
  EliminationTree() = default;

  // Supernodes in post-order: children always precede their parent, and the
  // root is last.
  const std::vector<Supernode>& Supernodes() const { return supernodes_; }
  std::vector<Supernode>& MutableSupernodes() { return supernodes_; }
  const Supernode& Root() const { return supernodes_.back(); }

  // old (natural) index -> reordered index, and its inverse.
  const std::vector<Int>& Permutation() const { return permutation_; }
  const std::vector<Int>& InversePermutation() const {
    return inverse_permutation_;
  }

  Int NumIndices() const { return static_cast<Int>(permutation_.size()); }
  Int NumSupernodes() const { return static_cast<Int>(supernodes_.size()); }
  Int LeafCutoff() const { return leaf_cutoff_; }
  bool Analyzed() const { return analyzed_; }
  Int Depth() const;

  // One line per supernode, indented two spaces per tree level from the
  // root: "id size lower_struct_size".
  void Dump(std::ostream& out) const;

 private:
  friend EliminationTree NestedDissection(const Dims&, Int);
  friend void SymbolicAnalysis(EliminationTree&, const SparseOperator&);
  friend EliminationTree SingleSupernodeTree(Int);

  std::vector<Supernode> supernodes_;
  std::vector<Int> permutation_;
  std::vector<Int> inverse_permutation_;
  Int leaf_cutoff_ = 32;
  bool analyzed_ = false;
};

inline constexpr Int kDefaultLeafCutoff = 32;

// Geometric nested dissection of an n1 x n2 x d box that only cuts the x1 and
// x2 axes. Each separator is a one-node-thick slab spanning the full depth at
// coordinate floor(len/2) of the longer axis (x1 on ties). Regions holding at
// most leaf_cutoff nodes, or too thin to split into two nonempty halves,
// become leaves.
EliminationTree NestedDissection(const Dims& dims,
                                 Int leaf_cutoff = kDefaultLeafCutoff);

// A tree with one supernode holding all indices in natural order.
EliminationTree SingleSupernodeTree(Int num_indices);

// Fills lower_struct and parent_relative for every supernode. The operator is
// given in natural ordering; the tree's permutation is applied internally.
// Throws ConfigError for structurally unsymmetric input.
void SymbolicAnalysis(EliminationTree& tree, const SparseOperator& op);

}  // namespace helmsweep

#endif  // HELMSWEEP_NDTREE_HPP_

#ifndef HELMSWEEP_DISCRETIZE_HPP_
#define HELMSWEEP_DISCRETIZE_HPP_

#include <array>
#include <numbers>
#include <span>
#include <vector>

#include "helmsweep/sparse.hpp"
#include "helmsweep/types.hpp"
#include "helmsweep/velocity.hpp"

namespace helmsweep {

using Dims = std::array<Int, 3>;

// Faces are ordered x1-low, x1-high, x2-low, x2-high, x3-low, x3-high.
enum Face { kX1Low = 0, kX1High, kX2Low, kX2High, kX3Low, kX3High };

// Interior grid of a box with homogeneous Dirichlet data on its boundary.
// Node (i1,i2,i3) sits at ((i1+1) h1, (i2+1) h2, (i3+1) h3); a face flagged as
// PML absorbs over the gamma node layers closest to it.
struct GridSpec {
  Dims dims{1, 1, 1};
  Point spacing{1.0, 1.0, 1.0};
  std::array<bool, 6> pml_faces{};
  PmlProfile profile;  // profile.spacing is replaced per axis
  double points_per_wavelength = 0;

  // Grid over a model's box with h_k = L_k / (n_k + 1).
  static GridSpec ForBox(const Dims& dims, const Point& extents);

  Int NumNodes() const { return dims[0] * dims[1] * dims[2]; }
  Int PlaneSize() const { return dims[0] * dims[1]; }
  Point Coordinate(Int i1, Int i2, Int i3) const;
  void Validate() const;
};

struct DampingSpec {
  double omega = 1.0;
  double alpha = 2 * std::numbers::pi;

  void Validate() const;
};

// i1 + i2*n1 + i3*n1*n2. Throws DomainError for out-of-range coordinates.
Int NaturalIndex(Int i1, Int i2, Int i3, const Dims& dims);
std::array<Int, 3> NaturalCoordinates(Int index, const Dims& dims);

// Complex stretch factors s(x) = 1 + i sigma(x)/omega along one axis: one per
// node and one per cell midpoint, mid[k] lying between nodes k-1 and k
// (mid[0] and mid[n] touch the Dirichlet boundary).
struct AxisStretch {
  std::vector<Complex> node;
  std::vector<Complex> mid;
};

AxisStretch MakeAxisStretch(Int n, double h, bool low_pml, bool high_pml,
                            const PmlProfile& profile, double omega);

std::array<AxisStretch, 3> GridStretches(const GridSpec& grid, double omega);

// Wave speed at every node in natural order.
std::vector<double> NodeSpeeds(const GridSpec& grid,
                               const VelocityModel& model);

// Seven-point divergence-form discretization of
//   -sum_k d_k (s1 s2 s3 / s_k^2) d_k u - s1 s2 s3 (omega + i alpha)^2 / c^2 u
// which is the stretched Helmholtz operator scaled by s1 s2 s3, and is
// complex symmetric. Boundary nodes are eliminated.
SparseOperator AssembleStretched(const Dims& dims, const Point& spacing,
                                 const std::array<AxisStretch, 3>& stretches,
                                 std::span<const double> speeds,
                                 const DampingSpec& damping);

// A for alpha = 0, J otherwise.
SparseOperator Assemble(const GridSpec& grid, const VelocityModel& model,
                        const DampingSpec& damping);

// Contiguous x3-plane ranges [begin, end).
struct PanelPartition {
  std::vector<std::array<Int, 2>> ranges;
  Int planes_per_panel = 1;
  Int pml_size = 0;

  Int NumPanels() const { return static_cast<Int>(ranges.size()); }
  Int NumPlanes(Int panel) const { return ranges[panel][1] - ranges[panel][0]; }
};

// ceil(n3/b) panels of b planes; the last one takes the remainder.
PanelPartition PartitionPanels(Int num_planes, Int planes_per_panel,
                               Int pml_size);

struct PanelBlocks {
  std::vector<SparseOperator> diagonal;  // J_{i,i}
  std::vector<SparseOperator> couplers;  // J_{i+1,i}: rows of panel i+1
};

PanelBlocks ExtractPanelBlocks(const SparseOperator& op, const Dims& dims,
                               const PanelPartition& panels);

}  // namespace helmsweep

#endif  // HELMSWEEP_DISCRETIZE_HPP_

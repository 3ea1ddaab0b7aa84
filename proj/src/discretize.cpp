#include "helmsweep/discretize.hpp"

#include <algorithm>
#include <string>

namespace helmsweep {

GridSpec GridSpec::ForBox(const Dims& dims, const Point& extents) {
  GridSpec grid;
  grid.dims = dims;
  for (int k = 0; k < 3; ++k) {
    if (dims[k] < 1) throw ConfigError("grid dims must be positive");
    grid.spacing[k] = extents[k] / static_cast<double>(dims[k] + 1);
  }
  return grid;
}

Point GridSpec::Coordinate(Int i1, Int i2, Int i3) const {
  return {static_cast<double>(i1 + 1) * spacing[0],
          static_cast<double>(i2 + 1) * spacing[1],
          static_cast<double>(i3 + 1) * spacing[2]};
}

void GridSpec::Validate() const {
  for (int k = 0; k < 3; ++k) {
    if (dims[k] < 1) throw ConfigError("grid dims must be positive");
    if (!(spacing[k] > 0)) throw ConfigError("grid spacing must be positive");
  }
  profile.Validate();
  for (int face = 0; face < 6; ++face) {
    if (pml_faces[face] && profile.gamma >= dims[face / 2]) {
      throw ConfigError("PML size " + std::to_string(profile.gamma) +
                        " must be smaller than grid dimension " +
                        std::to_string(dims[face / 2]) + " on axis " +
                        std::to_string(face / 2 + 1));
    }
  }
}

void DampingSpec::Validate() const {
  if (!(omega >= 0)) throw ConfigError("omega must be nonnegative");
  if (!(alpha >= 0)) throw ConfigError("alpha must be nonnegative");
}

Int NaturalIndex(Int i1, Int i2, Int i3, const Dims& dims) {
  if (i1 < 0 || i1 >= dims[0] || i2 < 0 || i2 >= dims[1] || i3 < 0 ||
      i3 >= dims[2]) {
    throw DomainError("grid coordinate out of range");
  }
  return i1 + i2 * dims[0] + i3 * dims[0] * dims[1];
}

std::array<Int, 3> NaturalCoordinates(Int index, const Dims& dims) {
  if (index < 0 || index >= dims[0] * dims[1] * dims[2]) {
    throw DomainError("grid index out of range");
  }
  const Int plane = dims[0] * dims[1];
  return {index % dims[0], (index % plane) / dims[0], index / plane};
}

AxisStretch MakeAxisStretch(Int n, double h, bool low_pml, bool high_pml,
                            const PmlProfile& profile, double omega) {
  PmlProfile axis_profile = profile;
  axis_profile.spacing = h;
  const double gamma = static_cast<double>(profile.gamma);
  const double length = static_cast<double>(n + 1) * h;
  // The layer ends at the node gamma steps in from the face.
  const double low_onset = (gamma + 1) * h;
  const double high_onset = length - (gamma + 1) * h;

  auto factor = [&](double x) -> Complex {
    double sigma = 0;
    if (low_pml) sigma += PmlSigma(axis_profile, std::max(0.0, low_onset - x));
    if (high_pml) {
      sigma += PmlSigma(axis_profile, std::max(0.0, x - high_onset));
    }
    if (sigma == 0) return {1.0, 0.0};
    if (!(omega > 0)) throw ConfigError("PML stretching requires omega > 0");
    return {1.0, sigma / omega};
  };

  AxisStretch stretch;
  stretch.node.resize(n);
  stretch.mid.resize(n + 1);
  for (Int i = 0; i < n; ++i) {
    stretch.node[i] = factor(static_cast<double>(i + 1) * h);
  }
  for (Int k = 0; k <= n; ++k) {
    stretch.mid[k] = factor((static_cast<double>(k) + 0.5) * h);
  }
  return stretch;
}

std::array<AxisStretch, 3> GridStretches(const GridSpec& grid, double omega) {
  std::array<AxisStretch, 3> stretches;
  for (int k = 0; k < 3; ++k) {
    stretches[k] = MakeAxisStretch(grid.dims[k], grid.spacing[k],
                                   grid.pml_faces[2 * k],
                                   grid.pml_faces[2 * k + 1], grid.profile,
                                   omega);
  }
  return stretches;
}

std::vector<double> NodeSpeeds(const GridSpec& grid,
                               const VelocityModel& model) {
  std::vector<double> speeds(grid.NumNodes());
  Int index = 0;
  for (Int i3 = 0; i3 < grid.dims[2]; ++i3) {
    for (Int i2 = 0; i2 < grid.dims[1]; ++i2) {
      for (Int i1 = 0; i1 < grid.dims[0]; ++i1) {
        speeds[index++] = model.SpeedAt(grid.Coordinate(i1, i2, i3));
      }
    }
  }
  return speeds;
}

SparseOperator AssembleStretched(const Dims& dims, const Point& spacing,
                                 const std::array<AxisStretch, 3>& stretches,
                                 std::span<const double> speeds,
                                 const DampingSpec& damping) {
  damping.Validate();
  const Int n1 = dims[0], n2 = dims[1], n3 = dims[2];
  const Int num_nodes = n1 * n2 * n3;
  if (static_cast<Int>(speeds.size()) != num_nodes) {
    throw DimensionError("speed array does not match grid");
  }
  for (int k = 0; k < 3; ++k) {
    if (static_cast<Int>(stretches[k].node.size()) != dims[k] ||
        static_cast<Int>(stretches[k].mid.size()) != dims[k] + 1) {
      throw DimensionError("stretch arrays do not match grid");
    }
  }
  const Complex shifted(damping.omega, damping.alpha);
  const Complex shifted_squared = shifted * shifted;
  const double inv_h2[3] = {1.0 / (spacing[0] * spacing[0]),
                            1.0 / (spacing[1] * spacing[1]),
                            1.0 / (spacing[2] * spacing[2])};
  const Int stride[3] = {1, n1, n1 * n2};

  std::vector<Int> offsets(num_nodes + 1, 0);
  std::vector<Int> columns;
  std::vector<Complex> values;
  columns.reserve(7 * num_nodes);
  values.reserve(7 * num_nodes);

  for (Int i3 = 0; i3 < n3; ++i3) {
    for (Int i2 = 0; i2 < n2; ++i2) {
      for (Int i1 = 0; i1 < n1; ++i1) {
        const Int coords[3] = {i1, i2, i3};
        const Complex s[3] = {stretches[0].node[i1], stretches[1].node[i2],
                              stretches[2].node[i3]};
        // Edge coefficient along axis k through midpoint index 'mid'. It
        // depends only on the shared transverse coordinates, so both
        // endpoints compute bit-identical values.
        auto coupling = [&](int k, Int mid) {
          const Complex transverse = s[(k + 1) % 3] * s[(k + 2) % 3];
          return transverse / stretches[k].mid[mid] * inv_h2[k];
        };
        const Int row = i1 + n1 * (i2 + n2 * i3);
        Complex lower[3], upper[3];
        Complex diagonal = 0;
        for (int k = 0; k < 3; ++k) {
          lower[k] = coupling(k, coords[k]);
          upper[k] = coupling(k, coords[k] + 1);
          diagonal += lower[k] + upper[k];
        }
        diagonal -= s[0] * s[1] * s[2] * shifted_squared /
                    (speeds[row] * speeds[row]);

        for (int k = 2; k >= 0; --k) {
          if (coords[k] > 0) {
            columns.push_back(row - stride[k]);
            values.push_back(-lower[k]);
          }
        }
        columns.push_back(row);
        values.push_back(diagonal);
        for (int k = 0; k < 3; ++k) {
          if (coords[k] + 1 < dims[k]) {
            columns.push_back(row + stride[k]);
            values.push_back(-upper[k]);
          }
        }
        offsets[row + 1] = static_cast<Int>(values.size());
      }
    }
  }
  return SparseOperator::FromCsr(num_nodes, num_nodes, std::move(offsets),
                                 std::move(columns), std::move(values),
                                 /*symmetric=*/true);
}

SparseOperator Assemble(const GridSpec& grid, const VelocityModel& model,
                        const DampingSpec& damping) {
  grid.Validate();
  const std::vector<double> speeds = NodeSpeeds(grid, model);
  return AssembleStretched(grid.dims, grid.spacing,
                           GridStretches(grid, damping.omega), speeds, damping);
}

PanelPartition PartitionPanels(Int num_planes, Int planes_per_panel,
                               Int pml_size) {
  if (planes_per_panel < 1) throw ConfigError("planes per panel must be >= 1");
  if (num_planes < 1) throw ConfigError("need at least one plane");
  if (pml_size < 0) throw ConfigError("PML size must be nonnegative");
  PanelPartition partition;
  partition.planes_per_panel = planes_per_panel;
  partition.pml_size = pml_size;
  for (Int begin = 0; begin < num_planes; begin += planes_per_panel) {
    partition.ranges.push_back(
        {begin, std::min(begin + planes_per_panel, num_planes)});
  }
  return partition;
}

PanelBlocks ExtractPanelBlocks(const SparseOperator& op, const Dims& dims,
                               const PanelPartition& panels) {
  const Int plane = dims[0] * dims[1];
  if (op.Dimension() != plane * dims[2]) {
    throw DimensionError("operator does not match grid dims");
  }
  Int expected_begin = 0;
  for (const auto& range : panels.ranges) {
    if (range[0] != expected_begin || range[1] <= range[0] ||
        range[1] > dims[2]) {
      throw DomainError("panel ranges must tile the x3 planes");
    }
    expected_begin = range[1];
  }
  if (expected_begin != dims[2]) {
    throw DomainError("panel ranges must cover every x3 plane");
  }
  PanelBlocks blocks;
  const Int m = panels.NumPanels();
  for (Int i = 0; i < m; ++i) {
    const Int begin = panels.ranges[i][0] * plane;
    const Int end = panels.ranges[i][1] * plane;
    blocks.diagonal.push_back(op.Block(begin, end, begin, end));
    if (i + 1 < m) {
      const Int next_end = panels.ranges[i + 1][1] * plane;
      blocks.couplers.push_back(op.Block(end, next_end, begin, end));
    }
  }
  return blocks;
}

}  // namespace helmsweep

#pragma once

#include <cstdint>
#include <vector>

#include "kdl/grid.hpp"

namespace kdl {

enum class Connectivity { Face, Full };  // 4/6 or 8/26

/// Labels of a partition of a cell set into connected pieces.
struct ComponentLabeling {
  /// label per grid cell, -1 for cells not in the set
  std::vector<std::int32_t> label;
  /// cells of each component, sorted; component k has smallest cell members[k][0]
  std::vector<std::vector<CellIndex>> members;
  std::size_t count() const { return members.size(); }
};

/// Partitions the cells with in_set[i] != 0 into maximal connected sets.
/// Components are numbered by their smallest cell index.
ComponentLabeling connected_components(const Grid& grid,
                                       const std::vector<std::uint8_t>& in_set,
                                       Connectivity conn = Connectivity::Face);

/// count(cells) * h^dim
double measure(std::size_t cell_count, double h, int dim);

}  // namespace kdl

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "kdl/domain.hpp"

namespace kdl {

/// Exact Euclidean distance from each cell center to the nearest false-cell
/// center. Stored as integer squared distances in cell units, so values are
/// exact and comparisons against brute force are bitwise.
class DistanceField {
 public:
  DistanceField() = default;
  DistanceField(const Grid& grid, std::vector<std::int64_t> squared_cells)
      : h_(grid.h()), sq_(std::move(squared_cells)) {}

  /// rho at a cell, in domain units.
  double rho(CellIndex i) const {
    return h_ * std::sqrt(static_cast<double>(sq_[static_cast<std::size_t>(i)]));
  }
  /// rho of the cell containing p; 0 outside the grid.
  double rho_at(const Grid& g, const Point& p) const {
    const CellCoord c = g.locate(p);
    return g.contains(c) ? rho(g.index(c)) : 0.0;
  }
  std::int64_t squared_cells(CellIndex i) const {
    return sq_[static_cast<std::size_t>(i)];
  }
  const std::vector<std::int64_t>& squared() const { return sq_; }
  double h() const { return h_; }

 private:
  double h_ = 1.0;
  std::vector<std::int64_t> sq_;
};

/// Separable exact squared EDT (lower envelope of parabolas per axis).
DistanceField distance_transform(const RasterDomain& d);

/// O(N * F) reference scan over all false cells; used by tests as the oracle.
std::vector<std::int64_t> brute_force_squared_distance(const RasterDomain& d);

}  // namespace kdl

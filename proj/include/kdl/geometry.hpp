#pragma once

#include <cstddef>
#include <vector>

#include "kdl/distance.hpp"
#include "kdl/domain.hpp"
#include "kdl/whitney.hpp"

namespace kdl {

/// Domain together with its distance field and Whitney decomposition; the
/// shared immutable input of the geometric analyses.
struct DomainGeometry {
  RasterDomain domain;
  DistanceField rho;
  WhitneyDecomposition whitney;

  explicit DomainGeometry(RasterDomain d);

  const Grid& grid() const { return domain.grid(); }
  double rho_at(const Point& p) const { return rho.rho_at(domain.grid(), p); }
  /// Cell of maximal rho (lowest index on ties).
  CellIndex default_base_cell() const;
  /// Reads "i,j[,k]" or a flat index; throws when the cell is not in the domain.
  CellIndex parse_cell(const std::string& text) const;
};

/// Deterministic sample of Whitney cube centers: all of them when there are at
/// most `budget`, otherwise a farthest-point sample seeded away from x0.
std::vector<Point> sample_points(const WhitneyDecomposition& w, const Point& x0,
                                 std::size_t budget);

/// Cells where rho has a local maximum across some axis (both face neighbours
/// no larger, at least one strictly smaller): a discrete medial axis. Balls of
/// radius rho centred there touch opposite walls, which is where narrow necks
/// separate. Farthest-point subsample of at most `budget` centres.
std::vector<Point> medial_axis_points(const DomainGeometry& g, std::size_t budget);

}  // namespace kdl

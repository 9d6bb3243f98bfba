#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kdl/grid.hpp"

namespace kdl {

/// Binary occupancy grid standing in for an open, bounded, connected domain.
///
/// The discrete domain is the set of true cells. Its boundary is the set of
/// false cells touching a true cell under full (8/26) adjacency. Construction
/// validates the invariants: at least 9 true cells, a single face-connected
/// component, and no true cell on the outermost layer of the grid.
class RasterDomain {
 public:
  RasterDomain() = default;
  RasterDomain(Grid grid, std::vector<std::uint8_t> mask);

  const Grid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  double h() const { return grid_.h(); }
  const std::vector<std::uint8_t>& mask() const { return mask_; }
  bool inside(CellIndex i) const { return mask_[static_cast<std::size_t>(i)] != 0; }
  bool inside(const CellCoord& c) const {
    return grid_.contains(c) && mask_[static_cast<std::size_t>(grid_.index(c))] != 0;
  }
  /// True iff the real point lies in a true cell.
  bool inside(const Point& p) const { return inside(grid_.locate(p)); }

  std::size_t cell_count() const { return count_; }
  /// Indices of true cells in increasing order.
  const std::vector<CellIndex>& cells() const { return cells_; }
  double area() const { return static_cast<double>(count_) * grid_.cell_volume(); }

  /// Builds a domain without the connectivity/size checks (for tests that
  /// need deliberately degenerate rasters).
  static RasterDomain unchecked(Grid grid, std::vector<std::uint8_t> mask);

 private:
  void index_cells();

  Grid grid_;
  std::vector<std::uint8_t> mask_;
  std::vector<CellIndex> cells_;
  std::size_t count_ = 0;
};

enum class Generator {
  Disk,
  Square,
  LShape,
  Cusp,
  FlatCusp,
  RoomsAndCorridors,
  PuncturedDisk,
  PuncturedSlab,
};

std::string to_string(Generator g);
Generator generator_from_string(const std::string& name);

struct DomainSpec {
  Generator generator = Generator::Disk;
  int resolution = 64;       ///< cells per unit length
  double alpha = 2.0;        ///< cusp exponent, > 1
  double neck_width = 0.25;  ///< corridor width delta, in (0, 1)
  int room_count = 2;        ///< number of unit rooms, >= 2
  int levels = 3;            ///< puncture levels K, >= 1

  /// Throws kdl::Error when a parameter is out of range.
  void validate() const;
  /// Short identifier used in CSV rows, e.g. "rooms(neck=0.0625,m=2)".
  std::string id() const;
};

/// Geometry constants of the generators (domain units).
namespace geometry {
inline constexpr double kRoomSide = 1.0;
inline constexpr double kCorridorLength = 0.5;
inline constexpr double kDiskRadius = 0.5;
}  // namespace geometry

/// Points removed by the puncture generators: for each level k = 1..K,
/// k! points equally spaced on the circle of radius (1 - 2^-k) * kDiskRadius
/// about the disk center (0.5, 0.5).
std::vector<Point> puncture_points(int levels);

/// Realizes a generator on a grid: a cell is true iff its center lies in the
/// analytic domain; each puncture point removes exactly the cell containing it.
RasterDomain rasterize(const DomainSpec& spec);

}  // namespace kdl

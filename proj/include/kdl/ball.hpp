#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "kdl/distance.hpp"
#include "kdl/domain.hpp"

namespace kdl {

struct Ball {
  Point center{0, 0, 0};
  double radius = 0.0;
};

/// Analytic measure of a ball in dimension 2 or 3.
double ball_volume(double radius, int dim);

enum class BallRegion { Inside, Sphere, Outside };

/// Classification of a cell against the discrete sphere: cells whose center
/// distance to the ball center lies within h*sqrt(n)/2 of the radius form the
/// sphere; removing them defines the components of the domain minus the sphere.
BallRegion classify(const Grid& g, const Ball& b, const Point& cell_center);

/// Components of (domain minus discrete sphere) outside the ball that do not
/// contain the base point; their union is the B-end.
struct BallPartition {
  Ball ball;
  bool base_outside = true;  ///< base point lies outside ball and sphere
  std::vector<std::vector<CellIndex>> ends;  ///< each sorted ascending
  std::size_t end_cell_count = 0;

  bool separating() const { return end_cell_count > 0; }
  /// True iff the cell belongs to one of the ends.
  bool in_end(CellIndex c) const;
  /// All end cells, sorted.
  std::vector<CellIndex> end_cells() const;
};

/// Computes ball partitions by interleaved breadth-first search from the
/// cells just outside the sphere, so the cost scales with the smaller side of
/// the cut rather than with the domain. Holds scratch buffers; one instance per
/// worker thread.
class BallAnalyzer {
 public:
  BallAnalyzer(const RasterDomain& d, CellIndex base_cell);

  BallPartition analyze(const Ball& b);
  /// Memoized variant keyed by the exact ball; the cache is dropped when it
  /// holds more than max_cached_cells end cells.
  std::shared_ptr<const BallPartition> analyze_cached(const Ball& b);

  const RasterDomain& domain() const { return *d_; }
  CellIndex base_cell() const { return base_; }

 private:
  template <class F>
  void for_each_cell_in_shell(const Ball& b, double r_lo, double r_hi, F&& fn) const;
  BallPartition full_label(const Ball& b);

  const RasterDomain* d_;
  CellIndex base_;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::int32_t> group_;
  std::uint32_t epoch_ = 0;

  struct Key {
    std::uint64_t x, y, z, r;
    bool operator==(const Key& o) const { return x == o.x && y == o.y && z == o.z && r == o.r; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<std::uint64_t>()(k.x * 0x9E3779B97F4A7C15ULL ^ k.y * 0xC2B2AE3D27D4EB4FULL ^
                                        k.z * 0x165667B19E3779F9ULL ^ k.r);
    }
  };
  std::unordered_map<Key, std::shared_ptr<const BallPartition>, KeyHash> cache_;
  std::size_t cached_cells_ = 0;
  static constexpr std::size_t kMaxCachedCells = 16'000'000;
};

}  // namespace kdl

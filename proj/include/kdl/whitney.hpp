#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kdl/distance.hpp"
#include "kdl/domain.hpp"

namespace kdl {

/// Dyadic cube of the decomposition. Side lengths are powers of two in cells,
/// so the side in domain units is 2^level * h.
struct WhitneyCube {
  int level = 0;            ///< log2 of the side in cells
  CellCoord anchor{0, 0, 0};  ///< lowest cell of the cube
  int id = 0;
  /// Unit cube whose distance to the boundary is below sqrt(n)*h; the lower
  /// distance bound is waived for it.
  bool saturated = false;

  int side_cells() const { return 1 << level; }
};

struct WhitneyDecomposition {
  Grid grid;
  std::vector<WhitneyCube> cubes;
  std::vector<std::int32_t> cell_to_cube;  ///< -1 outside the domain
  /// Cubes whose closures intersect (face, edge or corner contact).
  std::vector<std::vector<int>> adjacency;
  /// Cubes sharing a (partial) face; segments between centers of such cubes
  /// stay inside their union.
  std::vector<std::vector<int>> face_adjacency;

  double side(int id) const { return cubes[static_cast<std::size_t>(id)].side_cells() * grid.h(); }
  Point center(int id) const;
  int cube_of(const Point& p) const;  ///< -1 when p is outside the domain
  std::size_t size() const { return cubes.size(); }
};

/// Midpoint of the common boundary of two touching cubes. Segments from either
/// center to this point stay in the respective closed cube.
Point contact_point(const WhitneyDecomposition& w, int a, int b);

/// Exact distance from the closed cube to the nearest false-cell center.
double cube_boundary_distance(const Grid& g, const WhitneyCube& q,
                              const RasterDomain& d, const DistanceField& rho);

/// Top-down dyadic refinement on a lattice anchored at the lower corner of the
/// bounding box of the true cells. A cube is
/// accepted when it lies in the mask and sqrt(n)*side <= dist(cube, boundary);
/// maximality gives the upper bound 4*sqrt(n)*side.
WhitneyDecomposition decompose(const RasterDomain& d, const DistanceField& rho);

/// Builds cell map and adjacency for a hand-assembled cube list. Cells covered
/// twice keep their first owner.
WhitneyDecomposition assemble(const Grid& g, std::vector<WhitneyCube> cubes);

struct WhitneyViolation {
  enum class Kind { Cover, Distance, NeighborRatio };
  Kind kind;
  int cube_a = -1;
  int cube_b = -1;
  std::string detail;
};

/// Checks (i) exact cover with disjoint interiors, (ii) the distance band
/// with one-cell tolerance, (iii) side ratio <= 4 for touching cubes.
/// An empty result means all invariants hold.
std::vector<WhitneyViolation> verify_whitney_invariants(const WhitneyDecomposition& w,
                                                        const RasterDomain& d,
                                                        const DistanceField& rho);

/// Dense polyline; consecutive points are at most sqrt(n)*h apart.
struct DiscreteCurve {
  std::vector<Point> points;
  std::vector<double> arclength;

  void recompute_arclength();
  double length() const { return arclength.empty() ? 0.0 : arclength.back(); }
  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Polyline through the vertices, resampled so that steps are <= max_step.
DiscreteCurve make_polyline(const std::vector<Point>& vertices, double max_step);

/// Concatenation a then b (b's first point dropped when it repeats a's last).
DiscreteCurve concatenate(const DiscreteCurve& a, const DiscreteCurve& b);

/// Removes loops (cell revisits), then replaces the part of the curve between
/// first entry into and last exit from any cube visited more than once by the
/// straight segment joining those points. Throws when a segment leaves the mask.
DiscreteCurve simplify_curve(const DiscreteCurve& c, const WhitneyDecomposition& w,
                             const RasterDomain& d);

/// Distinct cubes met by a cube-simple curve, in order of first visit.
/// Throws when the curve re-enters a cube.
std::vector<int> cube_chain(const DiscreteCurve& c, const WhitneyDecomposition& w);

}  // namespace kdl

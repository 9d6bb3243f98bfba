#include <gtest/gtest.h>

#include <chrono>
#include <algorithm>
#include <cmath>
#include <set>

#include "kdl/geometry.hpp"
#include "kdl/whitney.hpp"

using namespace kdl;

namespace {

DomainSpec spec(Generator g, int res) {
  DomainSpec s{g, res};
  s.neck_width = 0.125;
  s.levels = 3;
  if (g == Generator::PuncturedSlab) s.levels = 2;
  return s;
}

// Exhaustive pairwise check of closed-cube contact, independent of the cell map.
bool touching(const WhitneyCube& a, const WhitneyCube& b, int dim) {
  for (int k = 0; k < dim; ++k) {
    const int a0 = a.anchor[k], a1 = a0 + a.side_cells();
    const int b0 = b.anchor[k], b1 = b0 + b.side_cells();
    if (a1 < b0 || b1 < a0) return false;
  }
  return true;
}

}  // namespace

TEST(Whitney, DyadicSquareNeighbourRatioExhaustive) {
  // Dyadic square of side 1 at h = 1/64 on a 64-cell lattice plus margin 2.
  const auto d = rasterize({Generator::Square, 64});
  DomainGeometry g(d);
  EXPECT_TRUE(verify_whitney_invariants(g.whitney, g.domain, g.rho).empty());
  const auto& cubes = g.whitney.cubes;
  int max_level = 0;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    max_level = std::max(max_level, cubes[i].level);
    for (std::size_t j = i + 1; j < cubes.size(); ++j)
      if (touching(cubes[i], cubes[j], 2))
        EXPECT_LE(std::abs(cubes[i].level - cubes[j].level), 2) << i << " " << j;
  }
  // The largest accepted cube: sqrt(2) * side <= dist <= 0.5 forces side <= 1/4.
  EXPECT_LE(max_level, 4);
  EXPECT_GE(max_level, 3);
}

TEST(Whitney, CoverIsPartition) {
  const auto d = rasterize(spec(Generator::LShape, 64));
  DomainGeometry g(d);
  std::size_t covered = 0;
  for (const auto& q : g.whitney.cubes) covered += static_cast<std::size_t>(q.side_cells() * q.side_cells());
  EXPECT_EQ(covered, g.domain.cell_count());
  for (CellIndex c : g.domain.cells()) EXPECT_GE(g.whitney.cell_to_cube[static_cast<std::size_t>(c)], 0);
}

TEST(Whitney, DiskCubeSizeGrowsWithDistance) {
  const auto d = rasterize({Generator::Disk, 128});
  DomainGeometry g(d);
  const double sqrt2 = std::sqrt(2.0);
  for (const auto& q : g.whitney.cubes) {
    if (q.saturated) continue;
    const double side = g.whitney.side(q.id);
    const double dist = cube_boundary_distance(g.grid(), q, g.domain, g.rho);
    EXPECT_GE(dist, sqrt2 * side - 1e-12);
    EXPECT_LE(dist, 4 * sqrt2 * side + g.grid().h());
  }
}

TEST(Whitney, SingleRowIsChainOfUnitCubes) {
  Grid grid(2, {14, 5, 1}, 1.0, {0, 0, 0});
  std::vector<std::uint8_t> m(grid.size(), 0);
  for (int i = 2; i < 12; ++i) m[static_cast<std::size_t>(grid.index(i, 2))] = 1;
  RasterDomain d(grid, m);
  DomainGeometry g(d);
  ASSERT_EQ(g.whitney.size(), 10u);
  for (const auto& q : g.whitney.cubes) {
    EXPECT_EQ(q.level, 0);
    EXPECT_TRUE(q.saturated);
    const int deg = static_cast<int>(g.whitney.adjacency[static_cast<std::size_t>(q.id)].size());
    EXPECT_EQ(deg, (q.anchor[0] == 2 || q.anchor[0] == 11) ? 1 : 2);
  }
}

TEST(Whitney, HandBuiltViolations) {
  Grid grid(2, {20, 20, 1}, 1.0, {0, 0, 0});
  std::vector<std::uint8_t> m(grid.size(), 0);
  for (int j = 2; j < 18; ++j)
    for (int i = 2; i < 18; ++i) m[static_cast<std::size_t>(grid.index(i, j))] = 1;
  RasterDomain d(grid, m);
  const auto rho = distance_transform(d);
  // 8:1 neighbour pair: a cube of side 8 next to unit cells.
  std::vector<WhitneyCube> cubes;
  cubes.push_back({3, {2, 2, 0}, 0, false});
  for (int j = 2; j < 18; ++j)
    for (int i = 2; i < 18; ++i)
      if (!(i < 10 && j < 10)) cubes.push_back({0, {i, j, 0}, 0, true});
  auto w = assemble(grid, cubes);
  int ratio = 0;
  for (const auto& v : verify_whitney_invariants(w, d, rho))
    ratio += v.kind == WhitneyViolation::Kind::NeighborRatio;
  EXPECT_GE(ratio, 1);

  // Overlap: two unit cubes on the same cell.
  std::vector<WhitneyCube> dup;
  for (int j = 2; j < 18; ++j)
    for (int i = 2; i < 18; ++i) dup.push_back({0, {i, j, 0}, 0, true});
  dup.push_back({0, {5, 5, 0}, 0, true});
  auto w2 = assemble(grid, dup);
  std::vector<WhitneyViolation> cover;
  for (const auto& v : verify_whitney_invariants(w2, d, rho))
    if (v.kind == WhitneyViolation::Kind::Cover) cover.push_back(v);
  ASSERT_EQ(cover.size(), 1u);
  EXPECT_EQ(cover[0].detail, "cubes overlap");
}

TEST(Whitney, ZooInvariantsAndTiming) {
  for (Generator gen : {Generator::Disk, Generator::Square, Generator::LShape, Generator::Cusp,
                        Generator::FlatCusp, Generator::RoomsAndCorridors,
                        Generator::PuncturedDisk, Generator::PuncturedSlab})
    for (int res : {32, 64}) {
      const auto t0 = std::chrono::steady_clock::now();
      DomainGeometry g(rasterize(spec(gen, res)));
      const auto v = verify_whitney_invariants(g.whitney, g.domain, g.rho);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      EXPECT_TRUE(v.empty()) << to_string(gen) << " res " << res << ": " << v.size()
                             << " violations, first: " << (v.empty() ? "" : v[0].detail);
      EXPECT_LT(secs, 5.0);
    }
}

TEST(Curves, PolylineStepBound) {
  const auto c = make_polyline({{0, 0, 0}, {1, 0.3, 0}, {1, 1, 0}}, 0.01);
  for (std::size_t i = 1; i < c.size(); ++i)
    EXPECT_LE(distance(c.points[i - 1], c.points[i]), 0.01 + 1e-12);
  EXPECT_NEAR(c.length(), std::hypot(1.0, 0.3) + 0.7, 1e-12);
}

TEST(Curves, CubeSimpleCurveUnchanged) {
  DomainGeometry g(rasterize({Generator::Square, 64}));
  const auto c = make_polyline({{0.1, 0.5, 0}, {0.9, 0.5, 0}}, g.grid().h());
  const auto s = simplify_curve(c, g.whitney, g.domain);
  EXPECT_EQ(s.points, c.points);
}

TEST(Curves, RepeatedCubeVisitsCollapse) {
  DomainGeometry g(rasterize({Generator::Square, 64}));
  const Point ctr = g.whitney.center(g.whitney.cube_of({0.4, 0.4, 0}));
  const double s = g.whitney.side(g.whitney.cube_of(ctr));
  // In and out of the same cube three times along a zigzag.
  std::vector<Point> v;
  for (int k = 0; k < 3; ++k) {
    v.push_back({ctr[0] - 0.3 * s, ctr[1] - 0.3 * s + 0.2 * s * k, 0});
    v.push_back({ctr[0] + 0.9 * s, ctr[1] - 0.2 * s + 0.2 * s * k, 0});
  }
  v.push_back({ctr[0] - 0.3 * s, ctr[1] + 0.35 * s, 0});
  const auto c = make_polyline(v, g.grid().h());
  const auto out = simplify_curve(c, g.whitney, g.domain);
  EXPECT_LT(out.length(), c.length());
  EXPECT_NO_THROW(cube_chain(out, g.whitney));
  EXPECT_THROW(cube_chain(c, g.whitney), Error);
  const auto twice = simplify_curve(out, g.whitney, g.domain);
  EXPECT_EQ(twice.points, out.points);
}

TEST(Curves, LoopRemovedFirst) {
  DomainGeometry g(rasterize({Generator::Square, 64}));
  // Small loop around a point, then onwards.
  const auto c = make_polyline({{0.2, 0.2, 0}, {0.3, 0.2, 0}, {0.3, 0.3, 0}, {0.25, 0.3, 0},
                                {0.25, 0.15, 0}, {0.6, 0.15, 0}},
                               g.grid().h());
  const auto out = simplify_curve(c, g.whitney, g.domain);
  EXPECT_LT(out.length(), c.length());
  std::set<CellIndex> seen;
  CellIndex prev = -1;
  for (const Point& p : out.points) {
    const CellIndex cell = g.grid().index(g.grid().locate(p));
    if (cell != prev) {
      EXPECT_TRUE(seen.insert(cell).second);
      prev = cell;
    }
  }
}

TEST(Curves, ChainOfDiameterAndCoverage) {
  DomainGeometry g(rasterize({Generator::Square, 64}));
  const auto c = make_polyline({{0.01, 0.5 + 1e-6, 0}, {0.99, 0.5 + 1e-6, 0}}, g.grid().h());
  const auto chain = cube_chain(c, g.whitney);
  // Sides grow towards the middle and shrink again: unimodal.
  std::vector<int> lv;
  for (int q : chain) lv.push_back(g.whitney.cubes[static_cast<std::size_t>(q)].level);
  const auto top = std::max_element(lv.begin(), lv.end()) - lv.begin();
  for (long i = 1; i <= top; ++i) EXPECT_LE(lv[static_cast<std::size_t>(i - 1)], lv[static_cast<std::size_t>(i)]);
  for (std::size_t i = static_cast<std::size_t>(top) + 1; i < lv.size(); ++i) EXPECT_GE(lv[i - 1], lv[i]);
  for (const Point& p : c.points) {
    const int q = g.whitney.cube_of(p);
    EXPECT_NE(std::find(chain.begin(), chain.end(), q), chain.end());
  }
}

TEST(Curves, CurveInsideOneCube) {
  DomainGeometry g(rasterize({Generator::Square, 64}));
  const int q = g.whitney.cube_of({0.45, 0.45, 0});
  const Point ctr = g.whitney.center(q);
  const double s = g.whitney.side(q);
  const auto c = make_polyline({{ctr[0] - 0.2 * s, ctr[1], 0}, {ctr[0] + 0.2 * s, ctr[1], 0}},
                               g.grid().h());
  EXPECT_EQ(cube_chain(c, g.whitney).size(), 1u);
}

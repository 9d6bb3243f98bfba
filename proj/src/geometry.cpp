#include "kdl/geometry.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <string>

namespace kdl {

DomainGeometry::DomainGeometry(RasterDomain d)
    : domain(std::move(d)), rho(distance_transform(domain)), whitney(decompose(domain, rho)) {}

CellIndex DomainGeometry::default_base_cell() const {
  CellIndex best = domain.cells().front();
  for (CellIndex c : domain.cells())
    if (rho.squared_cells(c) > rho.squared_cells(best)) best = c;
  return best;
}

CellIndex DomainGeometry::parse_cell(const std::string& text) const {
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  std::vector<long long> v;
  long long x;
  while (is >> x) v.push_back(x);
  if (!is.eof() || v.empty()) throw Error("bad cell '" + text + "'");
  CellIndex idx;
  if (v.size() == 1) {
    if (v[0] < 0 || v[0] >= static_cast<long long>(grid().size()))
      throw Error("cell index out of range");
    idx = v[0];
  } else {
    if (static_cast<int>(v.size()) != grid().dim()) throw Error("cell has wrong dimension");
    CellCoord c{0, 0, 0};
    for (std::size_t a = 0; a < v.size(); ++a) c[a] = static_cast<int>(v[a]);
    if (!grid().contains(c)) throw Error("cell outside the grid");
    idx = grid().index(c);
  }
  if (!domain.inside(idx)) throw Error("cell '" + text + "' is not in the domain");
  return idx;
}

std::vector<Point> sample_points(const WhitneyDecomposition& w, const Point& x0,
                                 std::size_t budget) {
  std::vector<Point> centers(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) centers[i] = w.center(static_cast<int>(i));
  if (centers.size() <= budget) return centers;
  std::vector<double> gap(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) gap[i] = distance(centers[i], x0);
  std::vector<Point> out;
  out.reserve(budget);
  while (out.size() < budget) {
    const std::size_t pick =
        static_cast<std::size_t>(std::max_element(gap.begin(), gap.end()) - gap.begin());
    out.push_back(centers[pick]);
    for (std::size_t i = 0; i < centers.size(); ++i)
      gap[i] = std::min(gap[i], distance(centers[i], centers[pick]));
  }
  return out;
}

std::vector<Point> medial_axis_points(const DomainGeometry& g, std::size_t budget) {
  const Grid& grid = g.grid();
  const RasterDomain& d = g.domain;
  std::vector<Point> ridge;
  for (CellIndex c : d.cells()) {
    const std::int64_t r = g.rho.squared_cells(c);
    const CellCoord x = grid.coord(c);
    for (int a = 0; a < d.dim(); ++a) {
      CellCoord lo = x, hi = x;
      --lo[a];
      ++hi[a];
      const std::int64_t rl = d.inside(lo) ? g.rho.squared_cells(grid.index(lo)) : 0;
      const std::int64_t rh = d.inside(hi) ? g.rho.squared_cells(grid.index(hi)) : 0;
      if (rl <= r && rh <= r && (rl < r || rh < r)) {
        ridge.push_back(grid.center(c));
        break;
      }
    }
  }
  if (ridge.size() <= budget) return ridge;
  std::vector<double> gap(ridge.size(), INFINITY);
  std::vector<Point> out;
  std::size_t pick = 0;
  while (out.size() < budget) {
    out.push_back(ridge[pick]);
    for (std::size_t i = 0; i < ridge.size(); ++i) gap[i] = std::min(gap[i], distance(ridge[i], ridge[pick]));
    pick = static_cast<std::size_t>(std::max_element(gap.begin(), gap.end()) - gap.begin());
  }
  return out;
}

}  // namespace kdl

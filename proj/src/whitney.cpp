#include "kdl/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace kdl {

Point WhitneyDecomposition::center(int id) const {
  const WhitneyCube& q = cubes[static_cast<std::size_t>(id)];
  Point p{0, 0, 0};
  for (int d = 0; d < grid.dim(); ++d)
    p[d] = grid.origin()[d] + (q.anchor[d] + 0.5 * q.side_cells()) * grid.h();
  return p;
}

int WhitneyDecomposition::cube_of(const Point& p) const {
  const CellCoord c = grid.locate(p);
  if (!grid.contains(c)) return -1;
  return cell_to_cube[static_cast<std::size_t>(grid.index(c))];
}

Point contact_point(const WhitneyDecomposition& w, int a, int b) {
  const Grid& g = w.grid;
  const WhitneyCube& qa = w.cubes[static_cast<std::size_t>(a)];
  const WhitneyCube& qb = w.cubes[static_cast<std::size_t>(b)];
  Point m{0, 0, 0};
  for (int k = 0; k < g.dim(); ++k) {
    const int lo = std::max(qa.anchor[k], qb.anchor[k]);
    const int hi = std::min(qa.anchor[k] + qa.side_cells(), qb.anchor[k] + qb.side_cells());
    m[k] = g.origin()[k] + 0.5 * (lo + hi) * g.h();
  }
  return m;
}

namespace {

double box_point_distance(const Point& lo, const Point& hi, const Point& p, int dim) {
  double s = 0;
  for (int d = 0; d < dim; ++d) {
    const double g = std::max({0.0, lo[d] - p[d], p[d] - hi[d]});
    s += g * g;
  }
  return std::sqrt(s);
}

std::int64_t min_squared_in_cube(const Grid& g, const WhitneyCube& q,
                                 const RasterDomain& d, const DistanceField& rho) {
  const int s = q.side_cells();
  const int sz = g.dim() == 3 ? s : 1;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (int k = 0; k < sz; ++k)
    for (int j = 0; j < s; ++j)
      for (int i = 0; i < s; ++i) {
        const CellCoord c{q.anchor[0] + i, q.anchor[1] + j, q.anchor[2] + k};
        if (!d.inside(c)) return 0;
        best = std::min(best, rho.squared_cells(g.index(c)));
      }
  return best;
}

/// dist(Q, boundary) is bracketed by [min rho - h*sqrt(n)/2, min rho].
struct DistanceBracket {
  double lower, upper;
};

DistanceBracket bracket(const Grid& g, std::int64_t min_sq) {
  const double upper = g.h() * std::sqrt(static_cast<double>(min_sq));
  return {std::max(0.0, upper - 0.5 * g.h() * std::sqrt(static_cast<double>(g.dim()))),
          upper};
}

}  // namespace

double cube_boundary_distance(const Grid& g, const WhitneyCube& q,
                              const RasterDomain& d, const DistanceField& rho) {
  const std::int64_t min_sq = min_squared_in_cube(g, q, d, rho);
  if (min_sq == 0) return 0.0;
  const double radius = g.h() * std::sqrt(static_cast<double>(min_sq));
  const int reach = static_cast<int>(std::ceil(radius / g.h())) + 1;
  const int s = q.side_cells();
  Point lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < g.dim(); ++a) {
    lo[a] = g.origin()[a] + q.anchor[a] * g.h();
    hi[a] = lo[a] + s * g.h();
  }
  CellCoord from{0, 0, 0}, to{0, 0, 0};
  for (int a = 0; a < g.dim(); ++a) {
    from[a] = std::max(0, q.anchor[a] - reach);
    to[a] = std::min(g.extents()[a] - 1, q.anchor[a] + s - 1 + reach);
  }
  double best = radius;
  for (int k = from[2]; k <= to[2]; ++k)
    for (int j = from[1]; j <= to[1]; ++j)
      for (int i = from[0]; i <= to[0]; ++i) {
        const CellCoord c{i, j, k};
        if (d.inside(c)) continue;
        best = std::min(best, box_point_distance(lo, hi, g.center(c), g.dim()));
      }
  return best;
}

WhitneyDecomposition assemble(const Grid& g, std::vector<WhitneyCube> cubes) {
  WhitneyDecomposition w;
  w.grid = g;
  w.cell_to_cube.assign(g.size(), -1);
  for (std::size_t id = 0; id < cubes.size(); ++id) {
    cubes[id].id = static_cast<int>(id);
    const WhitneyCube& q = cubes[id];
    const int s = q.side_cells();
    const int sz = g.dim() == 3 ? s : 1;
    for (int k = 0; k < sz; ++k)
      for (int j = 0; j < s; ++j)
        for (int i = 0; i < s; ++i) {
          const CellCoord c{q.anchor[0] + i, q.anchor[1] + j, q.anchor[2] + k};
          if (!g.contains(c)) continue;
          auto& slot = w.cell_to_cube[static_cast<std::size_t>(g.index(c))];
          if (slot < 0) slot = static_cast<std::int32_t>(id);
        }
  }
  w.cubes = std::move(cubes);
  w.adjacency.assign(w.cubes.size(), {});
  w.face_adjacency.assign(w.cubes.size(), {});
  const auto full = g.full_offsets();
  for (CellIndex i = 0; i < static_cast<CellIndex>(g.size()); ++i) {
    const int a = w.cell_to_cube[static_cast<std::size_t>(i)];
    if (a < 0) continue;
    const CellCoord c = g.coord(i);
    for (const auto& o : full) {
      const CellCoord nb = c + o;
      if (!g.contains(nb)) continue;
      const int b = w.cell_to_cube[static_cast<std::size_t>(g.index(nb))];
      if (b < 0 || b == a) continue;
      w.adjacency[static_cast<std::size_t>(a)].push_back(b);
      const int nonzero = (o[0] != 0) + (o[1] != 0) + (o[2] != 0);
      if (nonzero == 1) w.face_adjacency[static_cast<std::size_t>(a)].push_back(b);
    }
  }
  for (auto* lists : {&w.adjacency, &w.face_adjacency})
    for (auto& v : *lists) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  return w;
}

WhitneyDecomposition decompose(const RasterDomain& d, const DistanceField& rho) {
  const Grid& g = d.grid();
  if (d.cell_count() < 9) throw Error("domain too small for a Whitney decomposition");
  const int dim = g.dim();
  const auto& n = g.extents();
  // Lattice anchored at the lower corner of the bounding box of true cells.
  CellCoord o{n[0], n[1], dim == 3 ? n[2] : 0};
  for (CellIndex c : d.cells()) {
    const CellCoord cc = g.coord(c);
    for (int a = 0; a < dim; ++a) o[a] = std::min(o[a], cc[a]);
  }
  const CellCoord sub{n[0] - o[0], n[1] - o[1], dim == 3 ? n[2] - o[2] : 1};
  int top = 0;
  while ((1 << top) < std::max({sub[0], sub[1], sub[2]})) ++top;

  // Dyadic pyramids: all-inside flag, any-inside flag, min squared rho.
  struct Level {
    CellCoord nb;
    std::vector<std::uint8_t> all_in, any_in;
    std::vector<std::int64_t> min_sq;
    std::size_t at(const CellCoord& b) const {
      return (static_cast<std::size_t>(b[2]) * nb[1] + b[1]) * nb[0] + b[0];
    }
  };
  std::vector<Level> levels(static_cast<std::size_t>(top) + 1);
  {
    Level& L0 = levels[0];
    L0.nb = sub;
    const std::size_t total = static_cast<std::size_t>(sub[0]) * sub[1] * sub[2];
    L0.all_in.resize(total);
    L0.any_in.resize(total);
    L0.min_sq.resize(total);
    for (int k = 0; k < sub[2]; ++k)
      for (int j = 0; j < sub[1]; ++j)
        for (int i = 0; i < sub[0]; ++i) {
          const std::size_t at = L0.at({i, j, k});
          const auto c = static_cast<std::size_t>(g.index(i + o[0], j + o[1], k + o[2]));
          L0.all_in[at] = L0.any_in[at] = d.mask()[c];
          L0.min_sq[at] = rho.squared()[c];
        }
  }
  for (int l = 1; l <= top; ++l) {
    const Level& prev = levels[static_cast<std::size_t>(l) - 1];
    Level& cur = levels[static_cast<std::size_t>(l)];
    for (int a = 0; a < 3; ++a)
      cur.nb[a] = (a < dim) ? (prev.nb[a] + 1) / 2 : 1;
    const std::size_t total = static_cast<std::size_t>(cur.nb[0]) * cur.nb[1] * cur.nb[2];
    cur.all_in.assign(total, 1);
    cur.any_in.assign(total, 0);
    cur.min_sq.assign(total, std::numeric_limits<std::int64_t>::max());
    for (int k = 0; k < cur.nb[2]; ++k)
      for (int j = 0; j < cur.nb[1]; ++j)
        for (int i = 0; i < cur.nb[0]; ++i) {
          const CellCoord b{i, j, k};
          const std::size_t at = cur.at(b);
          for (int dk = 0; dk < (dim == 3 ? 2 : 1); ++dk)
            for (int dj = 0; dj < 2; ++dj)
              for (int di = 0; di < 2; ++di) {
                const CellCoord c{2 * i + di, 2 * j + dj, 2 * k + dk};
                if (c[0] >= prev.nb[0] || c[1] >= prev.nb[1] || c[2] >= prev.nb[2]) {
                  cur.all_in[at] = 0;
                  cur.min_sq[at] = 0;
                  continue;
                }
                const std::size_t pa = prev.at(c);
                cur.all_in[at] &= prev.all_in[pa];
                cur.any_in[at] |= prev.any_in[pa];
                cur.min_sq[at] = std::min(cur.min_sq[at], prev.min_sq[pa]);
              }
        }
  }

  const double sqrt_n = std::sqrt(static_cast<double>(dim));
  std::vector<WhitneyCube> cubes;
  struct Item {
    int level;
    CellCoord b;
  };
  std::vector<Item> stack{{top, {0, 0, 0}}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    const Level& L = levels[static_cast<std::size_t>(it.level)];
    const std::size_t at = L.at(it.b);
    if (!L.any_in[at]) continue;
    WhitneyCube q;
    q.level = it.level;
    for (int a = 0; a < 3; ++a) q.anchor[a] = o[a] + (it.b[a] << it.level);
    if (L.all_in[at]) {
      const double threshold = sqrt_n * q.side_cells() * g.h();
      const DistanceBracket br = bracket(g, L.min_sq[at]);
      bool ok;
      if (br.lower >= threshold)
        ok = true;
      else if (br.upper < threshold)
        ok = false;
      else
        ok = cube_boundary_distance(g, q, d, rho) >= threshold;
      if (ok || it.level == 0) {
        q.saturated = !ok;
        cubes.push_back(q);
        continue;
      }
    }
    // Children pushed in reverse so that they pop in (z, y, x) order.
    const int kz = dim == 3 ? 2 : 1;
    for (int dk = kz - 1; dk >= 0; --dk)
      for (int dj = 1; dj >= 0; --dj)
        for (int di = 1; di >= 0; --di) {
          const CellCoord c{2 * it.b[0] + di, 2 * it.b[1] + dj, 2 * it.b[2] + dk};
          const Level& child = levels[static_cast<std::size_t>(it.level) - 1];
          if (c[0] >= child.nb[0] || c[1] >= child.nb[1] || c[2] >= child.nb[2]) continue;
          stack.push_back({it.level - 1, c});
        }
  }
  return assemble(g, std::move(cubes));
}

std::vector<WhitneyViolation> verify_whitney_invariants(const WhitneyDecomposition& w,
                                                        const RasterDomain& d,
                                                        const DistanceField& rho) {
  using Kind = WhitneyViolation::Kind;
  std::vector<WhitneyViolation> out;
  const Grid& g = w.grid;
  const int dim = g.dim();
  const double h = g.h();
  const double sqrt_n = std::sqrt(static_cast<double>(dim));

  // (i) cover: count owners per cell, collect overlapping pairs.
  std::vector<std::int32_t> owner(g.size(), -1);
  std::map<std::pair<int, int>, bool> overlaps;
  for (const WhitneyCube& q : w.cubes) {
    const int s = q.side_cells();
    const int sz = dim == 3 ? s : 1;
    bool outside = false;
    for (int k = 0; k < sz; ++k)
      for (int j = 0; j < s; ++j)
        for (int i = 0; i < s; ++i) {
          const CellCoord c{q.anchor[0] + i, q.anchor[1] + j, q.anchor[2] + k};
          if (!d.inside(c)) {
            outside = true;
            continue;
          }
          auto& o = owner[static_cast<std::size_t>(g.index(c))];
          if (o >= 0 && o != q.id)
            overlaps[{std::min(o, q.id), std::max(o, q.id)}] = true;
          else
            o = q.id;
        }
    if (outside)
      out.push_back({Kind::Cover, q.id, -1, "cube contains cells outside the domain"});
  }
  for (const auto& [pair, _] : overlaps)
    out.push_back({Kind::Cover, pair.first, pair.second, "cubes overlap"});
  std::size_t uncovered = 0;
  for (CellIndex i : d.cells())
    if (owner[static_cast<std::size_t>(i)] < 0) ++uncovered;
  if (uncovered) {
    std::ostringstream os;
    os << uncovered << " domain cells are not covered";
    out.push_back({Kind::Cover, -1, -1, os.str()});
  }

  // (ii) distance band, one-cell tolerance; saturated cubes skip the lower bound.
  for (const WhitneyCube& q : w.cubes) {
    const double side = q.side_cells() * h;
    const double lo_bound = sqrt_n * side - h;
    const double hi_bound = 4.0 * sqrt_n * side + h;
    const std::int64_t min_sq = min_squared_in_cube(g, q, d, rho);
    if (min_sq == 0) continue;  // already reported as a cover violation
    const DistanceBracket br = bracket(g, min_sq);
    auto exact = [&] { return cube_boundary_distance(g, q, d, rho); };
    if (!q.saturated && !(br.lower >= lo_bound) && (br.upper < lo_bound || exact() < lo_bound)) {
      std::ostringstream os;
      os << "dist below sqrt(n)*side for side " << side;
      out.push_back({Kind::Distance, q.id, -1, os.str()});
    }
    if (!(br.upper <= hi_bound) && (br.lower > hi_bound || exact() > hi_bound)) {
      std::ostringstream os;
      os << "dist above 4*sqrt(n)*side for side " << side;
      out.push_back({Kind::Distance, q.id, -1, os.str()});
    }
  }

  // (iii) neighbour ratio over touching pairs, found through the owner map.
  std::map<std::pair<int, int>, bool> seen;
  const auto full = g.full_offsets();
  for (CellIndex i : d.cells()) {
    const int a = owner[static_cast<std::size_t>(i)];
    if (a < 0) continue;
    const CellCoord c = g.coord(i);
    for (const auto& o : full) {
      const CellCoord nb = c + o;
      if (!g.contains(nb)) continue;
      const int b = owner[static_cast<std::size_t>(g.index(nb))];
      if (b < 0 || b == a) continue;
      const int la = w.cubes[static_cast<std::size_t>(a)].level;
      const int lb = w.cubes[static_cast<std::size_t>(b)].level;
      if (std::abs(la - lb) <= 2) continue;
      const auto key = std::make_pair(std::min(a, b), std::max(a, b));
      if (seen.count(key)) continue;
      seen[key] = true;
      {
        std::ostringstream os;
        os << "touching cubes with side ratio " << (1 << std::abs(la - lb));
        out.push_back({Kind::NeighborRatio, key.first, key.second, os.str()});
      }
    }
  }
  return out;
}

void DiscreteCurve::recompute_arclength() {
  arclength.assign(points.size(), 0.0);
  for (std::size_t i = 1; i < points.size(); ++i)
    arclength[i] = arclength[i - 1] + distance(points[i - 1], points[i]);
}

DiscreteCurve make_polyline(const std::vector<Point>& vertices, double max_step) {
  DiscreteCurve c;
  if (vertices.empty()) return c;
  c.points.push_back(vertices.front());
  for (std::size_t v = 1; v < vertices.size(); ++v) {
    const Point& a = vertices[v - 1];
    const Point& b = vertices[v];
    const double len = distance(a, b);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / max_step)));
    if (len == 0.0) continue;
    for (int s = 1; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      c.points.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]),
                          a[2] + t * (b[2] - a[2])});
    }
  }
  c.recompute_arclength();
  return c;
}

DiscreteCurve concatenate(const DiscreteCurve& a, const DiscreteCurve& b) {
  DiscreteCurve c = a;
  std::size_t start = 0;
  if (!c.points.empty() && !b.points.empty() && c.points.back() == b.points.front())
    start = 1;
  c.points.insert(c.points.end(), b.points.begin() + static_cast<std::ptrdiff_t>(start),
                  b.points.end());
  c.recompute_arclength();
  return c;
}

namespace {

std::vector<Point> remove_loops(const std::vector<Point>& pts, const Grid& g) {
  std::vector<Point> kept;
  std::vector<CellIndex> kept_cell;
  std::unordered_map<CellIndex, std::size_t> first;  // cell -> first kept position
  for (const Point& p : pts) {
    const CellIndex c = g.index(g.locate(p));
    if (!kept_cell.empty() && kept_cell.back() == c) {
      kept.push_back(p);
      kept_cell.push_back(c);
      continue;
    }
    auto it = first.find(c);
    if (it != first.end()) {
      // Loop back into cell c: drop everything after its last kept visit.
      std::size_t cut = it->second;
      while (cut + 1 < kept_cell.size() && kept_cell[cut + 1] == c) ++cut;
      for (std::size_t k = cut + 1; k < kept.size(); ++k) {
        auto f = first.find(kept_cell[k]);
        if (f != first.end() && f->second > cut) first.erase(f);
      }
      kept.resize(cut + 1);
      kept_cell.resize(cut + 1);
      kept.push_back(p);
      kept_cell.push_back(c);
      continue;
    }
    first.emplace(c, kept.size());
    kept.push_back(p);
    kept_cell.push_back(c);
  }
  return kept;
}

}  // namespace

DiscreteCurve simplify_curve(const DiscreteCurve& c, const WhitneyDecomposition& w,
                             const RasterDomain& d) {
  const Grid& g = w.grid;
  for (const Point& p : c.points)
    if (!d.inside(p)) throw Error("curve leaves the domain");
  std::vector<Point> pts = remove_loops(c.points, g);
  const double step = g.h();
  for (;;) {
    std::vector<int> ids(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) ids[i] = w.cube_of(pts[i]);
    // First cube (in first-visit order) whose visits are not one interval.
    std::unordered_map<int, std::size_t> first_at, last_at;
    std::vector<int> order;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!first_at.count(ids[i])) {
        first_at[ids[i]] = i;
        order.push_back(ids[i]);
      }
      last_at[ids[i]] = i;
    }
    int target = -1;
    for (int q : order) {
      const std::size_t f = first_at[q], l = last_at[q];
      for (std::size_t i = f; i <= l; ++i)
        if (ids[i] != q) {
          target = q;
          break;
        }
      if (target >= 0) break;
    }
    if (target < 0) break;
    const std::size_t f = first_at[target], l = last_at[target];
    DiscreteCurve seg = make_polyline({pts[f], pts[l]}, step);
    for (const Point& p : seg.points)
      if (!d.inside(p)) throw Error("cube not convex-contained");
    std::vector<Point> next(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(f));
    next.insert(next.end(), seg.points.begin(), seg.points.end());
    next.insert(next.end(), pts.begin() + static_cast<std::ptrdiff_t>(l) + 1, pts.end());
    pts = remove_loops(next, g);
  }
  DiscreteCurve out;
  out.points = std::move(pts);
  out.recompute_arclength();
  return out;
}

std::vector<int> cube_chain(const DiscreteCurve& c, const WhitneyDecomposition& w) {
  std::vector<int> chain;
  std::vector<std::uint8_t> seen(w.cubes.size(), 0);
  for (const Point& p : c.points) {
    const int q = w.cube_of(p);
    if (q < 0) throw Error("curve leaves the domain");
    if (!chain.empty() && chain.back() == q) continue;
    if (seen[static_cast<std::size_t>(q)]) throw Error("curve not cube-simple");
    seen[static_cast<std::size_t>(q)] = 1;
    chain.push_back(q);
  }
  return chain;
}

}  // namespace kdl

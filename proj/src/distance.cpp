#include "kdl/distance.hpp"

#include <limits>

#include "kdl/components.hpp"

namespace kdl {

namespace {

constexpr std::int64_t kInf = 1'000'000'000'000LL;

// 1D squared distance transform of sampled function f (Felzenszwalb-Huttenlocher).
void edt_1d(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& out,
            std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    for (;;) {
      const int p = v[k];
      s = (static_cast<double>(f[q] + static_cast<std::int64_t>(q) * q) -
           static_cast<double>(f[p] + static_cast<std::int64_t>(p) * p)) /
          (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const std::int64_t d = q - v[k];
    out[q] = std::min<std::int64_t>(kInf, d * d + f[v[k]]);
  }
}

}  // namespace

DistanceField distance_transform(const RasterDomain& d) {
  const Grid& g = d.grid();
  std::vector<std::int64_t> sq(g.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = d.mask()[i] ? kInf : 0;

  const auto& n = g.extents();
  for (int axis = 0; axis < g.dim(); ++axis) {
    const int len = n[axis];
    std::vector<std::int64_t> f(len), out(len);
    std::vector<int> v(len);
    std::vector<double> z(len + 1);
    CellCoord lim = n;
    lim[axis] = 1;
    for (int k = 0; k < lim[2]; ++k)
      for (int j = 0; j < lim[1]; ++j)
        for (int i = 0; i < lim[0]; ++i) {
          CellCoord c{i, j, k};
          for (int t = 0; t < len; ++t) {
            c[axis] = t;
            f[t] = sq[static_cast<std::size_t>(g.index(c))];
          }
          edt_1d(f, out, v, z);
          for (int t = 0; t < len; ++t) {
            c[axis] = t;
            sq[static_cast<std::size_t>(g.index(c))] = out[t];
          }
        }
  }
  return DistanceField(g, std::move(sq));
}

std::vector<std::int64_t> brute_force_squared_distance(const RasterDomain& d) {
  const Grid& g = d.grid();
  std::vector<CellCoord> outside;
  for (CellIndex i = 0; i < static_cast<CellIndex>(g.size()); ++i)
    if (!d.inside(i)) outside.push_back(g.coord(i));
  std::vector<std::int64_t> sq(g.size(), 0);
  for (CellIndex i : d.cells()) {
    const CellCoord c = g.coord(i);
    std::int64_t best = kInf;
    for (const CellCoord& o : outside) {
      std::int64_t s = 0;
      for (int a = 0; a < 3; ++a) s += static_cast<std::int64_t>(c[a] - o[a]) * (c[a] - o[a]);
      best = std::min(best, s);
    }
    sq[static_cast<std::size_t>(i)] = best;
  }
  return sq;
}

}  // namespace kdl

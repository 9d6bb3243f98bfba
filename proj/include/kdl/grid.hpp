#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kdl {

using Point = std::array<double, 3>;
using CellCoord = std::array<int, 3>;
using CellIndex = std::int64_t;

/// Base exception for invalid inputs across the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Uniform cell-centered grid in 2 or 3 dimensions. In 2D the third extent is 1.
class Grid {
 public:
  Grid() = default;
  Grid(int dim, CellCoord extents, double h, Point origin)
      : dim_(dim), n_(extents), h_(h), origin_(origin) {
    if (dim != 2 && dim != 3) throw Error("grid dimension must be 2 or 3");
    if (dim == 2) n_[2] = 1;
    if (!(h > 0.0)) throw Error("grid spacing must be positive");
    for (int d = 0; d < 3; ++d)
      if (n_[d] < 1) throw Error("grid extents must be positive");
  }

  int dim() const { return dim_; }
  const CellCoord& extents() const { return n_; }
  int nx() const { return n_[0]; }
  int ny() const { return n_[1]; }
  int nz() const { return n_[2]; }
  double h() const { return h_; }
  const Point& origin() const { return origin_; }
  std::size_t size() const {
    return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2];
  }
  double cell_volume() const { return dim_ == 2 ? h_ * h_ : h_ * h_ * h_; }

  bool contains(const CellCoord& c) const {
    return c[0] >= 0 && c[1] >= 0 && c[2] >= 0 && c[0] < n_[0] &&
           c[1] < n_[1] && c[2] < n_[2];
  }
  CellIndex index(const CellCoord& c) const {
    return (static_cast<CellIndex>(c[2]) * n_[1] + c[1]) * n_[0] + c[0];
  }
  CellIndex index(int i, int j, int k = 0) const { return index({i, j, k}); }
  CellCoord coord(CellIndex idx) const {
    const CellIndex plane = static_cast<CellIndex>(n_[0]) * n_[1];
    const int k = static_cast<int>(idx / plane);
    const CellIndex rem = idx - k * plane;
    return {static_cast<int>(rem % n_[0]), static_cast<int>(rem / n_[0]), k};
  }

  Point center(const CellCoord& c) const {
    Point p{};
    for (int d = 0; d < 3; ++d) p[d] = origin_[d] + (c[d] + 0.5) * h_;
    if (dim_ == 2) p[2] = 0.0;
    return p;
  }
  Point center(CellIndex idx) const { return center(coord(idx)); }

  /// Cell containing a real point (half-open cells); may lie outside the grid.
  CellCoord locate(const Point& p) const {
    CellCoord c{0, 0, 0};
    for (int d = 0; d < dim_; ++d)
      c[d] = static_cast<int>(std::floor((p[d] - origin_[d]) / h_));
    return c;
  }

  /// Face (4/6) neighbour offsets.
  std::vector<CellCoord> face_offsets() const {
    std::vector<CellCoord> out;
    for (int d = 0; d < dim_; ++d)
      for (int s : {-1, 1}) {
        CellCoord o{0, 0, 0};
        o[d] = s;
        out.push_back(o);
      }
    return out;
  }
  /// Full (8/26) neighbour offsets.
  std::vector<CellCoord> full_offsets() const {
    std::vector<CellCoord> out;
    const int kz = dim_ == 3 ? 1 : 0;
    for (int k = -kz; k <= kz; ++k)
      for (int j = -1; j <= 1; ++j)
        for (int i = -1; i <= 1; ++i)
          if (i || j || k) out.push_back({i, j, k});
    return out;
  }

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && h_ == o.h_ && origin_ == o.origin_;
  }

 private:
  int dim_ = 2;
  CellCoord n_{1, 1, 1};
  double h_ = 1.0;
  Point origin_{0.0, 0.0, 0.0};
};

inline CellCoord operator+(const CellCoord& a, const CellCoord& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

}  // namespace kdl

#include "kdl/domain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "kdl/components.hpp"

namespace kdl {

namespace {

constexpr std::size_t kMinCells = 9;

void check_invariants(const Grid& g, const std::vector<std::uint8_t>& mask,
                      std::size_t count) {
  if (count < kMinCells)
    throw Error("domain has fewer than 9 cells; too coarse for analysis");
  const auto& n = g.extents();
  for (CellIndex i = 0; i < static_cast<CellIndex>(g.size()); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const CellCoord c = g.coord(i);
    for (int d = 0; d < g.dim(); ++d)
      if (c[d] == 0 || c[d] == n[d] - 1)
        throw Error("domain touches the grid border; pad the mask with false cells");
  }
  if (connected_components(g, mask, Connectivity::Face).count() != 1)
    throw Error("domain mask is not connected");
}

}  // namespace

RasterDomain::RasterDomain(Grid grid, std::vector<std::uint8_t> mask)
    : grid_(std::move(grid)), mask_(std::move(mask)) {
  if (mask_.size() != grid_.size()) throw Error("mask size does not match grid");
  index_cells();
  check_invariants(grid_, mask_, count_);
}

RasterDomain RasterDomain::unchecked(Grid grid, std::vector<std::uint8_t> mask) {
  RasterDomain d;
  d.grid_ = std::move(grid);
  d.mask_ = std::move(mask);
  if (d.mask_.size() != d.grid_.size()) throw Error("mask size does not match grid");
  d.index_cells();
  return d;
}

void RasterDomain::index_cells() {
  cells_.clear();
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i]) mask_[i] = 1;
    if (mask_[i]) cells_.push_back(static_cast<CellIndex>(i));
  }
  count_ = cells_.size();
}

std::string to_string(Generator g) {
  switch (g) {
    case Generator::Disk: return "disk";
    case Generator::Square: return "square";
    case Generator::LShape: return "l_shape";
    case Generator::Cusp: return "cusp_alpha";
    case Generator::FlatCusp: return "flat_cusp_alpha";
    case Generator::RoomsAndCorridors: return "rooms_and_corridors";
    case Generator::PuncturedDisk: return "punctured_disk";
    case Generator::PuncturedSlab: return "punctured_slab";
  }
  return "unknown";
}

Generator generator_from_string(const std::string& name) {
  for (Generator g : {Generator::Disk, Generator::Square, Generator::LShape,
                      Generator::Cusp, Generator::FlatCusp,
                      Generator::RoomsAndCorridors, Generator::PuncturedDisk,
                      Generator::PuncturedSlab})
    if (to_string(g) == name) return g;
  if (name == "lshape") return Generator::LShape;
  if (name == "cusp") return Generator::Cusp;
  if (name == "flat_cusp" || name == "flat-cusp") return Generator::FlatCusp;
  if (name == "rooms") return Generator::RoomsAndCorridors;
  if (name == "punctured-disk") return Generator::PuncturedDisk;
  if (name == "punctured-slab") return Generator::PuncturedSlab;
  throw Error("unknown generator '" + name + "'");
}

void DomainSpec::validate() const {
  if (resolution < 2) throw Error("resolution must be at least 2");
  switch (generator) {
    case Generator::Cusp:
    case Generator::FlatCusp:
      if (!(alpha > 1.0)) throw Error("cusp exponent alpha must exceed 1");
      break;
    case Generator::RoomsAndCorridors:
      if (!(neck_width > 0.0 && neck_width < geometry::kRoomSide))
        throw Error("neck width must lie in (0, room side)");
      if (room_count < 2) throw Error("rooms_and_corridors needs at least 2 rooms");
      break;
    case Generator::PuncturedDisk:
    case Generator::PuncturedSlab:
      if (levels < 1) throw Error("puncture levels must be >= 1");
      if (levels > 8) throw Error("puncture levels above 8 are not supported");
      break;
    default:
      break;
  }
}

std::string DomainSpec::id() const {
  std::ostringstream os;
  os << to_string(generator);
  switch (generator) {
    case Generator::Cusp:
    case Generator::FlatCusp:
      os << "(alpha=" << alpha << ")";
      break;
    case Generator::RoomsAndCorridors:
      os << "(neck=" << neck_width << ",m=" << room_count << ")";
      break;
    case Generator::PuncturedDisk:
    case Generator::PuncturedSlab:
      os << "(K=" << levels << ")";
      break;
    default:
      break;
  }
  return os.str();
}

std::vector<Point> puncture_points(int levels) {
  std::vector<Point> pts;
  long factorial = 1;
  for (int k = 1; k <= levels; ++k) {
    factorial *= k;
    const double radius = (1.0 - std::ldexp(1.0, -k)) * geometry::kDiskRadius;
    for (long j = 0; j < factorial; ++j) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) /
                           static_cast<double>(factorial);
      pts.push_back({0.5 + radius * std::cos(theta), 0.5 + radius * std::sin(theta), 0.0});
    }
  }
  return pts;
}

namespace {

struct Layout {
  int dim = 2;
  Point lo{}, hi{};
  // Shift of the lattice so that x = 0 falls on a cell center.
  bool center_x_axis = false;
};

Layout layout_for(const DomainSpec& s) {
  using namespace geometry;
  Layout L;
  switch (s.generator) {
    case Generator::Disk:
    case Generator::Square:
    case Generator::LShape:
    case Generator::PuncturedDisk:
      L.lo = {0, 0, 0};
      L.hi = {1, 1, 0};
      break;
    case Generator::Cusp:
      L.lo = {-1, 0, 0};
      L.hi = {1, 1, 0};
      L.center_x_axis = true;
      break;
    case Generator::FlatCusp:
      L.dim = 3;
      L.lo = {-1, 0, 0};
      L.hi = {1, 1, 1};
      L.center_x_axis = true;
      break;
    case Generator::RoomsAndCorridors:
      L.lo = {0, 0, 0};
      L.hi = {s.room_count * kRoomSide + (s.room_count - 1) * kCorridorLength,
              kRoomSide, 0};
      break;
    case Generator::PuncturedSlab:
      L.dim = 3;
      L.lo = {0, 0, -0.5};
      L.hi = {1, 1, 0.5};
      break;
  }
  return L;
}

std::function<bool(const Point&)> membership(const DomainSpec& s) {
  using namespace geometry;
  const double a = s.alpha;
  switch (s.generator) {
    case Generator::Disk:
    case Generator::PuncturedDisk:
      return [](const Point& p) {
        const double dx = p[0] - 0.5, dy = p[1] - 0.5;
        return dx * dx + dy * dy < kDiskRadius * kDiskRadius;
      };
    case Generator::Square:
      return [](const Point& p) { return p[0] > 0 && p[0] < 1 && p[1] > 0 && p[1] < 1; };
    case Generator::LShape:
      return [](const Point& p) {
        return p[0] > 0 && p[0] < 1 && p[1] > 0 && p[1] < 1 &&
               !(p[0] >= 0.5 && p[1] >= 0.5);
      };
    case Generator::Cusp:
      return [a](const Point& p) {
        return p[1] > 0 && p[1] < 1 && p[0] * p[0] < std::pow(p[1], 2 * a);
      };
    case Generator::FlatCusp:
      return [a](const Point& p) {
        return p[1] > 0 && p[1] < 1 && p[2] > 0 && p[2] < 1 &&
               p[0] * p[0] < std::pow(p[1], 2 * a);
      };
    case Generator::RoomsAndCorridors: {
      const int m = s.room_count;
      const double half = 0.5 * s.neck_width;
      return [m, half](const Point& p) {
        const double pitch = kRoomSide + kCorridorLength;
        if (p[1] <= 0 || p[1] >= kRoomSide || p[0] <= 0) return false;
        const int k = static_cast<int>(std::floor(p[0] / pitch));
        if (k >= m) return false;
        const double local = p[0] - k * pitch;
        if (local < kRoomSide) return true;
        if (k == m - 1) return false;
        return std::abs(p[1] - 0.5 * kRoomSide) < half;
      };
    }
    case Generator::PuncturedSlab:
      return [](const Point& p) {
        const double dx = p[0] - 0.5, dy = p[1] - 0.5;
        return dx * dx + dy * dy < kDiskRadius * kDiskRadius && p[2] > -0.5 &&
               p[2] < 0.5;
      };
  }
  return [](const Point&) { return false; };
}

}  // namespace

RasterDomain rasterize(const DomainSpec& spec) {
  spec.validate();
  const Layout L = layout_for(spec);
  const int margin = 2;
  const double h = 1.0 / spec.resolution;
  CellCoord n{1, 1, 1};
  Point origin{0, 0, 0};
  for (int d = 0; d < L.dim; ++d) {
    const double span = L.hi[d] - L.lo[d];
    int cells = static_cast<int>(std::ceil(span * spec.resolution - 1e-9));
    double lo = L.lo[d];
    if (d == 0 && L.center_x_axis) {
      // odd cell count with x = 0 at the center of the middle cell
      cells += 1;
      lo -= 0.5 * h;
    }
    n[d] = cells + 2 * margin;
    origin[d] = lo - margin * h;
  }
  Grid grid(L.dim, n, h, origin);
  const auto inside = membership(spec);
  std::vector<std::uint8_t> mask(grid.size(), 0);
  for (CellIndex i = 0; i < static_cast<CellIndex>(grid.size()); ++i)
    mask[static_cast<std::size_t>(i)] = inside(grid.center(i)) ? 1 : 0;

  if (spec.generator == Generator::PuncturedDisk ||
      spec.generator == Generator::PuncturedSlab) {
    const auto pts = puncture_points(spec.levels);
    std::vector<CellIndex> removed;
    for (const Point& p : pts) {
      CellCoord c = grid.locate(p);
      if (spec.generator == Generator::PuncturedDisk) {
        const CellIndex idx = grid.index(c);
        if (!mask[static_cast<std::size_t>(idx)] ||
            std::find(removed.begin(), removed.end(), idx) != removed.end())
          throw Error("resolution too coarse: puncture points share a cell");
        removed.push_back(idx);
      } else {
        const int k0 = grid.locate({0, 0, 0.0})[2];
        const int k1 = grid.locate({0, 0, 0.5 - 1e-12})[2];
        for (int k = k0; k <= k1; ++k) {
          c[2] = k;
          const CellIndex idx = grid.index(c);
          if (!mask[static_cast<std::size_t>(idx)] ||
              std::find(removed.begin(), removed.end(), idx) != removed.end())
            throw Error("resolution too coarse: puncture points share a cell");
          removed.push_back(idx);
        }
      }
    }
    for (CellIndex idx : removed) mask[static_cast<std::size_t>(idx)] = 0;
  }

  std::size_t count = 0;
  for (auto v : mask) count += v;
  if (count < kMinCells) throw Error("disconnected rasterization: too few cells");
  if (connected_components(grid, mask, Connectivity::Face).count() != 1)
    throw Error("disconnected rasterization");
  return RasterDomain(std::move(grid), std::move(mask));
}

}  // namespace kdl

#include "kdl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_set>

namespace kdl {

namespace {

constexpr double kPixels = 640.0;

}  // namespace

void write_svg(std::ostream& os, AnalysisContext& ctx, const AnalysisOptions& o) {
  const RasterDomain& d = ctx.raster();
  const Grid& g = d.grid();
  const CellCoord ext = g.extents();
  const int z = d.dim() == 3 ? ext[2] / 2 : 0;
  const double scale = kPixels / std::max(ext[0], ext[1]);
  const double W = ext[0] * scale, H = ext[1] * scale;
  // Cell (i, j) occupies [i, i+1] x [j, j+1] in cell units; y grows upward.
  auto X = [&](double i) { return i * scale; };
  auto Y = [&](double j) { return H - j * scale; };
  auto to_cells = [&](const Point& p, int a) { return (p[static_cast<std::size_t>(a)] - g.origin()[static_cast<std::size_t>(a)]) / g.h() + 0.5; };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\">\n"
     << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"#ffffff\"/>\n";

  auto row_runs = [&](auto&& in_set, const char* fill) {
    os << "<g fill=\"" << fill << "\" shape-rendering=\"crispEdges\">\n";
    for (int j = 0; j < ext[1]; ++j)
      for (int i = 0; i < ext[0];) {
        if (!in_set(CellCoord{i, j, z})) {
          ++i;
          continue;
        }
        int e = i;
        while (e < ext[0] && in_set(CellCoord{e, j, z})) ++e;
        os << "<rect x=\"" << X(i) << "\" y=\"" << Y(j + 1) << "\" width=\"" << (e - i) * scale << "\" height=\""
           << scale << "\"/>\n";
        i = e;
      }
    os << "</g>\n";
  };
  row_runs([&](const CellCoord& c) { return d.inside(c); }, "#dde6f0");

  if (ctx.show_end) {
    const auto& rep = ctx.end_measure(o);
    if (rep.argmax.separating) {
      const std::unordered_set<CellIndex> end(rep.argmax.end_cells.begin(), rep.argmax.end_cells.end());
      row_runs([&](const CellCoord& c) { return g.contains(c) && end.count(g.index(c)) > 0; }, "#f4c27a");
      const Ball& b = rep.argmax.ball;
      os << "<circle cx=\"" << X(to_cells(b.center, 0)) << "\" cy=\"" << Y(to_cells(b.center, 1)) << "\" r=\""
         << b.radius / g.h() * scale << "\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\"/>\n";
    }
  }

  if (ctx.show_whitney) {
    const auto& w = ctx.geometry().whitney;
    os << "<g fill=\"none\" stroke=\"#34495e\" stroke-width=\"0.5\">\n";
    for (const auto& q : w.cubes) {
      const int s = q.side_cells();
      if (d.dim() == 3 && (z < q.anchor[2] || z >= q.anchor[2] + s)) continue;
      os << "<rect x=\"" << X(q.anchor[0]) << "\" y=\"" << Y(q.anchor[1] + s) << "\" width=\"" << s * scale
         << "\" height=\"" << s * scale << "\"/>\n";
    }
    os << "</g>\n";
  }

  if (ctx.field && ctx.field->space) {
    const DiscreteVectorField& u = *ctx.field;
    const FieldSpace& s = *u.space;
    const int stride = std::max(1, std::max(ext[0], ext[1]) / 32);
    double umax = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) umax = std::max(umax, std::hypot(u.at(k, 0), u.at(k, 1)));
    if (umax > 0.0) {
      const double len = 0.9 * stride * scale / umax;
      os << "<g stroke=\"#1f618d\" stroke-width=\"1\">\n";
      for (std::size_t k = 0; k < s.size(); ++k) {
        const CellCoord c = g.coord(s.cell(k));
        if (c[0] % stride || c[1] % stride || (d.dim() == 3 && c[2] != z)) continue;
        const double x0 = X(c[0] + 0.5), y0 = Y(c[1] + 0.5);
        os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 + len * u.at(k, 0) << "\" y2=\""
           << y0 - len * u.at(k, 1) << "\"/>\n";
      }
      os << "</g>\n";
    }
  }
  os << "</svg>\n";
}

}  // namespace kdl

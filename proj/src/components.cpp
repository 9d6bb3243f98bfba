#include "kdl/components.hpp"

#include <algorithm>
#include <cmath>

namespace kdl {

ComponentLabeling connected_components(const Grid& grid,
                                       const std::vector<std::uint8_t>& in_set,
                                       Connectivity conn) {
  ComponentLabeling out;
  out.label.assign(grid.size(), -1);
  const auto offsets =
      conn == Connectivity::Face ? grid.face_offsets() : grid.full_offsets();
  std::vector<CellIndex> stack;
  for (CellIndex seed = 0; seed < static_cast<CellIndex>(grid.size()); ++seed) {
    if (!in_set[static_cast<std::size_t>(seed)] ||
        out.label[static_cast<std::size_t>(seed)] >= 0)
      continue;
    const auto id = static_cast<std::int32_t>(out.members.size());
    std::vector<CellIndex> comp;
    out.label[static_cast<std::size_t>(seed)] = id;
    stack.push_back(seed);
    while (!stack.empty()) {
      const CellIndex cur = stack.back();
      stack.pop_back();
      comp.push_back(cur);
      const CellCoord c = grid.coord(cur);
      for (const auto& o : offsets) {
        const CellCoord nb = c + o;
        if (!grid.contains(nb)) continue;
        const CellIndex ni = grid.index(nb);
        if (!in_set[static_cast<std::size_t>(ni)] ||
            out.label[static_cast<std::size_t>(ni)] >= 0)
          continue;
        out.label[static_cast<std::size_t>(ni)] = id;
        stack.push_back(ni);
      }
    }
    std::sort(comp.begin(), comp.end());
    out.members.push_back(std::move(comp));
  }
  return out;
}

double measure(std::size_t cell_count, double h, int dim) {
  return static_cast<double>(cell_count) * std::pow(h, dim);
}

}  // namespace kdl

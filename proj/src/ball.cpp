#include "kdl/ball.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace kdl {

double ball_volume(double radius, int dim) {
  return dim == 2 ? std::numbers::pi * radius * radius
                  : 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
}

BallRegion classify(const Grid& g, const Ball& b, const Point& p) {
  const double half_width = 0.5 * g.h() * std::sqrt(static_cast<double>(g.dim()));
  const double s = distance(p, b.center);
  if (s < b.radius - half_width) return BallRegion::Inside;
  if (s > b.radius + half_width) return BallRegion::Outside;
  return BallRegion::Sphere;
}

bool BallPartition::in_end(CellIndex c) const {
  for (const auto& e : ends)
    if (std::binary_search(e.begin(), e.end(), c)) return true;
  return false;
}

std::vector<CellIndex> BallPartition::end_cells() const {
  std::vector<CellIndex> all;
  all.reserve(end_cell_count);
  for (const auto& e : ends) all.insert(all.end(), e.begin(), e.end());
  std::sort(all.begin(), all.end());
  return all;
}

BallAnalyzer::BallAnalyzer(const RasterDomain& d, CellIndex base_cell)
    : d_(&d), base_(base_cell), stamp_(d.grid().size(), 0), group_(d.grid().size(), -1) {
  if (!d.inside(base_cell)) throw Error("base point must be a domain cell");
}

template <class F>
void BallAnalyzer::for_each_cell_in_shell(const Ball& b, double r_lo, double r_hi,
                                          F&& fn) const {
  const Grid& g = d_->grid();
  const double h = g.h();
  const auto& o = g.origin();
  const auto& n = g.extents();
  auto index_range = [&](int axis, double lo, double hi, int& i0, int& i1) {
    i0 = std::max(0, static_cast<int>(std::ceil((lo - o[axis]) / h - 0.5)));
    i1 = std::min(n[axis] - 1, static_cast<int>(std::floor((hi - o[axis]) / h - 0.5)));
  };
  int k0 = 0, k1 = 0;
  if (g.dim() == 3) index_range(2, b.center[2] - r_hi, b.center[2] + r_hi, k0, k1);
  int j0, j1;
  index_range(1, b.center[1] - r_hi, b.center[1] + r_hi, j0, j1);
  const double lo2 = r_lo * r_lo, hi2 = r_hi * r_hi;
  for (int k = k0; k <= k1; ++k) {
    const double dz = g.dim() == 3 ? o[2] + (k + 0.5) * h - b.center[2] : 0.0;
    for (int j = j0; j <= j1; ++j) {
      const double dy = o[1] + (j + 0.5) * h - b.center[1];
      const double dyz = dy * dy + dz * dz;
      if (dyz > hi2) continue;
      const double xmax = std::sqrt(hi2 - dyz);
      const double xmin = lo2 > dyz ? std::sqrt(lo2 - dyz) : 0.0;
      auto visit = [&](double a, double bnd) {
        int i0, i1;
        index_range(0, a, bnd, i0, i1);
        for (int i = i0; i <= i1; ++i) {
          const CellCoord c{i, j, k};
          const Point p = g.center(c);
          const double s = distance(p, b.center);
          if (s > r_lo && s <= r_hi) fn(g.index(c));
        }
      };
      if (xmin == 0.0) {
        visit(b.center[0] - xmax, b.center[0] + xmax);
      } else {
        visit(b.center[0] - xmax, b.center[0] - xmin);
        visit(b.center[0] + xmin, b.center[0] + xmax);
      }
    }
  }
}

BallPartition BallAnalyzer::full_label(const Ball& b) {
  const Grid& g = d_->grid();
  const double hw = 0.5 * g.h() * std::sqrt(static_cast<double>(g.dim()));
  const auto offsets = g.face_offsets();
  BallPartition out;
  out.ball = b;
  out.base_outside = false;
  ++epoch_;
  std::vector<CellIndex> seeds;
  for_each_cell_in_shell(b, b.radius + hw, b.radius + hw + g.h(), [&](CellIndex c) {
    if (d_->inside(c)) seeds.push_back(c);
  });
  std::vector<CellIndex> stack;
  for (CellIndex s : seeds) {
    if (stamp_[static_cast<std::size_t>(s)] == epoch_) continue;
    std::vector<CellIndex> comp;
    stamp_[static_cast<std::size_t>(s)] = epoch_;
    stack.push_back(s);
    while (!stack.empty()) {
      const CellIndex cur = stack.back();
      stack.pop_back();
      comp.push_back(cur);
      const CellCoord cc = g.coord(cur);
      for (const auto& off : offsets) {
        const CellCoord nb = cc + off;
        if (!d_->inside(nb)) continue;
        const CellIndex ni = g.index(nb);
        if (stamp_[static_cast<std::size_t>(ni)] == epoch_) continue;
        if (classify(g, b, g.center(nb)) != BallRegion::Outside) continue;
        stamp_[static_cast<std::size_t>(ni)] = epoch_;
        stack.push_back(ni);
      }
    }
    std::sort(comp.begin(), comp.end());
    out.end_cell_count += comp.size();
    out.ends.push_back(std::move(comp));
  }
  return out;
}

BallPartition BallAnalyzer::analyze(const Ball& b) {
  const Grid& g = d_->grid();
  if (classify(g, b, g.center(base_)) != BallRegion::Outside) return full_label(b);

  const double hw = 0.5 * g.h() * std::sqrt(static_cast<double>(g.dim()));
  const auto offsets = g.face_offsets();
  ++epoch_;

  struct Group {
    std::vector<CellIndex> queue;
    std::size_t head = 0;
    std::vector<CellIndex> members;
    int parent = 0;
    bool has_base = false;
    bool done = false;
  };
  std::vector<Group> groups;
  auto find = [&](int x) {
    while (groups[static_cast<std::size_t>(x)].parent != x) {
      auto& gx = groups[static_cast<std::size_t>(x)];
      gx.parent = groups[static_cast<std::size_t>(gx.parent)].parent;
      x = gx.parent;
    }
    return x;
  };
  auto unite = [&](int a, int c) {
    a = find(a);
    c = find(c);
    if (a == c) return a;
    Group* ga = &groups[static_cast<std::size_t>(a)];
    Group* gc = &groups[static_cast<std::size_t>(c)];
    if (ga->members.size() < gc->members.size()) {
      std::swap(a, c);
      std::swap(ga, gc);
    }
    ga->members.insert(ga->members.end(), gc->members.begin(), gc->members.end());
    ga->queue.insert(ga->queue.end(), gc->queue.begin() + static_cast<std::ptrdiff_t>(gc->head),
                     gc->queue.end());
    ga->has_base = ga->has_base || gc->has_base;
    gc->parent = a;
    std::vector<CellIndex>().swap(gc->members);
    std::vector<CellIndex>().swap(gc->queue);
    return a;
  };
  auto visit = [&](CellIndex c, int gid) {
    stamp_[static_cast<std::size_t>(c)] = epoch_;
    group_[static_cast<std::size_t>(c)] = gid;
    Group& gr = groups[static_cast<std::size_t>(gid)];
    gr.queue.push_back(c);
    gr.members.push_back(c);
    if (c == base_) gr.has_base = true;
  };

  for_each_cell_in_shell(b, b.radius + hw, b.radius + hw + g.h(), [&](CellIndex c) {
    if (!d_->inside(c) || stamp_[static_cast<std::size_t>(c)] == epoch_) return;
    groups.push_back({});
    groups.back().parent = static_cast<int>(groups.size()) - 1;
    visit(c, static_cast<int>(groups.size()) - 1);
  });

  constexpr std::size_t kBurst = 64;
  for (;;) {
    std::vector<int> active;
    bool base_found = false;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (groups[i].parent != static_cast<int>(i)) continue;
      if (groups[i].has_base) {
        base_found = true;
        continue;
      }
      if (!groups[i].done) active.push_back(static_cast<int>(i));
    }
    if (active.empty()) break;
    if (active.size() == 1 && !base_found) {
      groups[static_cast<std::size_t>(active[0])].has_base = true;
      break;
    }
    for (int r : active) {
      r = find(r);
      for (std::size_t step = 0; step < kBurst; ++step) {
        Group& gr = groups[static_cast<std::size_t>(r)];
        if (gr.has_base || gr.done) break;
        if (gr.head == gr.queue.size()) {
          gr.done = true;
          break;
        }
        const CellIndex cur = gr.queue[gr.head++];
        const CellCoord cc = g.coord(cur);
        for (const auto& off : offsets) {
          const CellCoord nb = cc + off;
          if (!d_->inside(nb)) continue;
          const CellIndex ni = g.index(nb);
          if (stamp_[static_cast<std::size_t>(ni)] == epoch_) {
            const int other = find(group_[static_cast<std::size_t>(ni)]);
            if (other != r) r = unite(r, other);
            continue;
          }
          if (classify(g, b, g.center(nb)) != BallRegion::Outside) continue;
          visit(ni, r);
        }
      }
    }
  }

  BallPartition out;
  out.ball = b;
  out.base_outside = true;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    Group& gr = groups[i];
    if (gr.parent != static_cast<int>(i) || gr.has_base) continue;
    std::sort(gr.members.begin(), gr.members.end());
    out.end_cell_count += gr.members.size();
    out.ends.push_back(std::move(gr.members));
  }
  std::sort(out.ends.begin(), out.ends.end(),
            [](const auto& a, const auto& c) { return a.front() < c.front(); });
  return out;
}

std::shared_ptr<const BallPartition> BallAnalyzer::analyze_cached(const Ball& b) {
  const Key key{std::bit_cast<std::uint64_t>(b.center[0]),
                std::bit_cast<std::uint64_t>(b.center[1]),
                std::bit_cast<std::uint64_t>(b.center[2]),
                std::bit_cast<std::uint64_t>(b.radius)};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  auto result = std::make_shared<const BallPartition>(analyze(b));
  if (cached_cells_ + result->end_cell_count > kMaxCachedCells) {
    cache_.clear();
    cached_cells_ = 0;
  }
  cached_cells_ += result->end_cell_count;
  cache_.emplace(key, result);
  return result;
}

}  // namespace kdl

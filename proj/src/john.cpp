#include "kdl/john.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>
#include <sstream>

#include "kdl/parallel.hpp"
#include "kdl/separation.hpp"

namespace kdl {

double curve_john_ratio(const DiscreteCurve& c, const DomainGeometry& g) {
  double best = std::numeric_limits<double>::infinity();
  double t = 0.0;
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    t += distance(c.points[i - 1], c.points[i]);
    if (t <= 0.0) continue;
    best = std::min(best, g.rho_at(c.points[i]) / t);
  }
  return best;
}

namespace {

/// Pruned Dijkstra over the face graph; per-worker scratch space.
class JohnSearch {
 public:
  JohnSearch(const DomainGeometry& g, const std::vector<double>& value, int base)
      : g_(g), value_(value), base_(base), dist_(g.whitney.size()), parent_(g.whitney.size()),
        stamp_(g.whitney.size(), 0) {}

  bool feasible(const Point& x, int start, double C, std::vector<int>& path) {
    const WhitneyDecomposition& w = g_.whitney;
    ++epoch_;
    const double L0 = distance(x, w.center(start));
    if (value_[static_cast<std::size_t>(start)] < C * L0) return false;
    using Label = std::pair<double, int>;
    std::priority_queue<Label, std::vector<Label>, std::greater<>> pq;
    set(start, L0, -1);
    pq.emplace(L0, start);
    while (!pq.empty()) {
      auto [du, u] = pq.top();
      pq.pop();
      const auto uu = static_cast<std::size_t>(u);
      if (du > dist_[uu]) continue;
      if (u == base_) {
        path.clear();
        for (int v = u; v >= 0; v = parent_[static_cast<std::size_t>(v)]) path.push_back(v);
        std::reverse(path.begin(), path.end());
        return true;
      }
      const Point cu = w.center(u);
      for (int v : w.face_adjacency[uu]) {
        const auto vv = static_cast<std::size_t>(v);
        const Point m = contact_point(w, u, v);
        const double L = du + distance(cu, m) + distance(m, w.center(v));
        if (value_[vv] < C * L) continue;
        if (stamp_[vv] == epoch_ && dist_[vv] <= L) continue;
        set(v, L, u);
        pq.emplace(L, v);
      }
    }
    return false;
  }

 private:
  void set(int v, double d, int p) {
    const auto vv = static_cast<std::size_t>(v);
    stamp_[vv] = epoch_;
    dist_[vv] = d;
    parent_[vv] = p;
  }

  const DomainGeometry& g_;
  const std::vector<double>& value_;
  int base_;
  std::vector<double> dist_;
  std::vector<int> parent_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

}  // namespace

JohnCertificate john_constant_direct(const DomainGeometry& g, CellIndex x0,
                                     std::size_t sample_budget, int workers) {
  if (sample_budget < 1) throw Error("sample budget must be at least 1");
  const WhitneyDecomposition& w = g.whitney;
  CurveSearch search(g, x0);
  const Point p0 = search.base_point();
  const int base = w.cell_to_cube[static_cast<std::size_t>(x0)];
  std::vector<double> value(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) value[i] = g.rho_at(w.center(static_cast<int>(i)));
  const std::vector<Point> samples = sample_points(w, p0, sample_budget);

  workers = std::max(1, workers);
  std::vector<std::unique_ptr<JohnSearch>> searches;
  for (int i = 0; i < workers; ++i)
    searches.push_back(std::make_unique<JohnSearch>(g, value, base));

  JohnCertificate cert;
  cert.x0 = x0;
  cert.samples.resize(samples.size());
  parallel_for(samples.size(), workers, [&](int worker, std::size_t i) {
    const Point& x = samples[i];
    JohnSample& out = cert.samples[i];
    out.x = x;
    out.constant = -1.0;
    auto consider = [&](DiscreteCurve c) {
      const double r = curve_john_ratio(c, g);
      if (r > out.constant) {
        out.constant = r;
        out.curve = std::move(c);
      }
    };
    for (auto& cand : search.candidates(x)) consider(std::move(cand.curve));
    const int start = w.cube_of(x);
    if (start == base) return;
    JohnSearch& js = *searches[static_cast<std::size_t>(worker)];
    double lo = 0.0;
    double hi = value[static_cast<std::size_t>(base)] / distance(x, w.center(base));
    const double L0 = distance(x, w.center(start));
    if (L0 > 0) hi = std::min(hi, value[static_cast<std::size_t>(start)] / L0);
    std::vector<int> path;
    while (hi - lo > 1e-3 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (js.feasible(x, start, mid, path)) {
        lo = mid;
        consider(search.path_curve(x, path));
      } else {
        hi = mid;
      }
    }
  });

  cert.C_J_lower = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cert.samples.size(); ++i)
    if (cert.samples[i].constant < cert.C_J_lower) {
      cert.C_J_lower = cert.samples[i].constant;
      cert.argmin = i;
    }
  return cert;
}

std::vector<BEnd> enumerate_separating_balls(const DomainGeometry& g, CellIndex x0, double C_s,
                                             std::size_t budget,
                                             const std::vector<Point>& extra_centers,
                                             int workers, bool keep_cells) {
  if (!(C_s >= 1.0)) throw Error("separation constant must be at least 1");
  std::vector<Point> centers = sample_points(g.whitney, g.grid().center(x0), budget);
  centers.insert(centers.end(), extra_centers.begin(), extra_centers.end());
  workers = std::max(1, workers);
  std::vector<std::unique_ptr<BallAnalyzer>> analyzers;
  for (int i = 0; i < workers; ++i)
    analyzers.push_back(std::make_unique<BallAnalyzer>(g.domain, x0));
  const double cell = g.grid().cell_volume();
  std::vector<BEnd> out(centers.size());
  parallel_for(centers.size(), workers, [&](int worker, std::size_t i) {
    BEnd& e = out[i];
    e.C_s = C_s;
    e.ball = Ball{centers[i], C_s * g.rho_at(centers[i])};
    BallPartition part = analyzers[static_cast<std::size_t>(worker)]->analyze(e.ball);
    e.separating = part.separating();
    e.components = part.ends.size();
    e.cell_count = part.end_cell_count;
    e.end_measure = static_cast<double>(part.end_cell_count) * cell;
    e.ratio = e.end_measure / ball_volume(e.ball.radius, g.grid().dim());
    if (keep_cells) e.end_cells = part.end_cells();
  });
  return out;
}

EndMeasureReport end_measure_ratio(const DomainGeometry& g, CellIndex x0, double C_s,
                                   std::size_t budget, const std::vector<Point>& extra_centers,
                                   int workers) {
  const auto balls = enumerate_separating_balls(g, x0, C_s, budget, extra_centers, workers);
  EndMeasureReport rep;
  rep.balls_examined = balls.size();
  rep.threshold = std::pow(4.0, g.grid().dim()) * 4.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < balls.size(); ++i) {
    if (balls[i].separating) ++rep.separating;
    if (balls[i].ratio > rep.max_ratio) {
      rep.max_ratio = balls[i].ratio;
      arg = i;
    }
  }
  if (!balls.empty()) {
    rep.argmax = balls[arg];
    BallAnalyzer a(g.domain, x0);
    rep.argmax.end_cells = a.analyze(rep.argmax.ball).end_cells();
  }
  rep.john_consistent = rep.max_ratio <= rep.threshold;
  return rep;
}

AstalaGehringResult astala_gehring_check(const std::vector<double>& x, double b, double alpha) {
  if (!(b >= 1.0)) throw Error("b must be at least 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("alpha must lie in (0, 1]");
  AstalaGehringResult r;
  const std::size_t n = x.size();
  std::vector<double> tail(n + 1, 0.0), tail_a(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    if (!(x[k] >= 0.0)) throw Error("sequence must be nonnegative");
    tail[k] = tail[k + 1] + x[k];
    tail_a[k] = tail_a[k + 1] + std::pow(x[k], alpha);
  }
  for (std::size_t k = 0; k < n; ++k)
    if (tail[k] > b * x[k] * (1.0 + 1e-12)) {
      r.hypothesis_holds = false;
      r.failing_k = k;
      std::ostringstream os;
      os << "hypothesis fails at k=" << k;
      r.verdict = os.str();
      return r;
    }
  for (std::size_t k = 0; k < n; ++k)
    if (x[k] > 0.0) r.c = std::max(r.c, tail_a[k] / std::pow(x[k], alpha));
  r.verdict = std::isfinite(r.c) ? "finite constant" : "unbounded";
  return r;
}

}  // namespace kdl

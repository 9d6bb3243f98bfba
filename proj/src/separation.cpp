#include "kdl/separation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "kdl/parallel.hpp"

namespace kdl {

CurveVerdict check_curve_separation(const DiscreteCurve& c, double C_s, BallAnalyzer& balls,
                                    const DistanceField& rho) {
  const RasterDomain& d = balls.domain();
  const Grid& g = d.grid();
  const double hw = 0.5 * g.h() * std::sqrt(static_cast<double>(g.dim()));
  const std::size_t n = c.points.size();
  std::vector<CellIndex> cell(n);
  std::vector<Point> centre(n);
  for (std::size_t i = 0; i < n; ++i) {
    const CellCoord cc = g.locate(c.points[i]);
    if (!d.inside(cc)) throw Error("curve leaves the domain");
    cell[i] = g.index(cc);
    centre[i] = g.center(cc);
  }
  std::vector<double> arc = c.arclength;
  if (arc.size() != n) {
    DiscreteCurve tmp = c;
    tmp.recompute_arclength();
    arc = tmp.arclength;
  }

  CurveVerdict out;
  std::vector<std::size_t> outside;
  for (std::size_t t = 0; t < n; ++t) {
    const Point& z = c.points[t];
    const double r = C_s * rho.rho(cell[t]);
    const double lim = (r + hw) * (r + hw);
    outside.clear();
    for (std::size_t s = 0; s <= t; ++s) {
      const double dx = centre[s][0] - z[0], dy = centre[s][1] - z[1], dz = centre[s][2] - z[2];
      if (dx * dx + dy * dy + dz * dz > lim) outside.push_back(s);
    }
    if (outside.empty()) {
      ++out.contained_steps;
      continue;
    }
    const Ball b{z, r};
    auto part = balls.analyze_cached(b);
    for (std::size_t s : outside) {
      // exact classification; the squared prefilter above is the same test
      if (classify(g, b, centre[s]) != BallRegion::Outside) continue;
      if (part->in_end(cell[s])) continue;
      SeparationViolation v;
      v.x = c.points.front();
      v.t_index = t;
      v.t = arc[t];
      v.y = c.points[s];
      v.ball = b;
      v.label_y = v.label_x0 = balls.base_cell();
      out.pass = false;
      out.violation = v;
      return out;
    }
    ++out.separated_steps;
  }
  return out;
}

CurveVerdict check_curve_separation(const DiscreteCurve& c, CellIndex x0, double C_s,
                                    const RasterDomain& d, const DistanceField& rho) {
  BallAnalyzer balls(d, x0);
  return check_curve_separation(c, C_s, balls, rho);
}

CurveSearch::CurveSearch(const DomainGeometry& g, CellIndex x0)
    : g_(&g), x0_cell_(x0), x0_(g.grid().center(x0)) {
  const WhitneyDecomposition& w = g.whitney;
  if (!g.domain.inside(x0)) throw Error("base point must be a domain cell");
  base_cube_ = w.cell_to_cube[static_cast<std::size_t>(x0)];
  const std::size_t m = w.size();
  value_.resize(m);
  std::vector<Point> ctr(m);
  for (std::size_t i = 0; i < m; ++i) {
    ctr[i] = w.center(static_cast<int>(i));
    value_[i] = g.rho_at(ctr[i]);
  }

  // Widest path tree: maximize the bottleneck, then minimize length.
  {
    std::vector<double> bott(m, -1.0), len(m, std::numeric_limits<double>::infinity());
    widest_parent_.assign(m, -1);
    using Label = std::tuple<double, double, int>;  // (-bottleneck, length, id)
    std::priority_queue<Label, std::vector<Label>, std::greater<>> pq;
    const auto b0 = static_cast<std::size_t>(base_cube_);
    bott[b0] = value_[b0];
    len[b0] = 0;
    pq.emplace(-bott[b0], 0.0, base_cube_);
    std::vector<std::uint8_t> done(m, 0);
    while (!pq.empty()) {
      auto [nb, l, u] = pq.top();
      pq.pop();
      const auto uu = static_cast<std::size_t>(u);
      if (done[uu]) continue;
      done[uu] = 1;
      for (int v : w.face_adjacency[uu]) {
        const auto vv = static_cast<std::size_t>(v);
        if (done[vv]) continue;
        const double b = std::min(-nb, value_[vv]);
        const double L = l + distance(ctr[uu], ctr[vv]);
        if (b > bott[vv] || (b == bott[vv] && L < len[vv])) {
          bott[vv] = b;
          len[vv] = L;
          widest_parent_[vv] = u;
          pq.emplace(-b, L, v);
        }
      }
    }
  }
  // Quasi-hyperbolic tree: edge length over mean rho.
  {
    std::vector<double> dist(m, std::numeric_limits<double>::infinity());
    qh_parent_.assign(m, -1);
    using Label = std::pair<double, int>;
    std::priority_queue<Label, std::vector<Label>, std::greater<>> pq;
    dist[static_cast<std::size_t>(base_cube_)] = 0;
    pq.emplace(0.0, base_cube_);
    while (!pq.empty()) {
      auto [du, u] = pq.top();
      pq.pop();
      const auto uu = static_cast<std::size_t>(u);
      if (du > dist[uu]) continue;
      for (int v : w.face_adjacency[uu]) {
        const auto vv = static_cast<std::size_t>(v);
        const double wgt = 2.0 * distance(ctr[uu], ctr[vv]) / (value_[uu] + value_[vv]);
        if (du + wgt < dist[vv]) {
          dist[vv] = du + wgt;
          qh_parent_[vv] = u;
          pq.emplace(dist[vv], v);
        }
      }
    }
  }
}

std::vector<int> CurveSearch::walk(const std::vector<int>& parent, int from) const {
  std::vector<int> path{from};
  while (path.back() != base_cube_) {
    const int p = parent[static_cast<std::size_t>(path.back())];
    if (p < 0) throw Error("base point not reachable in the cube graph");
    path.push_back(p);
  }
  return path;
}

DiscreteCurve CurveSearch::path_curve(const Point& x, const std::vector<int>& cubes) const {
  const WhitneyDecomposition& w = g_->whitney;
  std::vector<Point> v{x};
  auto push = [&](const Point& p) {
    if (v.back() != p) v.push_back(p);
  };
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    if (i > 0) push(contact_point(w, cubes[i - 1], cubes[i]));
    push(w.center(cubes[i]));
  }
  push(x0_);
  return make_polyline(v, g_->grid().h());
}

std::vector<CurveSearch::Candidate> CurveSearch::candidates(const Point& x) const {
  std::vector<Candidate> out;
  const RasterDomain& d = g_->domain;
  DiscreteCurve straight = make_polyline({x, x0_}, g_->grid().h());
  if (std::all_of(straight.points.begin(), straight.points.end(),
                  [&](const Point& p) { return d.inside(p); }))
    out.push_back({"straight", std::move(straight)});
  const int from = g_->whitney.cube_of(x);
  if (from < 0) throw Error("sample point outside the domain");
  const auto wp = widest_path(from);
  out.push_back({"widest", path_curve(x, wp)});
  const auto qp = hyperbolic_path(from);
  if (qp != wp) out.push_back({"hyperbolic", path_curve(x, qp)});
  return out;
}

std::optional<SampleCertificate> find_separation_curve(
    const Point& x, double C_s, const CurveSearch& search, BallAnalyzer& balls,
    std::optional<SeparationViolation>* last_violation) {
  const DomainGeometry& g = search.geometry();
  std::optional<SeparationViolation> first;
  for (const auto& cand : search.candidates(x)) {
    std::vector<std::pair<std::string, DiscreteCurve>> tries;
    try {
      tries.emplace_back(cand.method + "+simplified",
                         simplify_curve(cand.curve, g.whitney, g.domain));
    } catch (const Error&) {
      // segment left the mask; fall back to the raw curve
    }
    tries.emplace_back(cand.method, cand.curve);
    for (auto& [method, curve] : tries) {
      const CurveVerdict v = check_curve_separation(curve, C_s, balls, g.rho);
      if (v.pass) {
        if (last_violation) last_violation->reset();
        return SampleCertificate{x, std::move(curve), method, v.separated_steps};
      }
      if (!first) first = v.violation;
    }
  }
  if (last_violation) *last_violation = first;
  return std::nullopt;
}

SeparationReport check_separation_property(const DomainGeometry& g, CellIndex x0, double C_s,
                                           std::size_t sample_budget, int workers) {
  if (sample_budget < 1) throw Error("sample budget must be at least 1");
  if (!(C_s >= 1.0)) throw Error("separation constant must be at least 1");
  CurveSearch search(g, x0);
  const std::vector<Point> samples = sample_points(g.whitney, search.base_point(), sample_budget);
  workers = std::max(1, workers);
  std::vector<std::unique_ptr<BallAnalyzer>> analyzers;
  for (int i = 0; i < workers; ++i) analyzers.push_back(std::make_unique<BallAnalyzer>(g.domain, x0));

  std::vector<std::optional<SampleCertificate>> certs(samples.size());
  std::vector<std::optional<SeparationViolation>> viols(samples.size());
  parallel_for(samples.size(), workers, [&](int worker, std::size_t i) {
    certs[i] = find_separation_curve(samples[i], C_s, search,
                                     *analyzers[static_cast<std::size_t>(worker)], &viols[i]);
  });

  SeparationReport rep;
  rep.x0 = x0;
  rep.C_s = C_s;
  rep.budget = sample_budget;
  rep.sampled = samples.size();
  rep.cube_count = g.whitney.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (certs[i]) {
      rep.certified.push_back(std::move(*certs[i]));
    } else {
      rep.failed_points.push_back(samples[i]);
      if (viols[i]) rep.failures.push_back(*viols[i]);
    }
  }
  return rep;
}

namespace {

/// Smallest constant in [lo, hi] (relative tolerance) at which the curve passes;
/// infinity when it fails even at hi.
double minimal_constant(const DiscreteCurve& c, double lo, BallAnalyzer& balls,
                        const DistanceField& rho) {
  if (check_curve_separation(c, lo, balls, rho).pass) return lo;
  double hi = 2.0 * lo;
  while (!check_curve_separation(c, hi, balls, rho).pass) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) return std::numeric_limits<double>::infinity();
  }
  while (hi - lo > 1e-2 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (check_curve_separation(c, mid, balls, rho).pass)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace

TransferReport base_point_transfer(const DomainGeometry& g, const SeparationReport& at_x0,
                                   CellIndex x1, const Point* x1_point) {
  if (at_x0.certified.empty() || !at_x0.certificate())
    throw Error("no separation certificate at the base point");
  const Grid& grid = g.grid();
  TransferReport rep;
  rep.x0 = at_x0.x0;
  rep.x1 = x1;
  rep.C_s = at_x0.C_s;
  const Point p0 = grid.center(at_x0.x0);
  const Point p1 = x1_point ? *x1_point : grid.center(x1);
  if (!g.domain.inside(p1) || grid.index(grid.locate(p1)) != x1)
    throw Error("transfer target does not lie in the given cell");
  rep.single_step = distance(p0, p1) <= g.rho.rho(at_x0.x0) / 1000.0;

  BallAnalyzer balls(g.domain, x1);
  DiscreteCurve link;
  if (p0 == p1) {
    link.points = {p0};
    link.recompute_arclength();
  } else if (rep.single_step) {
    link = make_polyline({p0, p1}, grid.h());
  } else {
    CurveSearch search(g, x1);
    DiscreteCurve c = search.candidates(p0).front().curve;
    c.points.back() = p1;
    link = c;
  }

  // At most 64 curves, spread evenly over the certificate.
  const std::size_t total = at_x0.certified.size();
  const std::size_t take = std::min<std::size_t>(total, 64);
  double worst = at_x0.C_s;
  for (std::size_t k = 0; k < take; ++k) {
    const auto& cert = at_x0.certified[k * total / take];
    const DiscreteCurve c = concatenate(cert.curve, link);
    if (rep.single_step && !check_curve_separation(c, 2.0 * at_x0.C_s, balls, g.rho).pass)
      rep.passes_double = false;
    worst = std::max(worst, minimal_constant(c, worst, balls, g.rho));
    ++rep.curves;
  }
  rep.constant = worst;
  return rep;
}

}  // namespace kdl

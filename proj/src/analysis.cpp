#include "kdl/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "kdl/divergence.hpp"
#include "kdl/duality.hpp"
#include "kdl/ball.hpp"
#include "kdl/separation.hpp"

namespace kdl {

namespace {

struct KindName {
  AnalysisKind kind;
  const char* name;
  bool has_p;
};

constexpr KindName kKinds[] = {
    {AnalysisKind::Whitney, "whitney", false},      {AnalysisKind::Separation, "separation", false},
    {AnalysisKind::John, "john", false},            {AnalysisKind::EndMeasure, "end-measure", false},
    {AnalysisKind::Korn, "korn", true},             {AnalysisKind::KHat, "khat", true},
    {AnalysisKind::KornLower, "korn-lower", true},  {AnalysisKind::Divergence, "div", true},
    {AnalysisKind::InfSup, "infsup", false},        {AnalysisKind::Duality, "duality", true},
};

const KindName& info(AnalysisKind k) {
  for (const auto& e : kKinds)
    if (e.kind == k) return e;
  throw Error("unknown analysis");
}

}  // namespace

std::string Analysis::label() const {
  const auto& e = info(kind);
  return e.has_p ? std::string(e.name) + " " + format_p(p) : e.name;
}

Analysis parse_analysis(const std::string& text) {
  std::string t = text;
  for (char& c : t)
    if (c == '=' || c == ':') c = ' ';
  std::istringstream is(t);
  std::string name;
  is >> name;
  if (name == "end_measure") name = "end-measure";
  if (name == "korn_lower") name = "korn-lower";
  if (name == "divergence") name = "div";
  for (const auto& e : kKinds) {
    if (name != e.name) continue;
    Analysis a{e.kind, 2.0};
    std::string rest;
    if (is >> rest) {
      if (!e.has_p) throw Error("analysis '" + name + "' takes no exponent");
      std::size_t used = 0;
      try {
        a.p = std::stod(rest, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != rest.size()) throw Error("bad exponent '" + rest + "'");
      if (!(a.p > 1.0) || !std::isfinite(a.p)) throw Error("p must lie in (1, inf)");
      if (is >> rest) throw Error("trailing text in analysis '" + text + "'");
    }
    return a;
  }
  throw Error("unknown analysis '" + text + "'");
}

std::vector<std::pair<std::string, std::string>> analysis_constants(const Analysis& a) {
  const std::string p = format_p(a.p);
  switch (a.kind) {
    case AnalysisKind::Whitney: return {{"whitney_violations", ""}};
    case AnalysisKind::Separation: return {{"separation_failures", ""}};
    case AnalysisKind::John: return {{"C_J_lower", ""}};
    case AnalysisKind::EndMeasure: return {{"end_ratio_max", ""}};
    case AnalysisKind::Korn: return {{"K_p", p}};
    case AnalysisKind::KHat: return {{"K_hat_p", p}};
    case AnalysisKind::KornLower: return {{"C_K_lower_from_end", p}};
    case AnalysisKind::Divergence: return {{"C_d", p}};
    case AnalysisKind::InfSup: return {{"beta_infsup", "2"}};
    case AnalysisKind::Duality: {
      std::vector<std::pair<std::string, std::string>> out{
          {"duality_K_p", p}, {"duality_C_d", p}, {"duality_F", p}, {"duality_margin", p}, {"identity_residual", p}};
      if (a.p == 2.0) {
        out.emplace_back("duality_K_hat_p", p);
        out.emplace_back("duality_F_hat", p);
      }
      return out;
    }
  }
  return {};
}

AnalysisContext::AnalysisContext(std::string domain, std::string params, int resolution, RasterDomain raster)
    : domain_(std::move(domain)), params_(std::move(params)), resolution_(resolution), raster_(std::move(raster)) {}

const DomainGeometry& AnalysisContext::geometry() const {
  if (!geo_) geo_ = std::make_unique<DomainGeometry>(raster_);
  return *geo_;
}

const FieldSpace& AnalysisContext::space() const {
  if (!space_) space_ = std::make_unique<FieldSpace>(raster_);
  return *space_;
}

CellIndex AnalysisContext::base_cell(const AnalysisOptions& o) const {
  return o.x0 ? geometry().parse_cell(*o.x0) : geometry().default_base_cell();
}

const EndMeasureReport& AnalysisContext::end_measure(const AnalysisOptions& o) const {
  if (!end_ || end_->first != o.C_s)
    end_.emplace(o.C_s, end_measure_ratio(geometry(), base_cell(o), o.C_s, o.budget,
                                          medial_axis_points(geometry(), o.budget), o.workers));
  return end_->second;
}

namespace {

ConstantEstimate named(std::string name, double p, double value, BoundKind b, std::string method, double h,
                       std::string note = {}) {
  ConstantEstimate e;
  e.name = std::move(name);
  e.p = p;
  e.value = value;
  e.bound = b;
  e.method = std::move(method);
  e.h = h;
  e.note = std::move(note);
  return e;
}

/// Counterexample field of the separating ball with the largest lower bound.
/// All Whitney centers and medial-axis cells are tried; the few best by
/// |E| / |2B| are rebuilt with their end cells and scored by the exact formula.
std::optional<CounterexampleField> best_counterexample(const AnalysisContext& ctx, const AnalysisOptions& o,
                                                       double p, std::string* why) {
  const auto& g = ctx.geometry();
  const int n = g.domain.dim();
  auto balls = enumerate_separating_balls(g, ctx.base_cell(o), o.C_s, g.whitney.size(),
                                         medial_axis_points(g, g.domain.cell_count()), o.workers);
  std::vector<std::pair<double, Ball>> ranked;
  for (const auto& b : balls)
    if (b.separating && b.end_measure > std::pow(4.0, n) * ball_volume(b.ball.radius, n))
      ranked.emplace_back(b.end_measure / ball_volume(2 * b.ball.radius, n), b.ball);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  if (ranked.empty()) {
    *why = balls.empty() ? "no separating ball found" : "every end is within the trivial case";
    return std::nullopt;
  }
  BallAnalyzer analyzer(g.domain, ctx.base_cell(o));
  std::optional<CounterexampleField> best;
  double best_value = -1.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(ranked.size(), 8); ++i) {
    try {
      auto f = build_counterexample_field(ctx.space(), ranked[i].second, analyzer.analyze(ranked[i].second).end_cells());
      const double v = korn_lower_bound_formula(f.end_outside_2B, f.ball2_measure, p);
      if (v > best_value) {
        best_value = v;
        best = std::move(f);
      }
    } catch (const Error& e) {
      *why = e.what();
    }
  }
  return best;
}

std::vector<ConstantEstimate> compute(AnalysisContext& ctx, const Analysis& a, const AnalysisOptions& o) {
  const double h = ctx.raster().h();
  std::ostringstream note;
  switch (a.kind) {
    case AnalysisKind::Whitney: {
      const auto& g = ctx.geometry();
      const auto v = verify_whitney_invariants(g.whitney, g.domain, g.rho);
      std::size_t saturated = 0;
      for (const auto& q : g.whitney.cubes) saturated += q.saturated;
      note << "cubes=" << g.whitney.size() << ";saturated=" << saturated;
      if (!v.empty()) note << ";first=" << v.front().detail;
      ctx.show_whitney = true;
      return {named("whitney_violations", a.p, static_cast<double>(v.size()), BoundKind::TwoSided,
                    "dyadic_topdown", h, note.str())};
    }
    case AnalysisKind::Separation: {
      const auto& g = ctx.geometry();
      const auto rep = check_separation_property(g, ctx.base_cell(o), o.C_s, o.budget, o.workers);
      const std::size_t fails = std::max(rep.failures.size(), rep.failed_points.size());
      note << "C_s=" << format_number(o.C_s) << ";sampled=" << rep.sampled << ";cubes=" << rep.cube_count
           << ";certificate=" << (rep.certificate() ? "yes" : "no");
      return {named("separation_failures", a.p, static_cast<double>(fails), BoundKind::TwoSided,
                    "sampled_curve_search", h, note.str())};
    }
    case AnalysisKind::John: {
      const auto& g = ctx.geometry();
      const auto cert = john_constant_direct(g, ctx.base_cell(o), o.budget, o.workers);
      note << "samples=" << cert.samples.size();
      return {named("C_J_lower", a.p, cert.C_J_lower, BoundKind::Lower, "whitney_graph_bisection", h, note.str())};
    }
    case AnalysisKind::EndMeasure: {
      const auto& rep = ctx.end_measure(o);
      note << "C_s=" << format_number(o.C_s) << ";balls=" << rep.balls_examined
           << ";separating=" << rep.separating << ";threshold=" << format_number(rep.threshold)
           << ";verdict=" << rep.verdict();
      ctx.show_end = true;
      return {named("end_ratio_max", a.p, rep.max_ratio, BoundKind::Lower, "sampled_separating_balls", h,
                    note.str())};
    }
    case AnalysisKind::Korn:
    case AnalysisKind::KHat: {
      KornOptions ko;
      ko.p = a.p;
      ko.seed = o.seed;
      if (a.kind == AnalysisKind::KHat) {
        ko.mode = KornMode::KHat;
        ko.Q = default_cube(ctx.space());
        note << "Q_side_cells=" << ko.Q->side << ";";
      } else if (a.p != 2.0) {
        std::string why;
        if (auto f = best_counterexample(ctx, o, a.p, &why)) ko.extra_seeds.push_back(f->u);
      }
      auto r = estimate_korn(ctx.space(), ko);
      ctx.field = r.field;
      note << "max_norm_ratio=" << format_number(r.max_entry_ratio);
      if (a.p != 2.0) note << ";seeds=" << r.seeds_used << ";excluded=" << r.seeds_excluded;
      r.estimate.note = note.str();
      return {r.estimate};
    }
    case AnalysisKind::KornLower: {
      std::string why;
      const auto f = best_counterexample(ctx, o, a.p, &why);
      if (!f)
        return {named("C_K_lower_from_end", a.p, 1.0, BoundKind::Lower, "trivial", h, "use trivial bound: " + why)};
      auto e = korn_lower_bound_from_end(*f, a.p, h);
      note << "r=" << format_number(f->ball.radius) << ";end=" << format_number(f->end_measure)
           << ";end_outside_2B=" << format_number(f->end_outside_2B);
      e.note = note.str();
      return {e};
    }
    case AnalysisKind::Divergence: {
      if (a.p == 2.0) return {infsup_constant(ctx.space()).C_d};
      return {divergence_constant(ctx.space(), a.p, o.seed)};
    }
    case AnalysisKind::InfSup: return {infsup_constant(ctx.space()).beta};
    case AnalysisKind::Duality: {
      const auto r = duality_cross_check(ctx.space(), a.p, o.seed);
      const std::string q = "q=" + format_number(r.q);
      auto K = r.K;
      K.name = "duality_K_p";
      auto Cd = r.C_d;
      Cd.name = "duality_C_d";
      Cd.p = a.p;
      Cd.note = q + (Cd.note.empty() ? "" : ";" + Cd.note);
      std::vector<ConstantEstimate> out{
          K, Cd,
          named("duality_F", a.p, r.F, BoundKind::Upper, "explicit_chain", h,
                std::string("K_p<=F:") + (r.holds ? "holds" : "violated")),
          named("duality_margin", a.p, r.F / r.K.value, BoundKind::TwoSided, "F_over_K", h),
      };
      note << "interior_max=" << format_number(r.identity.interior_max)
           << ";boundary_max=" << format_number(r.identity.boundary_max) << ";10h=" << format_number(10 * h);
      out.push_back(named("identity_residual", a.p, r.identity.l1_average, BoundKind::TwoSided,
                          "random_cubic_l1_average", h, note.str()));
      if (a.p == 2.0) {
        auto Kh = r.K_hat;
        Kh.name = "duality_K_hat_p";
        Kh.note = "Q_side_cells=" + std::to_string(r.Q.side);
        out.push_back(Kh);
        out.push_back(named("duality_F_hat", a.p, r.F_hat, BoundKind::Upper, "explicit_chain", h,
                            "psi_term=" + format_number(r.psi_term) +
                                std::string(";K_hat<=F_hat:") + (r.holds_hat ? "holds" : "violated")));
      }
      return out;
    }
  }
  return {};
}

}  // namespace

std::vector<ResultRow> run_analysis(AnalysisContext& ctx, const Analysis& a, const AnalysisOptions& o) {
  const auto expected = analysis_constants(a);
  std::vector<ResultRow> rows;
  const auto t0 = std::chrono::steady_clock::now();
  std::string error;
  std::vector<ConstantEstimate> est;
  try {
    est = compute(ctx, a, o);
  } catch (const std::exception& e) {
    error = e.what();
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (std::size_t i = 0; i < expected.size(); ++i) {
    ResultRow r;
    if (error.empty() && i < est.size()) {
      r = make_row(est[i]);
    } else {
      r.value = std::nan("");
      r.status = "error: " + (error.empty() ? std::string("constant not produced") : error);
    }
    r.constant = expected[i].first;
    r.p = expected[i].second;
    r.domain = ctx.domain_id();
    r.params = ctx.params();
    r.resolution = ctx.resolution();
    r.wall_time = dt;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace kdl

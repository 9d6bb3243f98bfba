// kdl: generate domains, analyze them, run parameter sweeps.
// Exit codes: 0 success, 1 analysis failure, 2 I/O or configuration error.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "kdl/analysis.hpp"
#include "kdl/domain_io.hpp"
#include "kdl/parallel.hpp"
#include "kdl/svg.hpp"
#include "kdl/sweep.hpp"

using namespace kdl;

namespace {

constexpr int kOk = 0, kFailed = 1, kIoError = 2;

struct GenerateArgs {
  bool disk = false, square = false, lshape = false, cusp = false, flat_cusp = false, rooms = false,
       punctured_disk = false, punctured_slab = false;
  DomainSpec spec;
  std::string out;
};

struct AnalyzeArgs {
  std::string file;
  double pbm_h = 0.0;
  bool whitney = false, separation = false, john = false, end_measure = false, infsup = false;
  std::vector<double> korn, khat, korn_lower, div;
  std::vector<std::string> duality;
  bool duality_flag = false;
  double C_s = 1.0;
  std::string x0, svg, csv, field;
  std::size_t budget = 1024;
  int workers = 0;
  unsigned seed = 1;
};

struct SweepArgs {
  std::string config;
  int workers = 0;
  unsigned seed = 0;
  bool seed_set = false;
};

int cmd_generate(const GenerateArgs& a) {
  const std::pair<bool, Generator> flags[] = {
      {a.disk, Generator::Disk},          {a.square, Generator::Square},
      {a.lshape, Generator::LShape},      {a.cusp, Generator::Cusp},
      {a.flat_cusp, Generator::FlatCusp}, {a.rooms, Generator::RoomsAndCorridors},
      {a.punctured_disk, Generator::PuncturedDisk}, {a.punctured_slab, Generator::PuncturedSlab}};
  int chosen = 0;
  DomainSpec spec = a.spec;
  for (const auto& [on, g] : flags)
    if (on) {
      ++chosen;
      spec.generator = g;
    }
  if (chosen != 1) {
    std::cerr << "error: choose exactly one generator flag\n";
    return kIoError;
  }
  RasterDomain d;
  try {
    spec.validate();
    d = rasterize(spec);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  const std::string out = a.out.empty() ? to_string(spec.generator) + ".kdl" : a.out;
  try {
    write_kdl_file(out, d);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  CellCoord lo{1 << 30, 1 << 30, 1 << 30}, hi{-1, -1, -1};
  for (CellIndex c : d.cells()) {
    const CellCoord x = d.grid().coord(c);
    for (int k = 0; k < d.dim(); ++k) {
      lo[k] = std::min(lo[k], x[k]);
      hi[k] = std::max(hi[k], x[k]);
    }
  }
  const Grid& g = d.grid();
  std::cout << spec.id() << ": " << d.cell_count() << " cells, h=" << format_number(g.h()) << ", bbox";
  for (int k = 0; k < d.dim(); ++k)
    std::cout << ' ' << (k ? "x " : "") << '[' << format_number(g.origin()[k] + lo[k] * g.h()) << ", "
              << format_number(g.origin()[k] + (hi[k] + 1) * g.h()) << ']';
  std::cout << " -> " << out << '\n';
  return kOk;
}

int cmd_analyze(AnalyzeArgs a) {
  RasterDomain d;
  try {
    d = read_domain_file(a.file, a.pbm_h);
  } catch (const Error& e) {
    std::cerr << "error: " << a.file << ": " << e.what() << '\n';
    return kIoError;
  }
  std::vector<Analysis> list;
  auto add = [&](AnalysisKind k, const std::vector<double>& ps) {
    for (double p : ps) list.push_back({k, p});
  };
  if (a.whitney) list.push_back({AnalysisKind::Whitney});
  if (a.separation) list.push_back({AnalysisKind::Separation});
  if (a.john) list.push_back({AnalysisKind::John});
  if (a.end_measure) list.push_back({AnalysisKind::EndMeasure});
  add(AnalysisKind::Korn, a.korn);
  add(AnalysisKind::KHat, a.khat);
  add(AnalysisKind::KornLower, a.korn_lower);
  add(AnalysisKind::Divergence, a.div);
  if (a.infsup) list.push_back({AnalysisKind::InfSup});
  if (a.duality_flag) {
    if (a.duality.empty()) a.duality.emplace_back();
    for (const auto& v : a.duality) {
      try {
        list.push_back(parse_analysis("duality " + v));
      } catch (const Error& e) {
        std::cerr << "error: --duality: " << e.what() << '\n';
        return kIoError;
      }
    }
  }
  for (const auto& an : list)
    if (!(an.p > 1.0) || !std::isfinite(an.p)) {
      std::cerr << "error: p must lie in (1, inf)\n";
      return kIoError;
    }

  AnalysisOptions opt;
  opt.C_s = a.C_s;
  opt.budget = a.budget;
  opt.workers = a.workers > 0 ? a.workers : default_workers();
  opt.seed = a.seed;
  if (!a.x0.empty()) opt.x0 = a.x0;
  const std::string name = std::filesystem::path(a.file).stem().string();
  AnalysisContext ctx(name, "", static_cast<int>(std::lround(1.0 / d.h())), std::move(d));
  if (opt.x0) {
    try {
      ctx.base_cell(opt);
    } catch (const Error& e) {
      std::cerr << "error: --x0: " << e.what() << '\n';
      return kIoError;
    }
  }

  std::vector<ResultRow> rows;
  for (const auto& an : list) {
    auto r = run_analysis(ctx, an, opt);
    for (const auto& row : r)
      if (!row.ok()) std::cerr << "error: " << an.label() << ": " << row.status.substr(7) << '\n';
    rows.insert(rows.end(), r.begin(), r.end());
  }

  std::ofstream file;
  if (!a.csv.empty()) {
    file.open(a.csv, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot write " << a.csv << '\n';
      return kIoError;
    }
  }
  write_results(a.csv.empty() ? std::cout : file, rows);
  if (!a.svg.empty()) {
    std::ofstream os(a.svg);
    if (!os) {
      std::cerr << "error: cannot write " << a.svg << '\n';
      return kIoError;
    }
    write_svg(os, ctx, opt);
  }
  if (!a.field.empty()) {
    if (!ctx.field) {
      std::cerr << "error: --field needs a Korn analysis\n";
      return kIoError;
    }
    std::ofstream os(a.field, std::ios::binary);
    if (!os) {
      std::cerr << "error: cannot write " << a.field << '\n';
      return kIoError;
    }
    write_field_csv(os, *ctx.field);
  }
  for (const auto& r : rows)
    if (!r.ok()) return kFailed;
  return kOk;
}

int cmd_sweep(const SweepArgs& a) {
  SweepConfig c;
  try {
    c = read_sweep_config(a.config);
    if (a.workers > 0) c.workers = a.workers;
    if (a.seed_set) c.seed = a.seed;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  SweepSummary s;
  try {
    s = run_sweep(c, &std::cerr);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  std::cout << s.rows.size() << " rows (" << s.computed << " computed, " << s.reused << " reused, " << s.failed
            << " failed) -> " << (std::filesystem::path(c.output) / "results.csv").string() << '\n';
  return s.failed ? kFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Korn, divergence and John-domain analysis on raster domains"};
  app.require_subcommand(1);

  GenerateArgs g;
  auto* gen = app.add_subcommand("generate", "rasterize a domain generator into a KDL1 file");
  gen->add_flag("--disk", g.disk, "unit-diameter disk");
  gen->add_flag("--square", g.square, "unit square");
  gen->add_flag("--lshape", g.lshape, "L-shaped domain");
  gen->add_flag("--cusp", g.cusp, "outward cusp x_1^2 < x_2^(2 alpha)");
  gen->add_flag("--flat-cusp", g.flat_cusp, "3D flat cusp");
  gen->add_flag("--rooms", g.rooms, "rooms joined by corridors");
  gen->add_flag("--punctured-disk", g.punctured_disk, "disk with k! points removed on level k circles");
  gen->add_flag("--punctured-slab", g.punctured_slab, "3D slab with punctures");
  gen->add_option("--alpha", g.spec.alpha, "cusp exponent (> 1)")->capture_default_str();
  gen->add_option("--neck", g.spec.neck_width, "corridor width")->capture_default_str();
  gen->add_option("--rooms-count", g.spec.room_count, "number of rooms")->capture_default_str();
  gen->add_option("--levels", g.spec.levels, "puncture levels K")->capture_default_str();
  gen->add_option("--res", g.spec.resolution, "cells per unit length")->capture_default_str();
  gen->add_option("-o,--output", g.out, "output file (default <generator>.kdl)");

  AnalyzeArgs a;
  auto* an = app.add_subcommand("analyze", "run analyses on a domain file and print result rows as CSV");
  an->add_option("file", a.file, "KDL1 or PBM domain file")->required();
  an->add_option("--pbm-h", a.pbm_h, "grid spacing for PBM input");
  an->add_flag("--whitney", a.whitney, "Whitney decomposition invariants");
  an->add_flag("--separation", a.separation, "separation property at --cs");
  an->add_flag("--john", a.john, "direct John constant lower estimate");
  an->add_flag("--end-measure", a.end_measure, "maximal end measure ratio at --cs");
  an->add_option("--korn", a.korn, "Korn constant K_p (repeatable)");
  an->add_option("--khat", a.khat, "Korn constant with cube term (repeatable)");
  an->add_option("--korn-lower", a.korn_lower, "Korn lower bound from the maximal end (repeatable)");
  an->add_option("--div", a.div, "divergence-equation constant C_d(p) (repeatable)");
  an->add_flag("--infsup", a.infsup, "inf-sup constant");
  an->add_option("--duality", a.duality, "duality cross-check at p (default 2)")->expected(0, 1);
  an->add_option("--cs", a.C_s, "ball factor C_s")->capture_default_str();
  an->add_option("--x0", a.x0, "base cell i,j[,k] (default: max distance to the boundary)");
  an->add_option("--svg", a.svg, "write a figure");
  an->add_option("--budget", a.budget, "sample budget")->capture_default_str();
  an->add_option("--workers", a.workers, "worker threads (default KDL_WORKERS or all cores)");
  an->add_option("--seed", a.seed, "random seed")->capture_default_str();
  an->add_option("--csv", a.csv, "write rows here instead of stdout");
  an->add_option("--field", a.field, "write the extremal Korn field as CSV");

  SweepArgs s;
  auto* sw = app.add_subcommand("sweep", "run a parameter sweep from a config file");
  sw->add_option("--config", s.config, "flat key = value config")->required();
  sw->add_option("--workers", s.workers, "worker threads (default KDL_WORKERS or all cores)");
  sw->add_option("--seed", s.seed, "random seed (overrides the config)")
      ->each([&](const std::string&) { s.seed_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kIoError;
  }
  // --duality without a value.
  if (an->count("--duality") > 0) a.duality_flag = true;

  if (*gen) return cmd_generate(g);
  if (*an) return cmd_analyze(a);
  return cmd_sweep(s);
}

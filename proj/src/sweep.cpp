#include "kdl/sweep.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "kdl/parallel.hpp"

namespace kdl {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class T>
T parse_value(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  T x{};
  if (!(is >> x) || !(is >> std::ws).eof()) throw ConfigError("bad value '" + v + "' for " + key);
  return x;
}

void write_atomic(const fs::path& path, const std::vector<ResultRow>& rows, bool timing) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + tmp.string());
    write_results(os, rows, timing);
    if (!os) throw ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<ResultRow> read_if_present(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return {};
  try {
    return read_results(is);
  } catch (const Error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace

void SweepConfig::validate() const {
  if (generators.empty()) throw ConfigError("config needs at least one generator");
  if (resolutions.empty()) throw ConfigError("config needs at least one resolution");
  if (analyses.empty()) throw ConfigError("config needs at least one analysis");
  if (necks.empty() || room_counts.empty() || alphas.empty() || levels.empty())
    throw ConfigError("parameter lists must be nonempty");
  for (std::size_t i = 1; i < resolutions.size(); ++i)
    if (resolutions[i] <= resolutions[i - 1]) throw ConfigError("resolutions must be strictly increasing");
  if (workers < 0) throw ConfigError("workers must be positive");
  if (!(C_s > 0.0)) throw ConfigError("cs must be positive");
  if (budget == 0) throw ConfigError("budget must be positive");
  for (const auto& s : sweep_domains(*this)) {
    try {
      s.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
}

SweepConfig parse_sweep_config(std::istream& is) {
  SweepConfig c;
  bool seen_neck = false, seen_m = false, seen_alpha = false, seen_levels = false;
  std::string line;
  int lineno = 0;
  try {
    while (std::getline(is, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key = value");
      const std::string key = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
      auto reset_once = [](bool& seen, auto& list) {
        if (!seen) list.clear();
        seen = true;
      };
      if (key == "generator") {
        c.generators.push_back(generator_from_string(v));
      } else if (key == "neck") {
        reset_once(seen_neck, c.necks);
        c.necks.push_back(parse_value<double>(key, v));
      } else if (key == "rooms-count" || key == "room_count") {
        reset_once(seen_m, c.room_counts);
        c.room_counts.push_back(parse_value<int>(key, v));
      } else if (key == "alpha") {
        reset_once(seen_alpha, c.alphas);
        c.alphas.push_back(parse_value<double>(key, v));
      } else if (key == "levels") {
        reset_once(seen_levels, c.levels);
        c.levels.push_back(parse_value<int>(key, v));
      } else if (key == "resolution" || key == "res") {
        c.resolutions.push_back(parse_value<int>(key, v));
      } else if (key == "analysis") {
        c.analyses.push_back(parse_analysis(v));
      } else if (key == "output") {
        c.output = v;
      } else if (key == "workers") {
        c.workers = parse_value<int>(key, v);
      } else if (key == "seed") {
        c.seed = parse_value<unsigned>(key, v);
      } else if (key == "cs") {
        c.C_s = parse_value<double>(key, v);
      } else if (key == "budget") {
        c.budget = parse_value<std::size_t>(key, v);
      } else if (key == "x0") {
        c.x0 = v;
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    }
  } catch (const ConfigError& e) {
    throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
  } catch (const Error& e) {
    throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
  }
  c.validate();
  return c;
}

SweepConfig read_sweep_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  return parse_sweep_config(is);
}

std::string spec_params(const DomainSpec& s) {
  std::ostringstream os;
  switch (s.generator) {
    case Generator::Cusp:
    case Generator::FlatCusp: os << "alpha=" << format_number(s.alpha); break;
    case Generator::RoomsAndCorridors: os << "neck=" << format_number(s.neck_width) << ";m=" << s.room_count; break;
    case Generator::PuncturedDisk:
    case Generator::PuncturedSlab: os << "K=" << s.levels; break;
    default: break;
  }
  return os.str();
}

std::vector<DomainSpec> sweep_domains(const SweepConfig& c) {
  std::vector<DomainSpec> out;
  for (Generator g : c.generators) {
    std::vector<DomainSpec> base;
    DomainSpec s;
    s.generator = g;
    switch (g) {
      case Generator::RoomsAndCorridors:
        for (double n : c.necks)
          for (int m : c.room_counts) {
            s.neck_width = n;
            s.room_count = m;
            base.push_back(s);
          }
        break;
      case Generator::Cusp:
      case Generator::FlatCusp:
        for (double a : c.alphas) {
          s.alpha = a;
          base.push_back(s);
        }
        break;
      case Generator::PuncturedDisk:
      case Generator::PuncturedSlab:
        for (int k : c.levels) {
          s.levels = k;
          base.push_back(s);
        }
        break;
      default: base.push_back(s);
    }
    for (auto b : base)
      for (int r : c.resolutions) {
        b.resolution = r;
        out.push_back(b);
      }
  }
  return out;
}

SweepSummary run_sweep(const SweepConfig& c, std::ostream* log) {
  c.validate();
  const fs::path dir(c.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string());
  const fs::path results = dir / "results.csv", timings = dir / "timings.csv";

  std::map<std::string, ResultRow> done, times;
  for (auto& r : read_if_present(results))
    if (r.ok()) done.emplace(r.key(), std::move(r));
  for (auto& r : read_if_present(timings)) times.emplace(r.key(), std::move(r));

  const auto specs = sweep_domains(c);
  struct Slot {
    std::size_t spec;
    std::size_t analysis;
    std::string key;
  };
  std::vector<Slot> order;
  std::vector<std::vector<std::size_t>> todo(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (std::size_t a = 0; a < c.analyses.size(); ++a) {
      bool missing = false;
      for (const auto& [name, p] : analysis_constants(c.analyses[a])) {
        ResultRow probe;
        probe.domain = to_string(specs[i].generator);
        probe.params = spec_params(specs[i]);
        probe.resolution = specs[i].resolution;
        probe.constant = name;
        probe.p = p;
        order.push_back({i, a, probe.key()});
        missing = missing || !done.count(probe.key());
      }
      if (missing) todo[i].push_back(a);
    }
  }

  SweepSummary sum;
  std::mutex mu;
  auto flush = [&] {
    std::vector<ResultRow> table, timing;
    for (const auto& s : order) {
      if (auto it = done.find(s.key); it != done.end()) {
        table.push_back(it->second);
        if (auto t = times.find(s.key); t != times.end()) timing.push_back(t->second);
      }
    }
    write_atomic(results, table, false);
    write_atomic(timings, timing, true);
    return table;
  };

  std::vector<std::size_t> groups;
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (!todo[i].empty()) groups.push_back(i);
  const int workers = c.workers > 0 ? c.workers : default_workers();
  const int outer = std::max(1, std::min<int>(workers, static_cast<int>(groups.size())));
  AnalysisOptions opt;
  opt.C_s = c.C_s;
  opt.budget = c.budget;
  opt.seed = c.seed;
  opt.workers = std::max(1, workers / outer);
  if (!c.x0.empty()) opt.x0 = c.x0;

  parallel_for(groups.size(), outer, [&](int, std::size_t gi) {
    const DomainSpec& spec = specs[groups[gi]];
    std::vector<ResultRow> rows;
    try {
      AnalysisContext ctx(to_string(spec.generator), spec_params(spec), spec.resolution, rasterize(spec));
      for (std::size_t a : todo[groups[gi]]) {
        auto r = run_analysis(ctx, c.analyses[a], opt);
        rows.insert(rows.end(), r.begin(), r.end());
      }
    } catch (const std::exception& e) {
      // The domain itself failed: one error row per expected constant.
      for (std::size_t a : todo[groups[gi]])
        for (const auto& [name, p] : analysis_constants(c.analyses[a])) {
          ResultRow r;
          r.domain = to_string(spec.generator);
          r.params = spec_params(spec);
          r.resolution = spec.resolution;
          r.constant = name;
          r.p = p;
          r.value = std::nan("");
          r.status = std::string("error: ") + e.what();
          rows.push_back(std::move(r));
        }
    }
    std::lock_guard<std::mutex> lock(mu);
    for (auto& r : rows) {
      ++sum.computed;
      times[r.key()] = r;
      if (log)
        *log << r.domain << ' ' << r.params << " res=" << r.resolution << ' ' << r.constant
             << (r.p.empty() ? "" : "(p=" + r.p + ")") << " = " << format_number(r.value) << ' ' << r.status << '\n'
             << std::flush;
      const std::string k = r.key();
      done[k] = std::move(r);
    }
    flush();
  });

  sum.rows = flush();
  for (const auto& r : sum.rows) sum.failed += !r.ok();
  sum.reused = sum.rows.size() - std::min(sum.rows.size(), sum.computed);
  return sum;
}

}  // namespace kdl

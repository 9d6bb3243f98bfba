#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kdl/analysis.hpp"

namespace kdl {

/// Raised for unreadable or invalid sweep configurations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Flat "key = value" text, one pair per line, '#' starts a comment. Keys that
/// name lists may repeat: generator, neck, rooms-count, alpha, levels,
/// resolution, analysis. Scalars: output, workers, seed, cs, budget, x0.
struct SweepConfig {
  std::vector<Generator> generators;
  std::vector<double> necks{0.25};
  std::vector<int> room_counts{2};
  std::vector<double> alphas{2.0};
  std::vector<int> levels{3};
  std::vector<int> resolutions;
  std::vector<Analysis> analyses;
  std::string output = "sweep_out";
  int workers = 0;  ///< 0: KDL_WORKERS or hardware concurrency
  unsigned seed = 1;
  double C_s = 1.0;
  std::size_t budget = 1024;
  std::string x0;

  /// Throws ConfigError unless lists are nonempty and resolutions strictly increase.
  void validate() const;
};

SweepConfig parse_sweep_config(std::istream& is);
SweepConfig read_sweep_config(const std::string& path);

/// Domain specs of the parameter grid in deterministic order: generators as
/// listed, then the parameters relevant to each generator (first key slowest),
/// resolution fastest.
std::vector<DomainSpec> sweep_domains(const SweepConfig& c);

/// "neck=0.25;m=2": the parameters of the spec that affect its generator.
std::string spec_params(const DomainSpec& s);

struct SweepSummary {
  std::vector<ResultRow> rows;  ///< final table in canonical order
  std::size_t computed = 0;     ///< rows evaluated in this run
  std::size_t reused = 0;       ///< rows taken from an existing table
  std::size_t failed = 0;       ///< rows with an error status
};

/// Runs the cross product of domains and analyses. Writes
/// <output>/results.csv (no timings, byte-deterministic) and
/// <output>/timings.csv after each domain finishes. Rows already present
/// with status ok in results.csv are kept and not recomputed.
SweepSummary run_sweep(const SweepConfig& c, std::ostream* log = nullptr);

}  // namespace kdl

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kdl/geometry.hpp"
#include "kdl/john.hpp"
#include "kdl/korn.hpp"
#include "kdl/report.hpp"

namespace kdl {

enum class AnalysisKind {
  Whitney,
  Separation,
  John,
  EndMeasure,
  Korn,
  KHat,
  KornLower,
  Divergence,
  InfSup,
  Duality,
};

struct Analysis {
  AnalysisKind kind = AnalysisKind::John;
  double p = 2.0;  ///< exponent for the functional analyses
  /// "john", "korn 2", ... (the form accepted by parse_analysis).
  std::string label() const;
};

/// Parses "whitney", "separation", "john", "end-measure", "infsup", and
/// "korn <p>", "khat <p>", "korn-lower <p>", "div <p>", "duality <p>"
/// (the exponent may also follow '=' or ':'; it defaults to 2).
Analysis parse_analysis(const std::string& text);

struct AnalysisOptions {
  double C_s = 1.0;                ///< separation / end-measure ball factor
  std::optional<std::string> x0;   ///< base cell "i,j[,k]"; default max rho
  std::size_t budget = 1024;       ///< sampled points / balls
  int workers = 1;
  unsigned seed = 1;
};

/// Row constants an analysis reports, in order, as (constant, p) pairs.
std::vector<std::pair<std::string, std::string>> analysis_constants(const Analysis& a);

/// One domain with lazily built shared state. Not thread safe.
class AnalysisContext {
 public:
  AnalysisContext(std::string domain, std::string params, int resolution, RasterDomain raster);

  const std::string& domain_id() const { return domain_; }
  const std::string& params() const { return params_; }
  int resolution() const { return resolution_; }
  const RasterDomain& raster() const { return raster_; }

  const DomainGeometry& geometry() const;
  const FieldSpace& space() const;
  CellIndex base_cell(const AnalysisOptions& o) const;
  /// Cached per C_s; ball centers are sampled Whitney centers plus sampled
  /// medial-axis cells. Carries the end cells of the maximizing ball.
  const EndMeasureReport& end_measure(const AnalysisOptions& o) const;

  /// Latest outputs kept for the figure.
  std::optional<DiscreteVectorField> field;  ///< extremal Korn field
  bool show_whitney = false;
  bool show_end = false;

 private:
  std::string domain_, params_;
  int resolution_;
  RasterDomain raster_;
  mutable std::unique_ptr<DomainGeometry> geo_;
  mutable std::unique_ptr<FieldSpace> space_;
  mutable std::optional<std::pair<double, EndMeasureReport>> end_;
};

/// Runs one analysis. Failures become rows with status "error: <message>" and
/// value nan, one per constant of analysis_constants.
std::vector<ResultRow> run_analysis(AnalysisContext& ctx, const Analysis& a, const AnalysisOptions& o);

}  // namespace kdl

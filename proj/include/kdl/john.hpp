#pragma once

#include <string>
#include <vector>

#include "kdl/ball.hpp"
#include "kdl/geometry.hpp"

namespace kdl {

/// min over vertices t > 0 of rho(gamma(t)) / t, with t the arclength from the
/// first point. Infinity for curves of a single point.
double curve_john_ratio(const DiscreteCurve& c, const DomainGeometry& g);

struct JohnSample {
  Point x;
  double constant = 0.0;  ///< best dense-verified ratio found for this sample
  DiscreteCurve curve;
};

struct JohnCertificate {
  CellIndex x0 = -1;
  double C_J_lower = 0.0;
  std::size_t argmin = 0;  ///< sample attaining C_J_lower
  std::vector<JohnSample> samples;
};

/// For each sampled x, binary search on C over the Whitney face graph: C is
/// feasible when the base cube is reachable through cubes v with
/// rho(v) >= C * L(v), L the path length from x. Each feasible path is
/// verified on its dense polyline; the per-sample constant is the best
/// verified ratio, and C_J_lower is their minimum.
JohnCertificate john_constant_direct(const DomainGeometry& g, CellIndex x0,
                                     std::size_t sample_budget, int workers = 1);

struct BEnd {
  Ball ball;
  double C_s = 1.0;
  bool separating = false;
  std::size_t components = 0;
  std::size_t cell_count = 0;
  double end_measure = 0.0;
  double ratio = 0.0;  ///< end measure over the analytic ball measure
  std::vector<CellIndex> end_cells;  ///< filled only on request
};

/// Balls B(z, C_s rho(z)) for z in the sampled Whitney centers plus the extra
/// centers; for each, the union of components of the domain minus the sphere
/// that lie outside the ball and miss x0.
std::vector<BEnd> enumerate_separating_balls(const DomainGeometry& g, CellIndex x0, double C_s,
                                             std::size_t budget,
                                             const std::vector<Point>& extra_centers = {},
                                             int workers = 1, bool keep_cells = false);

struct EndMeasureReport {
  std::size_t balls_examined = 0;
  std::size_t separating = 0;
  double max_ratio = 0.0;
  BEnd argmax;  ///< carries its end cells
  double threshold = 0.0;  ///< 4^n * 4
  bool john_consistent = true;
  std::string verdict() const { return john_consistent ? "John-consistent" : "not John at this scale"; }
};

EndMeasureReport end_measure_ratio(const DomainGeometry& g, CellIndex x0, double C_s,
                                   std::size_t budget, const std::vector<Point>& extra_centers = {},
                                   int workers = 1);

struct AstalaGehringResult {
  bool hypothesis_holds = true;
  std::size_t failing_k = 0;
  double c = 0.0;  ///< smallest c with sum_{j>=k} x_j^alpha <= c x_k^alpha
  std::string verdict;
};

/// Checks sum_{j>=k} x_j <= b x_k for all k, then measures the constant of the
/// power-alpha tail sums.
AstalaGehringResult astala_gehring_check(const std::vector<double>& x, double b, double alpha);

}  // namespace kdl

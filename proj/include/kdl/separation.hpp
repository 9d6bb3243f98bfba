#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kdl/ball.hpp"
#include "kdl/geometry.hpp"

namespace kdl {

/// A point y on the past of the curve that lies outside the ball around
/// gamma(t) yet shares the base point's component of the domain minus the
/// sphere. The component is identified by the base cell, so both labels equal
/// the base cell index.
struct SeparationViolation {
  Point x;                  ///< curve start
  std::size_t t_index = 0;  ///< vertex index of gamma(t)
  double t = 0.0;           ///< arclength of gamma(t) from x
  Point y;
  Ball ball;
  CellIndex label_y = -1;
  CellIndex label_x0 = -1;
};

struct CurveVerdict {
  bool pass = true;
  std::size_t contained_steps = 0;  ///< past inside the ball
  std::size_t separated_steps = 0;  ///< past outside the ball lies in ends
  std::optional<SeparationViolation> violation;
};

/// Evaluates the separation dichotomy at every vertex of a curve running from
/// x (first point) to the analyzer's base point. A past point counts as inside
/// the ball unless its cell lies strictly outside the discrete sphere.
CurveVerdict check_curve_separation(const DiscreteCurve& c, double C_s, BallAnalyzer& balls,
                                    const DistanceField& rho);
CurveVerdict check_curve_separation(const DiscreteCurve& c, CellIndex x0, double C_s,
                                    const RasterDomain& d, const DistanceField& rho);

/// Candidate curves from arbitrary points to a fixed base point: the straight
/// segment, the widest path (max-min rho, then shortest) and the
/// quasi-hyperbolic geodesic in the face-adjacency graph of Whitney cubes.
class CurveSearch {
 public:
  CurveSearch(const DomainGeometry& g, CellIndex x0);

  struct Candidate {
    std::string method;
    DiscreteCurve curve;
  };
  /// Raw (unsimplified) candidates from x, in preference order.
  std::vector<Candidate> candidates(const Point& x) const;
  /// Cube path from the cube of x to the base cube along a tree.
  std::vector<int> widest_path(int from) const { return walk(widest_parent_, from); }
  std::vector<int> hyperbolic_path(int from) const { return walk(qh_parent_, from); }
  /// Polyline x -> cube centers (through shared-face midpoints) -> base point.
  DiscreteCurve path_curve(const Point& x, const std::vector<int>& cubes) const;

  const Point& base_point() const { return x0_; }
  CellIndex base_cell() const { return x0_cell_; }
  const DomainGeometry& geometry() const { return *g_; }

 private:
  std::vector<int> walk(const std::vector<int>& parent, int from) const;

  const DomainGeometry* g_;
  CellIndex x0_cell_;
  Point x0_;
  int base_cube_;
  std::vector<double> value_;  // rho at cube centers
  std::vector<int> widest_parent_, qh_parent_;
};

struct SampleCertificate {
  Point x;
  DiscreteCurve curve;
  std::string method;  ///< e.g. "widest+simplified"
  std::size_t separated_steps = 0;
};

/// Tries the candidates (simplified first, then raw) and returns the first
/// passing one. On failure, `last_violation` holds the first violation of the
/// preferred candidate.
std::optional<SampleCertificate> find_separation_curve(
    const Point& x, double C_s, const CurveSearch& search, BallAnalyzer& balls,
    std::optional<SeparationViolation>* last_violation = nullptr);

struct SeparationReport {
  CellIndex x0 = -1;
  double C_s = 1.0;
  std::size_t budget = 0;
  std::size_t sampled = 0;
  std::size_t cube_count = 0;
  std::vector<SampleCertificate> certified;   ///< in sample order
  std::vector<SeparationViolation> failures;  ///< one per failed sample
  std::vector<Point> failed_points;

  bool certificate() const { return failures.empty() && failed_points.empty(); }
  double coverage() const {
    return cube_count ? static_cast<double>(sampled) / static_cast<double>(cube_count) : 0.0;
  }
};

/// Runs the curve search for a deterministic sample of Whitney cube centers.
/// The result is a certificate for the sampled set or the set of samples for
/// which no passing curve was found (a semidecision, not a proof).
SeparationReport check_separation_property(const DomainGeometry& g, CellIndex x0, double C_s,
                                           std::size_t sample_budget, int workers = 1);

struct TransferReport {
  CellIndex x0 = -1, x1 = -1;
  double C_s = 1.0;
  bool single_step = false;  ///< x1 within rho(x0)/1000 of x0
  bool passes_double = true;  ///< single step: all transferred curves pass at 2*C_s
  /// Smallest constant (within bisection tolerance) at which every certified
  /// curve, extended from x0 to x1, passes for base point x1.
  double constant = 1.0;
  std::size_t curves = 0;
};

/// Composes the certified curves of `at_x0` with a path from x0 to x1 and
/// measures the separation constant for the new base point.
TransferReport base_point_transfer(const DomainGeometry& g, const SeparationReport& at_x0,
                                   CellIndex x1, const Point* x1_point = nullptr);

}  // namespace kdl

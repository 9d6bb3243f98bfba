#pragma once

#include <optional>
#include <vector>

#include "kdl/ball.hpp"
#include "kdl/estimate.hpp"
#include "kdl/field.hpp"

namespace kdl {

enum class KornMode { K, KHat };

/// Axis-aligned block of cells [anchor, anchor + side) in every axis.
struct CellCube {
  CellCoord anchor{0, 0, 0};
  int side = 1;
  bool contains(const CellCoord& c, int dim) const {
    for (int a = 0; a < dim; ++a)
      if (c[a] < anchor[a] || c[a] >= anchor[a] + side) return false;
    return true;
  }
};

/// Throws unless every cell of the cube grown by one cell is a true cell.
void check_cube_margin(const RasterDomain& d, const CellCube& q);

struct CounterexampleField {
  Ball ball;
  std::vector<CellIndex> end;  ///< E_B, sorted
  Eigen::VectorXd phi;         ///< cutoff per true cell (local index)
  DiscreteVectorField v, w, u; ///< u = v + w
  double C_tilde = 0.0;
  double curl_integral = 0.0;   ///< sum_k h^n (d v_1/d x_2 - d v_2/d x_1)
  double end_measure = 0.0;     ///< |E_B|
  double end_outside_2B = 0.0;  ///< |E_B \ B(z, 2r)|
  double ball2_measure = 0.0;   ///< analytic |B(z, 2r)|
};

/// Rotation about the ball center cut off by phi on the end, plus the rigid
/// correction that zeroes the mean rotation. phi vanishes off E_B and on end
/// cells that touch a non-end true cell, rises as (|x - z| - r) / (r - h) and
/// is 1 from |x - z| >= 2r - h on, so that the centered stencil of every end
/// cell outside B(z, 2r) sees phi = 1 only.
/// Throws "use trivial bound" unless |E_B| > 4^n |B| and E_B leaves B(z, 4r).
CounterexampleField build_counterexample_field(const FieldSpace& s, const Ball& ball,
                                               const std::vector<CellIndex>& end_cells);

/// ((2/3)^p |E_B \ 2B| / (3^p |2B|))^(1/p).
double korn_lower_bound_formula(double end_outside_2B, double ball2_measure, double p);
ConstantEstimate korn_lower_bound_from_end(const CounterexampleField& f, double p, double h);

struct KornOptions {
  double p = 2.0;
  KornMode mode = KornMode::K;
  std::optional<CellCube> Q;  ///< required for KHat
  int seeds = 8;              ///< p != 2: number of ascent starts (at least 8)
  int ascent_iterations = 300;
  unsigned seed = 1;
  std::vector<DiscreteVectorField> extra_seeds;  ///< p != 2: e.g. a counterexample field
  double tol = 1e-11;
};

struct KornResult {
  ConstantEstimate estimate;
  DiscreteVectorField field;     ///< extremal (or best found) field
  double max_entry_ratio = 0.0;  ///< the field's quotient in the entrywise max norm
  double residual = 0.0;         ///< p = 2: eigen residual
  int seeds_used = 0;
  int seeds_excluded = 0;        ///< starts with Du = 0
};

/// p = 2: extremal generalized eigenvalue of the epsilon form against the Du
/// form on fields with zero mean rotation (K) or with the Q term added (KHat);
/// two-sided up to solver tolerance. p != 2: projected ascent, lower bound.
/// Pointwise norms are Frobenius; the entrywise max-norm constant lies within
/// a factor n of the reported value.
KornResult estimate_korn(const FieldSpace& s, const KornOptions& opt);

/// Quotient ||Du||_p / ||eps(u)||_p (KHat: / (||eps||_p + ||Du||_{p,Q})).
double korn_quotient(const DiscreteVectorField& u, double p, KornMode mode = KornMode::K,
                     const std::optional<CellCube>& Q = std::nullopt);

/// max over fields of min over antisymmetric S of ||Du - S|| / ||eps(u)|| at
/// p = 2, computed without the mean-rotation constraint by removing the mean
/// of kappa inside the form.
ConstantEstimate korn_tilde_estimate(const FieldSpace& s, double tol = 1e-11);

}  // namespace kdl

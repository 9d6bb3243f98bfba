#pragma once

#include <Eigen/Core>
#include <array>
#include <string>

#include "kdl/estimate.hpp"
#include "kdl/field.hpp"
#include "kdl/korn.hpp"

namespace kdl {

/// Vector field whose components are cubic polynomials with random
/// coefficients in [-1, 1].
class CubicField {
 public:
  CubicField(int dim, unsigned seed);
  Point value(const Point& x) const;
  /// d^2 u_i / dx_j dx_k.
  double second(int i, int j, int k, const Point& x) const;

 private:
  int dim_;
  std::vector<std::array<int, 3>> monomials_;
  std::array<std::vector<double>, 3> coef_;
};

struct IdentityResidual {
  double l1_average = 0.0;   ///< mean over cells of the per-cell max residual / scale
  double interior_max = 0.0; ///< max over cells whose stencils are all centered, / scale
  double boundary_max = 0.0; ///< max over the remaining cells, / scale
  double scale = 0.0;        ///< max |d^2 u| over the cells
};

/// d_j d_k u_i against d_j eps_ik + d_k eps_ij - d_i eps_jk with all
/// derivatives discrete, compared with the analytic second derivatives of a
/// random cubic field; worst over `fields` seeds.
IdentityResidual identity_residual(const FieldSpace& s, unsigned seed = 1, int fields = 3);

/// Constant of the duality chain: K_p <= F(C_d(q)).
/// p = 2: sqrt(1 + n(n-1)(1 + 2 C_d)^2); otherwise 1 + 2n(n-1)(1 + 2n C_d).
double duality_F(int n, double p, double C_d);
/// p = 2 bound for K_hat in the quadrature form:
/// sqrt(2) max(n (1 + 2 C_d)(1 + s), s), s = |Omega|^(1/2) ||psi||_2.
double duality_F_hat(int n, double C_d, double s);

/// Tensor-product quadratic B-spline bump supported on Q with discrete
/// integral 1 (cell field, local index).
Eigen::VectorXd cube_bump(const FieldSpace& s, const CellCube& q);

/// Largest cube centered at the cell of maximal rho that keeps a one-cell margin.
CellCube default_cube(const FieldSpace& s);

struct DualityReport {
  double p = 2.0, q = 2.0;
  ConstantEstimate K;        ///< K_p
  ConstantEstimate C_d;      ///< at q
  double F = 0.0;
  bool holds = false;        ///< K <= F
  ConstantEstimate K_hat;    ///< p = 2 only
  CellCube Q;
  double psi_term = 0.0;     ///< |Omega|^(1/2) ||psi||_2
  double F_hat = 0.0;
  bool holds_hat = false;
  IdentityResidual identity;
};

DualityReport duality_cross_check(const FieldSpace& s, double p, unsigned seed = 1);

}  // namespace kdl

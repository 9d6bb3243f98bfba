#pragma once

#include <Eigen/Core>
#include <vector>

#include "kdl/estimate.hpp"
#include "kdl/field.hpp"

namespace kdl {

/// Staggered (MAC) velocity space: one normal component per face shared by two
/// true cells. Faces touching a false cell carry the zero boundary value and
/// are not unknowns. Face f along `axis` sits between cell `minus` and the
/// next cell in +axis direction.
class FaceSpace {
 public:
  explicit FaceSpace(const FieldSpace& s);

  const FieldSpace& cells() const { return *s_; }
  int dim() const { return s_->dim(); }
  std::size_t size() const { return axis_.size(); }
  int axis(std::size_t f) const { return axis_[f]; }
  std::size_t minus_cell(std::size_t f) const { return minus_[f]; }
  Point center(std::size_t f) const;
  /// Face of the same axis family shifted one cell along `dir`, or -1.
  std::int64_t shifted(std::size_t f, int dir, int side) const;
  /// Active face on side `side` of cell k along `axis`, or -1.
  std::int64_t face_of_cell(std::size_t k, int axis, int side) const;

  /// Cell divergence: (D v)_k = sum_axis (v_{+} - v_{-}) / h, size N x F.
  SparseMatrix divergence() const;
  /// Gradient of the face field per axis family: one row per pair of
  /// neighbouring faces (difference / h) and per face next to an inactive
  /// face (value / h). Its Gram matrix is the vector Dirichlet form.
  SparseMatrix face_gradient() const;
  /// face_gradient()^T face_gradient(), the discrete |v|_{H^1_0}^2 / cell volume.
  SparseMatrix dirichlet() const;

 private:
  const FieldSpace* s_;
  std::vector<int> axis_;
  std::vector<std::size_t> minus_;
  std::vector<std::int64_t> of_cell_;  // (k * 3 + axis) * 2 + side
};

struct InfSupResult {
  ConstantEstimate beta;   ///< beta_infsup
  ConstantEstimate C_d;    ///< 1 / beta, H^1_0 seminorm convention
  Eigen::VectorXd pressure;  ///< minimizing mean-zero pressure, unit Euclidean norm
  double residual = 0.0;
};

/// Smallest nonzero singular value of the MAC divergence between the vector
/// H^1_0 seminorm and the mean-zero L^2 norm, as the smallest eigenvalue of the
/// pressure Schur complement D L^-1 D^T (Lanczos on its inverse).
InfSupResult infsup_constant(const FieldSpace& s, double tol = 1e-12);

struct DivergenceSolution {
  Eigen::VectorXd v;            ///< face values
  double ratio = 0.0;           ///< (||v||_p + ||Dv||_p) / ||f||_p
  double residual = 0.0;        ///< max |div v - f|
  int iterations = 0;           ///< IRLS iterations (p != 2)
  ConstantEstimate estimate;    ///< C_d sample, bound = upper for this f
};

/// v with zero boundary values solving div v = f: minimum of ||v||^2 + ||Dv||^2
/// for p = 2; iteratively reweighted least squares on the entrywise p-norms
/// otherwise. f is a cell field (local index) with zero mean.
DivergenceSolution solve_divergence(const FieldSpace& s, const Eigen::VectorXd& f, double p);

/// L^p norms of face fields in the entrywise convention used by the ratio.
double face_lp_norm(const FaceSpace& fs, const Eigen::VectorXd& v, double p);
double face_gradient_lp_norm(const FaceSpace& fs, const Eigen::VectorXd& v, double p);
double cell_lp_norm(const FieldSpace& s, const Eigen::VectorXd& f, double p);

/// Mean-zero test right-hand sides: the worst p = 2 pressure, axis sign splits
/// through the centroid, a split across the narrowest cross-section found by
/// the inf-sup mode, and smooth random fields.
std::vector<Eigen::VectorXd> divergence_test_family(const FieldSpace& s, unsigned seed = 1);

/// C_d(p): 1 / beta for p = 2 (two-sided, seminorm); otherwise the largest
/// ratio over divergence_test_family (a sampled value).
ConstantEstimate divergence_constant(const FieldSpace& s, double p, unsigned seed = 1);

}  // namespace kdl

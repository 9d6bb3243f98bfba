#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "kdl/domain.hpp"

namespace kdl {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Numbering of the true cells of a domain (local index k = 0..N-1, in
/// increasing grid order) with face-neighbour lookup. Holds a pointer to the
/// domain, which must outlive it.
class FieldSpace {
 public:
  explicit FieldSpace(const RasterDomain& d);
  FieldSpace(RasterDomain&&) = delete;  // keeps a pointer to the domain

  const RasterDomain& domain() const { return *d_; }
  const Grid& grid() const { return d_->grid(); }
  int dim() const { return d_->dim(); }
  std::size_t size() const { return cells_.size(); }
  double weight() const { return d_->grid().cell_volume(); }
  double h() const { return d_->h(); }

  CellIndex cell(std::size_t k) const { return cells_[k]; }
  Point center(std::size_t k) const { return grid().center(cells_[k]); }
  /// Local index of a grid cell, -1 if the cell is not a true cell.
  std::int64_t local(CellIndex c) const { return local_[static_cast<std::size_t>(c)]; }
  /// Local index of the face neighbour of k along `axis` (side 0: -, 1: +), or -1.
  std::int64_t neighbor(std::size_t k, int axis, int side) const {
    return nb_[(k * 3 + static_cast<std::size_t>(axis)) * 2 + static_cast<std::size_t>(side)];
  }

 private:
  const RasterDomain* d_;
  std::vector<CellIndex> cells_;
  std::vector<std::int64_t> local_;
  std::vector<std::int64_t> nb_;
};

/// Vector field sampled at the centers of the true cells. Component i of cell
/// k sits at values[i * N + k].
struct DiscreteVectorField {
  const FieldSpace* space = nullptr;
  Eigen::VectorXd values;

  DiscreteVectorField() = default;
  explicit DiscreteVectorField(const FieldSpace& s)
      : space(&s), values(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.dim() * s.size()))) {}

  double& at(std::size_t k, int i) {
    return values[static_cast<Eigen::Index>(static_cast<std::size_t>(i) * space->size() + k)];
  }
  double at(std::size_t k, int i) const {
    return values[static_cast<Eigen::Index>(static_cast<std::size_t>(i) * space->size() + k)];
  }
};

/// Tensor field of n x n matrices per cell; entry (i, j) of cell k at
/// values[(i * n + j) * N + k].
struct TensorField {
  int dim = 2;
  std::size_t cells = 0;
  Eigen::VectorXd values;

  double at(std::size_t k, int i, int j) const {
    return values[static_cast<Eigen::Index>((static_cast<std::size_t>(i * dim + j)) * cells + k)];
  }
  Eigen::Matrix3d matrix(std::size_t k) const;
};

struct GradientDecomposition {
  TensorField Du;     ///< Du(i, j) = d u_i / d x_j
  TensorField eps;    ///< (Du + Du^T) / 2
  TensorField kappa;  ///< (Du - Du^T) / 2
};

/// d/dx_axis of a scalar cell field: centered where both face neighbours are
/// true cells, one-sided where only one is, zero where neither is.
/// Rows: axis * N + k. Size (n N) x N.
SparseMatrix scalar_gradient_matrix(const FieldSpace& s);

/// Du of a vector field as a sparse map of size (n^2 N) x (n N).
SparseMatrix gradient_matrix(const FieldSpace& s);

/// Orthogonal projectors onto the symmetric and antisymmetric parts of a
/// tensor field, size (n^2 N) x (n^2 N).
SparseMatrix symmetric_part_matrix(int dim, std::size_t cells);
SparseMatrix antisymmetric_part_matrix(int dim, std::size_t cells);

GradientDecomposition discrete_gradient(const DiscreteVectorField& u);

/// (sum_k w |M_k|^p)^(1/p) with the pointwise Frobenius norm, w the cell volume.
double lp_norm(const TensorField& t, double w, double p);
/// Same with the pointwise entrywise max norm |M| = max_ij |m_ij|.
double lp_norm_max_entry(const TensorField& t, double w, double p);
/// L^p norm of a vector field with the pointwise Euclidean norm.
double lp_norm(const DiscreteVectorField& u, double p);

/// Linear functionals u -> sum_k w kappa_ij(u)(k), one row per pair i < j,
/// as dense rows of length n N.
Eigen::MatrixXd mean_rotation_constraints(const FieldSpace& s, const SparseMatrix& G);

/// Samples a callable f(Point) -> std::array<double, 3> at cell centers.
template <class F>
DiscreteVectorField sample_field(const FieldSpace& s, F&& f) {
  DiscreteVectorField u(s);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto v = f(s.center(k));
    for (int i = 0; i < s.dim(); ++i) u.at(k, i) = v[static_cast<std::size_t>(i)];
  }
  return u;
}

/// Writes "cell,u0,u1[,u2]" rows for the true cells.
std::string field_csv(const DiscreteVectorField& u);

}  // namespace kdl

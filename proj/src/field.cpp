#include "kdl/field.hpp"

#include <cmath>
#include <sstream>

namespace kdl {

FieldSpace::FieldSpace(const RasterDomain& d)
    : d_(&d), cells_(d.cells()), local_(d.grid().size(), -1) {
  const Grid& g = d.grid();
  for (std::size_t k = 0; k < cells_.size(); ++k) local_[static_cast<std::size_t>(cells_[k])] = static_cast<std::int64_t>(k);
  nb_.assign(cells_.size() * 6, -1);
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    const CellCoord c = g.coord(cells_[k]);
    for (int a = 0; a < g.dim(); ++a)
      for (int side = 0; side < 2; ++side) {
        CellCoord o = c;
        o[a] += side ? 1 : -1;
        if (!g.contains(o)) continue;
        nb_[(k * 3 + static_cast<std::size_t>(a)) * 2 + static_cast<std::size_t>(side)] =
            local_[static_cast<std::size_t>(g.index(o))];
      }
  }
}

Eigen::Matrix3d TensorField::matrix(std::size_t k) const {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = at(k, i, j);
  return m;
}

SparseMatrix scalar_gradient_matrix(const FieldSpace& s) {
  const auto N = static_cast<Eigen::Index>(s.size());
  const int n = s.dim();
  const double h = s.h();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(2 * n) * s.size());
  for (std::size_t k = 0; k < s.size(); ++k)
    for (int a = 0; a < n; ++a) {
      const Eigen::Index row = a * N + static_cast<Eigen::Index>(k);
      const std::int64_t m = s.neighbor(k, a, 0), p = s.neighbor(k, a, 1);
      if (m >= 0 && p >= 0) {
        t.emplace_back(row, p, 0.5 / h);
        t.emplace_back(row, m, -0.5 / h);
      } else if (p >= 0) {
        t.emplace_back(row, p, 1.0 / h);
        t.emplace_back(row, static_cast<Eigen::Index>(k), -1.0 / h);
      } else if (m >= 0) {
        t.emplace_back(row, static_cast<Eigen::Index>(k), 1.0 / h);
        t.emplace_back(row, m, -1.0 / h);
      }
    }
  SparseMatrix G(n * N, N);
  G.setFromTriplets(t.begin(), t.end());
  return G;
}

SparseMatrix gradient_matrix(const FieldSpace& s) {
  const SparseMatrix g = scalar_gradient_matrix(s);
  const auto N = static_cast<Eigen::Index>(s.size());
  const int n = s.dim();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(g.nonZeros() * n));
  for (int i = 0; i < n; ++i)
    for (Eigen::Index col = 0; col < g.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(g, col); it; ++it)
        t.emplace_back(i * n * N + it.row(), i * N + it.col(), it.value());
  SparseMatrix G(n * n * N, n * N);
  G.setFromTriplets(t.begin(), t.end());
  return G;
}

namespace {

SparseMatrix part_matrix(int n, std::size_t cells, double sign) {
  const auto N = static_cast<Eigen::Index>(cells);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < N; ++k) {
        const Eigen::Index ij = (i * n + j) * N + k, ji = (j * n + i) * N + k;
        t.emplace_back(ij, ij, 0.5);
        t.emplace_back(ij, ji, 0.5 * sign);
      }
  SparseMatrix P(n * n * N, n * n * N);
  P.setFromTriplets(t.begin(), t.end());
  return P;
}

TensorField tensor(int n, std::size_t cells, Eigen::VectorXd v) {
  TensorField t;
  t.dim = n;
  t.cells = cells;
  t.values = std::move(v);
  return t;
}

}  // namespace

SparseMatrix symmetric_part_matrix(int dim, std::size_t cells) { return part_matrix(dim, cells, 1.0); }
SparseMatrix antisymmetric_part_matrix(int dim, std::size_t cells) { return part_matrix(dim, cells, -1.0); }

GradientDecomposition discrete_gradient(const DiscreteVectorField& u) {
  const FieldSpace& s = *u.space;
  const int n = s.dim();
  const std::size_t N = s.size();
  const Eigen::VectorXd du = gradient_matrix(s) * u.values;
  Eigen::VectorXd e(du.size()), w(du.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (std::size_t k = 0; k < N; ++k) {
        const auto ij = static_cast<Eigen::Index>(static_cast<std::size_t>(i * n + j) * N + k);
        const auto ji = static_cast<Eigen::Index>(static_cast<std::size_t>(j * n + i) * N + k);
        e[ij] = 0.5 * (du[ij] + du[ji]);
        w[ij] = 0.5 * (du[ij] - du[ji]);
      }
  return {tensor(n, N, du), tensor(n, N, e), tensor(n, N, w)};
}

double lp_norm(const TensorField& t, double w, double p) {
  const int n = t.dim;
  double sum = 0.0;
  for (std::size_t k = 0; k < t.cells; ++k) {
    double f2 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) f2 += t.at(k, i, j) * t.at(k, i, j);
    sum += std::pow(f2, 0.5 * p);
  }
  return std::pow(w * sum, 1.0 / p);
}

double lp_norm_max_entry(const TensorField& t, double w, double p) {
  const int n = t.dim;
  double sum = 0.0;
  for (std::size_t k = 0; k < t.cells; ++k) {
    double m = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m = std::max(m, std::abs(t.at(k, i, j)));
    sum += std::pow(m, p);
  }
  return std::pow(w * sum, 1.0 / p);
}

double lp_norm(const DiscreteVectorField& u, double p) {
  const FieldSpace& s = *u.space;
  double sum = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    double f2 = 0.0;
    for (int i = 0; i < s.dim(); ++i) f2 += u.at(k, i) * u.at(k, i);
    sum += std::pow(f2, 0.5 * p);
  }
  return std::pow(s.weight() * sum, 1.0 / p);
}

Eigen::MatrixXd mean_rotation_constraints(const FieldSpace& s, const SparseMatrix& G) {
  const int n = s.dim();
  const auto N = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd C(n * (n - 1) / 2, n * N);
  int row = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Eigen::VectorXd sel = Eigen::VectorXd::Zero(n * n * N);
      sel.segment((i * n + j) * N, N).setConstant(0.5 * s.weight());
      sel.segment((j * n + i) * N, N).setConstant(-0.5 * s.weight());
      C.row(row++) = (G.transpose() * sel).transpose();
    }
  return C;
}

std::string field_csv(const DiscreteVectorField& u) {
  const FieldSpace& s = *u.space;
  std::ostringstream os;
  os.precision(17);
  os << "cell";
  for (int i = 0; i < s.dim(); ++i) os << ",u" << i;
  os << "\n";
  for (std::size_t k = 0; k < s.size(); ++k) {
    os << s.cell(k);
    for (int i = 0; i < s.dim(); ++i) os << "," << u.at(k, i);
    os << "\n";
  }
  return os.str();
}

}  // namespace kdl

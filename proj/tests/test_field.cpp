#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kdl/field.hpp"
#include "kdl/lanczos.hpp"

#include <Eigen/Dense>

using namespace kdl;

namespace {

RasterDomain make(Generator gen, int res) {
  DomainSpec s{gen, res};
  return rasterize(s);
}

double max_abs(const TensorField& t) { return t.values.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(DiscreteGradient, IdentityField) {
  const auto d = make(Generator::LShape, 32);
  FieldSpace s(d);
  const auto u = sample_field(s, [](const Point& x) { return x; });
  const auto g = discrete_gradient(u);
  for (std::size_t k = 0; k < s.size(); ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(g.Du.at(k, i, j), i == j ? 1.0 : 0.0, 1e-12);
  EXPECT_LT(max_abs(g.kappa), 1e-12);
}

TEST(DiscreteGradient, RigidRotationHasNoStrain) {
  const auto d = make(Generator::Disk, 32);
  FieldSpace s(d);
  const auto u = sample_field(s, [](const Point& x) { return Point{-x[1] + 0.3, x[0] - 2.0, 0}; });
  const auto g = discrete_gradient(u);
  EXPECT_LT(max_abs(g.eps), 1e-12);
  for (std::size_t k = 0; k < s.size(); ++k) {
    EXPECT_NEAR(g.kappa.at(k, 0, 1), -1.0, 1e-12);
    EXPECT_NEAR(g.kappa.at(k, 1, 0), 1.0, 1e-12);
  }
}

TEST(DiscreteGradient, ExactSplits) {
  const auto d = make(Generator::Cusp, 32);
  FieldSpace s(d);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N01;
  DiscreteVectorField u(s);
  for (Eigen::Index i = 0; i < u.values.size(); ++i) u.values[i] = N01(rng);
  const auto g = discrete_gradient(u);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Eigen::Matrix3d D = g.Du.matrix(k), E = g.eps.matrix(k), K = g.kappa.matrix(k);
    EXPECT_LT((D - E - K).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((E - E.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((K + K.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(DiscreteGradient, PolynomialOrders) {
  // Cubic field: centered differences are O(h^2) away from the boundary,
  // one-sided stencils O(h) next to it.
  auto f = [](const Point& x) {
    return Point{x[0] * x[0] * x[1] - 0.5 * x[1] * x[1] * x[1], x[0] * x[1] + x[0] * x[0] * x[0], 0};
  };
  auto df = [](const Point& x) {
    Eigen::Matrix2d D;
    D << 2 * x[0] * x[1], x[0] * x[0] - 1.5 * x[1] * x[1], x[1] + 3 * x[0] * x[0], x[0];
    return D;
  };
  double prev_int = 0, prev_bd = 0;
  for (int res : {32, 64}) {
    const auto d = make(Generator::Square, res);
    FieldSpace s(d);
    const auto g = discrete_gradient(sample_field(s, f));
    double e_int = 0, e_bd = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      bool interior = true;
      for (int a = 0; a < 2; ++a)
        for (int side = 0; side < 2; ++side) interior = interior && s.neighbor(k, a, side) >= 0;
      const auto D = df(s.center(k));
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const double e = std::abs(g.Du.at(k, i, j) - D(i, j));
          (interior ? e_int : e_bd) = std::max(interior ? e_int : e_bd, e);
        }
    }
    const double h = s.h();
    EXPECT_LT(e_int, 2.0 * h * h);
    EXPECT_LT(e_bd, 4.0 * h);
    if (prev_int > 0) {
      EXPECT_NEAR(prev_int / e_int, 4.0, 0.5);
      EXPECT_NEAR(prev_bd / e_bd, 2.0, 0.3);
    }
    prev_int = e_int;
    prev_bd = e_bd;
  }
}

TEST(DiscreteGradient, IsolatedDirectionGivesZero) {
  // A one-cell-wide vertical strip has no x-neighbours anywhere.
  Grid g(2, {5, 9, 1}, 0.1, {0, 0, 0});
  std::vector<std::uint8_t> m(g.size(), 0);
  for (int j = 1; j < 8; ++j) m[static_cast<std::size_t>(g.index(2, j))] = 1;
  const RasterDomain d = RasterDomain::unchecked(g, m);
  FieldSpace s(d);
  const auto u = sample_field(s, [](const Point& x) { return Point{x[0] * x[1], x[1] * x[1], 0}; });
  const auto gd = discrete_gradient(u);
  for (std::size_t k = 0; k < s.size(); ++k) {
    EXPECT_EQ(gd.Du.at(k, 0, 0), 0.0);
    EXPECT_EQ(gd.Du.at(k, 1, 0), 0.0);
  }
}

TEST(Norms, FrobeniusAndMaxEntry) {
  const auto d = make(Generator::Square, 16);
  FieldSpace s(d);
  const auto u = sample_field(s, [](const Point& x) { return Point{2 * x[0], -x[1], 0}; });
  const auto g = discrete_gradient(u);
  // |Du|_F = sqrt(5), max entry 2, unit area.
  EXPECT_NEAR(lp_norm(g.Du, s.weight(), 2.0), std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(lp_norm_max_entry(g.Du, s.weight(), 3.0), 2.0, 1e-12);
  EXPECT_NEAR(lp_norm(u, 2.0), std::sqrt((4.0 + 1.0) / 3.0), 5e-3);
}

TEST(Norms, MeanRotationConstraintMatchesKappaSum) {
  const auto d = make(Generator::LShape, 16);
  FieldSpace s(d);
  const SparseMatrix G = gradient_matrix(s);
  const Eigen::MatrixXd C = mean_rotation_constraints(s, G);
  ASSERT_EQ(C.rows(), 1);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N01;
  DiscreteVectorField u(s);
  for (Eigen::Index i = 0; i < u.values.size(); ++i) u.values[i] = N01(rng);
  const auto g = discrete_gradient(u);
  double sum = 0;
  for (std::size_t k = 0; k < s.size(); ++k) sum += g.kappa.at(k, 0, 1);
  EXPECT_NEAR((C * u.values)(0), s.weight() * sum, 1e-12);
}

TEST(Lanczos, MatchesDenseGeneralizedEigenvalues) {
  const int n = 300;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> N01;
  Eigen::MatrixXd R(n, n), S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      R(i, j) = N01(rng);
      S(i, j) = N01(rng);
    }
  const Eigen::MatrixXd A = R + R.transpose();
  const Eigen::MatrixXd M = S * S.transpose() / n + Eigen::MatrixXd::Identity(n, n);
  const Eigen::LLT<Eigen::MatrixXd> llt(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ref(A, M);
  LinearMap T = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = llt.solve(A * x); };
  LinearMap MM = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = M * x; };
  for (bool largest : {true, false}) {
    LanczosOptions o;
    o.largest = largest;
    o.nev = 3;
    const auto r = lanczos(T, MM, n, o);
    ASSERT_TRUE(r.converged);
    for (int q = 0; q < 3; ++q) {
      const double want = largest ? ref.eigenvalues()[n - 1 - q] : ref.eigenvalues()[q];
      EXPECT_NEAR(r.values[static_cast<std::size_t>(q)], want, 1e-8 * std::abs(want));
    }
  }
}

TEST(Lanczos, ProjectedSubspace) {
  // Largest eigenvalue of diag(1..n) on vectors orthogonal to e_n is n - 1.
  const int n = 200;
  LinearMap T = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    y = x.cwiseProduct(Eigen::VectorXd::LinSpaced(n, 1, n));
    y[n - 1] = 0;
  };
  LinearMap I = [](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = x; };
  auto proj = [&](Eigen::VectorXd& x) { x[n - 1] = 0; };
  const auto r = lanczos(T, I, n, LanczosOptions{}, proj);
  EXPECT_NEAR(r.values[0], n - 1.0, 1e-9);
}

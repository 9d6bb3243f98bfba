#include <gtest/gtest.h>

#include <cmath>

#include "kdl/duality.hpp"

using namespace kdl;

namespace {

RasterDomain make(Generator gen, int res) { return rasterize(DomainSpec{gen, res}); }

}  // namespace

TEST(CubicField, SecondDerivativesMatchFiniteDifferences) {
  for (int dim : {2, 3}) {
    const CubicField f(dim, 7);
    const Point x{0.3, -0.4, 0.2};
    const double e = 1e-3;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k) {
          auto at = [&](double sj, double sk) {
            Point y = x;
            y[j] += sj * e;
            y[k] += sk * e;
            return f.value(y)[i];
          };
          // Exact for cubics up to roundoff: the fourth derivative vanishes.
          const double fd = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * e * e);
          EXPECT_NEAR(f.second(i, j, k, x), fd, 1e-5) << dim << i << j << k;
        }
  }
}

TEST(IdentityResidual, InteriorIsExactForCubics) {
  const auto dom = make(Generator::Square, 32);
  FieldSpace s(dom);
  const auto r = identity_residual(s);
  EXPECT_LT(r.interior_max, 1e-9);
  EXPECT_GT(r.boundary_max, 1e-3);
  EXPECT_GT(r.scale, 0.0);
}

TEST(IdentityResidual, AverageIsFirstOrderAndBelowTenH) {
  for (Generator g : {Generator::Square, Generator::Disk, Generator::LShape}) {
    const auto da = make(g, 32);
    FieldSpace a(da);
    const auto ra = identity_residual(a);
    EXPECT_LE(ra.l1_average, 10 * a.h()) << to_string(g);
    const auto d64 = make(g, 64);
    FieldSpace b(d64);
    const double rate = ra.l1_average / identity_residual(b).l1_average;
    EXPECT_GT(rate, 1.5) << to_string(g);
    EXPECT_LT(rate, 2.6) << to_string(g);
  }
}

TEST(DualityF, ClosedForms) {
  EXPECT_DOUBLE_EQ(duality_F(2, 2.0, 1.0), std::sqrt(19.0));
  EXPECT_DOUBLE_EQ(duality_F(3, 2.0, 0.5), std::sqrt(1.0 + 6.0 * 4.0));
  EXPECT_DOUBLE_EQ(duality_F(2, 3.0, 1.0), 1.0 + 4.0 * 5.0);
  EXPECT_DOUBLE_EQ(duality_F_hat(2, 1.0, 2.0), std::sqrt(2.0) * 2 * 3 * 3);
  EXPECT_DOUBLE_EQ(duality_F_hat(2, 0.0, 100.0), std::sqrt(2.0) * std::max(2.0 * 101.0, 100.0));
}

TEST(CubeBump, UnitIntegralSupportAndGradientBound) {
  const auto d = make(Generator::Square, 48);
  FieldSpace s(d);
  const CellCube q = default_cube(s);
  EXPECT_NO_THROW(check_cube_margin(d, q));
  const Eigen::VectorXd psi = cube_bump(s, q);
  EXPECT_NEAR(s.weight() * psi.sum(), 1.0, 1e-12);
  EXPECT_GE(psi.minCoeff(), 0.0);
  const double ell = q.side * s.h();
  double grad = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const CellCoord c = d.grid().coord(s.cell(k));
    if (!q.contains(c, 2)) EXPECT_EQ(psi[static_cast<Eigen::Index>(k)], 0.0);
    for (int a = 0; a < 2; ++a) {
      const auto m = s.neighbor(k, a, 1);
      if (m >= 0) grad = std::max(grad, std::abs(psi[m] - psi[static_cast<Eigen::Index>(k)]) / s.h());
    }
  }
  // Tensor quadratic B-spline scaled to Q: |grad psi| <= 3^(n+1) / l^(n+1).
  EXPECT_LE(grad * std::pow(ell, 3), 27.0 * 1.05);
}

TEST(DefaultCube, CenteredOnSquare) {
  const auto d = make(Generator::Square, 32);
  FieldSpace s(d);
  const CellCube q = default_cube(s);
  const CellCoord lo = d.grid().coord(d.cells().front());
  const CellCoord hi = d.grid().coord(d.cells().back());
  // Margin of one cell plus the cube: the square's cells minus a ring.
  EXPECT_GE(q.side, 28);
  EXPECT_GE(q.anchor[0], lo[0] + 1);
  EXPECT_LE(q.anchor[0] + q.side, hi[0]);
}

TEST(DualityCrossCheck, SquareHoldsBothChains) {
  const auto dom = make(Generator::Square, 32);
  FieldSpace s(dom);
  const auto r = duality_cross_check(s, 2.0);
  EXPECT_EQ(r.q, 2.0);
  EXPECT_TRUE(r.holds);
  EXPECT_TRUE(r.holds_hat);
  EXPECT_LE(r.F / r.K.value, 10.0);
  EXPECT_NEAR(r.K.value, estimate_korn(s, KornOptions{}).estimate.value, 1e-9);
  EXPECT_GT(r.K_hat.value, 1.0);
  EXPECT_LT(r.identity.l1_average, 10 * s.h());
}

TEST(DualityCrossCheck, ConjugateExponent) {
  const auto dom = make(Generator::LShape, 16);
  FieldSpace s(dom);
  const auto r = duality_cross_check(s, 1.5);
  EXPECT_DOUBLE_EQ(r.q, 3.0);
  EXPECT_EQ(r.C_d.p, 3.0);
  EXPECT_TRUE(std::isfinite(r.F));
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.F_hat, 0.0);
}

TEST(DualityCrossCheck, RejectsBadExponent) {
  const auto dom = make(Generator::Square, 16);
  FieldSpace s(dom);
  EXPECT_THROW(duality_cross_check(s, 1.0), Error);
  EXPECT_THROW(duality_cross_check(s, INFINITY), Error);
}

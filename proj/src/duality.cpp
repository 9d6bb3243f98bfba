#include "kdl/duality.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "kdl/distance.hpp"
#include "kdl/divergence.hpp"

namespace kdl {

CubicField::CubicField(int dim, unsigned seed) : dim_(dim) {
  const int kz = dim == 3 ? 3 : 0;
  for (int c = 0; c <= kz; ++c)
    for (int b = 0; b <= 3; ++b)
      for (int a = 0; a <= 3; ++a)
        if (a + b + c <= 3) monomials_.push_back({a, b, c});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int i = 0; i < dim; ++i) {
    auto& c = coef_[static_cast<std::size_t>(i)];
    for (std::size_t m = 0; m < monomials_.size(); ++m) c.push_back(U(rng));
  }
}

Point CubicField::value(const Point& x) const {
  Point u{0, 0, 0};
  for (int i = 0; i < dim_; ++i)
    for (std::size_t m = 0; m < monomials_.size(); ++m) {
      const auto& e = monomials_[m];
      u[static_cast<std::size_t>(i)] += coef_[static_cast<std::size_t>(i)][m] * std::pow(x[0], e[0]) *
                                        std::pow(x[1], e[1]) * std::pow(x[2], e[2]);
    }
  return u;
}

double CubicField::second(int i, int j, int k, const Point& x) const {
  double out = 0.0;
  for (std::size_t m = 0; m < monomials_.size(); ++m) {
    std::array<int, 3> e = monomials_[m];
    double c = coef_[static_cast<std::size_t>(i)][m];
    for (int d : {j, k}) {
      c *= e[static_cast<std::size_t>(d)];
      e[static_cast<std::size_t>(d)] = std::max(0, e[static_cast<std::size_t>(d)] - 1);
      if (c == 0.0) break;
    }
    if (c == 0.0) continue;
    out += c * std::pow(x[0], e[0]) * std::pow(x[1], e[1]) * std::pow(x[2], e[2]);
  }
  return out;
}

IdentityResidual identity_residual(const FieldSpace& s, unsigned seed, int fields) {
  const int n = s.dim();
  const auto N = static_cast<Eigen::Index>(s.size());
  const SparseMatrix Gs = scalar_gradient_matrix(s);
  // Interior: every cell reached by two stencil applications is centered.
  std::vector<std::uint8_t> centered(s.size(), 1);
  for (std::size_t k = 0; k < s.size(); ++k)
    for (int a = 0; a < n; ++a)
      for (int side = 0; side < 2; ++side) {
        const std::int64_t m = s.neighbor(k, a, side);
        if (m < 0) {
          centered[k] = 0;
          continue;
        }
        for (int b = 0; b < n; ++b)
          for (int t = 0; t < 2; ++t)
            if (s.neighbor(static_cast<std::size_t>(m), b, t) < 0) centered[k] = 0;
      }

  IdentityResidual worst;
  for (int fi = 0; fi < fields; ++fi) {
    const CubicField cf(n, seed + static_cast<unsigned>(fi));
    const auto u = sample_field(s, [&](const Point& x) { return cf.value(x); });
    const auto g = discrete_gradient(u);
    // d_a of every eps component: deps[(i*n + j)][a] is a cell vector.
    std::vector<std::vector<Eigen::VectorXd>> deps(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Eigen::VectorXd e = g.eps.values.segment(static_cast<Eigen::Index>(i * n + j) * N, N);
        const Eigen::VectorXd de = Gs * e;
        for (int a = 0; a < n; ++a)
          deps[static_cast<std::size_t>(i * n + j)].push_back(de.segment(a * N, N));
      }
    auto D = [&](int i, int j, int a, Eigen::Index k) {
      return deps[static_cast<std::size_t>(i * n + j)][static_cast<std::size_t>(a)][k];
    };
    IdentityResidual r;
    std::vector<double> cell_max(s.size(), 0.0);
    for (Eigen::Index k = 0; k < N; ++k) {
      const Point x = s.center(static_cast<std::size_t>(k));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int l = 0; l < n; ++l) {
            const double exact = cf.second(i, j, l, x);
            r.scale = std::max(r.scale, std::abs(exact));
            const double rhs = D(i, l, j, k) + D(i, j, l, k) - D(j, l, i, k);
            cell_max[static_cast<std::size_t>(k)] =
                std::max(cell_max[static_cast<std::size_t>(k)], std::abs(rhs - exact));
          }
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      sum += cell_max[k];
      (centered[k] ? r.interior_max : r.boundary_max) =
          std::max(centered[k] ? r.interior_max : r.boundary_max, cell_max[k]);
    }
    const double sc = std::max(r.scale, 1e-300);
    r.l1_average = sum / static_cast<double>(s.size()) / sc;
    r.interior_max /= sc;
    r.boundary_max /= sc;
    if (r.l1_average >= worst.l1_average) {
      const double keep_i = std::max(worst.interior_max, r.interior_max);
      const double keep_b = std::max(worst.boundary_max, r.boundary_max);
      worst = r;
      worst.interior_max = keep_i;
      worst.boundary_max = keep_b;
    } else {
      worst.interior_max = std::max(worst.interior_max, r.interior_max);
      worst.boundary_max = std::max(worst.boundary_max, r.boundary_max);
    }
  }
  return worst;
}

double duality_F(int n, double p, double C_d) {
  const double nn = static_cast<double>(n * (n - 1));
  if (p == 2.0) return std::sqrt(1.0 + nn * std::pow(1.0 + 2.0 * C_d, 2));
  return 1.0 + 2.0 * nn * (1.0 + 2.0 * n * C_d);
}

double duality_F_hat(int n, double C_d, double s) {
  return std::sqrt(2.0) * std::max(n * (1.0 + 2.0 * C_d) * (1.0 + s), s);
}

namespace {

/// Cardinal quadratic B-spline on [0, 3].
double bspline2(double t) {
  if (t <= 0.0 || t >= 3.0) return 0.0;
  if (t < 1.0) return 0.5 * t * t;
  if (t < 2.0) return 0.5 * (-2.0 * t * t + 6.0 * t - 3.0);
  return 0.5 * (3.0 - t) * (3.0 - t);
}

}  // namespace

Eigen::VectorXd cube_bump(const FieldSpace& s, const CellCube& q) {
  const int n = s.dim();
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.size()));
  for (std::size_t k = 0; k < s.size(); ++k) {
    const CellCoord c = s.grid().coord(s.cell(k));
    if (!q.contains(c, n)) continue;
    double v = 1.0;
    for (int a = 0; a < n; ++a)
      v *= bspline2(3.0 * (c[static_cast<std::size_t>(a)] - q.anchor[static_cast<std::size_t>(a)] + 0.5) / q.side);
    psi[static_cast<Eigen::Index>(k)] = v;
  }
  const double total = s.weight() * psi.sum();
  if (!(total > 0.0)) throw Error("cube too small for the cutoff");
  return psi / total;
}

CellCube default_cube(const FieldSpace& s) {
  const RasterDomain& d = s.domain();
  const DistanceField rho = distance_transform(d);
  CellIndex best = s.cell(0);
  for (std::size_t k = 0; k < s.size(); ++k)
    if (rho.squared_cells(s.cell(k)) > rho.squared_cells(best)) best = s.cell(k);
  const CellCoord c = d.grid().coord(best);
  const int kz = d.dim() == 3 ? 1 : 0;
  for (int side = static_cast<int>(2 * rho.rho(best) / d.h()); side >= 1; --side) {
    CellCube q{{c[0] - side / 2, c[1] - side / 2, kz ? c[2] - side / 2 : 0}, side};
    try {
      check_cube_margin(d, q);
      return q;
    } catch (const Error&) {
    }
  }
  throw Error("no cube with a one-cell margin fits the domain");
}

DualityReport duality_cross_check(const FieldSpace& s, double p, unsigned seed) {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error("p must lie in (1, inf)");
  DualityReport r;
  r.p = p;
  r.q = p / (p - 1.0);
  const int n = s.dim();
  KornOptions ko;
  ko.p = p;
  ko.seed = seed;
  r.K = estimate_korn(s, ko).estimate;
  r.C_d = divergence_constant(s, r.q, seed);
  r.F = duality_F(n, p, r.C_d.value);
  r.holds = r.K.value <= r.F;
  r.identity = identity_residual(s, seed);
  r.Q = default_cube(s);
  const Eigen::VectorXd psi = cube_bump(s, r.Q);
  const double area = s.weight() * static_cast<double>(s.size());
  r.psi_term = std::sqrt(area) * std::sqrt(s.weight() * psi.squaredNorm());
  if (p == 2.0) {
    ko.mode = KornMode::KHat;
    ko.Q = r.Q;
    r.K_hat = estimate_korn(s, ko).estimate;
    r.F_hat = duality_F_hat(n, r.C_d.value, r.psi_term);
    r.holds_hat = std::isfinite(r.K_hat.value) && r.K_hat.value <= r.F_hat;
  }
  return r;
}

}  // namespace kdl

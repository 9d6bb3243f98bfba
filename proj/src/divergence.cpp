#include "kdl/divergence.hpp"

#include <Eigen/CholmodSupport>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "kdl/lanczos.hpp"

namespace kdl {

using Triplets = std::vector<Eigen::Triplet<double>>;

FaceSpace::FaceSpace(const FieldSpace& s) : s_(&s) {
  of_cell_.assign(s.size() * 6, -1);
  for (int a = 0; a < s.dim(); ++a)
    for (std::size_t k = 0; k < s.size(); ++k) {
      const std::int64_t m = s.neighbor(k, a, 1);
      if (m < 0) continue;
      const auto f = static_cast<std::int64_t>(axis_.size());
      axis_.push_back(a);
      minus_.push_back(k);
      of_cell_[(k * 3 + static_cast<std::size_t>(a)) * 2 + 1] = f;
      of_cell_[(static_cast<std::size_t>(m) * 3 + static_cast<std::size_t>(a)) * 2 + 0] = f;
    }
}

Point FaceSpace::center(std::size_t f) const {
  Point p = s_->center(minus_[f]);
  p[static_cast<std::size_t>(axis_[f])] += 0.5 * s_->h();
  return p;
}

std::int64_t FaceSpace::face_of_cell(std::size_t k, int axis, int side) const {
  return of_cell_[(k * 3 + static_cast<std::size_t>(axis)) * 2 + static_cast<std::size_t>(side)];
}

std::int64_t FaceSpace::shifted(std::size_t f, int dir, int side) const {
  const std::int64_t m = s_->neighbor(minus_[f], dir, side);
  if (m < 0) return -1;
  return face_of_cell(static_cast<std::size_t>(m), axis_[f], 1);
}

SparseMatrix FaceSpace::divergence() const {
  const double ih = 1.0 / s_->h();
  Triplets t;
  for (std::size_t f = 0; f < size(); ++f) {
    const std::size_t lo = minus_[f];
    const auto hi = static_cast<std::size_t>(s_->neighbor(lo, axis_[f], 1));
    t.emplace_back(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(f), ih);
    t.emplace_back(static_cast<Eigen::Index>(hi), static_cast<Eigen::Index>(f), -ih);
  }
  SparseMatrix D(static_cast<Eigen::Index>(s_->size()), static_cast<Eigen::Index>(size()));
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

SparseMatrix FaceSpace::face_gradient() const {
  const double ih = 1.0 / s_->h();
  Triplets t;
  Eigen::Index row = 0;
  for (std::size_t f = 0; f < size(); ++f)
    for (int b = 0; b < dim(); ++b) {
      const std::int64_t up = shifted(f, b, 1);
      if (up >= 0) {
        t.emplace_back(row, static_cast<Eigen::Index>(up), ih);
        t.emplace_back(row++, static_cast<Eigen::Index>(f), -ih);
      } else {
        t.emplace_back(row++, static_cast<Eigen::Index>(f), -ih);
      }
      if (shifted(f, b, 0) < 0) t.emplace_back(row++, static_cast<Eigen::Index>(f), ih);
    }
  SparseMatrix G(row, static_cast<Eigen::Index>(size()));
  G.setFromTriplets(t.begin(), t.end());
  return G;
}

SparseMatrix FaceSpace::dirichlet() const {
  const SparseMatrix G = face_gradient();
  return SparseMatrix(G.transpose() * G);
}

double face_lp_norm(const FaceSpace& fs, const Eigen::VectorXd& v, double p) {
  return std::pow(fs.cells().weight() * v.array().abs().pow(p).sum(), 1.0 / p);
}

double face_gradient_lp_norm(const FaceSpace& fs, const Eigen::VectorXd& v, double p) {
  const Eigen::VectorXd g = fs.face_gradient() * v;
  return std::pow(fs.cells().weight() * g.array().abs().pow(p).sum(), 1.0 / p);
}

double cell_lp_norm(const FieldSpace& s, const Eigen::VectorXd& f, double p) {
  return std::pow(s.weight() * f.array().abs().pow(p).sum(), 1.0 / p);
}

namespace {

Eigen::VectorXd remove_mean(Eigen::VectorXd x) {
  x.array() -= x.mean();
  return x;
}

/// Minimizes v^T H v subject to D v = f through conjugate gradients on the
/// Schur complement D H^-1 D^T over mean-zero multipliers.
class ConstrainedSolver {
 public:
  ConstrainedSolver(const SparseMatrix& D) : D_(D) {}
  void set_metric(const SparseMatrix& H) {
    if (!analyzed_) {
      llt_.analyzePattern(H);
      analyzed_ = true;
    }
    llt_.factorize(H);
    if (llt_.info() != Eigen::Success) throw Error("divergence metric factorization failed");
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& f, double tol, int* iterations) {
    auto S = [&](const Eigen::VectorXd& x) {
      return remove_mean(D_ * llt_.solve(Eigen::VectorXd(D_.transpose() * x)));
    };
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(f.size());
    Eigen::VectorXd r = remove_mean(f), d = r;
    const double f0 = r.norm();
    double rr = r.squaredNorm();
    int it = 0;
    for (; it < 10000 && std::sqrt(rr) > tol * f0; ++it) {
      const Eigen::VectorXd Sd = S(d);
      const double a = rr / d.dot(Sd);
      lam += a * d;
      r -= a * Sd;
      const double rr2 = r.squaredNorm();
      d = r + (rr2 / rr) * d;
      rr = rr2;
    }
    if (iterations) *iterations = it;
    return llt_.solve(Eigen::VectorXd(D_.transpose() * lam));
  }

 private:
  const SparseMatrix& D_;
  Eigen::CholmodSimplicialLLT<SparseMatrix, Eigen::Lower> llt_;
  bool analyzed_ = false;
};

}  // namespace

InfSupResult infsup_constant(const FieldSpace& s, double tol) {
  const FaceSpace fs(s);
  if (fs.size() == 0) throw Error("no interior faces");
  const SparseMatrix D = fs.divergence();
  const SparseMatrix L = fs.dirichlet();
  const auto N = static_cast<Eigen::Index>(s.size());
  const auto F = static_cast<Eigen::Index>(fs.size());

  Eigen::CholmodSimplicialLLT<SparseMatrix, Eigen::Lower> llt(L);
  if (llt.info() != Eigen::Success) throw Error("vector Laplacian factorization failed");
  LinearMap S = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    y = remove_mean(D * llt.solve(Eigen::VectorXd(D.transpose() * x)));
  };
  LinearMap I = [](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = x; };
  auto project = [](Eigen::VectorXd& x) { x.array() -= x.mean(); };
  LanczosOptions lo;
  lo.largest = false;
  lo.tol = tol;
  lo.max_basis = 120;
  const auto r = lanczos(S, I, N, lo, project);

  InfSupResult out;
  out.pressure = remove_mean(r.vectors.front());
  out.pressure /= out.pressure.norm();
  const Eigen::VectorXd Sp = D * llt.solve(Eigen::VectorXd(D.transpose() * out.pressure));
  const double b2 = out.pressure.dot(Sp);
  out.residual = (Sp - b2 * out.pressure).norm();
  out.beta.name = "beta_infsup";
  out.beta.p = 2.0;
  out.beta.value = std::sqrt(std::max(b2, 0.0));
  out.beta.bound = r.converged ? BoundKind::TwoSided : BoundKind::Upper;
  out.beta.method = "mac_schur_lanczos_cholmod";
  out.beta.h = s.h();
  std::ostringstream os;
  os << "H1_0 seminorm; Schur residual " << out.residual;
  out.beta.note = os.str();
  out.C_d = out.beta;
  out.C_d.name = "C_d";
  out.C_d.value = 1.0 / out.beta.value;
  out.C_d.bound = r.converged ? BoundKind::TwoSided : BoundKind::Lower;
  out.C_d.method = "inverse_infsup";
  out.C_d.note = "1/beta; ||Dv||_2 <= C_d ||f||_2 (seminorm form)";
  return out;
}

DivergenceSolution solve_divergence(const FieldSpace& s, const Eigen::VectorXd& f, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error("p must lie in (1, inf)");
  if (f.size() != static_cast<Eigen::Index>(s.size())) throw Error("right-hand side size mismatch");
  const double scale = std::max(f.cwiseAbs().sum(), 1e-300);
  if (std::abs(f.sum()) > 1e-12 * scale && f.cwiseAbs().maxCoeff() > 0)
    throw Error("right-hand side must have zero mean");
  const FaceSpace fs(s);
  const SparseMatrix D = fs.divergence();
  const SparseMatrix G = fs.face_gradient();
  const auto F = static_cast<Eigen::Index>(fs.size());
  SparseMatrix I(F, F);
  I.setIdentity();

  DivergenceSolution out;
  out.estimate.name = "C_d";
  out.estimate.p = p;
  out.estimate.bound = BoundKind::Upper;
  out.estimate.h = s.h();
  out.estimate.method = p == 2.0 ? "mac_schur_cg_cholmod" : "mac_irls_schur_cg";
  out.estimate.note = "sample for one f; W^{1,p} norm ||v||_p + ||Dv||_p";
  const double fn = cell_lp_norm(s, f, p);
  if (!(fn > 0.0)) {
    out.v = Eigen::VectorXd::Zero(F);
    return out;
  }
  auto ratio_of = [&](const Eigen::VectorXd& v) {
    return (face_lp_norm(fs, v, p) + face_gradient_lp_norm(fs, v, p)) / fn;
  };

  ConstrainedSolver cs(D);
  cs.set_metric(SparseMatrix(I + SparseMatrix(G.transpose() * G)));
  int cg = 0;
  out.v = cs.solve(f, 1e-12, &cg);
  out.ratio = ratio_of(out.v);
  if (p != 2.0) {
    Eigen::VectorXd v = out.v;
    for (int it = 0; it < 40; ++it) {
      const Eigen::VectorXd g = G * v;
      const double e1 = 1e-8 * std::max(v.cwiseAbs().maxCoeff(), 1e-300);
      const double e2 = 1e-8 * std::max(g.cwiseAbs().maxCoeff(), 1e-300);
      const Eigen::VectorXd w1 = (v.array().square() + e1 * e1).pow(0.5 * (p - 2.0));
      const Eigen::VectorXd w2 = (g.array().square() + e2 * e2).pow(0.5 * (p - 2.0));
      const SparseMatrix H = SparseMatrix(w1.asDiagonal() * I) +
                             SparseMatrix(G.transpose() * w2.asDiagonal() * G);
      cs.set_metric(H);
      const Eigen::VectorXd next = cs.solve(f, 1e-10, &cg);
      const double change = (next - v).norm() / std::max(v.norm(), 1e-300);
      v = next;
      ++out.iterations;
      const double r = ratio_of(v);
      if (r < out.ratio) {
        out.ratio = r;
        out.v = v;
      }
      if (change < 1e-6) break;
    }
  }
  out.residual = (D * out.v - f).cwiseAbs().maxCoeff();
  out.estimate.value = out.ratio;
  return out;
}

std::vector<Eigen::VectorXd> divergence_test_family(const FieldSpace& s, unsigned seed) {
  std::vector<Eigen::VectorXd> fam;
  const auto N = static_cast<Eigen::Index>(s.size());
  fam.push_back(infsup_constant(s).pressure);
  Point c{0, 0, 0};
  for (std::size_t k = 0; k < s.size(); ++k)
    for (int a = 0; a < 3; ++a) c[static_cast<std::size_t>(a)] += s.center(k)[static_cast<std::size_t>(a)] / static_cast<double>(N);
  for (int a = 0; a < s.dim(); ++a) {
    Eigen::VectorXd f(N);
    for (Eigen::Index k = 0; k < N; ++k)
      f[k] = s.center(static_cast<std::size_t>(k))[static_cast<std::size_t>(a)] < c[static_cast<std::size_t>(a)] ? -1.0 : 1.0;
    fam.push_back(remove_mean(f));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int r = 0; r < 3; ++r) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(N);
    for (int m = 0; m < 4; ++m) {
      const double kx = 2 * M_PI * (1 + std::floor(2 * (U(rng) + 1))), ky = 2 * M_PI * (1 + std::floor(2 * (U(rng) + 1)));
      const double kz = 2 * M_PI * (1 + std::floor(2 * (U(rng) + 1))), ph = M_PI * U(rng), amp = U(rng);
      for (Eigen::Index k = 0; k < N; ++k) {
        const Point x = s.center(static_cast<std::size_t>(k));
        f[k] += amp * std::sin(kx * x[0] + ky * x[1] + kz * x[2] + ph);
      }
    }
    fam.push_back(remove_mean(f));
  }
  return fam;
}

ConstantEstimate divergence_constant(const FieldSpace& s, double p, unsigned seed) {
  if (p == 2.0) return infsup_constant(s).C_d;
  ConstantEstimate e;
  e.name = "C_d";
  e.p = p;
  e.h = s.h();
  e.bound = BoundKind::Lower;
  e.method = "max_ratio_over_test_family";
  const auto fam = divergence_test_family(s, seed);
  for (const auto& f : fam) e.value = std::max(e.value, solve_divergence(s, f, p).ratio);
  std::ostringstream os;
  os << fam.size() << " right-hand sides; W^{1,p} norm ||v||_p + ||Dv||_p";
  e.note = os.str();
  return e;
}

}  // namespace kdl

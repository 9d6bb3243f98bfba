#include "kdl/korn.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "kdl/lanczos.hpp"

namespace kdl {

void check_cube_margin(const RasterDomain& d, const CellCube& q) {
  const Grid& g = d.grid();
  if (q.side < 1) throw Error("cube side must be positive");
  const int kz = g.dim() == 3 ? 1 : 0;
  for (int k = q.anchor[2] - kz; k < q.anchor[2] + (kz ? q.side + 1 : 1); ++k)
    for (int j = q.anchor[1] - 1; j <= q.anchor[1] + q.side; ++j)
      for (int i = q.anchor[0] - 1; i <= q.anchor[0] + q.side; ++i)
        if (!d.inside(CellCoord{i, j, k}))
          throw Error("cube Q must lie inside the domain with a one-cell margin");
}

// ---------------------------------------------------------------------------
// Counterexample field

CounterexampleField build_counterexample_field(const FieldSpace& s, const Ball& ball,
                                               const std::vector<CellIndex>& end_cells) {
  const int n = s.dim();
  const double h = s.h(), w = s.weight();
  const double r = ball.radius;
  if (end_cells.empty()) throw Error("use trivial bound: empty end");
  CounterexampleField f;
  f.ball = ball;
  f.end = end_cells;
  std::sort(f.end.begin(), f.end.end());
  f.end_measure = static_cast<double>(f.end.size()) * w;
  bool leaves_4B = false;
  for (CellIndex c : f.end)
    if (distance(s.grid().center(c), ball.center) > 4 * r) leaves_4B = true;
  if (!(f.end_measure > std::pow(4.0, n) * ball_volume(r, n)) || !leaves_4B)
    throw Error("use trivial bound: end is small or stays in B(z, 4r)");
  if (!(r > 2 * h)) throw Error("ball radius must exceed two cells");

  std::vector<std::uint8_t> in_end(s.size(), 0);
  for (CellIndex c : f.end) {
    const std::int64_t k = s.local(c);
    if (k < 0) throw Error("end cell is not a true cell");
    in_end[static_cast<std::size_t>(k)] = 1;
  }
  f.phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.size()));
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!in_end[k]) continue;
    bool touches = false;
    for (int a = 0; a < n && !touches; ++a)
      for (int side = 0; side < 2; ++side) {
        const std::int64_t m = s.neighbor(k, a, side);
        if (m >= 0 && !in_end[static_cast<std::size_t>(m)]) touches = true;
      }
    if (touches) continue;
    const double d = distance(s.center(k), ball.center);
    f.phi[static_cast<Eigen::Index>(k)] = std::clamp((d - r) / (r - h), 0.0, 1.0);
  }

  f.v = DiscreteVectorField(s);
  f.w = DiscreteVectorField(s);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Point x = s.center(k);
    const double ph = f.phi[static_cast<Eigen::Index>(k)];
    f.v.at(k, 0) = (x[1] - ball.center[1]) * ph;
    f.v.at(k, 1) = (ball.center[0] - x[0]) * ph;
  }
  const auto dv = discrete_gradient(f.v);
  // Unit rotation r(x) = (-x_2, x_1) has curl -2 wherever the stencil exists;
  // C~ is fixed from the discrete sums so the mean rotation of u is exactly zero.
  DiscreteVectorField rot(s);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Point x = s.center(k);
    rot.at(k, 0) = -x[1];
    rot.at(k, 1) = x[0];
  }
  const auto drot = discrete_gradient(rot);
  double curl_v = 0.0, curl_rot = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    curl_v += dv.Du.at(k, 0, 1) - dv.Du.at(k, 1, 0);
    curl_rot += drot.Du.at(k, 0, 1) - drot.Du.at(k, 1, 0);
  }
  f.curl_integral = w * curl_v;
  f.C_tilde = -curl_v / curl_rot;
  f.w.values = f.C_tilde * rot.values;
  f.u = DiscreteVectorField(s);
  f.u.values = f.v.values + f.w.values;

  for (CellIndex c : f.end)
    if (distance(s.grid().center(c), ball.center) >= 2 * r) f.end_outside_2B += w;
  f.ball2_measure = ball_volume(2 * r, n);
  return f;
}

double korn_lower_bound_formula(double end_outside_2B, double ball2_measure, double p) {
  return std::pow(std::pow(2.0 / 3.0, p) * end_outside_2B / (std::pow(3.0, p) * ball2_measure),
                  1.0 / p);
}

ConstantEstimate korn_lower_bound_from_end(const CounterexampleField& f, double p, double h) {
  ConstantEstimate e;
  e.name = "C_K_lower_from_end";
  e.p = p;
  e.value = korn_lower_bound_formula(f.end_outside_2B, f.ball2_measure, p);
  e.bound = BoundKind::Lower;
  e.method = "end_measure_formula";
  e.h = h;
  std::ostringstream os;
  os << "|E\\2B|=" << f.end_outside_2B << " |2B|=" << f.ball2_measure;
  e.note = os.str();
  return e;
}

// ---------------------------------------------------------------------------
// Quotients

namespace {

double cube_norm(const TensorField& t, const FieldSpace& s, const CellCube& q, double p) {
  double sum = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!q.contains(s.grid().coord(s.cell(k)), s.dim())) continue;
    double f2 = 0.0;
    for (int i = 0; i < t.dim; ++i)
      for (int j = 0; j < t.dim; ++j) f2 += t.at(k, i, j) * t.at(k, i, j);
    sum += std::pow(f2, 0.5 * p);
  }
  return std::pow(s.weight() * sum, 1.0 / p);
}

}  // namespace

double korn_quotient(const DiscreteVectorField& u, double p, KornMode mode,
                     const std::optional<CellCube>& Q) {
  const auto g = discrete_gradient(u);
  const double w = u.space->weight();
  const double du = lp_norm(g.Du, w, p), e = lp_norm(g.eps, w, p);
  if (mode == KornMode::K) return du / e;
  if (!Q) throw Error("K_hat requires a cube Q");
  return du / (e + cube_norm(g.Du, *u.space, *Q, p));
}

// ---------------------------------------------------------------------------
// p = 2 eigenproblems

namespace {

using Cholmod = Eigen::CholmodSimplicialLLT<SparseMatrix, Eigen::Lower>;

/// Drops the n dofs of one cell: the forms are translation invariant, so the
/// quotient space by translations is represented by fields vanishing there.
struct Grounding {
  Eigen::Index full = 0, reduced = 0;
  std::vector<Eigen::Index> keep;  // reduced -> full
  SparseMatrix S;                  // full x reduced selection

  Grounding(const FieldSpace& s, std::size_t cell) {
    const int n = s.dim();
    const auto N = static_cast<Eigen::Index>(s.size());
    full = n * N;
    for (int i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < N; ++k)
        if (k != static_cast<Eigen::Index>(cell)) keep.push_back(i * N + k);
    reduced = static_cast<Eigen::Index>(keep.size());
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index r = 0; r < reduced; ++r) t.emplace_back(keep[static_cast<std::size_t>(r)], r, 1.0);
    S.resize(full, reduced);
    S.setFromTriplets(t.begin(), t.end());
  }
  Eigen::VectorXd expand(const Eigen::VectorXd& x) const { return S * x; }
};

void factor(Cholmod& llt, const SparseMatrix& A) {
  llt.compute(A);
  if (llt.info() != Eigen::Success) throw Error("sparse Cholesky factorization failed");
}

SparseMatrix cube_selector(const FieldSpace& s, const CellCube& q) {
  const int n = s.dim();
  const auto N = static_cast<Eigen::Index>(s.size());
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!q.contains(s.grid().coord(s.cell(k)), n)) continue;
    for (int e = 0; e < n * n; ++e) {
      const Eigen::Index row = e * N + static_cast<Eigen::Index>(k);
      t.emplace_back(row, row, 1.0);
    }
  }
  SparseMatrix P(n * n * N, n * n * N);
  P.setFromTriplets(t.begin(), t.end());
  return P;
}

std::size_t ground_cell(const FieldSpace& s) { return s.size() - 1; }

struct EigenOutcome {
  Eigen::VectorXd x;  // full-space field
  double residual = 0.0;
  int applications = 0;
  bool converged = false;
};

/// Largest eigenpair of X v = mu Y v on {C v = 0} (reduced space).
EigenOutcome largest_pencil(const SparseMatrix& X, const SparseMatrix& Y,
                            const Eigen::MatrixXd& C, const Grounding& gr, double tol,
                            const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>* extra = nullptr) {
  Cholmod llt;
  factor(llt, Y);
  Eigen::MatrixXd Z;
  Eigen::LDLT<Eigen::MatrixXd> CZ;
  const bool constrained = C.rows() > 0;
  if (constrained) {
    Z = llt.solve(Eigen::MatrixXd(C.transpose()));
    CZ.compute(C * Z);
  }
  auto project = [&](Eigen::VectorXd& x) {
    if (constrained) x -= Z * CZ.solve(C * x);
  };
  LinearMap T = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    Eigen::VectorXd t = X * x;
    if (extra) {
      Eigen::VectorXd e;
      (*extra)(x, e);
      t += e;
    }
    y = llt.solve(t);
    project(y);
  };
  LinearMap M = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = Y * x; };
  LanczosOptions lo;
  lo.largest = true;
  lo.tol = tol;
  const auto r = lanczos(T, M, Y.rows(), lo, project);
  EigenOutcome out;
  out.x = gr.expand(r.vectors.front());
  out.residual = r.residual;
  out.applications = r.operator_applications;
  out.converged = r.converged;
  return out;
}

double max_entry_ratio(const DiscreteVectorField& u) {
  const auto g = discrete_gradient(u);
  const double w = u.space->weight();
  return lp_norm_max_entry(g.Du, w, 2.0) / lp_norm_max_entry(g.eps, w, 2.0);
}

KornResult korn_p2(const FieldSpace& s, const KornOptions& opt) {
  const int n = s.dim();
  const double w = s.weight();
  const SparseMatrix G = gradient_matrix(s);
  const Grounding gr(s, ground_cell(s));
  const SparseMatrix Gg = G * gr.S;
  const SparseMatrix Ps = symmetric_part_matrix(n, s.size());
  const SparseMatrix Pa = antisymmetric_part_matrix(n, s.size());
  const SparseMatrix B = w * SparseMatrix(Gg.transpose() * Gg);
  const SparseMatrix E = w * SparseMatrix(Gg.transpose() * (Ps * Gg));

  KornResult res;
  EigenOutcome eo;
  if (opt.mode == KornMode::K) {
    const SparseMatrix K = w * SparseMatrix(Gg.transpose() * (Pa * Gg));
    const Eigen::MatrixXd C = mean_rotation_constraints(s, G) * gr.S;
    eo = largest_pencil(K, B, C, gr, opt.tol);
  } else {
    if (!opt.Q) throw Error("K_hat requires a cube Q");
    check_cube_margin(s.domain(), *opt.Q);
    const SparseMatrix PQ = cube_selector(s, *opt.Q);
    const SparseMatrix A = E + w * SparseMatrix(Gg.transpose() * (PQ * Gg));
    eo = largest_pencil(B, A, Eigen::MatrixXd(), gr, opt.tol);
  }
  res.field = DiscreteVectorField(s);
  res.field.values = eo.x;
  const auto g = discrete_gradient(res.field);
  // Rayleigh quotients from the eigenvector keep precision when the
  // eigenvalue of the kappa form sits next to 1.
  double den = lp_norm(g.eps, w, 2.0);
  if (opt.mode == KornMode::KHat) {
    double q = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k)
      if (opt.Q->contains(s.grid().coord(s.cell(k)), n))
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) q += g.Du.at(k, i, j) * g.Du.at(k, i, j);
    den = std::sqrt(den * den + w * q);
  }
  res.estimate.name = opt.mode == KornMode::K ? "K_p" : "K_hat_p";
  res.estimate.p = 2.0;
  res.estimate.value = lp_norm(g.Du, w, 2.0) / den;
  res.estimate.bound = eo.converged ? BoundKind::TwoSided : BoundKind::Lower;
  res.estimate.method = opt.mode == KornMode::K ? "lanczos_cholmod_constrained" : "lanczos_cholmod_cube";
  res.estimate.h = s.h();
  res.residual = eo.residual;
  res.max_entry_ratio = max_entry_ratio(res.field);
  std::ostringstream os;
  os << "frobenius; max-entry constant within factor " << n << "; field max-entry ratio "
     << res.max_entry_ratio << "; residual " << eo.residual;
  if (opt.mode == KornMode::KHat) os << "; quotient with ||Du||_Q^2 added in quadrature";
  res.estimate.note = os.str();
  res.seeds_used = 1;
  return res;
}

// ---------------------------------------------------------------------------
// p != 2 ascent

struct PNormTerm {
  double value = 0.0;     // ||t||_p^p
  Eigen::VectorXd grad;   // d/dt of ||t||_p^p
};

/// ||t||_p^p over the tensor vector t with weight w and optional cell mask.
PNormTerm pnorm_term(const Eigen::VectorXd& t, int n, std::size_t N, double w, double p,
                     const std::vector<std::uint8_t>* mask = nullptr) {
  PNormTerm r;
  r.grad = Eigen::VectorXd::Zero(t.size());
  double tmax = t.cwiseAbs().maxCoeff();
  const double eta2 = std::pow(1e-9 * std::max(tmax, 1e-300), 2);
  for (std::size_t k = 0; k < N; ++k) {
    if (mask && !(*mask)[k]) continue;
    double f2 = 0.0;
    for (int e = 0; e < n * n; ++e) {
      const double x = t[static_cast<Eigen::Index>(static_cast<std::size_t>(e) * N + k)];
      f2 += x * x;
    }
    r.value += w * std::pow(f2, 0.5 * p);
    const double scale = w * p * std::pow(f2 + eta2, 0.5 * p - 1.0);
    for (int e = 0; e < n * n; ++e) {
      const auto idx = static_cast<Eigen::Index>(static_cast<std::size_t>(e) * N + k);
      r.grad[idx] = scale * t[idx];
    }
  }
  return r;
}

struct Objective {
  const FieldSpace& s;
  const SparseMatrix& G;
  const SparseMatrix& Ps;
  double p;
  KornMode mode;
  std::vector<std::uint8_t> qmask;

  /// log R and its gradient.
  double eval(const Eigen::VectorXd& u, Eigen::VectorXd* grad) const {
    const int n = s.dim();
    const std::size_t N = s.size();
    const double w = s.weight();
    const Eigen::VectorXd du = G * u;
    const Eigen::VectorXd e = Ps * du;
    const PNormTerm D = pnorm_term(du, n, N, w, p);
    const PNormTerm Ee = pnorm_term(e, n, N, w, p);
    if (!(D.value > 0.0) || !(Ee.value > 0.0)) return -std::numeric_limits<double>::infinity();
    const double nd = std::pow(D.value, 1.0 / p), ne = std::pow(Ee.value, 1.0 / p);
    double den = ne;
    Eigen::VectorXd dden;  // gradient of den with respect to du
    if (grad) dden = Ps * Ee.grad * (ne / (p * Ee.value));
    if (mode == KornMode::KHat) {
      const PNormTerm Q = pnorm_term(du, n, N, w, p, &qmask);
      if (Q.value > 0.0) {
        const double nq = std::pow(Q.value, 1.0 / p);
        den += nq;
        if (grad) dden += Q.grad * (nq / (p * Q.value));
      }
    }
    if (grad) {
      const Eigen::VectorXd gdu = D.grad * (1.0 / (p * D.value)) - dden / den;
      *grad = G.transpose() * gdu;
    }
    return std::log(nd) - std::log(den);
  }
};

Eigen::VectorXd smooth_random_field(const FieldSpace& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int n = s.dim();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n * s.size()));
  struct Mode {
    double k[3];
    double phase, amp[3];
  };
  std::vector<Mode> modes(6);
  for (auto& m : modes) {
    for (int a = 0; a < 3; ++a) m.k[a] = 2.0 * M_PI * std::floor(1 + 3 * (U(rng) + 1) / 2);
    m.phase = M_PI * U(rng);
    for (int a = 0; a < 3; ++a) m.amp[a] = U(rng);
  }
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Point x = s.center(k);
    for (const auto& m : modes) {
      const double arg = m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2] + m.phase;
      for (int i = 0; i < n; ++i)
        u[static_cast<Eigen::Index>(static_cast<std::size_t>(i) * s.size() + k)] += m.amp[i] * std::sin(arg);
    }
  }
  return u;
}

KornResult korn_ascent(const FieldSpace& s, const KornOptions& opt) {
  const int n = s.dim();
  const SparseMatrix G = gradient_matrix(s);
  const SparseMatrix Ps = symmetric_part_matrix(n, s.size());
  Objective obj{s, G, Ps, opt.p, opt.mode, {}};
  if (opt.mode == KornMode::KHat) {
    if (!opt.Q) throw Error("K_hat requires a cube Q");
    check_cube_margin(s.domain(), *opt.Q);
    obj.qmask.assign(s.size(), 0);
    for (std::size_t k = 0; k < s.size(); ++k)
      obj.qmask[k] = opt.Q->contains(s.grid().coord(s.cell(k)), n);
  }
  Eigen::MatrixXd C;
  Eigen::LDLT<Eigen::MatrixXd> CC;
  if (opt.mode == KornMode::K) {
    C = mean_rotation_constraints(s, G);
    CC.compute(C * C.transpose());
  }
  auto project = [&](Eigen::VectorXd& x) {
    if (C.rows() > 0) x -= C.transpose() * CC.solve(C * x);
  };

  std::vector<Eigen::VectorXd> starts;
  {
    KornOptions o2 = opt;
    o2.p = 2.0;
    starts.push_back(korn_p2(s, o2).field.values);
  }
  for (const auto& f : opt.extra_seeds) {
    if (f.space != &s && f.values.size() != static_cast<Eigen::Index>(n * s.size()))
      throw Error("seed field does not match the field space");
    starts.push_back(f.values);
  }
  std::mt19937_64 rng(opt.seed);
  while (static_cast<int>(starts.size()) < std::max(8, opt.seeds)) starts.push_back(smooth_random_field(s, rng));

  KornResult res;
  double best = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_u;
  for (Eigen::VectorXd u : starts) {
    project(u);
    Eigen::VectorXd g;
    double f = obj.eval(u, &g);
    if (!std::isfinite(f)) {
      ++res.seeds_excluded;
      continue;
    }
    ++res.seeds_used;
    double step = 1e-2;
    for (int it = 0; it < opt.ascent_iterations; ++it) {
      project(g);
      const double un = u.norm(), gn = g.norm();
      if (!(gn > 0.0)) break;
      const Eigen::VectorXd d = g * (un / gn);
      bool moved = false;
      for (int tries = 0; tries < 30; ++tries) {
        Eigen::VectorXd cand = u + step * d;
        Eigen::VectorXd gc;
        const double fc = obj.eval(cand, &gc);
        if (std::isfinite(fc) && fc > f + 1e-4 * step * gn * un) {
          u = cand / cand.norm();
          f = obj.eval(u, &g);
          step *= 2.0;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    if (f > best) {
      best = f;
      best_u = u;
    }
  }
  if (!std::isfinite(best)) throw Error("no admissible start field for the Korn ascent");
  res.field = DiscreteVectorField(s);
  res.field.values = best_u;
  res.estimate.name = opt.mode == KornMode::K ? "K_p" : "K_hat_p";
  res.estimate.p = opt.p;
  res.estimate.value = std::exp(best);
  res.estimate.bound = BoundKind::Lower;
  res.estimate.method = "projected_ascent";
  res.estimate.h = s.h();
  {
    const auto gdec = discrete_gradient(res.field);
    res.max_entry_ratio = lp_norm_max_entry(gdec.Du, s.weight(), opt.p) /
                          lp_norm_max_entry(gdec.eps, s.weight(), opt.p);
  }
  std::ostringstream os;
  os << "frobenius; " << res.seeds_used << " starts (" << res.seeds_excluded
     << " excluded with Du=0)";
  res.estimate.note = os.str();
  return res;
}

}  // namespace

KornResult estimate_korn(const FieldSpace& s, const KornOptions& opt) {
  if (!(opt.p > 1.0) || !std::isfinite(opt.p)) throw Error("p must lie in (1, inf)");
  if (s.size() < 9) throw Error("domain too small for the Korn eigenproblem");
  return opt.p == 2.0 ? korn_p2(s, opt) : korn_ascent(s, opt);
}

ConstantEstimate korn_tilde_estimate(const FieldSpace& s, double tol) {
  const int n = s.dim();
  const double w = s.weight();
  const SparseMatrix G = gradient_matrix(s);
  const Grounding gr(s, ground_cell(s));
  const SparseMatrix Gg = G * gr.S;
  const SparseMatrix Pa = antisymmetric_part_matrix(n, s.size());
  const SparseMatrix B = w * SparseMatrix(Gg.transpose() * Gg);
  const SparseMatrix K = w * SparseMatrix(Gg.transpose() * (Pa * Gg));
  const Eigen::MatrixXd C = mean_rotation_constraints(s, G) * gr.S;
  const double area = w * static_cast<double>(s.size());
  // ||kappa - mean kappa||^2 = u^T K u - (2 / |Omega|) sum_{i<j} (c_ij . u)^2
  const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> low_rank =
      [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = -(2.0 / area) * (C.transpose() * (C * x)); };
  const auto eo = largest_pencil(K, B, Eigen::MatrixXd(), gr, tol, &low_rank);
  DiscreteVectorField u(s);
  u.values = eo.x;
  const auto g = discrete_gradient(u);
  // min over antisymmetric S of ||Du - S||^2 = ||eps||^2 + ||kappa - mean kappa||^2
  Eigen::Matrix3d mean = Eigen::Matrix3d::Zero();
  for (std::size_t k = 0; k < s.size(); ++k) mean += g.kappa.matrix(k);
  mean /= static_cast<double>(s.size());
  double num = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k)
    num += (g.eps.matrix(k) + g.kappa.matrix(k) - mean).squaredNorm();
  ConstantEstimate e;
  e.name = "K_tilde_p";
  e.p = 2.0;
  e.value = std::sqrt(w * num) / lp_norm(g.eps, w, 2.0);
  e.bound = eo.converged ? BoundKind::TwoSided : BoundKind::Lower;
  e.method = "lanczos_cholmod_mean_removed";
  e.h = s.h();
  return e;
}

}  // namespace kdl

#include "kdl/lanczos.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "kdl/grid.hpp"

namespace kdl {

namespace {

/// Indices of Ritz values ordered from the wanted end.
std::vector<int> wanted_order(const Eigen::VectorXd& theta, bool largest) {
  std::vector<int> idx(static_cast<std::size_t>(theta.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return largest ? theta[a] > theta[b] : theta[a] < theta[b];
  });
  return idx;
}

}  // namespace

LanczosResult lanczos(const LinearMap& T, const LinearMap& M, Eigen::Index n,
                      const LanczosOptions& opt,
                      const std::function<void(Eigen::VectorXd&)>& project) {
  if (n < 1) throw Error("empty eigenproblem");
  const int m = static_cast<int>(std::min<Eigen::Index>(opt.max_basis, n));
  const int nev = std::min(opt.nev, m);
  LanczosResult res;

  std::vector<Eigen::VectorXd> V, MV;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd w(n), Mw(n);

  auto normalize_push = [&](Eigen::VectorXd& x) -> bool {
    // Two passes of classical Gram-Schmidt in the M inner product.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < V.size(); ++i) x -= (MV[i].dot(x)) * V[i];
      if (project) project(x);
    }
    M(x, Mw);
    const double nrm = std::sqrt(std::max(0.0, x.dot(Mw)));
    if (!(nrm > 0.0) || !std::isfinite(nrm)) return false;
    V.push_back(x / nrm);
    MV.push_back(Mw / nrm);
    return true;
  };

  {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> N01;
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = N01(rng);
    if (project) project(x);
    if (!normalize_push(x)) throw Error("Lanczos start vector vanishes on the search space");
  }

  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    double beta = 0.0;
    int size = static_cast<int>(V.size());
    bool invariant = false;
    for (int j = size - 1; j < m; ++j) {
      T(V[static_cast<std::size_t>(j)], w);
      ++res.operator_applications;
      // Roundoff leaves the search space once the Krylov space is nearly
      // exhausted (repeated eigenvalues); pull it back before orthogonalizing.
      if (project) project(w);
      // Full projection column; the couplings to kept Ritz vectors are
      // recomputed rather than trusted.
      Eigen::VectorXd c = Eigen::VectorXd::Zero(j + 1);
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const double ci = MV[static_cast<std::size_t>(i)].dot(w);
          c[i] += ci;
          w -= ci * V[static_cast<std::size_t>(i)];
        }
        if (project) project(w);
      }
      for (int i = 0; i <= j; ++i) H(i, j) = H(j, i) = c[i];
      M(w, Mw);
      beta = std::sqrt(std::max(0.0, w.dot(Mw)));
      size = j + 1;
      const double scale = std::max(1.0, H.topLeftCorner(size, size).cwiseAbs().maxCoeff());
      if (beta <= 1e-14 * scale) {
        invariant = true;
        break;
      }
      if (j + 1 < m) {
        V.push_back(w / beta);
        MV.push_back(Mw / beta);
        H(j + 1, j) = H(j, j + 1) = beta;
      }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (H.topLeftCorner(size, size) + H.topLeftCorner(size, size).transpose()));
    const Eigen::VectorXd theta = es.eigenvalues();
    const Eigen::MatrixXd S = es.eigenvectors();
    const auto order = wanted_order(theta, opt.largest);
    const double scale = std::max(theta.cwiseAbs().maxCoeff(), 1e-300);
    double worst = 0.0;
    const int want = std::min(nev, size);
    for (int q = 0; q < want; ++q)
      worst = std::max(worst, invariant ? 0.0 : std::abs(beta * S(size - 1, order[static_cast<std::size_t>(q)])));
    res.residual = worst;
    const bool done = invariant || worst <= opt.tol * scale || restart == opt.max_restarts;
    if (done) {
      res.converged = invariant || worst <= opt.tol * scale;
      for (int q = 0; q < want; ++q) {
        const int col = order[static_cast<std::size_t>(q)];
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        for (int l = 0; l < size; ++l) x += S(l, col) * V[static_cast<std::size_t>(l)];
        res.values.push_back(theta[col]);
        res.vectors.push_back(std::move(x));
      }
      return res;
    }

    // Thick restart: keep the wanted half of the Ritz vectors, then continue
    // from the residual direction.
    const int keep = std::min(size - 1, std::max(nev + 2, size / 2));
    std::vector<Eigen::VectorXd> V2, MV2;
    H.setZero();
    for (int q = 0; q < keep; ++q) {
      const int col = order[static_cast<std::size_t>(q)];
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n), mx = Eigen::VectorXd::Zero(n);
      for (int l = 0; l < size; ++l) {
        x += S(l, col) * V[static_cast<std::size_t>(l)];
        mx += S(l, col) * MV[static_cast<std::size_t>(l)];
      }
      V2.push_back(std::move(x));
      MV2.push_back(std::move(mx));
      H(q, q) = theta[col];
      H(q, keep) = H(keep, q) = beta * S(size - 1, col);
    }
    V = std::move(V2);
    MV = std::move(MV2);
    V.push_back(w / beta);
    MV.push_back(Mw / beta);
  }
  return res;
}

}  // namespace kdl

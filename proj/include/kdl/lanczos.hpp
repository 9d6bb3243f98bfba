#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace kdl {

using LinearMap = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& y)>;

struct LanczosOptions {
  int nev = 1;             ///< wanted eigenpairs
  bool largest = true;     ///< algebraically largest or smallest end
  int max_basis = 60;      ///< Krylov basis size before a thick restart
  int max_restarts = 400;
  double tol = 1e-11;      ///< residual tolerance relative to the largest Ritz value
  unsigned seed = 12345;
};

struct LanczosResult {
  std::vector<double> values;  ///< wanted end first
  std::vector<Eigen::VectorXd> vectors;
  double residual = 0.0;       ///< largest M-norm residual among the wanted pairs
  int operator_applications = 0;
  bool converged = false;
};

/// Thick-restart Lanczos for an operator T that is self-adjoint in the inner
/// product <x, y> = x^T M y (M symmetric positive definite on the search
/// space). `project`, if given, is applied to the start vector; T must map the
/// search space into itself. Full reorthogonalization.
LanczosResult lanczos(const LinearMap& T, const LinearMap& M, Eigen::Index n,
                      const LanczosOptions& opt,
                      const std::function<void(Eigen::VectorXd&)>& project = nullptr);

}  // namespace kdl

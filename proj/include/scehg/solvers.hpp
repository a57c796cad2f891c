#pragma once

#include "scehg/types.hpp"

#include <vector>

namespace scehg {

/// A lasso instance: minimize ||response - design * beta||_2^2 + penalty * ||beta||_1.
/// Note the squared loss carries no 1/2 factor.
struct LassoProblem {
  Matrix design;
  Vector response;
  double penalty = 0.0;
};

/// Cyclic coordinate descent for LassoProblem, ascending coordinate order.
/// Convergence is declared once the max coefficient change over a full sweep
/// is below opts.tol and the subgradient condition holds to opts.tol in
/// max-norm. `init` is an optional starting iterate, `sweep_objectives`
/// records the objective after each sweep when non-null.
Vector lasso_cd(const LassoProblem& problem, const SolverOptions& opts = {},
                const Vector* init = nullptr,
                std::vector<double>* sweep_objectives = nullptr);

double lasso_objective(const LassoProblem& problem, const Vector& beta);

/// Max-norm violation of the lasso stationarity condition at beta.
double lasso_kkt_residual(const LassoProblem& problem, const Vector& beta);

/// Group soft-thresholding: (1 - s/||t||_2)_+ t, with prox(0) = 0.
Vector group_prox(const Vector& t, double s);

/// Truncated L1 penalty: min(|a|, tau).
double tlp(double a, double tau);

/// Cholesky factorization of a symmetric positive definite matrix exposing
/// log-determinant, inverse and linear solves. Throws NotPositiveDefinite
/// with the failing pivot index when the input is not PD.
class SymmetricFactor {
 public:
  explicit SymmetricFactor(const Matrix& M);

  int dim() const { return static_cast<int>(L_.rows()); }
  const Matrix& lower() const { return L_; }
  double log_det() const;
  Matrix inverse() const;
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& B) const;

 private:
  Matrix L_;
};

inline SymmetricFactor sym_factor(const Matrix& M) { return SymmetricFactor(M); }

}  // namespace scehg

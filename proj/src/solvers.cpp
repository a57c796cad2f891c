#include "scehg/solvers.hpp"

#include <cmath>
#include <string>

namespace scehg {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

void check_problem(const LassoProblem& problem) {
  if (problem.design.rows() != problem.response.size())
    throw InvalidInput("lasso design has " + std::to_string(problem.design.rows()) +
                       " rows but response has " + std::to_string(problem.response.size()) +
                       " entries");
  if (!problem.design.allFinite() || !problem.response.allFinite() ||
      !std::isfinite(problem.penalty))
    throw InvalidInput("lasso problem contains non-finite entries");
  if (problem.penalty < 0) throw InvalidInput("lasso penalty must be >= 0");
}

}  // namespace

double lasso_objective(const LassoProblem& problem, const Vector& beta) {
  return (problem.response - problem.design * beta).squaredNorm() +
         problem.penalty * beta.template lpNorm<1>();
}

double lasso_kkt_residual(const LassoProblem& problem, const Vector& beta) {
  const Vector r = problem.response - problem.design * beta;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double g = 2.0 * problem.design.col(j).dot(r);
    double viol;
    if (beta(j) != 0.0)
      viol = std::abs(g - problem.penalty * (beta(j) > 0 ? 1.0 : -1.0));
    else
      viol = std::max(0.0, std::abs(g) - problem.penalty);
    worst = std::max(worst, viol);
  }
  return worst;
}

Vector lasso_cd(const LassoProblem& problem, const SolverOptions& opts, const Vector* init,
                std::vector<double>* sweep_objectives) {
  check_problem(problem);
  check_solver_options(opts);

  const Matrix& Z = problem.design;
  const Vector& y = problem.response;
  const Eigen::Index d = Z.cols();
  const double half_penalty = 0.5 * problem.penalty;

  Vector beta;
  if (init != nullptr) {
    if (init->size() != d) throw InvalidInput("lasso initial iterate has wrong length");
    if (!init->allFinite()) throw InvalidInput("lasso initial iterate is non-finite");
    beta = *init;
  } else {
    beta = Vector::Zero(d);
  }
  if (d == 0) return beta;

  const Vector col_sq = Z.colwise().squaredNorm();
  Vector residual = y - Z * beta;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (col_sq(j) == 0.0) {
        beta(j) = 0.0;
        continue;
      }
      const double c = Z.col(j).dot(residual) + col_sq(j) * beta(j);
      const double updated = soft_threshold(c, half_penalty) / col_sq(j);
      const double delta = updated - beta(j);
      if (delta != 0.0) {
        residual -= Z.col(j) * delta;
        beta(j) = updated;
      }
      max_delta = std::max(max_delta, std::abs(delta));
    }
    if (sweep_objectives != nullptr) sweep_objectives->push_back(lasso_objective(problem, beta));
    if (max_delta == 0.0) return beta;  // exact fixed point
    if (max_delta < opts.tol && lasso_kkt_residual(problem, beta) <= opts.tol) return beta;
  }
  throw ConvergenceFailure(beta, "lasso_cd: no convergence within " +
                                     std::to_string(opts.max_iters) + " sweeps");
}

Vector group_prox(const Vector& t, double s) {
  if (!t.allFinite()) throw InvalidInput("group_prox input is non-finite");
  if (!(s >= 0) || !std::isfinite(s)) throw InvalidInput("group_prox shrinkage must be >= 0");
  const double norm = t.norm();
  if (norm == 0.0) return Vector::Zero(t.size());
  const double factor = 1.0 - s / norm;
  if (factor <= 0.0) return Vector::Zero(t.size());
  return factor * t;
}

double tlp(double a, double tau) {
  if (!std::isfinite(a)) throw InvalidInput("tlp argument is non-finite");
  if (!(tau > 0) || !std::isfinite(tau)) throw InvalidInput("tlp threshold must be > 0");
  return std::min(std::abs(a), tau);
}

SymmetricFactor::SymmetricFactor(const Matrix& M) {
  if (M.rows() != M.cols())
    throw InvalidInput("sym_factor input must be square, got " + std::to_string(M.rows()) +
                       "x" + std::to_string(M.cols()));
  if (!M.allFinite()) throw InvalidInput("sym_factor input contains non-finite entries");
  const double scale = M.cwiseAbs().maxCoeff();
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * (1.0 + scale)) throw InvalidInput("sym_factor input is not symmetric");

  const Eigen::Index p = M.rows();
  L_ = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double pivot = M(j, j) - L_.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0))
      throw NotPositiveDefinite(static_cast<int>(j),
                                "matrix is not positive definite: pivot " + std::to_string(j) +
                                    " is " + std::to_string(pivot));
    L_(j, j) = std::sqrt(pivot);
    const Eigen::Index below = p - j - 1;
    if (below > 0)
      L_.col(j).tail(below) =
          (M.col(j).tail(below) - L_.bottomLeftCorner(below, j) * L_.row(j).head(j).transpose()) /
          L_(j, j);
  }
}

double SymmetricFactor::log_det() const { return 2.0 * L_.diagonal().array().log().sum(); }

Vector SymmetricFactor::solve(const Vector& b) const {
  Vector x = L_.triangularView<Eigen::Lower>().solve(b);
  L_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  return x;
}

Matrix SymmetricFactor::solve(const Matrix& B) const {
  Matrix X = L_.triangularView<Eigen::Lower>().solve(B);
  L_.triangularView<Eigen::Lower>().transpose().solveInPlace(X);
  return X;
}

Matrix SymmetricFactor::inverse() const {
  const Matrix eye = Matrix::Identity(L_.rows(), L_.cols());
  Matrix inv = solve(eye);
  return 0.5 * (inv + inv.transpose());
}

}  // namespace scehg

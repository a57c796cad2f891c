#include "scehg/glasso.hpp"

#include "scehg/solvers.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

namespace scehg {

namespace {

constexpr double kRidgeEigenFloor = 1e-10;
constexpr double kRidgeScale = 1e-8;

void check_covariance(const Matrix& S) {
  if (S.rows() != S.cols()) throw InvalidInput("glasso input covariance must be square");
  if (!S.allFinite()) throw InvalidInput("glasso input covariance has non-finite entries");
  const double scale = S.cwiseAbs().maxCoeff();
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + scale))
    throw InvalidInput("glasso input covariance is not symmetric");
}

double glasso_objective(const Matrix& S, const Matrix& omega, double lambda) {
  const SymmetricFactor factor(omega);
  return (S * omega).trace() - factor.log_det() + lambda * omega.cwiseAbs().sum();
}

/// Column/row j removed.
Matrix drop_row_col(const Matrix& M, Eigen::Index j) {
  const Eigen::Index p = M.rows();
  Matrix out(p - 1, p - 1);
  for (Eigen::Index c = 0, oc = 0; c < p; ++c) {
    if (c == j) continue;
    for (Eigen::Index r = 0, orow = 0; r < p; ++r) {
      if (r == j) continue;
      out(orow++, oc) = M(r, c);
    }
    ++oc;
  }
  return out;
}

Vector drop_entry(const Vector& v, Eigen::Index j) {
  Vector out(v.size() - 1);
  for (Eigen::Index r = 0, o = 0; r < v.size(); ++r)
    if (r != j) out(o++) = v(r);
  return out;
}

}  // namespace

int feature_count(int p) {
  if (p < 1) throw InvalidInput("feature_count requires p >= 1");
  return p * (p - 1) / 2;
}

int nodes_from_feature_count(int d) {
  // d = p(p-1)/2  =>  p = (1 + sqrt(1+8d)) / 2
  const int p = static_cast<int>(std::lround((1.0 + std::sqrt(1.0 + 8.0 * d)) / 2.0));
  if (p < 1 || feature_count(p) != d)
    throw InvalidInput("feature length " + std::to_string(d) +
                       " is not p(p-1)/2 for any integer p");
  return p;
}

std::pair<int, int> feature_pair(int index, int p) {
  if (index < 0 || index >= feature_count(p))
    throw InvalidInput("feature index out of range");
  int k = index;
  for (int j = 2; j <= p; ++j) {
    if (k < j - 1) return {k + 1, j};
    k -= j - 1;
  }
  throw InvalidInput("feature index out of range");
}

Vector vectorize_upper_entries(const Matrix& omega) {
  if (omega.rows() != omega.cols()) throw InvalidInput("vectorize_upper input must be square");
  const Eigen::Index p = omega.rows();
  Vector out(feature_count(static_cast<int>(p)));
  Eigen::Index k = 0;
  for (Eigen::Index j = 1; j < p; ++j)
    for (Eigen::Index i = 0; i < j; ++i) out(k++) = omega(i, j);
  return out;
}

ConnectivityFeatures vectorize_upper(const PrecisionEstimate& est, const std::string& subject_id) {
  return ConnectivityFeatures{subject_id, vectorize_upper_entries(est.omega)};
}

PrecisionEstimate glasso_fit(const Matrix& S_in, double lambda, const SolverOptions& opts) {
  check_covariance(S_in);
  check_solver_options(opts);
  if (!(lambda >= 0) || !std::isfinite(lambda))
    throw InvalidInput("glasso penalty must be finite and >= 0");

  Matrix S = S_in;
  const Eigen::Index p = S.rows();

  if (lambda == 0.0) {
    SymmetricFactor probe(S);  // lambda = 0 requires a positive definite input
    (void)probe;
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < kRidgeEigenFloor)
      S += kRidgeScale * (S.diagonal().mean()) * Matrix::Identity(p, p);
  }

  PrecisionEstimate est;
  est.penalty_used = lambda;

  if (p == 1) {
    est.omega = Matrix::Constant(1, 1, 1.0 / (S(0, 0) + lambda));
    est.objective = glasso_objective(S, est.omega, lambda);
    est.sweep_objectives = {est.objective};
    return est;
  }

  Matrix omega = Matrix::Zero(p, p);
  omega.diagonal() = (S.diagonal().array() + lambda).inverse();

  const SolverOptions inner{std::min(opts.tol * 1e-2, 1e-8), 10000};
  double objective = glasso_objective(S, omega, lambda);
  est.sweep_objectives.push_back(objective);

  bool converged = false;
  for (int sweep = 0; sweep < opts.max_iters && !converged; ++sweep) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const Matrix omega11 = drop_row_col(omega, j);
      const Vector s12 = drop_entry(S.col(j), j);
      const double s22 = S(j, j) + lambda;

      // Exact block minimization over (omega_12, omega_22) with omega_11
      // fixed: omega_12 solves a lasso, the Schur complement is 1/(s22+la).
      const SymmetricFactor chol(omega11);
      const Matrix& L = chol.lower();
      const double root = std::sqrt(s22);

      LassoProblem problem;
      problem.design =
          root * L.triangularView<Eigen::Lower>().solve(Matrix::Identity(p - 1, p - 1));
      problem.response = -(L.transpose() * s12) / root;
      problem.penalty = 2.0 * lambda;

      Vector warm = drop_entry(omega.col(j), j);
      const Vector u = lasso_cd(problem, inner, &warm);
      const Vector q = chol.solve(u);
      const double o22 = 1.0 / s22 + u.dot(q);

      for (Eigen::Index r = 0, k = 0; r < p; ++r) {
        if (r == j) continue;
        omega(r, j) = u(k);
        omega(j, r) = u(k);
        ++k;
      }
      omega(j, j) = o22;
    }

    const double updated = glasso_objective(S, omega, lambda);
    est.sweep_objectives.push_back(updated);
    converged = std::abs(objective - updated) <= opts.tol * (1.0 + std::abs(objective));
    objective = updated;
  }

  est.omega = omega;
  est.objective = objective;
  if (!converged)
    throw ConvergenceFailure(omega, "glasso_fit: no convergence within " +
                                        std::to_string(opts.max_iters) + " sweeps");
  return est;
}

std::pair<double, PrecisionEstimate> glasso_cv(const SubjectSeries& series,
                                               const KernelConfig& cfg,
                                               const std::vector<double>& lambda_grid,
                                               int folds, const SolverOptions& opts,
                                               std::vector<double>* mean_scores) {
  if (lambda_grid.empty()) throw InvalidInput("glasso_cv lambda grid is empty");
  if (folds < 2) throw InvalidInput("glasso_cv requires at least 2 folds");
  const int q = static_cast<int>(series.data.cols());
  if (q < folds)
    throw InvalidInput("glasso_cv requires q >= folds, got q=" + std::to_string(q) +
                       ", folds=" + std::to_string(folds));

  const Eigen::Index p = series.data.rows();
  std::vector<double> scores(lambda_grid.size(), 0.0);

  for (int f = 0; f < folds; ++f) {
    const int lo = f * q / folds;
    const int hi = (f + 1) * q / folds;
    const int test_len = hi - lo;
    const int train_len = q - test_len;

    Matrix train(p, train_len);
    train.leftCols(lo) = series.data.leftCols(lo);
    train.rightCols(train_len - lo) = series.data.rightCols(q - hi);
    const SubjectSeries train_series{series.subject_id, train};
    const SubjectSeries test_series{series.subject_id, series.data.middleCols(lo, test_len)};

    const Matrix S_train = subject_covariance(train_series, cfg);
    const Matrix S_test = subject_covariance(test_series, cfg);

    for (size_t g = 0; g < lambda_grid.size(); ++g) {
      const PrecisionEstimate fit = glasso_fit(S_train, lambda_grid[g], opts);
      const SymmetricFactor factor(fit.omega);
      scores[g] += (S_test * fit.omega).trace() - factor.log_det();
    }
  }
  for (double& s : scores) s /= folds;
  if (mean_scores != nullptr) *mean_scores = scores;

  size_t best = 0;
  for (size_t g = 1; g < scores.size(); ++g)
    if (scores[g] < scores[best]) best = g;

  const Matrix S_full = subject_covariance(series, cfg);
  return {lambda_grid[best], glasso_fit(S_full, lambda_grid[best], opts)};
}

}  // namespace scehg

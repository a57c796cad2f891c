#pragma once

#include "scehg/covariance.hpp"
#include "scehg/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace scehg {

struct PrecisionEstimate {
  Matrix omega;
  double penalty_used = 0.0;
  double objective = 0.0;
  std::vector<double> sweep_objectives;  // objective after init and each sweep
};

/// Per-subject feature vector: upper-triangular precision entries without the
/// diagonal, column-stacked (j ascending, i < j ascending within column).
struct ConnectivityFeatures {
  std::string subject_id;
  Vector values;
};

/// Number of upper-triangular off-diagonal entries for a p-node graph.
int feature_count(int p);

/// Node count p such that feature_count(p) == d; throws if d is not triangular.
int nodes_from_feature_count(int d);

/// Feature index -> 1-based node pair (i, j), i < j, in column-stacked order.
std::pair<int, int> feature_pair(int index, int p);

/// Graphical lasso: minimize Tr(S * Omega) - log|Omega| + lambda * ||Omega||_1
/// over positive definite Omega. The L1 norm covers every entry including the
/// diagonal. Block coordinate descent over columns; each column subproblem is
/// solved as a lasso via lasso_cd, which keeps the objective monotone per
/// sweep. Convergence: relative objective change per sweep below opts.tol.
PrecisionEstimate glasso_fit(const Matrix& S, double lambda,
                             const SolverOptions& opts = {1e-7, 200});

/// Penalty selection by cross validation over contiguous time blocks. For
/// each lambda the model is fit on the kernel covariance of the training
/// blocks and scored on held-out blocks by Tr(S_test * Omega) - log|Omega|;
/// the winner (ties to the first grid occurrence) is refit on all data.
/// `mean_scores` (optional) receives the per-lambda mean held-out scores.
std::pair<double, PrecisionEstimate> glasso_cv(const SubjectSeries& series,
                                               const KernelConfig& cfg,
                                               const std::vector<double>& lambda_grid,
                                               int folds,
                                               const SolverOptions& opts = {1e-7, 200},
                                               std::vector<double>* mean_scores = nullptr);

Vector vectorize_upper_entries(const Matrix& omega);
ConnectivityFeatures vectorize_upper(const PrecisionEstimate& est,
                                     const std::string& subject_id = "");

}  // namespace scehg

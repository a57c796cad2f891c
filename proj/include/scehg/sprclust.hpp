#pragma once

#include "scehg/solvers.hpp"
#include "scehg/types.hpp"

#include <utility>
#include <vector>

namespace scehg {

struct SprclustConfig {
  double lambda1 = 0.0;  // sparsity
  double lambda2 = 0.0;  // fusion
  double tau = 1.0;      // TLP threshold
  double rho = 0.4;      // ADMM parameter
  SolverOptions admm_opts{1e-4, 2000};
  SolverOptions lasso_opts{1e-7, 10000};  // inner mu-step solver
  int dc_max_iters = 20;
  double cluster_tol = 1e-4;
  bool standardize = false;  // opt-in per-feature scaling
};

int pair_count(int n);
int pair_index(int i, int j, int n);  // 0-based, i < j, lexicographic

/// All per-sample centroids, pairwise differences, scaled duals and the
/// frozen active set for one solver run. Pairwise rows are indexed by
/// pair_index(i, j, n).
struct DcState {
  Matrix mu;        // n x d
  Matrix theta;     // n(n-1)/2 x d
  Matrix duals;     // n(n-1)/2 x d
  BoolArray active; // n(n-1)/2

  int n() const { return static_cast<int>(mu.rows()); }
  int d() const { return static_cast<int>(mu.cols()); }
};

struct AdmmResiduals {
  double primal = 0.0;
  double dual = 0.0;
};

struct SprclustFit {
  Matrix centroids;                    // n x d
  std::vector<int> assignment;         // 1-based labels
  int k_hat = 0;
  std::vector<double> objective_trace; // S at init and after each DC iteration
  double kkt_residual = 0.0;
  int dc_iters = 0;
  long admm_iters_total = 0;
  bool converged = false;
};

/// mu_i = x_i, theta_ij = x_i - x_j, duals zero, every pair marked active.
DcState initial_state(const Matrix& X);

/// S(mu) = 1/2 sum ||x_i - mu_i||^2 + lambda1 sum ||mu_i||_1
///       + lambda2 sum_{i<j} TLP(||mu_i - mu_j||_2; tau).
/// theta is recomputed as mu_i - mu_j, honoring the constraint.
double objective_S(const Matrix& X, const DcState& state, const SprclustConfig& cfg);

/// active_ij = ||theta_ij||_2 < tau (strict; norms equal to tau go inactive).
void refresh_active(DcState& state, double tau);

/// Pseudo-observation lasso for the mu_i update (0-based sample index).
/// Rows: identity block scaled 1/sqrt(2) with response x_i/sqrt(2), then for
/// j < i blocks -I with response theta_ji - mu_j + v_ji and for j > i blocks
/// +I with response theta_ij + mu_j + v_ij, all scaled sqrt(rho/2). Assumes
/// mu_j for j < i already updated this sweep (Gauss-Seidel).
LassoProblem build_pseudo_observations(int i, const Matrix& X, const DcState& state,
                                       const SprclustConfig& cfg);

/// One ADMM iteration: Gauss-Seidel mu updates via lasso_cd, then the theta
/// prox/identity updates per the frozen active set, then dual ascent.
/// Residuals: primal = max pair ||theta - (mu_i - mu_j)||, dual = rho * max
/// pair change in theta.
AdmmResiduals admm_sweep(const Matrix& X, DcState& state, const SprclustConfig& cfg);

/// Outer DC loop with inner ADMM (warm-started across DC iterations).
/// Terminates when S stops strictly decreasing or after dc_max_iters.
SprclustFit fit(const Matrix& X, const SprclustConfig& cfg);

/// Samples joined when theta_ij is exactly zero or centroids agree to
/// cluster_tol (relative); clusters are connected components labeled by
/// ascending smallest member index, 1-based.
std::pair<std::vector<int>, int> extract_clusters(const DcState& state, double cluster_tol);

/// Max violation over the three stationarity systems: the mu_i lasso
/// subgradient conditions, the theta_ij conditions (subgradient ball at 0),
/// and the constraint residuals.
double kkt_residual(const Matrix& X, const DcState& state, const SprclustConfig& cfg);

}  // namespace scehg

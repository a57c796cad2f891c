#include "scehg/sprclust.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace scehg {

namespace {

void check_config(const SprclustConfig& cfg) {
  if (!(cfg.lambda1 >= 0) || !(cfg.lambda2 >= 0))
    throw InvalidInput("sprclust penalties must be >= 0");
  if (!(cfg.tau > 0)) throw InvalidInput("sprclust tau must be > 0");
  if (!(cfg.rho > 0)) throw InvalidInput("sprclust rho must be > 0");
  if (!(cfg.cluster_tol > 0)) throw InvalidInput("sprclust cluster_tol must be > 0");
  if (cfg.dc_max_iters < 1) throw InvalidInput("sprclust dc_max_iters must be >= 1");
  check_solver_options(cfg.admm_opts);
  check_solver_options(cfg.lasso_opts);
}

void check_state(const Matrix& X, const DcState& state) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  if (state.mu.rows() != n || state.mu.cols() != d)
    throw InvalidInput("state centroid matrix does not match data dimensions");
  const int pairs = pair_count(n);
  if (state.theta.rows() != pairs || state.duals.rows() != pairs ||
      state.theta.cols() != d || state.duals.cols() != d || state.active.size() != pairs)
    throw InvalidInput("state pairwise maps do not match data dimensions");
}

}  // namespace

int pair_count(int n) {
  if (n < 0) throw InvalidInput("pair_count requires n >= 0");
  return n * (n - 1) / 2;
}

int pair_index(int i, int j, int n) {
  if (i < 0 || j <= i || j >= n) throw InvalidInput("pair_index requires 0 <= i < j < n");
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

DcState initial_state(const Matrix& X) {
  if (!X.allFinite()) throw InvalidInput("data matrix has non-finite entries");
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  if (n < 2) throw InvalidInput("sprclust requires at least 2 samples");
  if (d < 1) throw InvalidInput("sprclust requires at least 1 feature");

  DcState state;
  state.mu = X;
  state.theta.resize(pair_count(n), d);
  state.duals = Matrix::Zero(pair_count(n), d);
  state.active = BoolArray::Constant(pair_count(n), true);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      state.theta.row(pair_index(i, j, n)) = X.row(i) - X.row(j);
  return state;
}

double objective_S(const Matrix& X, const DcState& state, const SprclustConfig& cfg) {
  check_state(X, state);
  const int n = static_cast<int>(X.rows());

  double value = 0.5 * (X - state.mu).squaredNorm() + cfg.lambda1 * state.mu.lpNorm<1>();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      value += cfg.lambda2 * tlp((state.mu.row(i) - state.mu.row(j)).norm(), cfg.tau);
  return value;
}

void refresh_active(DcState& state, double tau) {
  if (!(tau > 0)) throw InvalidInput("refresh_active requires tau > 0");
  for (Eigen::Index k = 0; k < state.theta.rows(); ++k)
    state.active(k) = state.theta.row(k).norm() < tau;
}

LassoProblem build_pseudo_observations(int i, const Matrix& X, const DcState& state,
                                       const SprclustConfig& cfg) {
  check_state(X, state);
  const int n = state.n();
  const int d = state.d();
  if (i < 0 || i >= n) throw InvalidInput("sample index out of range");

  const double block = std::sqrt(cfg.rho / 2.0);
  const double top = block / std::sqrt(cfg.rho);  // = 1/sqrt(2)

  LassoProblem problem;
  problem.penalty = cfg.lambda1;
  problem.design = Matrix::Zero(static_cast<Eigen::Index>(n) * d, d);
  problem.response.resize(static_cast<Eigen::Index>(n) * d);

  problem.design.topRows(d).diagonal().setConstant(top);
  problem.response.head(d) = top * X.row(i).transpose();

  Eigen::Index row = d;
  for (int j = 0; j < i; ++j) {  // -I blocks; mu_j already updated this sweep
    const int k = pair_index(j, i, n);
    problem.design.block(row, 0, d, d).diagonal().setConstant(-block);
    problem.response.segment(row, d) =
        block * (state.theta.row(k) - state.mu.row(j) + state.duals.row(k)).transpose();
    row += d;
  }
  for (int j = i + 1; j < n; ++j) {  // +I blocks; mu_j still from the previous sweep
    const int k = pair_index(i, j, n);
    problem.design.block(row, 0, d, d).diagonal().setConstant(block);
    problem.response.segment(row, d) =
        block * (state.theta.row(k) + state.mu.row(j) + state.duals.row(k)).transpose();
    row += d;
  }
  return problem;
}

AdmmResiduals admm_sweep(const Matrix& X, DcState& state, const SprclustConfig& cfg) {
  check_state(X, state);
  const int n = state.n();

  for (int i = 0; i < n; ++i) {
    const LassoProblem problem = build_pseudo_observations(i, X, state, cfg);
    const Vector warm = state.mu.row(i).transpose();
    state.mu.row(i) = lasso_cd(problem, cfg.lasso_opts, &warm).transpose();
  }

  AdmmResiduals res;
  const double shrink = cfg.lambda2 / cfg.rho;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int k = pair_index(i, j, n);
      const Vector candidate =
          (state.mu.row(i) - state.mu.row(j) - state.duals.row(k)).transpose();
      const Vector updated = state.active(k) ? group_prox(candidate, shrink) : candidate;

      res.dual = std::max(res.dual,
                          cfg.rho * (updated.transpose() - state.theta.row(k)).norm());
      state.theta.row(k) = updated.transpose();

      const Vector gap =
          (state.theta.row(k) - (state.mu.row(i) - state.mu.row(j))).transpose();
      state.duals.row(k) += gap.transpose();
      res.primal = std::max(res.primal, gap.norm());
    }
  }
  return res;
}

std::pair<std::vector<int>, int> extract_clusters(const DcState& state, double cluster_tol) {
  if (!(cluster_tol > 0)) throw InvalidInput("cluster_tol must be > 0");
  const int n = state.n();

  std::vector<std::vector<int>> adjacent(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int k = pair_index(i, j, n);
      const bool fused = state.theta.row(k).isZero(0.0) ||
                         (state.mu.row(i) - state.mu.row(j)).norm() <=
                             cluster_tol * (1.0 + state.mu.row(i).norm());
      if (fused) {
        adjacent[static_cast<size_t>(i)].push_back(j);
        adjacent[static_cast<size_t>(j)].push_back(i);
      }
    }
  }

  std::vector<int> labels(static_cast<size_t>(n), 0);
  int k_hat = 0;
  for (int start = 0; start < n; ++start) {
    if (labels[static_cast<size_t>(start)] != 0) continue;
    ++k_hat;
    std::vector<int> stack{start};
    labels[static_cast<size_t>(start)] = k_hat;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : adjacent[static_cast<size_t>(u)]) {
        if (labels[static_cast<size_t>(v)] == 0) {
          labels[static_cast<size_t>(v)] = k_hat;
          stack.push_back(v);
        }
      }
    }
  }
  return {labels, k_hat};
}

double kkt_residual(const Matrix& X, const DcState& state, const SprclustConfig& cfg) {
  check_state(X, state);
  const int n = state.n();
  double worst = 0.0;

  for (int i = 0; i < n; ++i) {
    const LassoProblem problem = build_pseudo_observations(i, X, state, cfg);
    worst = std::max(worst, lasso_kkt_residual(problem, state.mu.row(i).transpose()));
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int k = pair_index(i, j, n);
      const Vector theta = state.theta.row(k).transpose();
      const Vector anchor =
          (state.theta.row(k) - state.mu.row(i) + state.mu.row(j) + state.duals.row(k))
              .transpose();
      if (state.active(k)) {
        if (theta.isZero(0.0)) {
          const double pull =
              cfg.rho *
              (state.mu.row(i) - state.mu.row(j) - state.duals.row(k)).norm();
          worst = std::max(worst, std::max(0.0, pull - cfg.lambda2));
        } else {
          worst = std::max(
              worst, (cfg.lambda2 * theta / theta.norm() + cfg.rho * anchor).norm());
        }
      } else {
        worst = std::max(worst, cfg.rho * anchor.norm());
      }
      worst = std::max(
          worst, (state.theta.row(k) - state.mu.row(i) + state.mu.row(j)).norm());
    }
  }
  return worst;
}

SprclustFit fit(const Matrix& X_in, const SprclustConfig& cfg) {
  check_config(cfg);
  if (!X_in.allFinite()) throw InvalidInput("data matrix has non-finite entries");

  Matrix X = X_in;
  Vector scale;
  if (cfg.standardize) {
    scale = Vector::Ones(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double mean = X.col(j).mean();
      const double sd = std::sqrt((X.col(j).array() - mean).square().sum() /
                                  std::max<Eigen::Index>(1, X.rows() - 1));
      if (sd > 0) {
        scale(j) = sd;
        X.col(j) /= sd;
      }
    }
  }

  DcState state = initial_state(X);
  SprclustFit out;
  out.objective_trace.push_back(objective_S(X, state, cfg));

  bool stopped = false;
  bool last_admm_converged = true;
  BoolArray previous_active;
  for (int m = 0; m < cfg.dc_max_iters; ++m) {
    // Keep a pre-refresh copy: its variables satisfy the subproblem of its
    // own active set, which a revert must restore as one unit.
    const DcState backup = state;
    const bool backup_admm_converged = last_admm_converged;
    refresh_active(state, cfg.tau);
    // The approximation depends on the iterate only through the active set;
    // an unchanged set means the converged inner problem is unchanged too.
    if (m > 0 && last_admm_converged && (state.active == previous_active).all()) {
      stopped = true;
      break;
    }
    previous_active = state.active;

    last_admm_converged = false;
    for (int it = 0; it < cfg.admm_opts.max_iters; ++it) {
      const AdmmResiduals res = admm_sweep(X, state, cfg);
      ++out.admm_iters_total;
      if (res.primal < cfg.admm_opts.tol && res.dual < cfg.admm_opts.tol) {
        last_admm_converged = true;
        break;
      }
    }
    ++out.dc_iters;

    const double objective = objective_S(X, state, cfg);
    const double previous = out.objective_trace.back();
    if (objective < previous) {
      out.objective_trace.push_back(objective);
      continue;
    }
    if (objective == previous) {
      out.objective_trace.push_back(objective);
    } else {
      state = backup;  // numerical uptick; keep the better iterate
      last_admm_converged = backup_admm_converged;
    }
    stopped = true;
    break;
  }

  out.converged = stopped && last_admm_converged;
  out.kkt_residual = kkt_residual(X, state, cfg);

  auto clusters = extract_clusters(state, cfg.cluster_tol);
  out.assignment = std::move(clusters.first);
  out.k_hat = clusters.second;

  out.centroids = state.mu;
  if (cfg.standardize)
    for (Eigen::Index j = 0; j < out.centroids.cols(); ++j)
      out.centroids.col(j) *= scale(j);  // exact zeros are preserved
  return out;
}

}  // namespace scehg

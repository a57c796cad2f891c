#include "scehg/simgen.hpp"

#include "scehg/solvers.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>

namespace scehg {

namespace {

Matrix repaired_precision(const IntMatrix& adjacency, const GraphConfig& cfg) {
  const Eigen::Index p = adjacency.rows();
  Matrix omega = cfg.edge_weight * adjacency.cast<double>();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(omega, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  omega.diagonal().array() += std::abs(min_eig) + cfg.diag_boost;
  return omega;
}

void check_graph_inputs(int p, int K, const GraphConfig& cfg) {
  if (p < 4) throw InvalidInput("graph generators require p >= 4");
  if (K < 1) throw InvalidInput("graph generators require K >= 1");
  if (!(cfg.edge_weight > 0)) throw InvalidInput("edge weight must be > 0");
  if (!(cfg.diag_boost > 0)) throw InvalidInput("diagonal boost must be > 0");
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::ar_hub: return "ar_hub";
    case Scenario::ar_smallworld: return "ar_smallworld";
    case Scenario::bc_hub: return "bc_hub";
    case Scenario::bc_smallworld: return "bc_smallworld";
  }
  throw InvalidInput("unknown scenario value");
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "ar_hub") return Scenario::ar_hub;
  if (name == "ar_smallworld") return Scenario::ar_smallworld;
  if (name == "bc_hub") return Scenario::bc_hub;
  if (name == "bc_smallworld") return Scenario::bc_smallworld;
  throw InvalidInput("unknown scenario '" + name +
                     "' (expected ar_hub, ar_smallworld, bc_hub or bc_smallworld)");
}

Matrix ar_covariance(int q) {
  if (q < 1) throw InvalidInput("ar_covariance requires q >= 1");
  Matrix sigma(q, q);
  for (int s = 0; s < q; ++s)
    for (int t = 0; t < q; ++t) sigma(s, t) = std::pow(0.5, std::abs(s - t));
  return sigma;
}

Matrix band_covariance(int q) {
  if (q < 1) throw InvalidInput("band_covariance requires q >= 1");
  Matrix sigma = Matrix::Zero(q, q);
  for (int s = 0; s < q; ++s)
    for (int t = 0; t < q; ++t)
      if (std::abs(s - t) < 4) sigma(s, t) = 1.0 / (std::abs(s - t) + 1.0);
  return sigma;
}

GraphSet hub_precision(int p, int K, std::uint64_t seed, const GraphConfig& cfg) {
  (void)seed;  // hub layout is deterministic
  check_graph_inputs(p, K, cfg);
  const int groups = std::max(1, std::min(cfg.hub_groups, p / 2));

  std::vector<int> sizes(static_cast<size_t>(groups), p / groups);
  for (int g = 0; g < p % groups; ++g) ++sizes[static_cast<size_t>(g)];

  GraphSet out;
  for (int k = 0; k < K; ++k) {
    IntMatrix adj = IntMatrix::Zero(p, p);
    const int shift = k;  // rotate group boundaries by one node per cluster
    int at = 0;
    for (int g = 0; g < groups; ++g) {
      const int hub = (at + shift) % p;
      for (int member = 1; member < sizes[static_cast<size_t>(g)]; ++member) {
        const int node = (at + member + shift) % p;
        adj(hub, node) = 1;
        adj(node, hub) = 1;
      }
      at += sizes[static_cast<size_t>(g)];
    }
    out.adjacency.push_back(adj);
    out.precisions.push_back(repaired_precision(adj, cfg));
  }
  return out;
}

GraphSet small_world_precision(int p, int K, std::uint64_t seed, const GraphConfig& cfg) {
  check_graph_inputs(p, K, cfg);
  if (cfg.sw_neighbors < 1 || cfg.sw_neighbors >= (p + 1) / 2)
    throw InvalidInput("small-world neighbors per side must be in [1, (p-1)/2]");
  if (!(cfg.sw_rewire_prob >= 0) || cfg.sw_rewire_prob > 1)
    throw InvalidInput("rewiring probability must be in [0, 1]");

  GraphSet out;
  for (int k = 0; k < K; ++k) {
    Rng rng(seed_mix(seed, static_cast<std::uint64_t>(k), 0x5157ULL));

    std::vector<int> node(static_cast<size_t>(p));
    std::iota(node.begin(), node.end(), 0);
    if (cfg.sw_permute_nodes) {
      for (int i = p - 1; i > 0; --i)
        std::swap(node[static_cast<size_t>(i)], node[static_cast<size_t>(rng.uniform_int(i + 1))]);
    }

    IntMatrix adj = IntMatrix::Zero(p, p);
    for (int i = 0; i < p; ++i)
      for (int l = 1; l <= cfg.sw_neighbors; ++l) {
        const int a = node[static_cast<size_t>(i)];
        const int b = node[static_cast<size_t>((i + l) % p)];
        adj(a, b) = 1;
        adj(b, a) = 1;
      }

    // Watts-Strogatz rewiring: keep the first endpoint, redraw the second;
    // edge count is conserved.
    for (int i = 0; i < p; ++i) {
      for (int l = 1; l <= cfg.sw_neighbors; ++l) {
        if (rng.uniform() >= cfg.sw_rewire_prob) continue;
        const int a = node[static_cast<size_t>(i)];
        const int b = node[static_cast<size_t>((i + l) % p)];
        if (adj(a, b) == 0) continue;  // already rewired away
        for (int attempt = 0; attempt < p * p; ++attempt) {
          const int c = rng.uniform_int(p);
          if (c == a || adj(a, c) == 1) continue;
          adj(a, b) = adj(b, a) = 0;
          adj(a, c) = adj(c, a) = 1;
          break;
        }
      }
    }

    out.adjacency.push_back(adj);
    out.precisions.push_back(repaired_precision(adj, cfg));
  }
  return out;
}

Matrix sample_matrix_normal(const Matrix& sigma_s, const Matrix& sigma_t, Rng& rng) {
  const SymmetricFactor spatial(sigma_s);
  const SymmetricFactor temporal(sigma_t);
  Matrix gauss(sigma_s.rows(), sigma_t.rows());
  for (Eigen::Index i = 0; i < gauss.rows(); ++i)
    for (Eigen::Index j = 0; j < gauss.cols(); ++j) gauss(i, j) = rng.normal();
  return spatial.lower() * gauss * temporal.lower().transpose();
}

std::pair<std::vector<SubjectSeries>, GroundTruth> generate_scenario(const ScenarioSpec& spec) {
  if (spec.clusters < 1 || spec.per_cluster < 1)
    throw InvalidInput("scenario requires K >= 1 and n_k >= 1");
  if (spec.p < 2 || spec.q < 2) throw InvalidInput("scenario requires p >= 2 and q >= 2");

  const bool ar = spec.scenario == Scenario::ar_hub || spec.scenario == Scenario::ar_smallworld;
  const bool hub = spec.scenario == Scenario::ar_hub || spec.scenario == Scenario::bc_hub;

  const Matrix sigma_t = ar ? ar_covariance(spec.q) : band_covariance(spec.q);
  const GraphSet graphs = hub ? hub_precision(spec.p, spec.clusters, spec.seed, spec.graph)
                              : small_world_precision(spec.p, spec.clusters, spec.seed, spec.graph);

  std::vector<Matrix> spatial_chol;
  for (const Matrix& omega : graphs.precisions) {
    const Matrix sigma_s = SymmetricFactor(omega).inverse();
    spatial_chol.push_back(SymmetricFactor(sigma_s).lower());
  }
  const Matrix temporal_chol = SymmetricFactor(sigma_t).lower();

  const int total = spec.clusters * spec.per_cluster;
  std::vector<SubjectSeries> subjects;
  subjects.reserve(static_cast<size_t>(total));
  GroundTruth truth;
  truth.labels.resize(static_cast<size_t>(total));
  truth.precisions = graphs.precisions;
  truth.adjacency = graphs.adjacency;

  for (int g = 0; g < total; ++g) {
    const int k = g / spec.per_cluster;
    truth.labels[static_cast<size_t>(g)] = k + 1;
    Rng rng(seed_mix(spec.seed, 0x5b7ec7ULL, static_cast<std::uint64_t>(g)));

    Matrix gauss(spec.p, spec.q);
    for (int i = 0; i < spec.p; ++i)
      for (int j = 0; j < spec.q; ++j) gauss(i, j) = rng.normal();

    char name[32];
    std::snprintf(name, sizeof(name), "subj_%04d", g);
    subjects.push_back(
        {name, spatial_chol[static_cast<size_t>(k)] * gauss * temporal_chol.transpose()});
  }
  return {std::move(subjects), std::move(truth)};
}

ClusterMetrics cluster_metrics(const std::vector<int>& truth, const std::vector<int>& estimate) {
  if (truth.size() != estimate.size())
    throw InvalidInput("cluster_metrics label vectors differ in length");
  const int n = static_cast<int>(truth.size());
  if (n < 2) throw InvalidInput("cluster_metrics requires at least 2 samples");

  // Pair counts: a together in both, b truth only, c estimate only, d neither.
  long long a = 0, b = 0, c = 0, d = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool same_truth = truth[static_cast<size_t>(i)] == truth[static_cast<size_t>(j)];
      const bool same_est =
          estimate[static_cast<size_t>(i)] == estimate[static_cast<size_t>(j)];
      if (same_truth && same_est)
        ++a;
      else if (same_truth)
        ++b;
      else if (same_est)
        ++c;
      else
        ++d;
    }
  }

  ClusterMetrics out;
  const long long pairs = a + b + c + d;
  out.rand = static_cast<double>(a + d) / static_cast<double>(pairs);
  const double denom = static_cast<double>(a + b) * static_cast<double>(b + d) +
                       static_cast<double>(a + c) * static_cast<double>(c + d);
  out.a_rand = denom == 0.0
                   ? 1.0  // b = c = 0: identical comemberships
                   : 2.0 * (static_cast<double>(a) * d - static_cast<double>(b) * c) / denom;
  out.jaccard = (a + b + c) == 0 ? 1.0 : static_cast<double>(a) / static_cast<double>(a + b + c);

  std::vector<int> distinct(estimate);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  out.k_hat = static_cast<int>(distinct.size());
  return out;
}

GraphMetrics graph_metrics(const IntMatrix& truth_adj, const IntMatrix& estimate_adj) {
  if (truth_adj.rows() != estimate_adj.rows() || truth_adj.cols() != estimate_adj.cols() ||
      truth_adj.rows() != truth_adj.cols())
    throw DimensionMismatch("graph_metrics adjacency matrices must be square and equal-sized");

  long long tp = 0, fp = 0, tn = 0, fn = 0;
  for (Eigen::Index i = 0; i < truth_adj.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < truth_adj.cols(); ++j) {
      const bool has = truth_adj(i, j) != 0;
      const bool est = estimate_adj(i, j) != 0;
      if (has && est)
        ++tp;
      else if (!has && est)
        ++fp;
      else if (!has)
        ++tn;
      else
        ++fn;
    }
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  GraphMetrics out;
  out.tpr = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : nan;
  out.tnr = (tn + fp) > 0 ? static_cast<double>(tn) / static_cast<double>(tn + fp) : nan;
  out.fdr = (tp + fp) > 0 ? static_cast<double>(fp) / static_cast<double>(tp + fp) : 0.0;
  return out;
}

}  // namespace scehg

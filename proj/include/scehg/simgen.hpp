#pragma once

#include "scehg/covariance.hpp"
#include "scehg/rng.hpp"
#include "scehg/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace scehg {

enum class Scenario { ar_hub, ar_smallworld, bc_hub, bc_smallworld };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

/// Knobs for the synthetic graph generators (values the cited packages would
/// default; all exposed because the protocol only fixes the topology family).
struct GraphConfig {
  double edge_weight = 0.3;
  int hub_groups = 3;
  int sw_neighbors = 1;        // ring neighbors per side
  double sw_rewire_prob = 0.05;
  bool sw_permute_nodes = true;  // per-cluster node relabeling
  double diag_boost = 0.1;
};

struct ScenarioSpec {
  Scenario scenario = Scenario::ar_hub;
  int clusters = 3;     // K
  int per_cluster = 10; // n_k
  int p = 10;
  int q = 100;
  std::uint64_t seed = 0;
  GraphConfig graph;
};

struct GroundTruth {
  std::vector<int> labels;              // 1-based true cluster per subject
  std::vector<Matrix> precisions;       // K matrices
  std::vector<IntMatrix> adjacency;     // K binary edge sets (symmetric, zero diag)
};

struct ClusterMetrics {
  double rand = 0.0;
  double a_rand = 0.0;
  double jaccard = 0.0;
  int k_hat = 0;
};

struct GraphMetrics {
  double tpr = 0.0;
  double tnr = 0.0;
  double fdr = 0.0;
};

/// AR(1) correlation, entries 0.5^|s-t|, unit diagonal.
Matrix ar_covariance(int q);

/// Band correlation, entries 1/(|s-t|+1) for |s-t| < 4 and 0 otherwise.
Matrix band_covariance(int q);

struct GraphSet {
  std::vector<Matrix> precisions;
  std::vector<IntMatrix> adjacency;
};

/// K hub precisions: nodes split into hub groups (boundaries rotated per
/// cluster), each hub wired to all group members with weight edge_weight;
/// the diagonal adds |min eigenvalue| + diag_boost to force positive
/// definiteness.
GraphSet hub_precision(int p, int K, std::uint64_t seed, const GraphConfig& cfg = {});

/// K Watts-Strogatz small-world precisions drawn independently per cluster
/// from the per-cluster seed (ring lattice, sw_neighbors per side, rewiring
/// with sw_rewire_prob, optional per-cluster node relabeling); weights and
/// positive-definite repair as in hub_precision.
GraphSet small_world_precision(int p, int K, std::uint64_t seed, const GraphConfig& cfg = {});

/// Z = L_S G L_T^T with G iid standard normal, so Vec(Z) has covariance
/// Sigma_T (x) Sigma_S.
Matrix sample_matrix_normal(const Matrix& sigma_s, const Matrix& sigma_t, Rng& rng);

/// K * n_k subjects in cluster-blocked order; all randomness derives from
/// spec.seed via per-subject sub-streams.
std::pair<std::vector<SubjectSeries>, GroundTruth> generate_scenario(const ScenarioSpec& spec);

ClusterMetrics cluster_metrics(const std::vector<int>& truth, const std::vector<int>& estimate);

/// Upper-triangle confusion rates. TPR/TNR are NaN when undefined; FDR is 0
/// when no edges are estimated.
GraphMetrics graph_metrics(const IntMatrix& truth_adj, const IntMatrix& estimate_adj);

}  // namespace scehg

#pragma once

#include "scehg/sprclust.hpp"
#include "scehg/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace scehg {

struct TuningCombo {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double tau = 1.0;
};

struct TuningGrid {
  std::vector<double> lambda1s;
  std::vector<double> lambda2s;
  std::vector<double> taus;
  double subsample_fraction = 0.5;  // r
  double top_fraction = 0.4;        // s, stage-1 keep fraction
  double trim_fraction = 0.2;       // alpha, trimmed-mean fraction
  int subsamples = 5;               // B
  std::uint64_t seed = 0;
};

struct ConcordanceReport {
  TuningCombo combo;
  std::optional<double> c_bar;
  std::optional<double> f_bar;
  int k_hat = 0;
  bool omitted = false;
  std::string reason;
};

struct TuningResult {
  TuningCombo chosen;
  std::vector<ConcordanceReport> reports;
};

/// n x n comembership matrix: 1 same cluster, 0 different, NaN when either
/// sample is absent from `present`. labels[k] belongs to sample present[k].
Matrix comembership_matrix(const std::vector<int>& labels, const std::vector<int>& present,
                           int n);

/// Entrywise mean ignoring NaN; NaN where no matrix has the entry.
Matrix mean_comembership(const std::vector<Matrix>& mats);

/// Per-sample concordance C_i (NaN when undefined: no same-cluster or no
/// different-cluster peers with observed mean comembership) and the trimmed
/// mean after discarding the lowest floor(alpha * n) defined values.
std::pair<std::vector<double>, std::optional<double>> sample_concordance(const Matrix& T,
                                                                         const Matrix& Tbar,
                                                                         double alpha);

/// f_kj = 1 iff strictly more than half of cluster k's centroids have a
/// nonzero j-th coordinate (exact-zero test). Labels are 1-based.
IntMatrix feature_indicator(const Matrix& centroids, const std::vector<int>& labels,
                            int k_hat);

/// One subsample fit's view for feature concordance.
struct SubsampleFeatures {
  std::vector<int> present;  // global sample indices, ascending
  std::vector<int> labels;   // 1-based labels aligned with present
  IntMatrix f;               // k_hat_sub x d
};

/// Cluster-matched feature concordance F-bar. Subsample fits with more
/// clusters than the full fit are dropped; clusters are matched greedily by
/// maximum member overlap. Returns nullopt when F(k) is undefined for all k.
std::optional<double> feature_concordance(const IntMatrix& f_full,
                                          const std::vector<int>& full_labels,
                                          const std::vector<SubsampleFeatures>& subs);

/// Two-stage selection over the grid: per combo, a full fit plus B seeded
/// subsample fits yield C-bar and F-bar; combos with one cluster or all
/// features selected are omitted; stage 1 keeps the top-fraction by C-bar,
/// stage 2 maximizes F-bar, ties to larger lambda2, larger lambda1, smaller
/// tau.
TuningResult select_tuning(const Matrix& X, const TuningGrid& grid,
                           const SprclustConfig& config_template, int threads = 1);

}  // namespace scehg

#pragma once

#include "scehg/covariance.hpp"
#include "scehg/glasso.hpp"
#include "scehg/simgen.hpp"
#include "scehg/sprclust.hpp"
#include "scehg/tuning.hpp"
#include "scehg/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace scehg {

struct GlassoSettings {
  std::vector<double> lambda_grid = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
  int folds = 5;
  std::optional<double> bandwidth;  // default: q^(1/3)
  SolverOptions opts{1e-6, 500};
};

struct PipelineConfig {
  std::optional<std::string> input_dir;
  std::optional<ScenarioSpec> scenario;
  GlassoSettings glasso;
  TuningGrid tuning;
  std::optional<TuningCombo> fixed_combo;
  SprclustConfig sprclust;
  std::optional<int> fix_k;  // experimental post-hoc merge to a fixed K
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct EdgeProportionRow {
  int cluster = 0;
  int i = 0;  // 1-based node pair, i < j
  int j = 0;
  double prop_absent = 0.0;
  bool absent = false;
};

struct RunReport {
  std::vector<std::string> subject_ids;
  std::vector<int> assignment;
  int k_hat = 0;
  TuningCombo chosen_combo;
  bool combo_was_tuned = false;
  std::vector<ConcordanceReport> tuning_reports;
  std::vector<double> glasso_lambdas;  // per-subject CV winners
  std::vector<double> objective_trace;
  double kkt_residual = 0.0;
  int dc_iters = 0;
  long admm_iters_total = 0;
  bool converged = false;
  std::optional<ClusterMetrics> clustering;
  std::optional<GraphMetrics> graph;
  std::vector<EdgeProportionRow> edges;
  std::uint64_t seed = 0;
  double elapsed_seconds = 0.0;  // console only, never serialized
};

/// Load one CSV per subject (p rows, q comma-separated columns, no header;
/// the filename stem is the subject id), sorted by subject id.
std::vector<SubjectSeries> load_subjects(const std::string& dir);

/// Per-cluster absence proportions from fitted centroid supports. Row gamma
/// of `centroids` is subject gamma's recovered edge vector; a coefficient
/// counts as absent iff it is exactly zero.
std::vector<EdgeProportionRow> edge_proportion(const Matrix& centroids,
                                               const std::vector<int>& assignment);

/// Full SCEHG flow: per-subject kernel covariance -> glasso CV -> features,
/// then tuning (or the fixed combo) and the sprclust fit, edge proportions
/// and truth metrics when available. Writes report files when out_dir is set.
RunReport run_pipeline(const PipelineConfig& cfg);

/// Writes report.json, metrics.csv and edges.csv into dir.
void emit_report(const RunReport& report, const std::string& dir);
RunReport load_report(const std::string& path);

/// Scenario replication: repetitions with seeds base, base+1, ... and an
/// aggregated metrics.csv (per-rep rows plus mean and sd rows).
std::vector<RunReport> run_replicate(const PipelineConfig& base, int repetitions);

/// Write/read a generated dataset (CSV per subject plus truth.json).
void write_dataset(const std::vector<SubjectSeries>& subjects, const GroundTruth& truth,
                   const std::string& dir);
std::optional<GroundTruth> load_truth(const std::string& dir);

/// Parse a config JSON file mirroring PipelineConfig in snake_case.
PipelineConfig load_pipeline_config(const std::string& path);

}  // namespace scehg

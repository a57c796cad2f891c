#include "scehg/parallel.hpp"
#include "scehg/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace scehg;

struct CommonFlags {
  std::string config_path;
  std::string threads = "auto";
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

struct ScenarioFlags {
  std::string name;
  std::optional<int> clusters, per_cluster, p, q;
  std::optional<double> edge_weight, sw_rewire;
  std::optional<int> hub_groups, sw_neighbors;
  std::optional<bool> sw_permute;
};

struct GlassoFlags {
  std::vector<double> lambda_grid;
  std::optional<int> folds;
  std::optional<double> bandwidth;
};

struct TuningFlags {
  std::vector<double> lambda1s, lambda2s, taus;
  std::optional<double> subsample_fraction, top_fraction, trim_fraction;
  std::optional<int> subsamples;
};

struct ComboFlags {
  std::optional<double> lambda1, lambda2, tau;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config mirroring the pipeline settings");
  cmd->add_option("--threads", flags.threads, "worker count or 'auto'");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--seed", flags.seed, "random seed");
}

void add_scenario(CLI::App* cmd, ScenarioFlags& flags, bool required) {
  auto* opt = cmd->add_option("--scenario", flags.name,
                              "ar_hub | ar_smallworld | bc_hub | bc_smallworld");
  if (required) opt->required();
  cmd->add_option("--k", flags.clusters, "number of clusters");
  cmd->add_option("--n-k", flags.per_cluster, "subjects per cluster");
  cmd->add_option("--p", flags.p, "spatial dimension");
  cmd->add_option("--q", flags.q, "temporal dimension");
  cmd->add_option("--edge-weight", flags.edge_weight, "precision edge weight");
  cmd->add_option("--hub-groups", flags.hub_groups, "hub groups per graph");
  cmd->add_option("--sw-neighbors", flags.sw_neighbors, "ring neighbors per side");
  cmd->add_option("--sw-rewire", flags.sw_rewire, "small-world rewiring probability");
  cmd->add_option("--sw-permute", flags.sw_permute, "per-cluster node relabeling (0/1)");
}

void add_glasso(CLI::App* cmd, GlassoFlags& flags) {
  cmd->add_option("--glasso-lambdas", flags.lambda_grid, "glasso CV penalty grid")
      ->delimiter(',');
  cmd->add_option("--folds", flags.folds, "glasso CV folds");
  cmd->add_option("--bandwidth", flags.bandwidth, "kernel bandwidth (default q^(1/3))");
}

void add_tuning(CLI::App* cmd, TuningFlags& flags) {
  cmd->add_option("--lambda1-grid", flags.lambda1s, "sparsity penalty grid")->delimiter(',');
  cmd->add_option("--lambda2-grid", flags.lambda2s, "fusion penalty grid")->delimiter(',');
  cmd->add_option("--tau-grid", flags.taus, "TLP threshold grid")->delimiter(',');
  cmd->add_option("--subsample-fraction", flags.subsample_fraction, "subsample fraction r");
  cmd->add_option("--top-fraction", flags.top_fraction, "stage-1 keep fraction s");
  cmd->add_option("--trim-fraction", flags.trim_fraction, "trimmed-mean fraction alpha");
  cmd->add_option("--subsamples", flags.subsamples, "subsample count B");
}

void add_combo(CLI::App* cmd, ComboFlags& flags) {
  cmd->add_option("--lambda1", flags.lambda1, "sparsity penalty");
  cmd->add_option("--lambda2", flags.lambda2, "fusion penalty");
  cmd->add_option("--tau", flags.tau, "TLP threshold");
}

PipelineConfig base_config(const CommonFlags& common) {
  PipelineConfig cfg;
  if (!common.config_path.empty()) cfg = load_pipeline_config(common.config_path);
  if (common.seed.has_value()) {
    cfg.seed = *common.seed;
    cfg.tuning.seed = *common.seed;
    if (cfg.scenario.has_value()) cfg.scenario->seed = *common.seed;
  }
  if (!common.out_dir.empty()) cfg.out_dir = common.out_dir;
  cfg.threads = resolve_threads(common.threads);
  return cfg;
}

void apply_scenario(PipelineConfig& cfg, const ScenarioFlags& flags) {
  if (!flags.name.empty()) {
    ScenarioSpec spec = cfg.scenario.value_or(ScenarioSpec{});
    spec.scenario = scenario_from_string(flags.name);
    spec.seed = cfg.seed;
    cfg.scenario = spec;
    cfg.input_dir.reset();
  }
  if (!cfg.scenario.has_value()) return;
  ScenarioSpec& spec = *cfg.scenario;
  if (flags.clusters) spec.clusters = *flags.clusters;
  if (flags.per_cluster) spec.per_cluster = *flags.per_cluster;
  if (flags.p) spec.p = *flags.p;
  if (flags.q) spec.q = *flags.q;
  if (flags.edge_weight) spec.graph.edge_weight = *flags.edge_weight;
  if (flags.hub_groups) spec.graph.hub_groups = *flags.hub_groups;
  if (flags.sw_neighbors) spec.graph.sw_neighbors = *flags.sw_neighbors;
  if (flags.sw_rewire) spec.graph.sw_rewire_prob = *flags.sw_rewire;
  if (flags.sw_permute) spec.graph.sw_permute_nodes = *flags.sw_permute;
}

void apply_glasso(PipelineConfig& cfg, const GlassoFlags& flags) {
  if (!flags.lambda_grid.empty()) cfg.glasso.lambda_grid = flags.lambda_grid;
  if (flags.folds) cfg.glasso.folds = *flags.folds;
  if (flags.bandwidth) cfg.glasso.bandwidth = *flags.bandwidth;
}

void apply_tuning(PipelineConfig& cfg, const TuningFlags& flags) {
  if (!flags.lambda1s.empty()) cfg.tuning.lambda1s = flags.lambda1s;
  if (!flags.lambda2s.empty()) cfg.tuning.lambda2s = flags.lambda2s;
  if (!flags.taus.empty()) cfg.tuning.taus = flags.taus;
  if (flags.subsample_fraction) cfg.tuning.subsample_fraction = *flags.subsample_fraction;
  if (flags.top_fraction) cfg.tuning.top_fraction = *flags.top_fraction;
  if (flags.trim_fraction) cfg.tuning.trim_fraction = *flags.trim_fraction;
  if (flags.subsamples) cfg.tuning.subsamples = *flags.subsamples;
}

bool apply_combo(PipelineConfig& cfg, const ComboFlags& flags) {
  if (!flags.lambda1 && !flags.lambda2 && !flags.tau) return cfg.fixed_combo.has_value();
  if (!(flags.lambda1 && flags.lambda2 && flags.tau))
    throw InvalidInput("--lambda1, --lambda2 and --tau must be given together");
  cfg.fixed_combo = TuningCombo{*flags.lambda1, *flags.lambda2, *flags.tau};
  return true;
}

void print_summary(const RunReport& report) {
  std::printf("k_hat: %d\n", report.k_hat);
  std::printf("combo: lambda1=%g lambda2=%g tau=%g (%s)\n", report.chosen_combo.lambda1,
              report.chosen_combo.lambda2, report.chosen_combo.tau,
              report.combo_was_tuned ? "tuned" : "fixed");
  if (report.clustering.has_value())
    std::printf("clustering: rand=%.4f a_rand=%.4f jaccard=%.4f\n", report.clustering->rand,
                report.clustering->a_rand, report.clustering->jaccard);
  if (report.graph.has_value())
    std::printf("graph: tpr=%.4f tnr=%.4f fdr=%.4f\n", report.graph->tpr, report.graph->tnr,
                report.graph->fdr);
  std::printf("kkt_residual: %.3e, dc_iters: %d, admm_iters: %ld, converged: %s\n",
              report.kkt_residual, report.dc_iters, report.admm_iters_total,
              report.converged ? "yes" : "no");
  std::printf("elapsed: %.2fs\n", report.elapsed_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SCEHG: simultaneous clustering and heterogeneous graph recovery"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset + truth.json");
  CommonFlags sim_common;
  ScenarioFlags sim_scenario;
  add_common(simulate, sim_common);
  add_scenario(simulate, sim_scenario, /*required=*/true);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit a data directory with a fixed combo");
  CommonFlags fit_common;
  GlassoFlags fit_glasso;
  ComboFlags fit_combo;
  std::string fit_data;
  std::optional<int> fit_fix_k;
  add_common(fit_cmd, fit_common);
  fit_cmd->add_option("--data", fit_data, "directory of subject CSVs");
  add_glasso(fit_cmd, fit_glasso);
  add_combo(fit_cmd, fit_combo);
  fit_cmd->add_option("--fix-k", fit_fix_k,
                      "experimental: post-hoc merge of closest centroids down to K clusters");

  // tune
  auto* tune = app.add_subcommand("tune", "pick (lambda1, lambda2, tau) by concordance");
  CommonFlags tune_common;
  GlassoFlags tune_glasso;
  TuningFlags tune_grid;
  std::string tune_data;
  add_common(tune, tune_common);
  tune->add_option("--data", tune_data, "directory of subject CSVs");
  add_glasso(tune, tune_glasso);
  add_tuning(tune, tune_grid);

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "full flow: features -> tuning -> fit -> report");
  CommonFlags pipe_common;
  ScenarioFlags pipe_scenario;
  GlassoFlags pipe_glasso;
  TuningFlags pipe_grid;
  ComboFlags pipe_combo;
  std::string pipe_data;
  std::optional<int> pipe_fix_k;
  add_common(pipe, pipe_common);
  pipe->add_option("--data", pipe_data, "directory of subject CSVs");
  add_scenario(pipe, pipe_scenario, /*required=*/false);
  add_glasso(pipe, pipe_glasso);
  add_tuning(pipe, pipe_grid);
  add_combo(pipe, pipe_combo);
  pipe->add_option("--fix-k", pipe_fix_k,
                   "experimental: post-hoc merge of closest centroids down to K clusters");

  // replicate
  auto* repl = app.add_subcommand("replicate", "repeat a scenario and aggregate metrics");
  CommonFlags repl_common;
  ScenarioFlags repl_scenario;
  GlassoFlags repl_glasso;
  TuningFlags repl_grid;
  ComboFlags repl_combo;
  int repl_reps = 10;
  add_common(repl, repl_common);
  add_scenario(repl, repl_scenario, /*required=*/false);
  add_glasso(repl, repl_glasso);
  add_tuning(repl, repl_grid);
  add_combo(repl, repl_combo);
  repl->add_option("--reps", repl_reps, "number of repetitions");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      PipelineConfig cfg = base_config(sim_common);
      apply_scenario(cfg, sim_scenario);
      if (!cfg.scenario.has_value()) throw InvalidInput("simulate requires --scenario");
      if (cfg.out_dir.empty()) throw InvalidInput("simulate requires --out");
      auto [subjects, truth] = generate_scenario(*cfg.scenario);
      write_dataset(subjects, truth, cfg.out_dir);
      std::printf("wrote %zu subjects to %s\n", subjects.size(), cfg.out_dir.c_str());
    } else if (fit_cmd->parsed()) {
      PipelineConfig cfg = base_config(fit_common);
      if (!fit_data.empty()) {
        cfg.input_dir = fit_data;
        cfg.scenario.reset();
      }
      apply_glasso(cfg, fit_glasso);
      if (!apply_combo(cfg, fit_combo))
        throw InvalidInput("fit requires --lambda1/--lambda2/--tau (use tune or pipeline "
                           "for automatic selection)");
      if (fit_fix_k) cfg.fix_k = fit_fix_k;
      print_summary(run_pipeline(cfg));
    } else if (tune->parsed()) {
      PipelineConfig cfg = base_config(tune_common);
      if (!tune_data.empty()) {
        cfg.input_dir = tune_data;
        cfg.scenario.reset();
      }
      apply_glasso(cfg, tune_glasso);
      apply_tuning(cfg, tune_grid);
      cfg.fixed_combo.reset();
      const RunReport report = run_pipeline(cfg);
      print_summary(report);
      std::printf("combos evaluated: %zu\n", report.tuning_reports.size());
    } else if (pipe->parsed()) {
      PipelineConfig cfg = base_config(pipe_common);
      if (!pipe_data.empty()) {
        cfg.input_dir = pipe_data;
        cfg.scenario.reset();
      }
      apply_scenario(cfg, pipe_scenario);
      apply_glasso(cfg, pipe_glasso);
      apply_tuning(cfg, pipe_grid);
      apply_combo(cfg, pipe_combo);
      if (pipe_fix_k) cfg.fix_k = pipe_fix_k;
      print_summary(run_pipeline(cfg));
    } else if (repl->parsed()) {
      PipelineConfig cfg = base_config(repl_common);
      apply_scenario(cfg, repl_scenario);
      apply_glasso(cfg, repl_glasso);
      apply_tuning(cfg, repl_grid);
      apply_combo(cfg, repl_combo);
      if (!cfg.scenario.has_value()) throw InvalidInput("replicate requires --scenario");
      const auto reports = run_replicate(cfg, repl_reps);
      double mean_k = 0.0;
      for (const RunReport& r : reports) mean_k += r.k_hat;
      std::printf("replications: %zu, mean k_hat: %.2f\n", reports.size(),
                  mean_k / static_cast<double>(reports.size()));
      if (!cfg.out_dir.empty())
        std::printf("aggregated metrics: %s/metrics.csv\n", cfg.out_dir.c_str());
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

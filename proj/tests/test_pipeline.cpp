#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scehg/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace scehg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("scehg_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

PipelineConfig small_scenario_config(int seed) {
  PipelineConfig cfg;
  ScenarioSpec spec;
  spec.scenario = Scenario::ar_hub;
  spec.clusters = 2;
  spec.per_cluster = 3;
  spec.p = 6;
  spec.q = 100;
  spec.seed = static_cast<std::uint64_t>(seed);
  cfg.scenario = spec;
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.fixed_combo = TuningCombo{0.05, 0.2, 0.4};
  cfg.threads = 1;
  return cfg;
}

}  // namespace

TEST_CASE("load_subjects reads sorted, consistent CSVs") {
  TempDir dir("load");
  write_file(dir.path / "b_subject.csv", "1,2,3\n4,5,6\n");
  write_file(dir.path / "a_subject.csv", "0.5,1.5,-2\n7,8,9.25\n");

  const auto subjects = load_subjects(dir.str());
  REQUIRE(subjects.size() == 2);
  CHECK(subjects[0].subject_id == "a_subject");
  CHECK(subjects[1].subject_id == "b_subject");
  CHECK(subjects[0].data(0, 2) == -2.0);
  CHECK(subjects[1].data.rows() == 2);
  CHECK(subjects[1].data.cols() == 3);
}

TEST_CASE("load_subjects error paths") {
  SUBCASE("dimension mismatch names the offending files") {
    TempDir dir("dims");
    write_file(dir.path / "one.csv", "1,2\n3,4\n");
    write_file(dir.path / "two.csv", "1,2\n3,4\n5,6\n");
    try {
      load_subjects(dir.str());
      FAIL("expected dimension mismatch");
    } catch (const DimensionMismatch& e) {
      const std::string what = e.what();
      CHECK(what.find("two.csv") != std::string::npos);
      CHECK(what.find("one.csv") != std::string::npos);
    }
  }

  SUBCASE("unparsable cell reports file, row and column") {
    TempDir dir("parse");
    write_file(dir.path / "bad.csv", "1,2\n3,oops\n");
    try {
      load_subjects(dir.str());
      FAIL("expected parse error");
    } catch (const ParseError& e) {
      const std::string what = e.what();
      CHECK(what.find("bad.csv") != std::string::npos);
      CHECK(what.find("row 2") != std::string::npos);
      CHECK(what.find("column 2") != std::string::npos);
    }
  }

  SUBCASE("empty directory") {
    TempDir dir("empty");
    try {
      load_subjects(dir.str());
      FAIL("expected empty-input");
    } catch (const Error& e) {
      CHECK(e.code() == "empty-input");
    }
  }
}

TEST_CASE("edge_proportion counts exact zeros per cluster") {
  // 3 subjects in cluster 1 over p=3 (d=3); feature 0 zero in 2 of 3
  Matrix centroids(3, 3);
  centroids << 0.0, 0.5, 0.0,
               0.0, 0.4, 0.1,
               0.2, 0.3, 0.2;
  const auto table = edge_proportion(centroids, {1, 1, 1});
  REQUIRE(table.size() == 3);
  CHECK(table[0].cluster == 1);
  CHECK(table[0].i == 1);
  CHECK(table[0].j == 2);
  CHECK(table[0].prop_absent == doctest::Approx(2.0 / 3.0));
  CHECK(table[0].absent);
  CHECK(table[1].prop_absent == 0.0);  // nonzero in all
  CHECK_FALSE(table[1].absent);

  // threshold boundary: exactly one half counts as absent
  Matrix half(2, 1);
  half << 0.0, 1.0;
  const auto boundary = edge_proportion(half, {1, 1});
  CHECK(boundary[0].prop_absent == 0.5);
  CHECK(boundary[0].absent);
}

TEST_CASE("edge_proportion splits by assignment") {
  Matrix centroids(4, 1);
  centroids << 0.0, 0.0, 1.0, 1.0;
  const auto table = edge_proportion(centroids, {1, 1, 2, 2});
  REQUIRE(table.size() == 2);
  CHECK(table[0].cluster == 1);
  CHECK(table[0].prop_absent == 1.0);
  CHECK(table[1].cluster == 2);
  CHECK(table[1].prop_absent == 0.0);
}

TEST_CASE("edges.csv rows use fixed six-decimal formatting") {
  TempDir out("edgesfmt");
  RunReport report;
  report.subject_ids = {"a", "b", "c"};
  report.assignment = {1, 1, 1};
  report.k_hat = 1;
  Matrix centroids(3, 3);
  centroids << 0.0, 0.5, 0.1,
               0.0, 0.4, 0.1,
               0.2, 0.3, 0.2;
  report.edges = edge_proportion(centroids, report.assignment);
  emit_report(report, out.str());

  const std::string edges = slurp(out.path / "edges.csv");
  CHECK(edges.find("1,1,2,0.666667,true\n") != std::string::npos);
  CHECK(edges.find("1,1,3,0.000000,false\n") != std::string::npos);
}

TEST_CASE("run_pipeline end to end on a planted scenario") {
  TempDir out("run");
  PipelineConfig cfg = small_scenario_config(11);
  cfg.out_dir = out.str();
  const RunReport report = run_pipeline(cfg);

  CHECK(report.k_hat == 2);
  REQUIRE(report.clustering.has_value());
  CHECK(report.clustering->a_rand == 1.0);
  REQUIRE(report.graph.has_value());
  CHECK(report.graph->tpr > 0.7);
  CHECK(report.graph->tnr > 0.7);
  CHECK(report.kkt_residual <= 10 * cfg.sprclust.admm_opts.tol);
  CHECK(report.subject_ids.front() == "subj_0000");
  CHECK(fs::exists(out.path / "report.json"));
  CHECK(fs::exists(out.path / "metrics.csv"));
  CHECK(fs::exists(out.path / "edges.csv"));

  const std::string metrics = slurp(out.path / "metrics.csv");
  CHECK(metrics.rfind("k_hat,rand,a_rand,jaccard,tpr,tnr,fdr\n", 0) == 0);
  const std::string edges = slurp(out.path / "edges.csv");
  CHECK(edges.rfind("cluster,i,j,prop_absent,absent\n", 0) == 0);
}

TEST_CASE("run_pipeline is deterministic across thread counts") {
  TempDir out_a("det_a"), out_b("det_b");
  PipelineConfig cfg = small_scenario_config(12);
  cfg.fixed_combo.reset();  // exercise the tuned path
  cfg.tuning.lambda1s = {0.03, 0.07};
  cfg.tuning.lambda2s = {0.15};
  cfg.tuning.taus = {0.4};
  cfg.tuning.seed = cfg.seed;

  cfg.out_dir = out_a.str();
  cfg.threads = 1;
  run_pipeline(cfg);
  cfg.out_dir = out_b.str();
  cfg.threads = 4;
  run_pipeline(cfg);

  CHECK(slurp(out_a.path / "report.json") == slurp(out_b.path / "report.json"));
  CHECK(slurp(out_a.path / "metrics.csv") == slurp(out_b.path / "metrics.csv"));
  CHECK(slurp(out_a.path / "edges.csv") == slurp(out_b.path / "edges.csv"));
}

TEST_CASE("report round-trips through JSON byte-exactly") {
  TempDir out("round");
  PipelineConfig cfg = small_scenario_config(13);
  cfg.out_dir = out.str();
  const RunReport report = run_pipeline(cfg);

  const RunReport loaded = load_report((out.path / "report.json").string());
  CHECK(loaded.k_hat == report.k_hat);
  CHECK(loaded.assignment == report.assignment);
  CHECK(loaded.kkt_residual == report.kkt_residual);
  CHECK(loaded.objective_trace == report.objective_trace);
  REQUIRE(loaded.clustering.has_value());
  CHECK(loaded.clustering->a_rand == report.clustering->a_rand);

  TempDir out2("round2");
  emit_report(loaded, out2.str());
  CHECK(slurp(out.path / "report.json") == slurp(out2.path / "report.json"));
}

TEST_CASE("dataset round trip: simulate to directory, refit from CSVs") {
  TempDir data("data");
  PipelineConfig cfg = small_scenario_config(11);
  const auto [subjects, truth] = generate_scenario(*cfg.scenario);
  write_dataset(subjects, truth, data.str());

  const auto loaded = load_subjects(data.str());
  REQUIRE(loaded.size() == subjects.size());
  for (size_t g = 0; g < subjects.size(); ++g) {
    CHECK(loaded[g].subject_id == subjects[g].subject_id);
    CHECK(loaded[g].data == subjects[g].data);  // %.17g round trip
  }
  const auto truth_loaded = load_truth(data.str());
  REQUIRE(truth_loaded.has_value());
  CHECK(truth_loaded->labels == truth.labels);

  PipelineConfig from_dir = cfg;
  from_dir.scenario.reset();
  from_dir.input_dir = data.str();
  const RunReport a = run_pipeline(from_dir);
  const RunReport b = run_pipeline(cfg);
  CHECK(a.assignment == b.assignment);
  CHECK(a.k_hat == b.k_hat);
  CHECK(a.clustering->a_rand == b.clustering->a_rand);
}

TEST_CASE("run_pipeline input validation") {
  PipelineConfig both = small_scenario_config(11);
  both.input_dir = "/nonexistent";
  CHECK_THROWS_AS(run_pipeline(both), InvalidInput);  // both inputs set

  PipelineConfig single = small_scenario_config(11);
  single.scenario->per_cluster = 1;
  single.scenario->clusters = 1;
  try {
    run_pipeline(single);
    FAIL("expected insufficient-samples");
  } catch (const Error& e) {
    CHECK(e.code() == "insufficient-samples");
  }
}

TEST_CASE("fix_k merges the closest clusters") {
  PipelineConfig cfg = small_scenario_config(11);
  cfg.fixed_combo = TuningCombo{0.05, 0.0, 0.4};  // no fusion: k_hat = n
  cfg.fix_k = 2;
  const RunReport report = run_pipeline(cfg);
  CHECK(report.k_hat == 2);
  // merging respects the planted structure on well-separated data
  REQUIRE(report.clustering.has_value());
  CHECK(report.clustering->a_rand == 1.0);
}

TEST_CASE("replicate aggregates per-repetition metrics") {
  TempDir out("repl");
  PipelineConfig cfg = small_scenario_config(21);
  cfg.out_dir = out.str();
  const auto reports = run_replicate(cfg, 2);
  REQUIRE(reports.size() == 2);
  CHECK(fs::exists(out.path / "rep_0000" / "report.json"));
  CHECK(fs::exists(out.path / "rep_0001" / "report.json"));

  const std::string agg = slurp(out.path / "metrics.csv");
  CHECK(agg.rfind("stat,k_hat,rand,a_rand,jaccard,tpr,tnr,fdr\n", 0) == 0);
  CHECK(agg.find("\nmean,") != std::string::npos);
  CHECK(agg.find("\nsd,") != std::string::npos);
  CHECK(agg.find("rep0,") != std::string::npos);
  CHECK(agg.find("rep1,") != std::string::npos);
}

TEST_CASE("pipeline config JSON parsing") {
  TempDir dir("cfg");
  write_file(dir.path / "config.json", R"({
    "scenario": {"name": "bc_smallworld", "clusters": 2, "per_cluster": 3, "p": 6, "q": 50,
                 "graph": {"edge_weight": 0.35, "sw_rewire_prob": 0.1}},
    "glasso": {"lambda_grid": [0.05, 0.1], "folds": 4},
    "tuning": {"lambda1_grid": [0.05], "lambda2_grid": [0.2], "tau_grid": [0.5],
               "subsamples": 3},
    "sprclust": {"rho": 0.5, "dc_max_iters": 15},
    "fixed_combo": {"lambda1": 0.04, "lambda2": 0.3, "tau": 0.6},
    "seed": 7,
    "threads": 2,
    "out_dir": "somewhere"
  })");
  const PipelineConfig cfg = load_pipeline_config((dir.path / "config.json").string());
  REQUIRE(cfg.scenario.has_value());
  CHECK(cfg.scenario->scenario == Scenario::bc_smallworld);
  CHECK(cfg.scenario->graph.edge_weight == 0.35);
  CHECK(cfg.glasso.folds == 4);
  CHECK(cfg.tuning.subsamples == 3);
  CHECK(cfg.sprclust.rho == 0.5);
  CHECK(cfg.sprclust.dc_max_iters == 15);
  REQUIRE(cfg.fixed_combo.has_value());
  CHECK(cfg.fixed_combo->tau == 0.6);
  CHECK(cfg.seed == 7);
  CHECK(cfg.threads == 2);
  CHECK(cfg.out_dir == "somewhere");

  CHECK_THROWS_AS(load_pipeline_config("/nonexistent/config.json"), IoError);
  write_file(dir.path / "broken.json", "{not json");
  CHECK_THROWS_AS(load_pipeline_config((dir.path / "broken.json").string()), ParseError);
}

#include "scehg/pipeline.hpp"

#include "scehg/parallel.hpp"
#include "scehg/solvers.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace scehg {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::vector<double> parse_csv_row(const std::string& line, const std::string& file, int row) {
  std::vector<double> values;
  size_t start = 0;
  int col = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    const std::string cell = line.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    ++col;
    try {
      size_t consumed = 0;
      const double v = std::stod(cell, &consumed);
      while (consumed < cell.size() && std::isspace(static_cast<unsigned char>(cell[consumed])))
        ++consumed;
      if (consumed != cell.size()) throw std::invalid_argument(cell);
      values.push_back(v);
    } catch (const std::exception&) {
      throw ParseError("file '" + file + "' row " + std::to_string(row) + " column " +
                       std::to_string(col) + ": cannot parse '" + cell + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return values;
}

ordered_json combo_to_json(const TuningCombo& c) {
  return ordered_json{{"lambda1", c.lambda1}, {"lambda2", c.lambda2}, {"tau", c.tau}};
}

TuningCombo combo_from_json(const ordered_json& j) {
  return {j.at("lambda1").get<double>(), j.at("lambda2").get<double>(),
          j.at("tau").get<double>()};
}

ordered_json optional_to_json(const std::optional<double>& v) {
  if (!v.has_value() || std::isnan(*v)) return nullptr;
  return *v;
}

std::optional<double> optional_from_json(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

ordered_json nan_to_json(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double nan_from_json(const ordered_json& j) {
  if (j.is_null()) return kNan;
  return j.get<double>();
}

ordered_json report_to_json(const RunReport& r) {
  ordered_json j;
  j["seed"] = r.seed;
  j["subjects"] = r.subject_ids;
  j["assignment"] = r.assignment;
  j["k_hat"] = r.k_hat;
  j["combo"] = combo_to_json(r.chosen_combo);
  j["combo_was_tuned"] = r.combo_was_tuned;
  j["glasso_lambdas"] = r.glasso_lambdas;
  j["objective_trace"] = r.objective_trace;
  j["kkt_residual"] = r.kkt_residual;
  j["dc_iters"] = r.dc_iters;
  j["admm_iters_total"] = r.admm_iters_total;
  j["converged"] = r.converged;
  if (r.clustering.has_value()) {
    j["clustering"] = ordered_json{{"rand", r.clustering->rand},
                                   {"a_rand", r.clustering->a_rand},
                                   {"jaccard", r.clustering->jaccard},
                                   {"k_hat", r.clustering->k_hat}};
  } else {
    j["clustering"] = nullptr;
  }
  if (r.graph.has_value()) {
    j["graph"] = ordered_json{{"tpr", nan_to_json(r.graph->tpr)},
                              {"tnr", nan_to_json(r.graph->tnr)},
                              {"fdr", nan_to_json(r.graph->fdr)}};
  } else {
    j["graph"] = nullptr;
  }
  ordered_json edges = ordered_json::array();
  for (const EdgeProportionRow& e : r.edges)
    edges.push_back(ordered_json{{"cluster", e.cluster},
                                 {"i", e.i},
                                 {"j", e.j},
                                 {"prop_absent", e.prop_absent},
                                 {"absent", e.absent}});
  j["edges"] = edges;
  ordered_json reports = ordered_json::array();
  for (const ConcordanceReport& t : r.tuning_reports) {
    reports.push_back(ordered_json{{"combo", combo_to_json(t.combo)},
                                   {"c_bar", optional_to_json(t.c_bar)},
                                   {"f_bar", optional_to_json(t.f_bar)},
                                   {"k_hat", t.k_hat},
                                   {"omitted", t.omitted},
                                   {"reason", t.reason}});
  }
  j["tuning_reports"] = reports;
  return j;
}

RunReport report_from_json(const ordered_json& j) {
  RunReport r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.subject_ids = j.at("subjects").get<std::vector<std::string>>();
  r.assignment = j.at("assignment").get<std::vector<int>>();
  r.k_hat = j.at("k_hat").get<int>();
  r.chosen_combo = combo_from_json(j.at("combo"));
  r.combo_was_tuned = j.at("combo_was_tuned").get<bool>();
  r.glasso_lambdas = j.at("glasso_lambdas").get<std::vector<double>>();
  r.objective_trace = j.at("objective_trace").get<std::vector<double>>();
  r.kkt_residual = j.at("kkt_residual").get<double>();
  r.dc_iters = j.at("dc_iters").get<int>();
  r.admm_iters_total = j.at("admm_iters_total").get<long>();
  r.converged = j.at("converged").get<bool>();
  if (!j.at("clustering").is_null()) {
    const auto& c = j.at("clustering");
    r.clustering = ClusterMetrics{c.at("rand").get<double>(), c.at("a_rand").get<double>(),
                                  c.at("jaccard").get<double>(), c.at("k_hat").get<int>()};
  }
  if (!j.at("graph").is_null()) {
    const auto& g = j.at("graph");
    r.graph = GraphMetrics{nan_from_json(g.at("tpr")), nan_from_json(g.at("tnr")),
                           nan_from_json(g.at("fdr"))};
  }
  for (const auto& e : j.at("edges"))
    r.edges.push_back(EdgeProportionRow{e.at("cluster").get<int>(), e.at("i").get<int>(),
                                        e.at("j").get<int>(), e.at("prop_absent").get<double>(),
                                        e.at("absent").get<bool>()});
  for (const auto& t : j.at("tuning_reports")) {
    ConcordanceReport cr;
    cr.combo = combo_from_json(t.at("combo"));
    cr.c_bar = optional_from_json(t.at("c_bar"));
    cr.f_bar = optional_from_json(t.at("f_bar"));
    cr.k_hat = t.at("k_hat").get<int>();
    cr.omitted = t.at("omitted").get<bool>();
    cr.reason = t.at("reason").get<std::string>();
    r.tuning_reports.push_back(cr);
  }
  return r;
}

double mean_ignoring_nan(const std::vector<double>& values) {
  double sum = 0.0;
  int count = 0;
  for (double v : values)
    if (!std::isnan(v)) {
      sum += v;
      ++count;
    }
  return count == 0 ? kNan : sum / count;
}

/// Per-subject graph metrics averaged within true clusters, then across
/// clusters, matching the one-triple-per-run reporting convention.
GraphMetrics aggregate_graph_metrics(const Matrix& centroids,
                                     const std::vector<int>& true_labels,
                                     const GroundTruth& truth) {
  const int d = static_cast<int>(centroids.cols());
  const int p = nodes_from_feature_count(d);
  const int K = static_cast<int>(truth.adjacency.size());
  for (const IntMatrix& adj : truth.adjacency)
    if (adj.rows() != p)
      throw DimensionMismatch("truth adjacency node count does not match feature length");

  std::vector<std::vector<double>> tpr(static_cast<size_t>(K)), tnr(static_cast<size_t>(K)),
      fdr(static_cast<size_t>(K));
  for (Eigen::Index g = 0; g < centroids.rows(); ++g) {
    IntMatrix est = IntMatrix::Zero(p, p);
    for (int idx = 0; idx < d; ++idx) {
      if (centroids(g, idx) == 0.0) continue;
      const auto [i, j] = feature_pair(idx, p);
      est(i - 1, j - 1) = 1;
      est(j - 1, i - 1) = 1;
    }
    const int k = true_labels[static_cast<size_t>(g)] - 1;
    if (k < 0 || k >= K) throw InvalidInput("true label out of range");
    const GraphMetrics m = graph_metrics(truth.adjacency[static_cast<size_t>(k)], est);
    tpr[static_cast<size_t>(k)].push_back(m.tpr);
    tnr[static_cast<size_t>(k)].push_back(m.tnr);
    fdr[static_cast<size_t>(k)].push_back(m.fdr);
  }

  std::vector<double> tpr_k, tnr_k, fdr_k;
  for (int k = 0; k < K; ++k) {
    if (tpr[static_cast<size_t>(k)].empty()) continue;
    tpr_k.push_back(mean_ignoring_nan(tpr[static_cast<size_t>(k)]));
    tnr_k.push_back(mean_ignoring_nan(tnr[static_cast<size_t>(k)]));
    fdr_k.push_back(mean_ignoring_nan(fdr[static_cast<size_t>(k)]));
  }
  return {mean_ignoring_nan(tpr_k), mean_ignoring_nan(tnr_k), mean_ignoring_nan(fdr_k)};
}

void merge_to_fixed_k(std::vector<int>& assignment, int& k_hat, const Matrix& centroids,
                      int target_k) {
  if (target_k < 1) throw InvalidInput("--fix-k must be >= 1");
  while (k_hat > target_k) {
    Matrix means = Matrix::Zero(k_hat, centroids.cols());
    std::vector<int> sizes(static_cast<size_t>(k_hat), 0);
    for (Eigen::Index g = 0; g < centroids.rows(); ++g) {
      const int k = assignment[static_cast<size_t>(g)] - 1;
      means.row(k) += centroids.row(g);
      ++sizes[static_cast<size_t>(k)];
    }
    for (int k = 0; k < k_hat; ++k) means.row(k) /= sizes[static_cast<size_t>(k)];

    int best_a = 0, best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < k_hat; ++a)
      for (int b = a + 1; b < k_hat; ++b) {
        const double dist = (means.row(a) - means.row(b)).norm();
        if (dist < best) {
          best = dist;
          best_a = a;
          best_b = b;
        }
      }
    for (int& label : assignment)
      if (label == best_b + 1) label = best_a + 1;

    // relabel compactly by first appearance
    std::vector<int> remap(static_cast<size_t>(k_hat) + 1, 0);
    int next = 0;
    for (int& label : assignment) {
      if (remap[static_cast<size_t>(label)] == 0) remap[static_cast<size_t>(label)] = ++next;
      label = remap[static_cast<size_t>(label)];
    }
    k_hat = next;
  }
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

std::vector<SubjectSeries> load_subjects(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir + "' is not a directory");

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      files.push_back(entry.path());
  if (files.empty()) throw Error("empty-input", "no subject CSV files in '" + dir + "'");
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.stem() < b.stem(); });

  std::vector<SubjectSeries> subjects;
  Eigen::Index p = -1, q = -1;
  std::string reference_file;
  for (const fs::path& file : files) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open '" + file.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    int row_no = 0;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      ++row_no;
      rows.push_back(parse_csv_row(line, file.filename().string(), row_no));
      if (rows.back().size() != rows.front().size())
        throw DimensionMismatch("file '" + file.filename().string() + "' row " +
                                std::to_string(row_no) + " has " +
                                std::to_string(rows.back().size()) + " columns, expected " +
                                std::to_string(rows.front().size()));
    }
    if (rows.empty())
      throw Error("empty-input", "file '" + file.filename().string() + "' has no rows");

    Matrix data(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(rows.front().size()));
    for (size_t r = 0; r < rows.size(); ++r)
      for (size_t c = 0; c < rows[r].size(); ++c)
        data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];

    if (p < 0) {
      p = data.rows();
      q = data.cols();
      reference_file = file.filename().string();
      if (p < 2 || q < 2)
        throw InvalidInput("subject '" + file.filename().string() +
                           "' needs at least 2 rows and 2 columns");
    } else if (data.rows() != p || data.cols() != q) {
      throw DimensionMismatch("file '" + file.filename().string() + "' is " +
                              std::to_string(data.rows()) + "x" + std::to_string(data.cols()) +
                              " but '" + reference_file + "' is " + std::to_string(p) + "x" +
                              std::to_string(q));
    }
    if (!data.allFinite())
      throw InvalidInput("file '" + file.filename().string() + "' has non-finite entries");
    subjects.push_back({file.stem().string(), std::move(data)});
  }
  return subjects;
}

std::vector<EdgeProportionRow> edge_proportion(const Matrix& centroids,
                                               const std::vector<int>& assignment) {
  const Eigen::Index n = centroids.rows();
  if (static_cast<Eigen::Index>(assignment.size()) != n)
    throw InvalidInput("edge_proportion assignment must align with centroid rows");
  const int d = static_cast<int>(centroids.cols());
  const int p = nodes_from_feature_count(d);

  int k_max = 0;
  for (int label : assignment) k_max = std::max(k_max, label);

  std::vector<EdgeProportionRow> table;
  for (int k = 1; k <= k_max; ++k) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index g = 0; g < n; ++g)
      if (assignment[static_cast<size_t>(g)] == k) members.push_back(g);
    if (members.empty()) continue;

    for (int idx = 0; idx < d; ++idx) {
      int zero_count = 0;
      for (Eigen::Index g : members)
        if (centroids(g, idx) == 0.0) ++zero_count;
      const auto [i, j] = feature_pair(idx, p);
      const double prop = static_cast<double>(zero_count) / static_cast<double>(members.size());
      table.push_back({k, i, j, prop, prop >= 0.5});
    }
  }
  return table;
}

void write_dataset(const std::vector<SubjectSeries>& subjects, const GroundTruth& truth,
                   const std::string& dir) {
  fs::create_directories(dir);
  for (const SubjectSeries& subject : subjects) {
    std::ostringstream os;
    char buf[64];
    for (Eigen::Index r = 0; r < subject.data.rows(); ++r) {
      for (Eigen::Index c = 0; c < subject.data.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", subject.data(r, c));
        os << (c == 0 ? "" : ",") << buf;
      }
      os << "\n";
    }
    write_text_file(fs::path(dir) / (subject.subject_id + ".csv"), os.str());
  }

  ordered_json j;
  j["labels"] = truth.labels;
  ordered_json adj = ordered_json::array();
  for (const IntMatrix& a : truth.adjacency) {
    ordered_json mat = ordered_json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
      mat.push_back(row);
    }
    adj.push_back(mat);
  }
  j["adjacency"] = adj;
  write_text_file(fs::path(dir) / "truth.json", j.dump(2) + "\n");
}

std::optional<GroundTruth> load_truth(const std::string& dir) {
  const fs::path path = fs::path(dir) / "truth.json";
  if (!fs::exists(path)) return std::nullopt;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("truth.json: " + std::string(e.what()));
  }

  GroundTruth truth;
  truth.labels = j.at("labels").get<std::vector<int>>();
  for (const auto& mat : j.at("adjacency")) {
    const int p = static_cast<int>(mat.size());
    IntMatrix a(p, p);
    for (int r = 0; r < p; ++r) {
      const auto& row = mat.at(static_cast<size_t>(r));
      if (static_cast<int>(row.size()) != p) throw ParseError("truth.json adjacency not square");
      for (int c = 0; c < p; ++c) a(r, c) = row.at(static_cast<size_t>(c)).get<int>();
    }
    truth.adjacency.push_back(a);
  }
  return truth;
}

RunReport run_pipeline(const PipelineConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  if (cfg.input_dir.has_value() == cfg.scenario.has_value())
    throw InvalidInput("exactly one of input_dir / scenario must be set");

  std::vector<SubjectSeries> subjects;
  std::optional<GroundTruth> truth;
  if (cfg.scenario.has_value()) {
    auto generated = generate_scenario(*cfg.scenario);
    subjects = std::move(generated.first);
    truth = std::move(generated.second);
  } else {
    subjects = load_subjects(*cfg.input_dir);
    truth = load_truth(*cfg.input_dir);
    if (truth.has_value() && truth->labels.size() != subjects.size())
      throw DimensionMismatch("truth.json labels do not match the number of subjects");
  }

  const int n = static_cast<int>(subjects.size());
  if (n < 2)
    throw Error("insufficient-samples",
                "sprclust needs at least 2 subjects, got " + std::to_string(n));

  const int q = static_cast<int>(subjects.front().data.cols());
  KernelConfig kernel;
  kernel.bandwidth = cfg.glasso.bandwidth.value_or(default_bandwidth(q));

  RunReport report;
  report.seed = cfg.seed;
  for (const SubjectSeries& s : subjects) report.subject_ids.push_back(s.subject_id);

  // Per-subject covariance -> glasso CV -> features.
  const int p = static_cast<int>(subjects.front().data.rows());
  Matrix X(n, feature_count(p));
  report.glasso_lambdas.resize(static_cast<size_t>(n));
  std::vector<std::string> failures(static_cast<size_t>(n));
  parallel_for(n, cfg.threads, [&](int g) {
    try {
      const auto [lambda, est] =
          glasso_cv(subjects[static_cast<size_t>(g)], kernel, cfg.glasso.lambda_grid,
                    cfg.glasso.folds, cfg.glasso.opts);
      report.glasso_lambdas[static_cast<size_t>(g)] = lambda;
      X.row(g) = vectorize_upper_entries(est.omega).transpose();
    } catch (const Error& e) {
      failures[static_cast<size_t>(g)] =
          subjects[static_cast<size_t>(g)].subject_id + ": " + e.what();
    }
  });
  {
    std::string joined;
    for (const std::string& f : failures)
      if (!f.empty()) joined += (joined.empty() ? "" : "; ") + f;
    if (!joined.empty()) throw Error("glasso-failure", "per-subject glasso failed: " + joined);
  }

  TuningCombo combo;
  if (cfg.fixed_combo.has_value()) {
    combo = *cfg.fixed_combo;
    report.combo_was_tuned = false;
  } else {
    TuningResult tuned = select_tuning(X, cfg.tuning, cfg.sprclust, cfg.threads);
    combo = tuned.chosen;
    report.tuning_reports = std::move(tuned.reports);
    report.combo_was_tuned = true;
  }
  report.chosen_combo = combo;

  SprclustConfig fit_cfg = cfg.sprclust;
  fit_cfg.lambda1 = combo.lambda1;
  fit_cfg.lambda2 = combo.lambda2;
  fit_cfg.tau = combo.tau;
  SprclustFit solution = fit(X, fit_cfg);

  report.assignment = solution.assignment;
  report.k_hat = solution.k_hat;
  if (cfg.fix_k.has_value())
    merge_to_fixed_k(report.assignment, report.k_hat, solution.centroids, *cfg.fix_k);

  report.objective_trace = solution.objective_trace;
  report.kkt_residual = solution.kkt_residual;
  report.dc_iters = solution.dc_iters;
  report.admm_iters_total = solution.admm_iters_total;
  report.converged = solution.converged;
  report.edges = edge_proportion(solution.centroids, report.assignment);

  if (truth.has_value()) {
    report.clustering = cluster_metrics(truth->labels, report.assignment);
    report.clustering->k_hat = report.k_hat;
    report.graph = aggregate_graph_metrics(solution.centroids, truth->labels, *truth);
  }

  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (!cfg.out_dir.empty()) emit_report(report, cfg.out_dir);
  return report;
}

void emit_report(const RunReport& report, const std::string& dir) {
  fs::create_directories(dir);
  write_text_file(fs::path(dir) / "report.json", report_to_json(report).dump(2) + "\n");

  std::ostringstream metrics;
  metrics << "k_hat,rand,a_rand,jaccard,tpr,tnr,fdr\n" << report.k_hat << ",";
  if (report.clustering.has_value()) {
    metrics << format_fixed(report.clustering->rand) << ","
            << format_fixed(report.clustering->a_rand) << ","
            << format_fixed(report.clustering->jaccard) << ",";
  } else {
    metrics << ",,,";
  }
  auto cell = [](double v) { return std::isnan(v) ? std::string() : format_fixed(v); };
  if (report.graph.has_value()) {
    metrics << cell(report.graph->tpr) << "," << cell(report.graph->tnr) << ","
            << cell(report.graph->fdr) << "\n";
  } else {
    metrics << ",,\n";
  }
  write_text_file(fs::path(dir) / "metrics.csv", metrics.str());

  std::ostringstream edges;
  edges << "cluster,i,j,prop_absent,absent\n";
  for (const EdgeProportionRow& e : report.edges)
    edges << e.cluster << "," << e.i << "," << e.j << "," << format_fixed(e.prop_absent) << ","
          << (e.absent ? "true" : "false") << "\n";
  write_text_file(fs::path(dir) / "edges.csv", edges.str());
}

RunReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("report: " + std::string(e.what()));
  }
  return report_from_json(j);
}

std::vector<RunReport> run_replicate(const PipelineConfig& base, int repetitions) {
  if (!base.scenario.has_value()) throw InvalidInput("replicate requires a scenario");
  if (repetitions < 1) throw InvalidInput("replicate requires at least 1 repetition");

  std::vector<RunReport> reports;
  for (int rep = 0; rep < repetitions; ++rep) {
    PipelineConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(rep);
    cfg.scenario->seed = cfg.seed;
    cfg.tuning.seed = cfg.seed;
    if (!base.out_dir.empty()) {
      char sub[32];
      std::snprintf(sub, sizeof(sub), "rep_%04d", rep);
      cfg.out_dir = (fs::path(base.out_dir) / sub).string();
    }
    reports.push_back(run_pipeline(cfg));
  }

  if (!base.out_dir.empty()) {
    std::ostringstream os;
    os << "stat,k_hat,rand,a_rand,jaccard,tpr,tnr,fdr\n";
    const int n_cols = 7;
    std::vector<std::vector<double>> columns(n_cols);
    for (size_t rep = 0; rep < reports.size(); ++rep) {
      const RunReport& r = reports[rep];
      const std::vector<double> row = {
          static_cast<double>(r.k_hat),
          r.clustering ? r.clustering->rand : kNan,
          r.clustering ? r.clustering->a_rand : kNan,
          r.clustering ? r.clustering->jaccard : kNan,
          r.graph ? r.graph->tpr : kNan,
          r.graph ? r.graph->tnr : kNan,
          r.graph ? r.graph->fdr : kNan};
      os << "rep" << rep;
      for (int c = 0; c < n_cols; ++c) {
        columns[static_cast<size_t>(c)].push_back(row[static_cast<size_t>(c)]);
        os << "," << (std::isnan(row[static_cast<size_t>(c)]) ? std::string()
                                                              : format_fixed(row[static_cast<size_t>(c)]));
      }
      os << "\n";
    }
    std::vector<double> means(n_cols), sds(n_cols);
    for (int c = 0; c < n_cols; ++c) {
      const std::vector<double>& col = columns[static_cast<size_t>(c)];
      double sum = 0.0;
      int cnt = 0;
      for (double v : col)
        if (!std::isnan(v)) {
          sum += v;
          ++cnt;
        }
      means[static_cast<size_t>(c)] = cnt ? sum / cnt : kNan;
      double ss = 0.0;
      for (double v : col)
        if (!std::isnan(v)) ss += (v - means[static_cast<size_t>(c)]) * (v - means[static_cast<size_t>(c)]);
      sds[static_cast<size_t>(c)] = cnt > 1 ? std::sqrt(ss / (cnt - 1)) : kNan;
    }
    auto emit_row = [&](const std::string& name, const std::vector<double>& vals) {
      os << name;
      for (int c = 0; c < n_cols; ++c)
        os << ","
           << (std::isnan(vals[static_cast<size_t>(c)]) ? std::string()
                                                        : format_fixed(vals[static_cast<size_t>(c)]));
      os << "\n";
    };
    emit_row("mean", means);
    emit_row("sd", sds);
    fs::create_directories(base.out_dir);
    write_text_file(fs::path(base.out_dir) / "metrics.csv", os.str());
  }
  return reports;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("config: " + std::string(e.what()));
  }

  PipelineConfig cfg;
  if (j.contains("input_dir") && !j["input_dir"].is_null())
    cfg.input_dir = j["input_dir"].get<std::string>();
  if (j.contains("scenario") && !j["scenario"].is_null()) {
    const auto& s = j["scenario"];
    ScenarioSpec spec;
    spec.scenario = scenario_from_string(s.at("name").get<std::string>());
    if (s.contains("clusters")) spec.clusters = s["clusters"].get<int>();
    if (s.contains("per_cluster")) spec.per_cluster = s["per_cluster"].get<int>();
    if (s.contains("p")) spec.p = s["p"].get<int>();
    if (s.contains("q")) spec.q = s["q"].get<int>();
    if (s.contains("seed")) spec.seed = s["seed"].get<std::uint64_t>();
    if (s.contains("graph")) {
      const auto& g = s["graph"];
      if (g.contains("edge_weight")) spec.graph.edge_weight = g["edge_weight"].get<double>();
      if (g.contains("hub_groups")) spec.graph.hub_groups = g["hub_groups"].get<int>();
      if (g.contains("sw_neighbors")) spec.graph.sw_neighbors = g["sw_neighbors"].get<int>();
      if (g.contains("sw_rewire_prob"))
        spec.graph.sw_rewire_prob = g["sw_rewire_prob"].get<double>();
      if (g.contains("sw_permute_nodes"))
        spec.graph.sw_permute_nodes = g["sw_permute_nodes"].get<bool>();
      if (g.contains("diag_boost")) spec.graph.diag_boost = g["diag_boost"].get<double>();
    }
    cfg.scenario = spec;
  }
  if (j.contains("glasso")) {
    const auto& g = j["glasso"];
    if (g.contains("lambda_grid")) cfg.glasso.lambda_grid = g["lambda_grid"].get<std::vector<double>>();
    if (g.contains("folds")) cfg.glasso.folds = g["folds"].get<int>();
    if (g.contains("bandwidth") && !g["bandwidth"].is_null())
      cfg.glasso.bandwidth = g["bandwidth"].get<double>();
    if (g.contains("tol")) cfg.glasso.opts.tol = g["tol"].get<double>();
    if (g.contains("max_iters")) cfg.glasso.opts.max_iters = g["max_iters"].get<int>();
  }
  if (j.contains("tuning")) {
    const auto& t = j["tuning"];
    if (t.contains("lambda1_grid")) cfg.tuning.lambda1s = t["lambda1_grid"].get<std::vector<double>>();
    if (t.contains("lambda2_grid")) cfg.tuning.lambda2s = t["lambda2_grid"].get<std::vector<double>>();
    if (t.contains("tau_grid")) cfg.tuning.taus = t["tau_grid"].get<std::vector<double>>();
    if (t.contains("subsample_fraction"))
      cfg.tuning.subsample_fraction = t["subsample_fraction"].get<double>();
    if (t.contains("top_fraction")) cfg.tuning.top_fraction = t["top_fraction"].get<double>();
    if (t.contains("trim_fraction")) cfg.tuning.trim_fraction = t["trim_fraction"].get<double>();
    if (t.contains("subsamples")) cfg.tuning.subsamples = t["subsamples"].get<int>();
    if (t.contains("seed")) cfg.tuning.seed = t["seed"].get<std::uint64_t>();
  }
  if (j.contains("sprclust")) {
    const auto& s = j["sprclust"];
    if (s.contains("rho")) cfg.sprclust.rho = s["rho"].get<double>();
    if (s.contains("admm_tol")) cfg.sprclust.admm_opts.tol = s["admm_tol"].get<double>();
    if (s.contains("admm_max_iters"))
      cfg.sprclust.admm_opts.max_iters = s["admm_max_iters"].get<int>();
    if (s.contains("lasso_tol")) cfg.sprclust.lasso_opts.tol = s["lasso_tol"].get<double>();
    if (s.contains("lasso_max_iters"))
      cfg.sprclust.lasso_opts.max_iters = s["lasso_max_iters"].get<int>();
    if (s.contains("dc_max_iters")) cfg.sprclust.dc_max_iters = s["dc_max_iters"].get<int>();
    if (s.contains("cluster_tol")) cfg.sprclust.cluster_tol = s["cluster_tol"].get<double>();
    if (s.contains("standardize")) cfg.sprclust.standardize = s["standardize"].get<bool>();
  }
  if (j.contains("fixed_combo") && !j["fixed_combo"].is_null())
    cfg.fixed_combo = combo_from_json(j["fixed_combo"]);
  if (j.contains("fix_k") && !j["fix_k"].is_null()) cfg.fix_k = j["fix_k"].get<int>();
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  return cfg;
}

}  // namespace scehg

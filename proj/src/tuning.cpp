#include "scehg/tuning.hpp"

#include "scehg/parallel.hpp"
#include "scehg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace scehg {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

bool is_missing(double v) { return std::isnan(v); }

std::vector<int> subsample_indices(int n, int m, std::uint64_t seed) {
  std::vector<int> pool(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
  Rng rng(seed);
  for (int i = 0; i < m; ++i) {  // partial Fisher-Yates
    const int j = i + rng.uniform_int(n - i);
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + m);
  std::sort(out.begin(), out.end());
  return out;
}

std::string combo_string(const TuningCombo& c) {
  std::ostringstream os;
  os << "(lambda1=" << c.lambda1 << ", lambda2=" << c.lambda2 << ", tau=" << c.tau << ")";
  return os.str();
}

}  // namespace

Matrix comembership_matrix(const std::vector<int>& labels, const std::vector<int>& present,
                           int n) {
  if (labels.size() != present.size())
    throw InvalidInput("comembership labels must align with the present subset");
  Matrix T = Matrix::Constant(n, n, kMissing);
  for (size_t a = 0; a < present.size(); ++a) {
    const int i = present[a];
    if (i < 0 || i >= n) throw InvalidInput("present sample index out of range");
    for (size_t b = 0; b < present.size(); ++b) {
      const int j = present[b];
      T(i, j) = labels[a] == labels[b] ? 1.0 : 0.0;
    }
  }
  return T;
}

Matrix mean_comembership(const std::vector<Matrix>& mats) {
  if (mats.empty()) throw InvalidInput("mean_comembership requires at least one matrix");
  const Eigen::Index n = mats.front().rows();
  for (const Matrix& m : mats)
    if (m.rows() != n || m.cols() != n)
      throw DimensionMismatch("comembership matrices differ in size");

  Matrix sum = Matrix::Zero(n, n);
  Matrix count = Matrix::Zero(n, n);
  for (const Matrix& m : mats)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (!is_missing(m(i, j))) {
          sum(i, j) += m(i, j);
          count(i, j) += 1.0;
        }

  Matrix mean = Matrix::Constant(n, n, kMissing);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (count(i, j) > 0) mean(i, j) = sum(i, j) / count(i, j);
  return mean;
}

std::pair<std::vector<double>, std::optional<double>> sample_concordance(const Matrix& T,
                                                                         const Matrix& Tbar,
                                                                         double alpha) {
  const Eigen::Index n = T.rows();
  if (T.cols() != n || Tbar.rows() != n || Tbar.cols() != n)
    throw DimensionMismatch("comembership matrices must be n x n");
  if (!(alpha >= 0) || alpha >= 1) throw InvalidInput("trim fraction must be in [0, 1)");

  std::vector<double> C(static_cast<size_t>(n), kMissing);
  for (Eigen::Index i = 0; i < n; ++i) {
    double same_sum = 0.0, diff_sum = 0.0;
    int same_cnt = 0, diff_cnt = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i || is_missing(Tbar(i, j)) || is_missing(T(i, j))) continue;
      if (T(i, j) == 1.0) {
        same_sum += Tbar(i, j);
        ++same_cnt;
      } else {
        diff_sum += 1.0 - Tbar(i, j);
        ++diff_cnt;
      }
    }
    if (same_cnt > 0 && diff_cnt > 0)
      C[static_cast<size_t>(i)] = same_sum / same_cnt + diff_sum / diff_cnt - 1.0;
  }

  std::vector<double> defined;
  for (double v : C)
    if (!is_missing(v)) defined.push_back(v);
  std::sort(defined.begin(), defined.end());
  const size_t trim = static_cast<size_t>(std::floor(alpha * static_cast<double>(n)));
  if (defined.size() <= trim) return {C, std::nullopt};

  double total = 0.0;
  for (size_t k = trim; k < defined.size(); ++k) total += defined[k];
  return {C, total / static_cast<double>(defined.size() - trim)};
}

IntMatrix feature_indicator(const Matrix& centroids, const std::vector<int>& labels,
                            int k_hat) {
  const Eigen::Index n = centroids.rows();
  const Eigen::Index d = centroids.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw InvalidInput("feature_indicator labels must align with centroid rows");

  IntMatrix f = IntMatrix::Zero(k_hat, d);
  std::vector<int> sizes(static_cast<size_t>(k_hat), 0);
  IntMatrix nonzero = IntMatrix::Zero(k_hat, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = labels[static_cast<size_t>(i)] - 1;
    if (k < 0 || k >= k_hat) throw InvalidInput("feature_indicator label out of range");
    ++sizes[static_cast<size_t>(k)];
    for (Eigen::Index j = 0; j < d; ++j)
      if (centroids(i, j) != 0.0) ++nonzero(k, j);
  }
  for (int k = 0; k < k_hat; ++k)
    for (Eigen::Index j = 0; j < d; ++j)
      f(k, j) = 2 * nonzero(k, j) > sizes[static_cast<size_t>(k)] ? 1 : 0;  // strict > 0.5
  return f;
}

std::optional<double> feature_concordance(const IntMatrix& f_full,
                                          const std::vector<int>& full_labels,
                                          const std::vector<SubsampleFeatures>& subs) {
  const int k_full = static_cast<int>(f_full.rows());
  const Eigen::Index d = f_full.cols();

  Matrix accum = Matrix::Zero(k_full, d);
  std::vector<int> matched(static_cast<size_t>(k_full), 0);

  for (const SubsampleFeatures& sub : subs) {
    const int k_sub = static_cast<int>(sub.f.rows());
    if (k_sub > k_full) continue;  // omitted resampling dataset

    // Overlap counts between full clusters and subsample clusters on the
    // shared samples, then greedy maximum-overlap matching.
    IntMatrix overlap = IntMatrix::Zero(k_full, k_sub);
    for (size_t a = 0; a < sub.present.size(); ++a) {
      const int g = full_labels[static_cast<size_t>(sub.present[a])] - 1;
      const int l = sub.labels[a] - 1;
      if (g < 0 || g >= k_full || l < 0 || l >= k_sub)
        throw InvalidInput("feature_concordance label out of range");
      ++overlap(g, l);
    }
    std::vector<bool> used_full(static_cast<size_t>(k_full), false);
    std::vector<bool> used_sub(static_cast<size_t>(k_sub), false);
    for (int round = 0; round < std::min(k_full, k_sub); ++round) {
      int best_g = -1, best_l = -1, best = 0;
      for (int g = 0; g < k_full; ++g) {
        if (used_full[static_cast<size_t>(g)]) continue;
        for (int l = 0; l < k_sub; ++l) {
          if (used_sub[static_cast<size_t>(l)]) continue;
          if (overlap(g, l) > best) {
            best = overlap(g, l);
            best_g = g;
            best_l = l;
          }
        }
      }
      if (best_g < 0) break;
      used_full[static_cast<size_t>(best_g)] = true;
      used_sub[static_cast<size_t>(best_l)] = true;
      accum.row(best_g) += sub.f.row(best_l).cast<double>();
      ++matched[static_cast<size_t>(best_g)];
    }
  }

  double total = 0.0;
  int defined = 0;
  for (int k = 0; k < k_full; ++k) {
    if (matched[static_cast<size_t>(k)] == 0) continue;
    const Vector fbar = accum.row(k).transpose() / matched[static_cast<size_t>(k)];
    double sel_sum = 0.0, unsel_sum = 0.0;
    int sel_cnt = 0, unsel_cnt = 0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (f_full(k, j) == 1) {
        sel_sum += fbar(j);
        ++sel_cnt;
      } else {
        unsel_sum += 1.0 - fbar(j);
        ++unsel_cnt;
      }
    }
    if (sel_cnt == 0 || unsel_cnt == 0) continue;  // F(k) undefined
    total += sel_sum / sel_cnt + unsel_sum / unsel_cnt - 1.0;
    ++defined;
  }
  if (defined == 0) return std::nullopt;
  return total / defined;
}

TuningResult select_tuning(const Matrix& X, const TuningGrid& grid,
                           const SprclustConfig& config_template, int threads) {
  if (grid.lambda1s.empty() || grid.lambda2s.empty() || grid.taus.empty())
    throw InvalidInput("tuning grid must be nonempty in every dimension");
  if (!(grid.subsample_fraction > 0) || !(grid.subsample_fraction < 1))
    throw InvalidInput("subsample fraction must be in (0, 1)");
  if (!(grid.top_fraction > 0) || grid.top_fraction > 1)
    throw InvalidInput("top fraction must be in (0, 1]");
  if (!(grid.trim_fraction >= 0) || grid.trim_fraction >= 1)
    throw InvalidInput("trim fraction must be in [0, 1)");
  if (grid.subsamples < 1) throw InvalidInput("subsample count must be >= 1");

  const int n = static_cast<int>(X.rows());
  const int m = static_cast<int>(std::floor(grid.subsample_fraction * n));
  if (m < 2)
    throw InvalidInput("subsample fraction leaves fewer than 2 samples (floor(r*n) = " +
                       std::to_string(m) + ")");

  std::vector<TuningCombo> combos;
  for (double l1 : grid.lambda1s)
    for (double l2 : grid.lambda2s)
      for (double t : grid.taus) combos.push_back({l1, l2, t});
  const int n_combos = static_cast<int>(combos.size());
  const int B = grid.subsamples;

  struct ComboFits {
    SprclustFit full;
    std::vector<std::vector<int>> sub_present;
    std::vector<SprclustFit> sub_fits;
  };
  std::vector<ComboFits> fits(static_cast<size_t>(n_combos));
  for (auto& f : fits) {
    f.sub_present.resize(static_cast<size_t>(B));
    f.sub_fits.resize(static_cast<size_t>(B));
  }

  // One task per (combo, full-or-subsample) fit; results keyed by task index
  // and subsample draws by per-(combo, b) seeds, so any schedule agrees.
  const int per_combo = B + 1;
  parallel_for(n_combos * per_combo, threads, [&](int task) {
    const int c = task / per_combo;
    const int slot = task % per_combo;
    SprclustConfig cfg = config_template;
    cfg.lambda1 = combos[static_cast<size_t>(c)].lambda1;
    cfg.lambda2 = combos[static_cast<size_t>(c)].lambda2;
    cfg.tau = combos[static_cast<size_t>(c)].tau;
    if (slot == 0) {
      fits[static_cast<size_t>(c)].full = fit(X, cfg);
    } else {
      const int b = slot - 1;
      const std::vector<int> rows = subsample_indices(
          n, m, seed_mix(grid.seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(b)));
      Matrix Xsub(m, X.cols());
      for (int r = 0; r < m; ++r) Xsub.row(r) = X.row(rows[static_cast<size_t>(r)]);
      fits[static_cast<size_t>(c)].sub_present[static_cast<size_t>(b)] = rows;
      fits[static_cast<size_t>(c)].sub_fits[static_cast<size_t>(b)] = fit(Xsub, cfg);
    }
  });

  std::vector<int> everyone(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) everyone[static_cast<size_t>(i)] = i;

  TuningResult result;
  result.reports.resize(static_cast<size_t>(n_combos));
  for (int c = 0; c < n_combos; ++c) {
    const ComboFits& bundle = fits[static_cast<size_t>(c)];
    ConcordanceReport report;
    report.combo = combos[static_cast<size_t>(c)];
    report.k_hat = bundle.full.k_hat;

    const IntMatrix f_full =
        feature_indicator(bundle.full.centroids, bundle.full.assignment, bundle.full.k_hat);

    if (bundle.full.k_hat == 1) {
      report.omitted = true;
      report.reason = "single cluster";
    } else if ((f_full.array() == 1).all()) {
      report.omitted = true;
      report.reason = "all features selected";
    } else {
      const Matrix T = comembership_matrix(bundle.full.assignment, everyone, n);
      std::vector<Matrix> sub_T;
      std::vector<SubsampleFeatures> sub_features;
      for (int b = 0; b < B; ++b) {
        const SprclustFit& sf = bundle.sub_fits[static_cast<size_t>(b)];
        const std::vector<int>& rows = bundle.sub_present[static_cast<size_t>(b)];
        sub_T.push_back(comembership_matrix(sf.assignment, rows, n));
        sub_features.push_back(
            {rows, sf.assignment, feature_indicator(sf.centroids, sf.assignment, sf.k_hat)});
      }
      const Matrix Tbar = mean_comembership(sub_T);
      report.c_bar = sample_concordance(T, Tbar, grid.trim_fraction).second;
      report.f_bar = feature_concordance(f_full, bundle.full.assignment, sub_features);
      if (!report.c_bar.has_value()) {
        report.omitted = true;
        report.reason = "concordance undefined for every sample";
      }
    }
    result.reports[static_cast<size_t>(c)] = report;
  }

  std::vector<int> survivors;
  for (int c = 0; c < n_combos; ++c)
    if (!result.reports[static_cast<size_t>(c)].omitted) survivors.push_back(c);
  if (survivors.empty()) {
    std::ostringstream os;
    os << "every tuning combination was omitted:";
    for (const auto& r : result.reports)
      os << " " << combo_string(r.combo) << " [" << r.reason << "]";
    throw NoValidCombo(os.str());
  }

  auto prefer = [&](int a, int b) {  // true if combo a ranks before combo b on ties
    const TuningCombo& ca = combos[static_cast<size_t>(a)];
    const TuningCombo& cb = combos[static_cast<size_t>(b)];
    if (ca.lambda2 != cb.lambda2) return ca.lambda2 > cb.lambda2;
    if (ca.lambda1 != cb.lambda1) return ca.lambda1 > cb.lambda1;
    return ca.tau < cb.tau;
  };

  std::sort(survivors.begin(), survivors.end(), [&](int a, int b) {
    const double ca = *result.reports[static_cast<size_t>(a)].c_bar;
    const double cb = *result.reports[static_cast<size_t>(b)].c_bar;
    if (ca != cb) return ca > cb;
    return prefer(a, b);
  });
  // top s%: keep ceil(s * M) combos plus any ties with the cutoff value, so
  // equal scores are never split arbitrarily.
  const size_t keep = std::min(
      survivors.size(), static_cast<size_t>(std::ceil(
                            grid.top_fraction * static_cast<double>(survivors.size()))));
  const double cutoff = *result.reports[static_cast<size_t>(survivors[keep - 1])].c_bar;
  size_t end = keep;
  while (end < survivors.size() &&
         *result.reports[static_cast<size_t>(survivors[end])].c_bar == cutoff)
    ++end;
  survivors.resize(end);

  int winner = survivors.front();
  auto fbar_of = [&](int c) {
    const auto& v = result.reports[static_cast<size_t>(c)].f_bar;
    return v.has_value() ? *v : -std::numeric_limits<double>::infinity();
  };
  for (int c : survivors) {
    if (fbar_of(c) > fbar_of(winner) ||
        (fbar_of(c) == fbar_of(winner) && c != winner && prefer(c, winner)))
      winner = c;
  }
  result.chosen = combos[static_cast<size_t>(winner)];
  return result;
}

}  // namespace scehg

#include "scehg/covariance.hpp"

#include <cmath>
#include <string>

namespace scehg {

namespace {

void check_series(const SubjectSeries& series) {
  if (series.data.rows() < 1 || series.data.cols() < 1)
    throw InvalidInput("subject series must have at least one row and one column");
  if (!series.data.allFinite())
    throw InvalidInput("subject series '" + series.subject_id + "' has non-finite entries");
}

void check_kernel(const KernelConfig& cfg) {
  if (!(cfg.bandwidth > 0)) throw InvalidInput("kernel bandwidth must be > 0");
}

}  // namespace

double default_bandwidth(int q) {
  if (q < 1) throw InvalidInput("default_bandwidth requires q >= 1");
  return std::cbrt(static_cast<double>(q));
}

Vector kernel_weights(int q, int t, const KernelConfig& cfg) {
  check_kernel(cfg);
  if (q < 1) throw InvalidInput("kernel_weights requires q >= 1");
  if (t < 1 || t > q)
    throw InvalidInput("time index " + std::to_string(t) + " out of range [1, " +
                       std::to_string(q) + "]");
  Vector weights(q);
  for (int s = 1; s <= q; ++s) {
    const double u = std::abs(s - t) / cfg.bandwidth;
    weights(s - 1) = std::exp(-0.5 * u * u);
  }
  return weights;
}

Matrix time_varying_covariance(const SubjectSeries& series, const KernelConfig& cfg, int t) {
  check_series(series);
  const int q = static_cast<int>(series.data.cols());
  const Vector weights = kernel_weights(q, t, cfg);
  const Eigen::Index p = series.data.rows();

  // Scaling by sqrt(w) before the rank-1 update keeps every entry a product
  // of two identically rounded factors, so the result is symmetric and
  // row-permutation equivariant bit for bit.
  Matrix acc = Matrix::Zero(p, p);
  for (int s = 0; s < q; ++s) {
    const Vector scaled = std::sqrt(weights(s)) * series.data.col(s);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(scaled, 1.0);
  }
  acc /= weights.sum();
  acc.triangularView<Eigen::StrictlyUpper>() = acc.transpose();  // exact symmetry
  return acc;
}

Matrix subject_covariance(const SubjectSeries& series, const KernelConfig& cfg) {
  check_series(series);
  check_kernel(cfg);
  const int q = static_cast<int>(series.data.cols());
  const Eigen::Index p = series.data.rows();

  // Sum_t Sigma(t)/q = Sum_s c_s z_s z_s^T with c_s = (1/q) Sum_t w_st / W_t.
  Matrix weights(q, q);  // (s, t)
  for (int t = 1; t <= q; ++t) weights.col(t - 1) = kernel_weights(q, t, cfg);
  const Vector totals = weights.colwise().sum();
  Vector coeff = Vector::Zero(q);
  for (int t = 0; t < q; ++t) coeff += weights.col(t) / totals(t);
  coeff /= static_cast<double>(q);

  Matrix acc = Matrix::Zero(p, p);
  for (int s = 0; s < q; ++s) {
    const Vector scaled = std::sqrt(coeff(s)) * series.data.col(s);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(scaled, 1.0);
  }
  acc.triangularView<Eigen::StrictlyUpper>() = acc.transpose();  // exact symmetry
  return acc;
}

}  // namespace scehg

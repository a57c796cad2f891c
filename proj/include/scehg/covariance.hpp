#pragma once

#include "scehg/types.hpp"

#include <string>

namespace scehg {

/// One subject's spatial-by-temporal observation matrix (p rows, q columns).
struct SubjectSeries {
  std::string subject_id;
  Matrix data;
};

enum class KernelType { gaussian };

struct KernelConfig {
  double bandwidth = 1.0;
  KernelType kernel = KernelType::gaussian;
};

/// Default smoothing bandwidth: cube root of the number of time points.
double default_bandwidth(int q);

/// Gaussian kernel weights K(|s-t|/h), s = 1..q, for a 1-based time index t.
/// Entry t is exactly 1.
Vector kernel_weights(int q, int t, const KernelConfig& cfg);

/// Kernel-weighted spatial covariance at time t (1-based):
///   Sigma(t) = sum_s w_st z_s z_s^T / sum_s w_st.
/// Symmetry is enforced exactly.
Matrix time_varying_covariance(const SubjectSeries& series, const KernelConfig& cfg, int t);

/// Time average of time_varying_covariance over t = 1..q.
Matrix subject_covariance(const SubjectSeries& series, const KernelConfig& cfg);

}  // namespace scehg

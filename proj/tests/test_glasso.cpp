#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scehg/glasso.hpp"
#include "scehg/rng.hpp"
#include "scehg/simgen.hpp"
#include "scehg/solvers.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace scehg;

namespace {

Matrix random_spd(Rng& rng, int p, double diag = 0.5) {
  Matrix a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
  Matrix s = a * a.transpose() / p;
  s.diagonal().array() += diag;
  return 0.5 * (s + s.transpose());
}

double objective(const Matrix& S, const Matrix& omega, double lambda) {
  return (S * omega).trace() - SymmetricFactor(omega).log_det() +
         lambda * omega.cwiseAbs().sum();
}

}  // namespace

TEST_CASE("glasso scalar case follows 1/(s + lambda)") {
  const Matrix S = Matrix::Constant(1, 1, 2.0);
  CHECK(glasso_fit(S, 0.5).omega(0, 0) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("glasso with no penalty inverts the covariance") {
  Matrix S = Matrix::Zero(2, 2);
  S.diagonal() << 1.0, 4.0;
  const PrecisionEstimate est = glasso_fit(S, 0.0);
  CHECK(est.omega(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(est.omega(1, 1) == doctest::Approx(0.25).epsilon(1e-8));

  Rng rng(23);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix spd = random_spd(rng, 5);
    const Matrix omega = glasso_fit(spd, 0.0, {1e-12, 1000}).omega;
    CHECK((omega * spd - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("glasso at a dominating penalty returns the decoupled diagonal") {
  Rng rng(29);
  const Matrix S = random_spd(rng, 4);
  const double lambda = S.cwiseAbs().maxCoeff();
  const Matrix omega = glasso_fit(S, lambda).omega;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i == j)
        CHECK(omega(i, i) == doctest::Approx(1.0 / (S(i, i) + lambda)).epsilon(1e-7));
      else
        CHECK(omega(i, j) == 0.0);
    }
  }
}

TEST_CASE("glasso objective decreases monotonically across sweeps") {
  Rng rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix S = random_spd(rng, 6);
    const PrecisionEstimate est = glasso_fit(S, 0.1);
    REQUIRE(est.sweep_objectives.size() >= 2);
    for (size_t k = 1; k < est.sweep_objectives.size(); ++k)
      CHECK(est.sweep_objectives[k] <=
            est.sweep_objectives[k - 1] + 1e-9 * (1.0 + std::abs(est.sweep_objectives[k - 1])));
    CHECK(est.objective == doctest::Approx(objective(S, est.omega, 0.1)).epsilon(1e-12));

    Eigen::SelfAdjointEigenSolver<Matrix> eig(est.omega, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("glasso off-diagonal mass shrinks along a penalty ladder") {
  Rng rng(37);
  const Matrix S = random_spd(rng, 5);
  double previous = -1.0;
  bool first = true;
  for (double lambda : {0.01, 0.05, 0.1, 0.3, 0.8}) {
    const Matrix omega = glasso_fit(S, lambda).omega;
    double off = omega.cwiseAbs().sum() - omega.diagonal().cwiseAbs().sum();
    if (!first) CHECK(off <= previous + 1e-7);
    previous = off;
    first = false;
  }
}

TEST_CASE("glasso error paths") {
  const Matrix singular = Matrix::Ones(2, 2);
  CHECK_THROWS_AS(glasso_fit(singular, 0.0), NotPositiveDefinite);
  CHECK_THROWS_AS(glasso_fit(Matrix::Ones(2, 3), 0.1), InvalidInput);
  CHECK_THROWS_AS(glasso_fit(Matrix::Identity(2, 2), -0.1), InvalidInput);

  Rng rng(47);
  const Matrix S = random_spd(rng, 6, 0.2);
  try {
    glasso_fit(S, 0.05, {1e-7, 1});
    FAIL("expected a convergence failure");
  } catch (const ConvergenceFailure& e) {
    CHECK(e.last_iterate().rows() == 6);  // carries the last iterate
  }
}

TEST_CASE("vectorize_upper uses column-stacked order") {
  const Matrix m2 = (Matrix(2, 2) << 2.0, 0.3, 0.3, 2.0).finished();
  const Vector v2 = vectorize_upper_entries(m2);
  REQUIRE(v2.size() == 1);
  CHECK(v2(0) == 0.3);

  Matrix m3 = Matrix::Identity(3, 3);
  m3(0, 1) = m3(1, 0) = 0.1;  // a
  m3(0, 2) = m3(2, 0) = 0.2;  // b
  m3(1, 2) = m3(2, 1) = 0.3;  // c
  const Vector v3 = vectorize_upper_entries(m3);
  CHECK(v3(0) == 0.1);
  CHECK(v3(1) == 0.2);
  CHECK(v3(2) == 0.3);

  CHECK(vectorize_upper_entries(Matrix::Identity(4, 4)).isZero(0.0));

  PrecisionEstimate est;
  est.omega = m3;
  CHECK(vectorize_upper(est, "sub1").subject_id == "sub1");
}

TEST_CASE("vectorize_upper round-trips through reconstruction") {
  Rng rng(41);
  const Matrix omega = random_spd(rng, 5);
  const Vector v = vectorize_upper_entries(omega);
  REQUIRE(v.size() == feature_count(5));

  Matrix rebuilt = Matrix::Zero(5, 5);
  rebuilt.diagonal() = omega.diagonal();
  for (int idx = 0; idx < v.size(); ++idx) {
    const auto [i, j] = feature_pair(idx, 5);
    rebuilt(i - 1, j - 1) = v(idx);
    rebuilt(j - 1, i - 1) = v(idx);
  }
  CHECK(rebuilt == omega);
  CHECK(nodes_from_feature_count(static_cast<int>(v.size())) == 5);
  CHECK_THROWS_AS(nodes_from_feature_count(4), InvalidInput);
}

TEST_CASE("glasso_cv basics") {
  Rng rng(43);
  // AR-correlated series from a known sparse precision: band structure.
  const int p = 5, q = 60;
  Matrix omega_true = Matrix::Identity(p, p);
  for (int i = 0; i + 1 < p; ++i) omega_true(i, i + 1) = omega_true(i + 1, i) = 0.4;
  const Matrix sigma_s = SymmetricFactor(omega_true).inverse();
  const Matrix sigma_t = ar_covariance(q);
  const Matrix data = sample_matrix_normal(sigma_s, sigma_t, rng);
  const SubjectSeries series{"s", data};
  const KernelConfig cfg{default_bandwidth(q), KernelType::gaussian};

  SUBCASE("single-element grid returns that element") {
    const auto [lambda, est] = glasso_cv(series, cfg, {0.2}, 3);
    CHECK(lambda == 0.2);
    CHECK(est.penalty_used == 0.2);
  }

  SUBCASE("duplicate grid entries do not change the winner") {
    const std::vector<double> grid = {0.05, 0.2, 0.5};
    const std::vector<double> dup = {0.05, 0.05, 0.2, 0.2, 0.5};
    const auto [l1, e1] = glasso_cv(series, cfg, grid, 4);
    const auto [l2, e2] = glasso_cv(series, cfg, dup, 4);
    CHECK(l1 == l2);
  }

  SUBCASE("selected penalty scores no worse than the grid endpoints") {
    const std::vector<double> grid = {0.01, 0.05, 0.15, 0.4, 1.0};
    std::vector<double> scores;
    const auto [lambda, est] = glasso_cv(series, cfg, grid, 5, {1e-7, 200}, &scores);
    REQUIRE(scores.size() == grid.size());
    size_t chosen = 0;
    while (grid[chosen] != lambda) ++chosen;
    CHECK(scores[chosen] <= scores.front());
    CHECK(scores[chosen] <= scores.back());
  }

  SUBCASE("precondition violations throw") {
    CHECK_THROWS_AS(glasso_cv(series, cfg, {}, 3), InvalidInput);
    CHECK_THROWS_AS(glasso_cv(series, cfg, {0.1}, 1), InvalidInput);
    SubjectSeries tiny{"t", data.leftCols(2)};
    CHECK_THROWS_AS(glasso_cv(tiny, cfg, {0.1}, 3), InvalidInput);
  }
}

TEST_CASE("glasso_cv on a short series: ridge handles q < p, lambda 0 propagates") {
  Rng rng(53);
  const int p = 12, q = 8;
  Matrix data(p, q);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) data(i, j) = rng.normal();
  const SubjectSeries series{"short", data};
  const KernelConfig cfg{default_bandwidth(q), KernelType::gaussian};

  const auto [lambda, est] = glasso_cv(series, cfg, {0.05, 0.1, 0.3}, 2);
  CHECK(est.omega.allFinite());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(est.omega, Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);

  CHECK_THROWS_AS(glasso_cv(series, cfg, {0.0}, 2), NotPositiveDefinite);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "scehg/rng.hpp"
#include "scehg/solvers.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace scehg;

namespace {

Matrix random_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

Matrix random_spd(Rng& rng, int p) {
  const Matrix a = random_matrix(rng, p, p);
  Matrix s = a * a.transpose();
  s.diagonal().array() += 0.5;
  return 0.5 * (s + s.transpose());
}

}  // namespace

TEST_CASE("lasso_cd matches the 1-D subgradient solve") {
  LassoProblem problem;
  problem.design = Matrix::Constant(1, 1, 1.0);
  problem.response = Vector::Constant(1, 2.0);
  problem.penalty = 1.0;
  const Vector beta = lasso_cd(problem);
  CHECK(beta(0) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(beta(0) ==
        doctest::Approx(oracle::lasso_1d(problem.design.col(0), problem.response, 1.0)));

  problem.penalty = 4.0;  // threshold exceeds the correlation
  CHECK(lasso_cd(problem)(0) == 0.0);
}

TEST_CASE("lasso_cd is separable on an identity design") {
  LassoProblem problem;
  problem.design = Matrix::Identity(2, 2);
  problem.response = (Vector(2) << 3.0, -1.0).finished();
  problem.penalty = 2.0;
  const Vector beta = lasso_cd(problem);
  CHECK(beta(0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(beta(1) == 0.0);
}

TEST_CASE("lasso_cd matches the dense grid oracle on random instances") {
  Rng rng(41);
  for (int rep = 0; rep < 25; ++rep) {
    const int rows = 2 + rng.uniform_int(4);  // <= 5
    const int cols = 1 + rng.uniform_int(3);  // <= 3
    const Matrix Z = random_matrix(rng, rows, cols);
    const Vector y = random_matrix(rng, rows, 1);
    const double lam = 0.5 * std::abs(rng.normal());

    const Vector beta = lasso_cd({Z, y, lam});
    const Vector ref = oracle::lasso_grid(Z, y, lam);
    CHECK((beta - ref).lpNorm<Eigen::Infinity>() < 1e-5);
  }
}

TEST_CASE("lasso_cd objective is non-increasing and beats the zero vector") {
  Rng rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix Z = random_matrix(rng, 6, 4);
    const Vector y = random_matrix(rng, 6, 1);
    LassoProblem problem{Z, y, 0.3};

    std::vector<double> trace;
    const Vector beta = lasso_cd(problem, {}, nullptr, &trace);
    REQUIRE(!trace.empty());
    for (size_t k = 1; k < trace.size(); ++k) CHECK(trace[k] <= trace[k - 1] + 1e-12);
    CHECK(lasso_objective(problem, beta) <=
          lasso_objective(problem, Vector::Zero(4)) + 1e-12);
    CHECK(lasso_kkt_residual(problem, beta) <= 1e-7);
  }
}

TEST_CASE("lasso_cd error paths") {
  LassoProblem problem;
  problem.design = Matrix::Constant(1, 1, std::nan(""));
  problem.response = Vector::Constant(1, 1.0);
  CHECK_THROWS_AS(lasso_cd(problem), InvalidInput);

  problem.design = Matrix::Constant(2, 1, 1.0);
  CHECK_THROWS_AS(lasso_cd(problem), InvalidInput);  // row/response mismatch

  Rng rng(3);
  LassoProblem hard;
  hard.design = (Matrix(3, 2) << 1.0, 0.9, 0.9, 1.0, 0.5, 0.5).finished();
  hard.response = (Vector(3) << 1.0, -1.0, 0.5).finished();
  hard.penalty = 0.01;
  try {
    lasso_cd(hard, {1e-14, 1});
    FAIL("expected convergence failure");
  } catch (const ConvergenceFailure& e) {
    CHECK(e.last_iterate().rows() == 2);
  }
}

TEST_CASE("group_prox formula and edge cases") {
  CHECK(group_prox((Vector(2) << 2.0, 0.0).finished(), 0.5)
            .isApprox((Vector(2) << 1.5, 0.0).finished(), 1e-12));
  CHECK(group_prox((Vector(2) << 2.0, 0.0).finished(), 3.0).isZero(0.0));
  CHECK(group_prox((Vector(2) << 3.0, 4.0).finished(), 1.0)
            .isApprox((Vector(2) << 2.4, 3.2).finished(), 1e-12));
  CHECK(group_prox(Vector::Zero(3), 2.0).isZero(0.0));
  CHECK_THROWS_AS(group_prox(Vector::Ones(2), -1.0), InvalidInput);
}

TEST_CASE("group_prox is non-expansive") {
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const Vector a = random_matrix(rng, 4, 1, 2.0);
    const Vector b = random_matrix(rng, 4, 1, 2.0);
    const double s = std::abs(rng.normal());
    CHECK((group_prox(a, s) - group_prox(b, s)).norm() <= (a - b).norm() + 1e-12);
  }
}

TEST_CASE("tlp evaluation and the DC identity") {
  CHECK(tlp(0.5, 1.0) == 0.5);
  CHECK(tlp(2.0, 1.0) == 1.0);
  CHECK(tlp(-0.3, 1.0) == doctest::Approx(0.3));
  CHECK_THROWS_AS(tlp(1.0, 0.0), InvalidInput);

  Rng rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    const double a = 3.0 * rng.normal();
    const double tau = 0.1 + std::abs(rng.normal());
    const double hinge = std::max(std::abs(a) - tau, 0.0);
    CHECK(tlp(a, tau) == doctest::Approx(std::abs(a) - hinge).epsilon(1e-12));
  }
}

TEST_CASE("sym_factor on simple matrices") {
  const SymmetricFactor id(Matrix::Identity(3, 3));
  CHECK(id.log_det() == doctest::Approx(0.0));
  CHECK(id.inverse().isApprox(Matrix::Identity(3, 3), 1e-12));

  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 1.0, 4.0;
  const SymmetricFactor diag(d);
  CHECK(diag.log_det() == doctest::Approx(std::log(4.0)));
  CHECK(diag.inverse()(1, 1) == doctest::Approx(0.25));

  const Matrix m = (Matrix(2, 2) << 2.0, 1.0, 1.0, 2.0).finished();
  CHECK(SymmetricFactor(m).log_det() == doctest::Approx(std::log(3.0)));
}

TEST_CASE("sym_factor inverse and solve accuracy on random SPD input") {
  Rng rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix s = random_spd(rng, 5);
    const SymmetricFactor factor(s);
    CHECK((factor.inverse() * s - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-8);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    CHECK(factor.log_det() ==
          doctest::Approx(eig.eigenvalues().array().log().sum()).epsilon(1e-8));

    const Vector b = random_matrix(rng, 5, 1);
    CHECK((s * factor.solve(b) - b).norm() < 1e-8);
  }
}

TEST_CASE("sym_factor reports the failing pivot") {
  Matrix m = Matrix::Identity(3, 3);
  m(1, 1) = -1.0;
  try {
    sym_factor(m);
    FAIL("expected a positive definiteness failure");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.pivot() == 1);
  }

  const Matrix rank_deficient = (Matrix(2, 2) << 1.0, 2.0, 2.0, 1.0).finished();
  CHECK_THROWS_AS(sym_factor(rank_deficient), NotPositiveDefinite);
  CHECK_THROWS_AS(sym_factor((Matrix(2, 2) << 1.0, 0.5, 0.2, 1.0).finished()), InvalidInput);
}

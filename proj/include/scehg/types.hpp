#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <utility>

namespace scehg {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = Mat<double>;
using Vector = Vec<double>;
using IntMatrix = Mat<int>;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

struct SolverOptions {
  double tol = 1e-7;
  int max_iters = 10000;
};

/// Base error. code() is a stable machine-parsable identifier; the CLI
/// prints "error: <code>: <detail>" on a single line and exits nonzero.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error("invalid-input", what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what)
      : Error("dimension-mismatch", what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error("parse-error", what) {}
};

class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(int pivot, const std::string& what)
      : Error("not-positive-definite", what), pivot_(pivot) {}
  int pivot() const noexcept { return pivot_; }

 private:
  int pivot_;
};

/// Thrown when an iterative solver exhausts its iteration budget. Carries the
/// last iterate (a column vector for vector-valued solvers).
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(Matrix last, const std::string& what)
      : Error("convergence-failure", what), last_iterate_(std::move(last)) {}
  const Matrix& last_iterate() const noexcept { return last_iterate_; }

 private:
  Matrix last_iterate_;
};

class NoValidCombo : public Error {
 public:
  explicit NoValidCombo(const std::string& what) : Error("no-valid-combo", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io-error", what) {}
};

inline void check_solver_options(const SolverOptions& opts) {
  if (!(opts.tol > 0)) throw InvalidInput("solver tol must be > 0");
  if (opts.max_iters < 1) throw InvalidInput("solver max_iters must be >= 1");
}

}  // namespace scehg

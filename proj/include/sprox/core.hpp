#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace sprox {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class ErrorKind {
  dimension_mismatch,
  invalid_argument,
  non_finite,
  iteration_limit,
  divergence,
  infeasible,
  bound_violation,
  degenerate,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::non_finite: return "non_finite";
    case ErrorKind::iteration_limit: return "iteration_limit";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::bound_violation: return "bound_violation";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Base of every error raised by the library. `kind()` is the structured part;
/// the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when an iterative routine runs out of iterations. Carries the best
/// iterate it had and that iterate's residual.
class IterationLimitError : public Error {
 public:
  IterationLimitError(const std::string& what, Vector best, double residual)
      : Error(ErrorKind::iteration_limit, what), best_(std::move(best)), residual_(residual) {}

  const Vector& best() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  Vector best_;
  double residual_;
};

namespace detail {

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) throw Error(kind, what);
}

inline double positive_part_max(const Vector& v) {
  return v.size() == 0 ? 0.0 : std::max(0.0, v.maxCoeff());
}

}  // namespace detail

}  // namespace sprox

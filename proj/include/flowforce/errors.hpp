#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowforce {

// Input outside the admissible set of a formula (non-positive depth,
// head below the cusp, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A vertical coordinate that should be monotone is not: F_Y <= 0 or
// h_p <= 0. Carries the first offending column.
class StagnationError : public std::runtime_error {
 public:
  StagnationError(const std::string& what, std::size_t column)
      : std::runtime_error(what + " (column " + std::to_string(column) + ")"),
        column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

// A quantity that must be independent of x varies across columns beyond
// the allowed spread; the input is not a solution.
class InconsistentFieldError : public std::runtime_error {
 public:
  InconsistentFieldError(const std::string& what, double spread, double limit)
      : std::runtime_error(what + ": spread " + std::to_string(spread) +
                           " exceeds " + std::to_string(limit)),
        spread_(spread),
        limit_(limit) {}
  double spread() const noexcept { return spread_; }
  double limit() const noexcept { return limit_; }

 private:
  double spread_;
  double limit_;
};

// Newton failed (line search exhausted, iterate left the admissible set,
// iteration cap). The residual-norm history is kept for diagnostics.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

// The Newton matrix is numerically singular.
class BifurcationPointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed on-disk container.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw DomainError(std::string(name) + " is not finite");
}

}  // namespace detail
}  // namespace flowforce

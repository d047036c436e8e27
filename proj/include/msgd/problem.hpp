#ifndef MSGD_PROBLEM_HPP
#define MSGD_PROBLEM_HPP

#include <optional>
#include <stdexcept>
#include <string>

#include "msgd/error.hpp"
#include "msgd/linalg.hpp"

namespace msgd {

/// A least-squares instance together with its reference solution.
///
/// residual = A x* - b; an inconsistent system keeps the residual in the
/// null space of A^T so that x* stays the minimizer.
struct Problem {
  Matrix a;
  Vector b;
  std::optional<Vector> x_star;
  Vector residual;
  bool consistent = false;

  Eigen::Index rows() const noexcept { return a.rows(); }
  Eigen::Index cols() const noexcept { return a.cols(); }
};

/// Builds a Problem from (A, b), solving for x* and the residual.
inline Problem make_problem(Matrix a, Vector b) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw ConfigError("matrix must have at least one row and one column");
  }
  if (!all_finite(a) || !all_finite(b)) {
    throw ConfigError("matrix and right-hand side must contain only finite values");
  }
  auto sol = least_squares(a, b);
  Problem p;
  p.a = std::move(a);
  p.b = std::move(b);
  p.x_star = std::move(sol.x_star);
  p.residual = std::move(sol.residual);
  p.consistent = sol.consistent;
  return p;
}

/// Checks the Problem invariants: shapes agree and A x* - b = residual.
inline void validate_problem(const Problem& p) {
  if (p.b.size() != p.a.rows()) {
    throw ConfigError("rhs length does not match the number of rows");
  }
  if (!p.x_star) {
    return;
  }
  if (p.x_star->size() != p.a.cols() || p.residual.size() != p.a.rows()) {
    throw ConfigError("x_star or residual has the wrong length");
  }
  const double err = (p.a * *p.x_star - p.b - p.residual).norm();
  if (err > 1e-8 * (1.0 + p.b.norm())) {
    throw NumericalError("A x_star - b differs from the stored residual by " + std::to_string(err));
  }
}

}  // namespace msgd

#endif  // MSGD_PROBLEM_HPP

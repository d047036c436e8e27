#ifndef MSGD_LINALG_HPP
#define MSGD_LINALG_HPP

// Dense real kernels: row norms, smallest singular value, normal-equation
// least squares and the orthogonal-complement residual used to build
// inconsistent systems.

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "msgd/error.hpp"

namespace msgd {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Relative threshold on ||A x* - b|| below which a system counts as consistent.
inline double consistency_tolerance(const Vector& b) { return 1e-8 * (1.0 + b.norm()); }

inline bool all_finite(const Matrix& a) { return a.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline double row_norm_sq(const Matrix& a, Eigen::Index i) {
  if (i < 0 || i >= a.rows()) {
    throw std::out_of_range("row index " + std::to_string(i) + " out of range for " +
                            std::to_string(a.rows()) + " rows");
  }
  return a.row(i).squaredNorm();
}

inline double max_row_norm_sq(const Matrix& a) { return a.rowwise().squaredNorm().maxCoeff(); }

namespace detail {

// Cholesky of the normal matrix; rejects anything that is not safely
// positive definite.
inline Eigen::LLT<Eigen::MatrixXd> normal_cholesky(const Matrix& a) {
  if (a.rows() < a.cols()) {
    throw RankDeficientError("matrix has fewer rows (" + std::to_string(a.rows()) +
                             ") than columns (" + std::to_string(a.cols()) + ")");
  }
  const Eigen::MatrixXd normal = a.transpose() * a;
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw RankDeficientError("normal matrix A^T A is not positive definite");
  }
  const auto diag = llt.matrixLLT().diagonal();
  const double lo = diag.minCoeff();
  const double hi = diag.maxCoeff();
  if (!(lo > 0.0) || lo * lo <= 1e-13 * hi * hi) {
    throw RankDeficientError("normal matrix A^T A is numerically singular");
  }
  return llt;
}

}  // namespace detail

struct SigmaMinOptions {
  double tol = 1e-12;
  std::size_t max_iterations = 100000;
};

/// Squared smallest singular value of a full-column-rank matrix.
///
/// Inverse iteration on A^T A (Cholesky-factored once) with a Rayleigh
/// quotient estimate; stops when successive estimates agree to `tol`
/// relative. Throws NonConvergenceError if the cap is reached.
inline double sigma_min_sq(const Matrix& a, SigmaMinOptions opts = {}) {
  const auto llt = detail::normal_cholesky(a);
  const Eigen::Index n = a.cols();
  const Eigen::MatrixXd normal = a.transpose() * a;
  const double normal_scale = normal.norm();

  // Deterministic start with no special alignment to coordinate axes.
  Vector v(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    v[j] = 1.0 + 0.1 * std::sin(1.0 + 3.0 * static_cast<double>(j));
  }
  v.normalize();

  double lambda = v.dot(normal * v);
  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    Vector w = llt.solve(v);
    const double w_norm = w.norm();
    if (!(w_norm > 0.0) || !std::isfinite(w_norm)) {
      throw NumericalError("inverse iteration produced a degenerate vector");
    }
    v = w / w_norm;
    const double next = v.dot(normal * v);
    // Slow eigenvalue drift can mimic convergence when the two smallest
    // eigenvalues nearly coincide, so the eigen-residual must be small too.
    if (std::abs(next - lambda) <= opts.tol * std::abs(next) &&
        (normal * v - next * v).norm() <= std::sqrt(opts.tol) * normal_scale) {
      return next;
    }
    lambda = next;
  }
  throw NonConvergenceError("sigma_min_sq did not reach relative tolerance " +
                                std::to_string(opts.tol),
                            opts.max_iterations);
}

struct LsqSolution {
  Vector x_star;
  Vector residual;  // A x* - b
  bool consistent = false;
};

/// Least-squares solution via the normal equations with one step of
/// iterative refinement.
inline LsqSolution least_squares(const Matrix& a, const Vector& b) {
  if (b.size() != a.rows()) {
    throw std::invalid_argument("rhs length " + std::to_string(b.size()) +
                                " does not match row count " + std::to_string(a.rows()));
  }
  const auto llt = detail::normal_cholesky(a);
  Vector x = llt.solve(a.transpose() * b);
  x += llt.solve(a.transpose() * (b - a * x));

  LsqSolution sol;
  sol.residual = a * x - b;
  sol.x_star = std::move(x);
  sol.consistent = sol.residual.norm() <= consistency_tolerance(b);
  return sol;
}

/// scale * (z - A (A^T A)^{-1} A^T z): the component of z orthogonal to
/// range(A). Returns the zero vector when z lies in range(A), including
/// every square full-rank A.
inline Vector nullspace_residual(const Matrix& a, const Vector& z, double scale = 1.0) {
  if (z.size() != a.rows()) {
    throw std::invalid_argument("z length " + std::to_string(z.size()) +
                                " does not match row count " + std::to_string(a.rows()));
  }
  const auto llt = detail::normal_cholesky(a);
  if (a.rows() == a.cols()) {
    return Vector::Zero(z.size());
  }
  Vector w = z - a * llt.solve(a.transpose() * z);
  // Second pass removes the range component left by rounding.
  w -= a * llt.solve(a.transpose() * w);
  if (w.norm() <= 1e-12 * z.norm()) {
    return Vector::Zero(z.size());
  }
  return scale * w;
}

}  // namespace msgd

#endif  // MSGD_LINALG_HPP

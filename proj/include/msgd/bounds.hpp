#ifndef MSGD_BOUNDS_HPP
#define MSGD_BOUNDS_HPP

// Closed-form constants and error bounds for the missing-data iteration.
//
// With a_i the rows of A, S2b = sum ||a_i||^2 b_i^2, S4 = sum ||a_i||^4:
//
//   mu     = sigma_min(A)^2 / m
//   L_g    = max ||a_i||^2 / p^2
//   G      = (2B / (m p^2)) (1 + (1-p)(2-p)/p) S4 + (2 / (m p^2)) S2b
//   G*     = (2 / (m p^2)) sum ||a_i||^2 r_i^2 + (2(1-p)(2-p) / (m p^3)) ||x*||^2 S4
//
// Fixed step alpha < 1/L_g:
//   E||x_{k+1} - x*||^2 <= rate^k ||x_0 - x*||^2 + horizon,
//   rate = 1 - 2 alpha mu (1 - alpha L_g),  horizon = alpha G* / (mu (1 - alpha L_g)).
//
// Decaying step 1/(mu k):  E||x_{k+1} - x*||^2 <= 17 G (1 + ln k) / (mu^2 k).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "msgd/error.hpp"
#include "msgd/linalg.hpp"

namespace msgd {

namespace detail {

inline void require_probability(double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw ConfigError("observation probability p must lie in (0, 1], got " + std::to_string(p));
  }
}

}  // namespace detail

/// S4 = sum_i ||a_i||^4.
inline double sum_row_norm_pow4(const Matrix& a) { return a.rowwise().squaredNorm().array().square().sum(); }

inline double compute_mu(const Matrix& a, SigmaMinOptions opts = {}) {
  return sigma_min_sq(a, opts) / static_cast<double>(a.rows());
}

inline double compute_lg(const Matrix& a, double p) {
  detail::require_probability(p);
  return max_row_norm_sq(a) / (p * p);
}

/// Uniform bound on E||g(x)||^2 over the ball with B = max ||x||^2.
inline double compute_g(const Matrix& a, const Vector& b, double p, double b_domain) {
  detail::require_probability(p);
  if (!(b_domain > 0.0)) {
    throw ConfigError("B must be positive");
  }
  const double m = static_cast<double>(a.rows());
  const Eigen::ArrayXd row_sq = a.rowwise().squaredNorm();
  const double s4 = row_sq.square().sum();
  const double s2b = (row_sq * b.array().square()).sum();
  return (2.0 * b_domain / (m * p * p)) * (1.0 + (1.0 - p) * (2.0 - p) / p) * s4 + (2.0 / (m * p * p)) * s2b;
}

/// Same bound written before the final simplification,
/// (2B/(m p^2) + 2p(1-p)(2-p)B/(m p^4)) S4 + (2/(m p^2)) S2b.
/// Kept separate so tests can check the two forms agree.
inline double compute_g_unsimplified(const Matrix& a, const Vector& b, double p, double b_domain) {
  const double m = static_cast<double>(a.rows());
  const Eigen::ArrayXd row_sq = a.rowwise().squaredNorm();
  const double s4 = row_sq.square().sum();
  const double s2b = (row_sq * b.array().square()).sum();
  const double p2 = p * p;
  const double p4 = p2 * p2;
  return (2.0 * b_domain / (m * p2) + 2.0 * p * (1.0 - p) * (2.0 - p) * b_domain / (m * p4)) * s4 +
         (2.0 / (m * p2)) * s2b;
}

/// Bound on E||g(x*)||^2. A zero residual gives the consistent form.
inline double compute_g_star(const Matrix& a, const Vector& x_star, const Vector& residual, double p) {
  detail::require_probability(p);
  if (residual.size() != a.rows() || x_star.size() != a.cols()) {
    throw std::invalid_argument("compute_g_star: x_star or residual has the wrong length");
  }
  const double m = static_cast<double>(a.rows());
  const Eigen::ArrayXd row_sq = a.rowwise().squaredNorm();
  const double s4 = row_sq.square().sum();
  const double s2r = (row_sq * residual.array().square()).sum();
  return (2.0 / (m * p * p)) * s2r + (2.0 * (1.0 - p) * (2.0 - p) / (m * p * p * p)) * x_star.squaredNorm() * s4;
}

struct BoundsReport {
  double mu = 0.0;
  double l_g = 0.0;
  double g_bound = 0.0;
  double g_star = 0.0;
  double rate = std::numeric_limits<double>::quiet_NaN();
  double horizon = std::numeric_limits<double>::quiet_NaN();
  double b_domain = 0.0;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double p = 1.0;

  /// Right-hand side of the fixed-step bound after k updates from an
  /// initial squared error e0.
  double fixed_step_bound(std::size_t k, double e0) const {
    return std::pow(rate, static_cast<double>(k)) * e0 + horizon;
  }
};

inline void to_json(nlohmann::json& j, const BoundsReport& r) {
  j = nlohmann::json{{"mu", r.mu},         {"l_g", r.l_g},   {"g_bound", r.g_bound},
                     {"g_star", r.g_star}, {"rate", r.rate}, {"horizon", r.horizon},
                     {"b_domain", r.b_domain}, {"alpha", r.alpha}, {"p", r.p}};
}

/// Constants that do not depend on a step size.
inline BoundsReport bounds_report(const Matrix& a, const Vector& b, const Vector& x_star, const Vector& residual,
                                  double p, double b_domain) {
  BoundsReport r;
  r.mu = compute_mu(a);
  r.l_g = compute_lg(a, p);
  r.g_bound = compute_g(a, b, p, b_domain);
  r.g_star = compute_g_star(a, x_star, residual, p);
  r.b_domain = b_domain;
  r.p = p;
  return r;
}

/// Full report for a fixed step alpha; throws StepTooLargeError unless
/// alpha < 1/L_g.
inline BoundsReport fixed_step_report(const Matrix& a, const Vector& b, const Vector& x_star, const Vector& residual,
                                      double p, double alpha, double b_domain) {
  BoundsReport r = bounds_report(a, b, x_star, residual, p, b_domain);
  if (!(alpha > 0.0)) {
    throw ConfigError("alpha must be positive");
  }
  if (alpha * r.l_g >= 1.0) {
    throw StepTooLargeError(alpha, r.l_g);
  }
  const double shrink = 1.0 - alpha * r.l_g;
  r.alpha = alpha;
  r.rate = 1.0 - 2.0 * alpha * r.mu * shrink;
  r.horizon = alpha * r.g_star / (r.mu * shrink);
  return r;
}

/// 17 G (1 + ln k) / (mu^2 k).
inline double theorem1_bound(double g, double mu, double k) {
  if (!(k >= 1.0)) {
    throw std::invalid_argument("theorem1_bound: k must be at least 1");
  }
  return 17.0 * g * (1.0 + std::log(k)) / (mu * mu * k);
}

struct StepPlan {
  double alpha_star = 0.0;
  std::uint64_t k_budget = 0;
  double k_exact = 0.0;  // before rounding up
  /// Set when epsilon >= 2 epsilon0: the bound already meets the target.
  bool target_already_met = false;
};

/// Step size and iteration count reaching E||x - x*||^2 <= epsilon from an
/// initial squared error epsilon0:
///   alpha* = eps mu / (2 G* + 2 mu eps L_g)
///   k      = ceil(2 ln(2 eps0 / eps) (L_g / mu + G* / (mu^2 eps))).
inline StepPlan corollary_plan(double epsilon, double epsilon0, double l_g, double g_star, double mu) {
  if (!(epsilon > 0.0) || !(epsilon0 > 0.0)) {
    throw ConfigError("epsilon and epsilon0 must be positive");
  }
  StepPlan plan;
  plan.alpha_star = epsilon * mu / (2.0 * g_star + 2.0 * mu * epsilon * l_g);
  const double log_term = std::log(2.0 * epsilon0 / epsilon);
  if (log_term <= 0.0) {
    plan.target_already_met = true;
    return plan;
  }
  plan.k_exact = 2.0 * log_term * (l_g / mu + g_star / (mu * mu * epsilon));
  plan.k_budget = static_cast<std::uint64_t>(std::ceil(plan.k_exact));
  return plan;
}

/// The same plan expanded in terms of A for a consistent system:
/// sigma_min^2, a_max^2 = max ||a_i||^2 and S4 = sum ||a_i||^4 substituted.
/// Returns the unrounded iteration count in `k_exact`.
struct ExpandedPlan {
  double alpha_star = 0.0;
  double k_exact = 0.0;
};

inline ExpandedPlan expanded_consistent_plan(double epsilon, double epsilon0, double sigma_min_sq_value,
                                             double a_max_sq, double sum_row_pow4, double x_star_sq, double p,
                                             std::size_t m) {
  const double md = static_cast<double>(m);
  const double s = sigma_min_sq_value;
  const double core = (2.0 - p) * (1.0 - p) * x_star_sq * sum_row_pow4;
  ExpandedPlan plan;
  plan.alpha_star = p * p * p * epsilon * s / (4.0 * core + 2.0 * p * epsilon * a_max_sq * s);
  plan.k_exact = 2.0 * std::log(2.0 * epsilon0 / epsilon) *
                 (md * a_max_sq / (p * p * s) + 2.0 * core * md / (p * p * p * s * s * epsilon));
  return plan;
}

}  // namespace msgd

#endif  // MSGD_BOUNDS_HPP

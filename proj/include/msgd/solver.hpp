#ifndef MSGD_SOLVER_HPP
#define MSGD_SOLVER_HPP

// Stochastic iterations for least squares with Bernoulli-missing entries.
//
// The missing-data update for an observed row a~ (zeros where missing) is
//
//   g(x) = (1/p^2) a~ (a~.x - p b_i) - ((1-p)/p^2) (a~ o a~ o x)
//
// whose expectation over the mask and a uniformly chosen row is the full
// gradient (1/m)(A^T A x - A^T b). At p = 1 it is the classical SGD
// direction a (a.x - b_i).

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "msgd/error.hpp"
#include "msgd/linalg.hpp"
#include "msgd/masking.hpp"
#include "msgd/problem.hpp"
#include "msgd/random.hpp"
#include "msgd/trace.hpp"

namespace msgd {

// ---------------------------------------------------------------------------
// Update directions

template <class RowExpr>
void msgd_gradient_into(const Eigen::MatrixBase<RowExpr>& observed, double b_i, const Vector& x, double p,
                        Vector& out) {
  const double inv_p2 = 1.0 / (p * p);
  const double diag_coef = (1.0 - p) * inv_p2;
  const double inner = observed.dot(x) - p * b_i;
  out = (inv_p2 * inner) * observed -
        diag_coef * (observed.array().square() * x.array()).matrix();
}

inline Vector msgd_gradient(const MaskedRow& row, double b_i, const Vector& x, double p) {
  if (row.values.size() != x.size()) {
    throw std::invalid_argument("row and iterate lengths differ");
  }
  Vector out(x.size());
  msgd_gradient_into(row.values, b_i, x, p, out);
  return out;
}

template <class RowExpr>
void sgd_gradient_into(const Eigen::MatrixBase<RowExpr>& row, double b_i, const Vector& x, Vector& out) {
  out = (row.dot(x) - b_i) * row;
}

template <class RowExpr>
Vector sgd_gradient(const Eigen::MatrixBase<RowExpr>& row, double b_i, const Vector& x) {
  Vector out(x.size());
  sgd_gradient_into(row, b_i, x, out);
  return out;
}

// ---------------------------------------------------------------------------
// Feasible set

/// Euclidean ball of the given radius centred at the origin.
class ProjectionDomain {
 public:
  explicit ProjectionDomain(double radius) : radius_(radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
      throw ConfigError("projection radius must be finite and positive, got " + std::to_string(radius));
    }
  }

  double radius() const noexcept { return radius_; }
  /// B = max ||x||^2 over the ball.
  double b_domain() const noexcept { return radius_ * radius_; }
  bool contains(const Vector& x) const { return x.norm() <= radius_; }

 private:
  double radius_;
};

inline void project_inplace(Vector& x, const ProjectionDomain& domain) {
  const double norm = x.norm();
  if (norm > domain.radius()) {
    x *= domain.radius() / norm;
  }
}

inline Vector project(Vector x, const ProjectionDomain& domain) {
  project_inplace(x, domain);
  return x;
}

// ---------------------------------------------------------------------------
// Step sizes

struct FixedStep {
  double alpha;
};

/// alpha_k = c / (mu_hat k).
struct InverseDecayStep {
  double c;
  double mu_hat;
};

/// alpha_k = (c / mu_hat) ratio^floor(k / period).
struct GeometricStagedStep {
  double c;
  double mu_hat;
  double ratio;
  std::size_t period;
};

class Schedule {
 public:
  using Variant = std::variant<FixedStep, InverseDecayStep, GeometricStagedStep>;

  static Schedule fixed(double alpha) {
    require_positive(alpha, "alpha");
    return Schedule(FixedStep{alpha});
  }

  static Schedule inverse_decay(double c, double mu_hat) {
    require_positive(c, "c");
    require_positive(mu_hat, "mu_hat");
    return Schedule(InverseDecayStep{c, mu_hat});
  }

  static Schedule geometric_staged(double c, double mu_hat, double ratio, std::size_t period) {
    require_positive(c, "c");
    require_positive(mu_hat, "mu_hat");
    if (!(ratio > 0.0 && ratio < 1.0)) {
      throw ConfigError("schedule ratio must lie in (0, 1), got " + std::to_string(ratio));
    }
    if (period < 1) {
      throw ConfigError("schedule period must be at least 1");
    }
    return Schedule(GeometricStagedStep{c, mu_hat, ratio, period});
  }

  const Variant& variant() const noexcept { return v_; }
  bool is_fixed() const noexcept { return std::holds_alternative<FixedStep>(v_); }

 private:
  explicit Schedule(Variant v) : v_(v) {}

  static void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("schedule ") + name + " must be finite and positive, got " +
                        std::to_string(v));
    }
  }

  Variant v_;
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

/// Step size at iteration k (k >= 1).
inline double step_size(const Schedule& schedule, std::size_t k) {
  if (k < 1) {
    throw std::invalid_argument("step_size: iteration index starts at 1");
  }
  return std::visit(
      Overloaded{
          [](const FixedStep& s) { return s.alpha; },
          [k](const InverseDecayStep& s) { return s.c / (s.mu_hat * static_cast<double>(k)); },
          [k](const GeometricStagedStep& s) {
            const auto stage = static_cast<double>(k / s.period);
            return (s.c / s.mu_hat) * std::pow(s.ratio, stage);
          },
      },
      schedule.variant());
}

// ---------------------------------------------------------------------------
// Driver

enum class Method {
  kMissingDataSgd,  // corrected update on masked rows
  kClassicalSgd,    // plain SGD on the rows of problem.a as given
};

struct RunSpec {
  MaskModel model{1.0};
  Schedule schedule = Schedule::fixed(1e-4);
  ProjectionDomain domain{1.0};
  std::optional<Vector> x0;  // zero vector when absent
  std::size_t iterations = 1;
  std::uint64_t seed = 0;
  std::size_t record_every = 1;
  Method method = Method::kMissingDataSgd;
  /// Replayed instead of a seeded mask when the model is frozen.
  std::optional<MaskMatrix> frozen_mask;
  /// Called after every update with (k, x_{k}) where k counts updates.
  std::function<void(std::size_t, const Vector&)> on_iterate;
};

/// Derived per-trial streams. Row choice and masking use separate streams
/// so that different methods run with the same seed see the same rows.
inline std::uint64_t row_stream_seed(std::uint64_t seed) { return derive_seed(seed, 100); }
inline std::uint64_t mask_stream_seed(std::uint64_t seed) { return derive_seed(seed, 200); }

/// Projected stochastic iteration. Rows are chosen uniformly with
/// replacement. Records ||x_k - x*||^2 at k = 0, every `record_every`
/// updates, and after the final update.
inline TrialTrace run(const Problem& problem, const RunSpec& spec) {
  if (!problem.x_star) {
    throw ConfigError("run requires a problem with a reference solution x_star");
  }
  if (spec.iterations < 1) {
    throw ConfigError("iterations must be at least 1");
  }
  if (spec.record_every < 1) {
    throw ConfigError("record_every must be at least 1");
  }
  const Matrix& a = problem.a;
  const Vector& b = problem.b;
  const Vector& x_star = *problem.x_star;
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();

  Vector x = spec.x0 ? *spec.x0 : Vector::Zero(n);
  if (x.size() != n) {
    throw ConfigError("x0 has length " + std::to_string(x.size()) + ", expected " + std::to_string(n));
  }
  if (!spec.domain.contains(x)) {
    throw ConfigError("x0 lies outside the projection domain");
  }

  SplitMix64 rows(row_stream_seed(spec.seed));
  MaskSampler sampler = spec.frozen_mask
                            ? MaskSampler::from_mask(*spec.frozen_mask, spec.model.p())
                            : MaskSampler(spec.model, mask_stream_seed(spec.seed));
  const double p = spec.model.p();

  TrialTrace trace;
  trace.seed = spec.seed;
  trace.checkpoints.reserve(spec.iterations / spec.record_every + 2);
  trace.checkpoints.push_back({0, (x - x_star).squaredNorm()});

  MaskedRow masked;
  Vector g(n);
  for (std::size_t k = 1; k <= spec.iterations; ++k) {
    const auto i = static_cast<Eigen::Index>(rows.below(static_cast<std::uint64_t>(m)));
    if (spec.method == Method::kMissingDataSgd) {
      sampler.sample(a, i, masked);
      msgd_gradient_into(masked.values, b[i], x, p, g);
    } else {
      sgd_gradient_into(a.row(i).transpose(), b[i], x, g);
    }
    x.noalias() -= step_size(spec.schedule, k) * g;
    project_inplace(x, spec.domain);
    if (spec.on_iterate) {
      spec.on_iterate(k, x);
    }
    if (k % spec.record_every == 0 || k == spec.iterations) {
      const double err = (x - x_star).squaredNorm();
      if (!std::isfinite(err)) {
        throw NumericalError("iterate diverged at iteration " + std::to_string(k));
      }
      trace.checkpoints.push_back({k, err});
    }
  }
  return trace;
}

}  // namespace msgd

#endif  // MSGD_SOLVER_HPP

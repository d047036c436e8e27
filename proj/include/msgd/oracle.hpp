#ifndef MSGD_ORACLE_HPP
#define MSGD_ORACLE_HPP

// Exact and sampled expectations of row/mask-dependent update directions.
// These are the reference computations behind the unbiasedness, bound and
// Lipschitz checks.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>

#include "msgd/linalg.hpp"
#include "msgd/masking.hpp"
#include "msgd/random.hpp"
#include "msgd/solver.hpp"

namespace msgd {

/// (1/m)(A^T A x - A^T b)
inline Vector full_gradient(const Matrix& a, const Vector& b, const Vector& x) {
  return (a.transpose() * (a * x - b)) / static_cast<double>(a.rows());
}

using RowDirection = std::function<Vector(const MaskedRow&, double b_i, const Vector& x, double p)>;

inline Vector msgd_direction(const MaskedRow& row, double b_i, const Vector& x, double p) {
  return msgd_gradient(row, b_i, x, p);
}

/// a~ (a~.x - b_i): SGD applied to the zero-filled system.
inline Vector naive_direction(const MaskedRow& row, double b_i, const Vector& x, double /*p*/) {
  return row.values * (row.values.dot(x) - b_i);
}

/// a~ (a~.x - p b_i): SGD on the zero-filled system with a rescaled rhs.
inline Vector naive_scaled_direction(const MaskedRow& row, double b_i, const Vector& x, double p) {
  return row.values * (row.values.dot(x) - p * b_i);
}

/// E_i E_mask[direction] by enumerating every row and every one of the 2^n
/// row masks with its exact probability.
inline Vector enumerated_expectation(const Matrix& a, const Vector& b, const Vector& x, double p,
                                     const RowDirection& direction) {
  const auto masks = enumerate_masks(static_cast<int>(a.cols()));
  Vector acc = Vector::Zero(a.cols());
  MaskedRow row;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (std::uint32_t code = 0; code < masks.size(); ++code) {
      const double w = masks.weight(code, p);
      if (w == 0.0) {
        continue;
      }
      apply_mask(a, i, masks.mask(code), row);
      acc += w * direction(row, b[i], x, p);
    }
  }
  return acc / static_cast<double>(a.rows());
}

struct SampleMoment {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo estimate of E||g(x)||^2 over uniform rows and fresh masks.
inline SampleMoment sampled_update_second_moment(const Matrix& a, const Vector& b, const Vector& x, double p,
                                                 std::size_t samples, std::uint64_t seed) {
  SplitMix64 rng(seed);
  MaskedRow row;
  Vector g(a.cols());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(a.rows())));
    sample_masked_row(a, i, p, rng, row);
    msgd_gradient_into(row.values, b[i], x, p, g);
    const double v = g.squaredNorm();
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(samples);
  SampleMoment out;
  out.samples = samples;
  out.mean = sum / n;
  const double var = samples > 1 ? (sum_sq - n * out.mean * out.mean) / (n - 1.0) : 0.0;
  out.std_error = std::sqrt(std::max(var, 0.0) / n);
  return out;
}

/// Operator norm of the (affine) update's linear part for one row/mask:
/// (1/p^2)(a~ a~^T - (1-p) diag(a~ o a~)).
inline double update_operator_norm(const MaskedRow& row, double p) {
  const Eigen::MatrixXd op =
      (row.values * row.values.transpose() - (1.0 - p) * Eigen::MatrixXd(row.values.array().square().matrix().asDiagonal())) /
      (p * p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct LipschitzSample {
  double max_ratio = 0.0;            // max ||g(x) - g(y)|| / ||x - y||
  double max_instance_bound = 0.0;   // max ||a~||^2 / p^2 over the sampled masks
  double max_ratio_over_instance = 0.0;  // max ratio / (||a~||^2 / p^2)
};

/// Samples (row, mask, x, y) with x, y uniform in the cube [-radius, radius]^n.
inline LipschitzSample sampled_lipschitz(const Matrix& a, const Vector& b, double p, double radius,
                                         std::size_t samples, std::uint64_t seed) {
  SplitMix64 rng(seed);
  MaskedRow row;
  Vector x(a.cols());
  Vector y(a.cols());
  Vector gx(a.cols());
  Vector gy(a.cols());
  LipschitzSample out;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(a.rows())));
    sample_masked_row(a, i, p, rng, row);
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      x[j] = radius * (2.0 * rng.uniform() - 1.0);
      y[j] = radius * (2.0 * rng.uniform() - 1.0);
    }
    const double dist = (x - y).norm();
    if (dist == 0.0) {
      continue;
    }
    msgd_gradient_into(row.values, b[i], x, p, gx);
    msgd_gradient_into(row.values, b[i], y, p, gy);
    const double ratio = (gx - gy).norm() / dist;
    const double instance = row.values.squaredNorm() / (p * p);
    out.max_ratio = std::max(out.max_ratio, ratio);
    out.max_instance_bound = std::max(out.max_instance_bound, instance);
    if (instance > 0.0) {
      out.max_ratio_over_instance = std::max(out.max_ratio_over_instance, ratio / instance);
    } else if (ratio > 0.0) {
      out.max_ratio_over_instance = std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

}  // namespace msgd

#endif  // MSGD_ORACLE_HPP

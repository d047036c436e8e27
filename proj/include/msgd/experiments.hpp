#ifndef MSGD_EXPERIMENTS_HPP
#define MSGD_EXPERIMENTS_HPP

// Synthetic problem generators, imputation baselines and multi-trial
// drivers.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "msgd/error.hpp"
#include "msgd/linalg.hpp"
#include "msgd/masking.hpp"
#include "msgd/problem.hpp"
#include "msgd/random.hpp"
#include "msgd/solver.hpp"
#include "msgd/trace.hpp"

namespace msgd {

/// Named problem sizes. `kDesk` keeps CI fast; `kLarge` is the 1000 x 200
/// Gaussian setting.
struct ProblemSize {
  Eigen::Index m;
  Eigen::Index n;
};
inline constexpr ProblemSize kDeskSize{200, 20};
inline constexpr ProblemSize kLargeSize{1000, 200};

namespace detail {

inline Matrix gaussian_matrix(Eigen::Index m, Eigen::Index n, SplitMix64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = normal(rng);
    }
  }
  return a;
}

inline Vector gaussian_vector(Eigen::Index n, SplitMix64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    v[j] = normal(rng);
  }
  return v;
}

}  // namespace detail

/// Standard Gaussian A and planted x; b = A x, so x* = x and r = 0.
inline Problem gen_gaussian_consistent(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) {
    throw ConfigError("problem dimensions must be positive");
  }
  if (m < n) {
    throw ConfigError("generator requires m >= n, got m=" + std::to_string(m) + ", n=" + std::to_string(n));
  }
  SplitMix64 rng(seed);
  Problem p;
  p.a = detail::gaussian_matrix(m, n, rng);
  Vector x = detail::gaussian_vector(n, rng);
  p.b = p.a * x;
  p.x_star = std::move(x);
  p.residual = Vector::Zero(m);
  p.consistent = true;
  return p;
}

/// As gen_gaussian_consistent (same A and x* for the same seed), then
/// b <- b - w with w orthogonal to range(A) and ||w|| = scale ||b||.
inline Problem gen_gaussian_inconsistent(Eigen::Index m, Eigen::Index n, double residual_scale,
                                         std::uint64_t seed) {
  if (!(residual_scale >= 0.0)) {
    throw ConfigError("residual_scale must be non-negative");
  }
  Problem p = gen_gaussian_consistent(m, n, seed);
  if (residual_scale == 0.0) {
    return p;
  }
  SplitMix64 rng(derive_seed(seed, 1));
  const Vector z = detail::gaussian_vector(m, rng);
  Vector w = nullspace_residual(p.a, z);
  const double w_norm = w.norm();
  if (w_norm > 0.0) {
    w *= residual_scale * p.b.norm() / w_norm;
  }
  p.b -= w;
  p.consistent = w.norm() <= consistency_tolerance(p.b);
  p.residual = std::move(w);
  return p;
}

// ---------------------------------------------------------------------------
// Imputation

enum class ImputeStrategy { kZero, kRowMean, kColMean };

inline constexpr std::array<ImputeStrategy, 3> kImputeStrategies{ImputeStrategy::kZero, ImputeStrategy::kRowMean,
                                                                  ImputeStrategy::kColMean};

inline std::string_view to_string(ImputeStrategy s) {
  switch (s) {
    case ImputeStrategy::kZero:
      return "zero";
    case ImputeStrategy::kRowMean:
      return "rowmean";
    case ImputeStrategy::kColMean:
      return "colmean";
  }
  return "unknown";
}

struct Imputed {
  Matrix a;
  /// Rows (RowMean) or columns (ColMean) with nothing observed; filled with 0.
  std::size_t empty_groups = 0;
};

/// Replaces entries where `observed` is false. Means use observed entries
/// of the same row or column only.
inline Imputed impute(const Matrix& a, const MaskMatrix& observed, ImputeStrategy strategy) {
  if (observed.rows() != a.rows() || observed.cols() != a.cols()) {
    throw std::invalid_argument("mask shape does not match matrix shape");
  }
  Imputed out;
  out.a = observed.select(a, 0.0);
  if (strategy == ImputeStrategy::kZero) {
    return out;
  }
  const bool by_row = strategy == ImputeStrategy::kRowMean;
  const Eigen::Index groups = by_row ? a.rows() : a.cols();
  for (Eigen::Index g = 0; g < groups; ++g) {
    double sum = 0.0;
    std::size_t count = 0;
    const Eigen::Index len = by_row ? a.cols() : a.rows();
    for (Eigen::Index t = 0; t < len; ++t) {
      const Eigen::Index i = by_row ? g : t;
      const Eigen::Index j = by_row ? t : g;
      if (observed(i, j)) {
        sum += a(i, j);
        ++count;
      }
    }
    if (count == 0) {
      ++out.empty_groups;
      continue;
    }
    const double fill = sum / static_cast<double>(count);
    for (Eigen::Index t = 0; t < len; ++t) {
      const Eigen::Index i = by_row ? g : t;
      const Eigen::Index j = by_row ? t : g;
      if (!observed(i, j)) {
        out.a(i, j) = fill;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trials

inline std::uint64_t trial_seed(std::uint64_t root_seed, std::size_t trial) {
  return derive_seed(root_seed, static_cast<std::uint64_t>(trial));
}

/// Averages traces recorded at identical iterations.
inline AggregateTrace aggregate(const std::vector<TrialTrace>& traces) {
  if (traces.empty()) {
    throw ConfigError("cannot aggregate zero traces");
  }
  AggregateTrace agg;
  const auto& first = traces.front().checkpoints;
  agg.checkpoints.resize(first.size());
  for (std::size_t c = 0; c < first.size(); ++c) {
    agg.checkpoints[c].iteration = first[c].iteration;
    agg.checkpoints[c].trial_count = traces.size();
  }
  for (const auto& t : traces) {
    if (t.checkpoints.size() != first.size()) {
      throw std::logic_error("traces have mismatched checkpoints");
    }
    for (std::size_t c = 0; c < first.size(); ++c) {
      if (t.checkpoints[c].iteration != first[c].iteration) {
        throw std::logic_error("traces have mismatched checkpoints");
      }
      agg.checkpoints[c].mean_sq_error += t.checkpoints[c].sq_error;
    }
  }
  for (auto& c : agg.checkpoints) {
    c.mean_sq_error /= static_cast<double>(traces.size());
  }
  agg.config_digest = traces.front().config_digest;
  return agg;
}

struct TrialSet {
  std::vector<TrialTrace> traces;
  AggregateTrace aggregate;
};

/// Runs `trial_count` independent trials; trial t uses
/// derive_seed(root_seed, t), overriding spec.seed.
inline TrialSet run_trial_set(const Problem& problem, RunSpec spec, std::size_t trial_count, std::uint64_t root_seed,
                              const std::string& config_digest = {}) {
  if (trial_count < 1) {
    throw ConfigError("trial_count must be at least 1");
  }
  TrialSet set;
  set.traces.reserve(trial_count);
  for (std::size_t t = 0; t < trial_count; ++t) {
    spec.seed = trial_seed(root_seed, t);
    set.traces.push_back(run(problem, spec));
    set.traces.back().config_digest = config_digest;
  }
  set.aggregate = aggregate(set.traces);
  return set;
}

inline AggregateTrace run_trials(const Problem& problem, const RunSpec& spec, std::size_t trial_count,
                                 std::uint64_t root_seed, const std::string& config_digest = {}) {
  return run_trial_set(problem, spec, trial_count, root_seed, config_digest).aggregate;
}

struct ImputationSpec {
  double p = 0.5;
  Schedule schedule = Schedule::fixed(1e-4);
  ProjectionDomain domain{1.0};
  std::size_t iterations = 1;
  std::size_t trial_count = 1;
  std::uint64_t root_seed = 0;
  std::size_t record_every = 1;
  /// Rows in the masked corpus: each is a uniformly drawn row of A with its
  /// own mask, fixed for the trial. 0 masks the rows of A directly.
  std::size_t corpus_rows = 0;
};

struct ImputationComparison {
  AggregateTrace msgd;
  std::map<ImputeStrategy, AggregateTrace> imputed;
  std::size_t empty_groups = 0;
};

/// Per trial: draw a masked corpus once, run classical SGD on each imputed
/// copy and the missing-data iteration on the masked rows, all with the
/// same row sequence. Errors are measured against the problem's x*.
inline ImputationComparison compare_imputation(const Problem& problem, const ImputationSpec& spec,
                                               const std::string& config_digest = {}) {
  if (!problem.x_star) {
    throw ConfigError("compare_imputation requires a problem with x_star");
  }
  if (spec.trial_count < 1) {
    throw ConfigError("trial_count must be at least 1");
  }
  const MaskModel model(spec.p, MaskMode::kFrozenMatrixMask);
  std::vector<TrialTrace> msgd_traces;
  std::map<ImputeStrategy, std::vector<TrialTrace>> imputed_traces;
  ImputationComparison out;

  for (std::size_t t = 0; t < spec.trial_count; ++t) {
    const std::uint64_t seed = trial_seed(spec.root_seed, t);
    SplitMix64 corpus_rng(derive_seed(seed, 300));

    Problem corpus;
    if (spec.corpus_rows == 0) {
      corpus.a = problem.a;
      corpus.b = problem.b;
    } else {
      const auto rows = static_cast<Eigen::Index>(spec.corpus_rows);
      corpus.a.resize(rows, problem.cols());
      corpus.b.resize(rows);
      for (Eigen::Index r = 0; r < rows; ++r) {
        const auto src = static_cast<Eigen::Index>(corpus_rng.below(static_cast<std::uint64_t>(problem.rows())));
        corpus.a.row(r) = problem.a.row(src);
        corpus.b[r] = problem.b[src];
      }
    }
    corpus.x_star = problem.x_star;
    corpus.consistent = problem.consistent;
    const MaskMatrix mask = sample_mask_matrix(corpus.a.rows(), corpus.a.cols(), spec.p, corpus_rng);

    RunSpec run_spec;
    run_spec.model = model;
    run_spec.schedule = spec.schedule;
    run_spec.domain = spec.domain;
    run_spec.iterations = spec.iterations;
    run_spec.seed = seed;
    run_spec.record_every = spec.record_every;

    RunSpec msgd_spec = run_spec;
    msgd_spec.method = Method::kMissingDataSgd;
    msgd_spec.frozen_mask = mask;
    msgd_traces.push_back(run(corpus, msgd_spec));
    msgd_traces.back().config_digest = config_digest;

    RunSpec sgd_spec = run_spec;
    sgd_spec.method = Method::kClassicalSgd;
    for (ImputeStrategy s : kImputeStrategies) {
      Imputed imp = impute(corpus.a, mask, s);
      out.empty_groups += imp.empty_groups;
      Problem filled;
      filled.a = std::move(imp.a);
      filled.b = corpus.b;
      filled.x_star = problem.x_star;
      imputed_traces[s].push_back(run(filled, sgd_spec));
      imputed_traces[s].back().config_digest = config_digest;
    }
  }
  out.msgd = aggregate(msgd_traces);
  for (auto& [s, traces] : imputed_traces) {
    out.imputed[s] = aggregate(traces);
  }
  return out;
}

}  // namespace msgd

#endif  // MSGD_EXPERIMENTS_HPP

#include "msgd/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace msgd {
namespace {

TEST(Generators, ConsistentRoundTrip) {
  const Problem p = gen_gaussian_consistent(50, 8, 1);
  EXPECT_TRUE(p.consistent);
  EXPECT_EQ(p.rows(), 50);
  EXPECT_EQ(p.cols(), 8);
  const auto sol = least_squares(p.a, p.b);
  EXPECT_LE((sol.x_star - *p.x_star).norm(), 1e-8);
  EXPECT_NO_THROW(validate_problem(p));
  EXPECT_THROW(gen_gaussian_consistent(3, 5, 1), ConfigError);
}

TEST(Generators, InconsistentKeepsMinimizer) {
  const Problem p = gen_gaussian_inconsistent(50, 8, 0.1, 2);
  EXPECT_FALSE(p.consistent);
  const auto sol = least_squares(p.a, p.b);
  EXPECT_LE((sol.x_star - *p.x_star).norm(), 1e-8);
  EXPECT_LE((sol.residual - p.residual).norm(), 1e-8);
  const Problem c = gen_gaussian_consistent(50, 8, 2);
  EXPECT_NEAR(p.residual.norm(), 0.1 * c.b.norm(), 1e-10 * c.b.norm());
  EXPECT_NO_THROW(validate_problem(p));
}

TEST(Generators, ZeroScaleIsConsistentGenerator) {
  const Problem a = gen_gaussian_inconsistent(30, 5, 0.0, 3);
  const Problem b = gen_gaussian_consistent(30, 5, 3);
  EXPECT_EQ(a.a, b.a);
  EXPECT_EQ(a.b, b.b);
  EXPECT_TRUE(a.consistent);
}

TEST(Generators, DeterministicBySeed) {
  EXPECT_EQ(gen_gaussian_consistent(10, 3, 4).a, gen_gaussian_consistent(10, 3, 4).a);
  EXPECT_NE(gen_gaussian_consistent(10, 3, 4).a, gen_gaussian_consistent(10, 3, 5).a);
}

TEST(Impute, RowMean) {
  Matrix a(1, 3);
  a << 1, 99, 3;
  MaskMatrix m(1, 3);
  m << true, false, true;
  const Imputed out = impute(a, m, ImputeStrategy::kRowMean);
  EXPECT_EQ(out.a(0, 0), 1.0);
  EXPECT_EQ(out.a(0, 1), 2.0);
  EXPECT_EQ(out.a(0, 2), 3.0);
  EXPECT_EQ(out.empty_groups, 0U);
}

TEST(Impute, ColMean) {
  Matrix a(3, 1);
  a << 2, 7, 6;
  MaskMatrix m(3, 1);
  m << true, false, true;
  EXPECT_EQ(impute(a, m, ImputeStrategy::kColMean).a(1, 0), 4.0);
}

TEST(Impute, FullyObservedUnchanged) {
  const Problem p = gen_gaussian_consistent(6, 3, 5);
  const MaskMatrix all = MaskMatrix::Constant(6, 3, true);
  for (ImputeStrategy s : kImputeStrategies) {
    EXPECT_EQ(impute(p.a, all, s).a, p.a) << to_string(s);
  }
}

TEST(Impute, ZeroIsMaskedMatrix) {
  const Problem p = gen_gaussian_consistent(6, 3, 6);
  SplitMix64 rng(1);
  const MaskMatrix m = sample_mask_matrix(6, 3, 0.5, rng);
  const Imputed out = impute(p.a, m, ImputeStrategy::kZero);
  for (Eigen::Index i = 0; i < 6; ++i) {
    EXPECT_EQ(out.a.row(i).transpose(), apply_mask(p.a, i, m.row(i).transpose()).values);
  }
}

TEST(Impute, EmptyGroupsCountedAndZeroFilled) {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  MaskMatrix m(2, 2);
  m << false, false, true, false;
  const Imputed rows = impute(a, m, ImputeStrategy::kRowMean);
  EXPECT_EQ(rows.empty_groups, 1U);
  EXPECT_EQ(rows.a(0, 0), 0.0);
  EXPECT_EQ(rows.a(1, 1), 3.0);
  const Imputed cols = impute(a, m, ImputeStrategy::kColMean);
  EXPECT_EQ(cols.empty_groups, 1U);
  EXPECT_EQ(cols.a(0, 0), 3.0);
  EXPECT_EQ(cols.a(1, 1), 0.0);
  EXPECT_THROW(impute(a, MaskMatrix::Constant(1, 2, true), ImputeStrategy::kZero), std::invalid_argument);
}

RunSpec fixed_spec(const Problem& p, double prob, double alpha, std::size_t iterations, std::size_t every) {
  RunSpec spec;
  spec.model = MaskModel(prob);
  spec.schedule = Schedule::fixed(alpha);
  spec.domain = ProjectionDomain(10.0 * p.x_star->norm());
  spec.iterations = iterations;
  spec.record_every = every;
  return spec;
}

TEST(RunTrials, SingleTrialEqualsTrace) {
  const Problem p = gen_gaussian_consistent(40, 5, 7);
  RunSpec spec = fixed_spec(p, 0.7, 1e-3, 2000, 100);
  const AggregateTrace agg = run_trials(p, spec, 1, 42);
  spec.seed = trial_seed(42, 0);
  const TrialTrace single = run(p, spec);
  ASSERT_EQ(agg.checkpoints.size(), single.checkpoints.size());
  for (std::size_t k = 0; k < single.checkpoints.size(); ++k) {
    EXPECT_EQ(agg.checkpoints[k].iteration, single.checkpoints[k].iteration);
    EXPECT_EQ(agg.checkpoints[k].mean_sq_error, single.checkpoints[k].sq_error);
    EXPECT_EQ(agg.checkpoints[k].trial_count, 1U);
  }
}

TEST(RunTrials, Deterministic) {
  const Problem p = gen_gaussian_consistent(40, 5, 8);
  const RunSpec spec = fixed_spec(p, 0.5, 1e-3, 1000, 50);
  const AggregateTrace a = run_trials(p, spec, 3, 9);
  const AggregateTrace b = run_trials(p, spec, 3, 9);
  ASSERT_EQ(a.checkpoints.size(), b.checkpoints.size());
  for (std::size_t k = 0; k < a.checkpoints.size(); ++k) {
    EXPECT_EQ(a.checkpoints[k].mean_sq_error, b.checkpoints[k].mean_sq_error);
  }
  EXPECT_THROW(run_trials(p, spec, 0, 9), ConfigError);
}

TEST(RunTrials, AddingTrialsKeepsEarlierSeeds) {
  const Problem p = gen_gaussian_consistent(40, 5, 8);
  const RunSpec spec = fixed_spec(p, 0.5, 1e-3, 500, 50);
  const TrialSet two = run_trial_set(p, spec, 2, 3);
  const TrialSet three = run_trial_set(p, spec, 3, 3);
  EXPECT_EQ(two.traces[1].final_sq_error(), three.traces[1].final_sq_error());
}

TEST(RunTrials, DeskConvergence) {
  const Problem p = gen_gaussian_consistent(kDeskSize.m, kDeskSize.n, 10);
  const AggregateTrace agg = run_trials(p, fixed_spec(p, 1.0, 1e-4, 100000, 10000), 2, 11);
  EXPECT_LT(agg.final_mean(), 1e-3 * agg.checkpoints.front().mean_sq_error);
}

TEST(RunTrials, InconsistentPlateauAboveConsistent) {
  const Problem c = gen_gaussian_consistent(50, 5, 14);
  const Problem i = gen_gaussian_inconsistent(50, 5, 0.1, 14);
  const AggregateTrace tc = run_trials(c, fixed_spec(c, 1.0, 1e-3, 50000, 5000), 5, 1);
  const AggregateTrace ti = run_trials(i, fixed_spec(i, 1.0, 1e-3, 50000, 5000), 5, 1);
  EXPECT_GT(ti.final_mean(), 10.0 * tc.final_mean());
}

TEST(RunTrials, CsvFormat) {
  AggregateTrace t;
  t.checkpoints = {{0, 2.5, 3}, {10, 0.125, 3}};
  std::ostringstream os;
  write_csv(os, t);
  EXPECT_EQ(os.str(), "iteration,mean_sq_error,trial_count\n0,2.5,3\n10,0.125,3\n");
}

ImputationSpec imputation_spec(const Problem& p, double prob) {
  ImputationSpec s;
  s.p = prob;
  s.schedule = Schedule::fixed(1e-3);
  s.domain = ProjectionDomain(10.0 * p.x_star->norm());
  s.iterations = 3000;
  s.trial_count = 2;
  s.root_seed = 5;
  s.record_every = 500;
  return s;
}

TEST(CompareImputation, FullObservationTracesCoincide) {
  const Problem p = gen_gaussian_consistent(40, 5, 12);
  for (std::size_t corpus : {std::size_t{0}, std::size_t{100}}) {
    ImputationSpec s = imputation_spec(p, 1.0);
    s.corpus_rows = corpus;
    const ImputationComparison c = compare_imputation(p, s);
    ASSERT_EQ(c.imputed.size(), 3U);
    for (const auto& [strategy, trace] : c.imputed) {
      ASSERT_EQ(trace.checkpoints.size(), c.msgd.checkpoints.size());
      for (std::size_t k = 0; k < trace.checkpoints.size(); ++k) {
        EXPECT_NEAR(trace.checkpoints[k].mean_sq_error, c.msgd.checkpoints[k].mean_sq_error, 1e-10)
            << to_string(strategy);
      }
    }
    EXPECT_EQ(c.empty_groups, 0U);
  }
}

TEST(CompareImputation, Deterministic) {
  const Problem p = gen_gaussian_consistent(40, 5, 13);
  ImputationSpec s = imputation_spec(p, 0.5);
  s.corpus_rows = 200;
  const ImputationComparison a = compare_imputation(p, s);
  const ImputationComparison b = compare_imputation(p, s);
  EXPECT_EQ(a.msgd.final_mean(), b.msgd.final_mean());
  for (ImputeStrategy st : kImputeStrategies) {
    EXPECT_EQ(a.imputed.at(st).final_mean(), b.imputed.at(st).final_mean());
  }
}

}  // namespace
}  // namespace msgd

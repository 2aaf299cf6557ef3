#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "pairpref/errors.hpp"
#include "pairpref/normal.hpp"
#include "pairpref/session.hpp"

namespace pairpref {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Cheap sampler settings for tests that exercise control flow only.
EngineConfig fast_config(Index dims, std::size_t max_steps) {
  EngineConfig cfg = EngineConfig::for_dims(dims);
  cfg.mh.m_samples = 200;
  cfg.mh.burn_in = 50;
  cfg.mi.m_outer = 32;
  cfg.mi.m_inner = 8;
  cfg.mi.n_candidates = 4;
  cfg.stop.max_steps = max_steps;
  return cfg;
}

double history_mi_sum(const SessionState& s) {
  double sum = 0.0;
  for (const auto& h : s.history) sum += h.designed ? h.mi_bits : 0.0;
  return sum + (s.current_trial && s.current_designed ? s.current_mi : 0.0);
}

TEST(InitSession, FreshState) {
  Rng rng(1);
  const SessionState s = init_session(standard_prior(3), rng);
  EXPECT_EQ(s.step, 0u);
  EXPECT_EQ(s.trial_index(), 1u);
  EXPECT_TRUE(s.history.empty());
  ASSERT_TRUE(s.current_trial.has_value());
  EXPECT_FALSE(s.current_designed);
  EXPECT_EQ(s.current_mi, 0.0);
  EXPECT_EQ(s.rsu_sum, 0.0);
  EXPECT_EQ(s.status, SessionStatus::kAwaitingResponse);
}

TEST(InitSession, ProposalsInsideClampedBox) {
  const double lo = normal_quantile(0.01);
  const double hi = normal_quantile(0.99);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const SessionState s = init_session(standard_prior(4), rng);
    for (const Vector* x : {&s.current_trial->x_ref, &s.current_trial->x_alt}) {
      EXPECT_GE(x->minCoeff(), lo);
      EXPECT_LE(x->maxCoeff(), hi);
    }
  }
}

TEST(InitSession, DeterministicUnderSeed) {
  Rng a(3);
  Rng b(3);
  const SessionState x = init_session(standard_prior(2), a);
  const SessionState y = init_session(standard_prior(2), b);
  EXPECT_EQ(x.current_trial->x_ref, y.current_trial->x_ref);
  EXPECT_EQ(x.current_trial->x_alt, y.current_trial->x_alt);
}

TEST(SubmitResponse, GrowsHistoryAndConservesRsuSum) {
  const EngineConfig cfg = fast_config(2, 8);
  Rng rng(5);
  SessionState s = init_session(cfg.prior, rng);
  std::bernoulli_distribution coin(0.5);
  std::size_t expected_len = 0;
  while (!s.terminal()) {
    const Trial pending = *s.current_trial;
    s = submit_response(std::move(s), coin(rng) ? Response::kAlternative : Response::kReference,
                        cfg, rng);
    ++expected_len;
    ASSERT_EQ(s.history.size(), expected_len);
    EXPECT_EQ(s.step, expected_len);
    EXPECT_EQ(s.history.back().trial.x_ref, pending.x_ref);
    EXPECT_EQ(s.history.back().trial.x_alt, pending.x_alt);
    EXPECT_NEAR(s.rsu_sum, history_mi_sum(s), 1e-9);
    if (s.current_trial) {
      // Winner of the answered trial is the new reference.
      EXPECT_EQ(s.current_trial->x_ref,
                next_reference(pending, s.history.back().response));
    }
  }
  EXPECT_EQ(s.step, 8u);
  EXPECT_EQ(s.status, SessionStatus::kMaxStepsReached);
  EXPECT_FALSE(s.current_trial.has_value());
  EXPECT_EQ(s.designed_trials, 7u);
  EXPECT_NEAR(rsu(s) * 7.0, s.rsu_sum, 1e-12);
}

TEST(SubmitResponse, TerminalStatesAbsorb) {
  const EngineConfig cfg = fast_config(1, 1);
  Rng rng(7);
  SessionState s = init_session(cfg.prior, rng);
  s = submit_response(std::move(s), Response::kAlternative, cfg, rng);
  ASSERT_TRUE(s.terminal());
  const SessionState frozen = s;
  EXPECT_THROW(submit_response(s, Response::kReference, cfg, rng), InvalidState);
  EXPECT_EQ(s.step, frozen.step);
  EXPECT_EQ(s.belief.mean, frozen.belief.mean);
}

TEST(SubmitResponse, ConvergesUnderGuard) {
  EngineConfig cfg = fast_config(2, 30);
  cfg.stop.delta = 0.5;
  cfg.stop.guard = StopGuard::kScaled;  // threshold 2 * 0.5 = 1 bit at step 2
  Rng rng(9);
  SessionState s = init_session(cfg.prior, rng);
  s = submit_response(std::move(s), Response::kAlternative, cfg, rng);
  EXPECT_EQ(s.status, SessionStatus::kAwaitingResponse);  // undesigned trial never stops
  s = submit_response(std::move(s), Response::kAlternative, cfg, rng);
  EXPECT_EQ(s.status, SessionStatus::kConverged);
  EXPECT_EQ(s.step, 2u);

  cfg.stop.delta = 1e-9;
  cfg.stop.guard = StopGuard::kPlain;
  cfg.stop.max_steps = 3;
  Rng rng2(9);
  SessionState p = init_session(cfg.prior, rng2);
  for (int i = 0; i < 3; ++i) p = submit_response(std::move(p), Response::kReference, cfg, rng2);
  EXPECT_EQ(p.status, SessionStatus::kMaxStepsReached);
}

TEST(SubmitResponse, FullHistoryModeRuns) {
  EngineConfig cfg = fast_config(2, 4);
  cfg.update_mode = UpdateMode::kFullHistory;
  Rng rng(11);
  SessionState s = init_session(cfg.prior, rng);
  while (!s.terminal()) s = submit_response(std::move(s), Response::kAlternative, cfg, rng);
  EXPECT_EQ(s.step, 4u);
  EXPECT_NO_THROW(s.belief.validate());
}

TEST(ShouldStop, GuardArithmetic) {
  StoppingRule stop{0.01, 30, StopGuard::kScaled};
  EXPECT_TRUE(should_stop(0.0, 1, stop));
  EXPECT_TRUE(should_stop(0.0, 17, StoppingRule{0.0, 30, StopGuard::kScaled}));
  EXPECT_TRUE(should_stop(0.05, 10, stop));
  EXPECT_FALSE(should_stop(0.05, 4, stop));
  stop.guard = StopGuard::kPlain;
  EXPECT_FALSE(should_stop(0.05, 10, stop));
  EXPECT_TRUE(should_stop(0.005, 10, stop));
  const StoppingRule zero{0.0, 30, StopGuard::kScaled};
  EXPECT_FALSE(should_stop(1e-6, 29, zero));
  EXPECT_TRUE(should_stop(1e-6, 30, zero));
  EXPECT_FALSE(should_stop(std::numeric_limits<double>::infinity(), 1, zero));
}

TEST(StoppingRule, Validation) {
  EXPECT_NO_THROW((StoppingRule{0.0, 1, StopGuard::kScaled}.validate()));
  EXPECT_THROW((StoppingRule{-0.1, 5, StopGuard::kScaled}.validate()), DomainError);
  EXPECT_THROW((StoppingRule{0.1, 0, StopGuard::kScaled}.validate()), DomainError);
}

TEST(Estimate, MeanOnlyAndInsideUnitBox) {
  SessionState s;
  s.belief = standard_prior(2);
  EXPECT_THROW(estimate(s), InvalidState);
  s.step = 1;
  EXPECT_EQ(estimate(s).theta, vec({0.5, 0.5}));
  s.belief.cov *= 7.0;
  EXPECT_EQ(estimate(s).theta, vec({0.5, 0.5}));
  s.belief.mean = vec({5.0, -5.0, 0.3, 0.1});
  const Vector th = estimate(s).theta;
  EXPECT_GT(th.minCoeff(), 0.0);
  EXPECT_LT(th.maxCoeff(), 1.0);
}

TEST(Rsu, Arithmetic) {
  SessionState s;
  EXPECT_THROW(rsu(s), InvalidState);
  s.rsu_sum = 1.0 + 0.5;
  s.designed_trials = 2;
  EXPECT_DOUBLE_EQ(rsu(s), 0.75);
  s.rsu_sum = 0.3;
  s.designed_trials = 1;
  EXPECT_DOUBLE_EQ(rsu(s), 0.3);
}

TEST(Rmse, Definition) {
  EXPECT_EQ(rmse(vec({0.2, 0.7}), vec({0.2, 0.7})), 0.0);
  EXPECT_NEAR(rmse(vec({0.6, 0.3}), vec({0.5, 0.3})), std::sqrt(0.005), 1e-15);
  EXPECT_NEAR(rmse(vec({0.6, 0.1, 0.9}), vec({0.5, 0.3, 0.4})),
              rmse(vec({0.9, 0.6, 0.1}), vec({0.4, 0.5, 0.3})), 1e-15);
  EXPECT_THROW(rmse(vec({0.1}), vec({0.1, 0.2})), DimensionMismatch);
}

TEST(DrawTruth, Ranges) {
  Rng rng(13);
  for (int k = 0; k < 500; ++k) {
    const UserParams u = draw_truth(3, rng);
    EXPECT_GE(u.theta.minCoeff(), 0.1);
    EXPECT_LE(u.theta.maxCoeff(), 0.9);
    EXPECT_GE(u.lambda.minCoeff(), std::exp(-1.0));
    EXPECT_LE(u.lambda.maxCoeff(), std::exp(1.0));
  }
}

TEST(Quantile, InterpolatesAndBands) {
  EXPECT_TRUE(std::isnan(quantile({}, 0.5)));
  EXPECT_EQ(quantile({3.0, 1.0, 2.0}, 0.5), 2.0);
  EXPECT_EQ(quantile({1.0, 2.0, 3.0, 4.0}, 0.5), 2.5);
  EXPECT_EQ(quantile({1.0, 2.0}, 0.0), 1.0);
  EXPECT_EQ(quantile({1.0, 2.0}, 1.0), 2.0);
  std::vector<double> v(101);
  std::iota(v.begin(), v.end(), 0.0);
  const BandStats b = band(v);
  EXPECT_EQ(b.median, 50.0);
  EXPECT_NEAR(b.lo, 100.0 * normal_cdf(-1.0), 1e-9);
  EXPECT_NEAR(b.hi, 100.0 * normal_cdf(1.0), 1e-9);
}

TEST(RunSimulation, ReplaysBitIdenticallyForThirtySteps) {
  const EngineConfig cfg = EngineConfig::for_dims(2);
  const UserParams truth{vec({0.3, 0.7}), vec({1.5, 0.6})};
  const RunRecord a = run_simulation(truth, cfg, 2024);
  const RunRecord b = run_simulation(truth, cfg, 2024);
  ASSERT_EQ(a.rows.size(), 30u);
  ASSERT_EQ(b.rows.size(), 30u);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].step, i + 1);
    EXPECT_EQ(a.rows[i].trial.x_ref, b.rows[i].trial.x_ref);
    EXPECT_EQ(a.rows[i].trial.x_alt, b.rows[i].trial.x_alt);
    EXPECT_EQ(a.rows[i].response, b.rows[i].response);
    EXPECT_EQ(a.rows[i].mean, b.rows[i].mean);
    EXPECT_EQ(std::isnan(a.rows[i].rsu), std::isnan(b.rows[i].rsu));
    if (!std::isnan(a.rows[i].rsu)) EXPECT_EQ(a.rows[i].rsu, b.rows[i].rsu);
  }
  EXPECT_EQ(a.estimate.theta, b.estimate.theta);
  EXPECT_EQ(a.status, SessionStatus::kMaxStepsReached);
  EXPECT_FALSE(a.rows[0].designed);
  EXPECT_TRUE(std::isnan(a.rows[0].rsu));
  double sum = 0.0;
  for (std::size_t i = 1; i < a.rows.size(); ++i) sum += a.rows[i].mi_bits;
  EXPECT_NEAR(a.final_rsu, sum / 29.0, 1e-12);
}

TEST(RunSimulation, CentredTruthIsUnbiasedAfterOneStep) {
  const EngineConfig base = EngineConfig::for_dims(2);
  EngineConfig cfg = base;
  cfg.stop.max_steps = 1;
  const UserParams truth{vec({0.5, 0.5}), vec({1.0, 1.0})};
  std::vector<double> first, second;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const RunRecord r = run_simulation(truth, cfg, derive_seed(77, seed));
    ASSERT_EQ(r.rows.size(), 1u);
    first.push_back(r.rows[0].theta_post[0]);
    second.push_back(r.rows[0].theta_post[1]);
  }
  EXPECT_NEAR(quantile(first, 0.5), 0.5, 0.1);
  EXPECT_NEAR(quantile(second, 0.5), 0.5, 0.1);
}

TEST(RunSimulation, ThirtyStepsImproveOnFirstStepInMostRuns) {
  const EngineConfig cfg = EngineConfig::for_dims(2);
  Rng truths(derive_seed(8, 0));
  int improved = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const UserParams truth = draw_truth(2, truths);
    const RunRecord r = run_simulation(truth, cfg, derive_seed(8, i + 1));
    improved += r.rows.back().rmse_post < r.rows.front().rmse_post;
  }
  EXPECT_GE(improved, 8);
}

TEST(Benchmark, SingleRunReducesToItsColumns) {
  const EngineConfig cfg = fast_config(2, 5);
  const BenchmarkResult res = benchmark(1, cfg, 3);
  ASSERT_EQ(res.runs.size(), 1u);
  ASSERT_EQ(res.table.size(), 5u);
  const RunRecord& run = res.runs[0];
  for (std::size_t i = 0; i < 5; ++i) {
    const BenchmarkRow& row = res.table[i];
    EXPECT_EQ(row.step, i + 1);
    EXPECT_EQ(row.runs, 1u);
    EXPECT_EQ(row.rmse.median, run.rows[i].rmse_post);
    EXPECT_EQ(row.rmse.lo, run.rows[i].rmse_post);
    EXPECT_EQ(row.rmse.hi, run.rows[i].rmse_post);
    if (run.rows[i].designed) {
      EXPECT_EQ(row.mi_runs, 1u);
      EXPECT_EQ(row.mi.median, run.rows[i].mi_bits);
      EXPECT_EQ(row.rsu.median, run.rows[i].rsu);
    } else {
      EXPECT_EQ(row.mi_runs, 0u);
      EXPECT_TRUE(std::isnan(row.mi.median));
    }
  }
}

TEST(Benchmark, RowCountAndReproducibility) {
  const EngineConfig cfg = fast_config(2, 6);
  const BenchmarkResult a = benchmark(3, cfg, 21);
  const BenchmarkResult b = benchmark(3, cfg, 21);
  ASSERT_EQ(a.table.size(), 6u);
  for (std::size_t i = 0; i < a.table.size(); ++i) {
    EXPECT_EQ(a.table[i].runs, 3u);
    EXPECT_EQ(a.table[i].rmse.median, b.table[i].rmse.median);
    // Step 1 is undesigned, so its MI band is NaN in both results.
    const double ha = a.table[i].mi.hi, hb = b.table[i].mi.hi;
    EXPECT_TRUE(ha == hb || (std::isnan(ha) && std::isnan(hb))) << "step " << i + 1;
  }
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(a.truths[r].theta, b.truths[r].theta);
  EXPECT_THROW(benchmark(0, cfg, 1), DomainError);
}

}  // namespace
}  // namespace pairpref

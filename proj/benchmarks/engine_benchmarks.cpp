#include <benchmark/benchmark.h>

#include "pairpref/acquisition.hpp"
#include "pairpref/inference.hpp"
#include "pairpref/normal.hpp"
#include "pairpref/session.hpp"

namespace {

using namespace pairpref;

// A belief that has absorbed a few responses, so blocks are correlated.
GaussianBelief warm_belief(Index dims) {
  EngineConfig cfg = EngineConfig::for_dims(dims);
  cfg.stop.max_steps = 6;
  Rng truth_rng(derive_seed(99, 0));
  const UserParams truth = draw_truth(dims, truth_rng);
  Rng agent(derive_seed(99, 1));
  Rng user(derive_seed(99, 2));
  const TransformedParams phi = to_transformed(truth);
  SessionState s = init_session(cfg.prior, agent);
  for (int i = 0; i < 4; ++i) {
    s = submit_response(std::move(s), sample_response(*s.current_trial, phi, user), cfg,
                        agent);
  }
  return s.belief;
}

void BM_NormalCdf(benchmark::State& state) {
  double z = -4.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(normal_cdf(z));
    z = z > 4.0 ? -4.0 : z + 1e-3;
  }
}
BENCHMARK(BM_NormalCdf);

void BM_NormalQuantile(benchmark::State& state) {
  double p = 1e-6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(normal_quantile(p));
    p = p > 0.999 ? 1e-6 : p + 1e-4;
  }
}
BENCHMARK(BM_NormalQuantile);

void BM_MutualInformation(benchmark::State& state) {
  const Index dims = state.range(0);
  const GaussianBelief belief = warm_belief(dims);
  const MiConfig cfg;
  Rng rng(1);
  const Trial t{generate_alternative(belief, rng), generate_alternative(belief, rng)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(mutual_information(t, belief, cfg, rng));
  }
}
BENCHMARK(BM_MutualInformation)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);

void BM_DesignTrial(benchmark::State& state) {
  const GaussianBelief belief = warm_belief(2);
  const MiConfig cfg;
  Rng rng(2);
  const Trial prev{generate_alternative(belief, rng), generate_alternative(belief, rng)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(design_trial(belief, prev, Response::kAlternative, cfg, rng));
  }
}
BENCHMARK(BM_DesignTrial)->Unit(benchmark::kMillisecond);

void BM_AdfUpdate(benchmark::State& state) {
  const GaussianBelief belief = warm_belief(2);
  const MhConfig cfg;
  Rng rng(3);
  const Trial t{generate_alternative(belief, rng), generate_alternative(belief, rng)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(update(belief, t, Response::kReference, cfg, rng));
  }
}
BENCHMARK(BM_AdfUpdate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <random>

#include "catbox/bench.hpp"
#include "catbox/gp.hpp"
#include "catbox/optimizer.hpp"

using namespace catbox;

namespace {

// Ackley over 2 categorical (5 levels) and 2 continuous variables.
const bench::MixedObjective& objective() {
  static const bench::MixedObjective obj = bench::mixed_wrap({bench::FnKind::Ackley, 4}, 2, 5, 2);
  return obj;
}

std::vector<Observation> observations(std::size_t n) {
  std::mt19937_64 rng(1);
  std::vector<Observation> obs;
  for (std::size_t i = 0; i < n; ++i) {
    MixedPoint p = sample_point(objective().space, rng);
    obs.push_back({p, objective()(p)});
  }
  return obs;
}

KernelParams start_params(const std::vector<Observation>& obs) {
  Rng rng(3);
  return initial_params(objective().space, make_training_set(objective().space, obs), KernelConfig{}, rng);
}

void BM_Gram(benchmark::State& state) {
  auto obs = observations(static_cast<std::size_t>(state.range(0)));
  TrainingSet train = make_training_set(objective().space, obs);
  KernelParams p = start_params(obs);
  for (auto _ : state) benchmark::DoNotOptimize(gram(p, train.points, 0.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gram)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oNSquared);

void BM_Fit(benchmark::State& state) {
  auto obs = observations(static_cast<std::size_t>(state.range(0)));
  KernelParams p = start_params(obs);
  for (auto _ : state) benchmark::DoNotOptimize(fit(objective().space, obs, p));
}
BENCHMARK(BM_Fit)->RangeMultiplier(2)->Range(16, 256);

void BM_MllWithGrad(benchmark::State& state) {
  auto obs = observations(static_cast<std::size_t>(state.range(0)));
  TrainingSet train = make_training_set(objective().space, obs);
  KernelParams p = start_params(obs);
  HyperLayout layout(p);
  for (auto _ : state) benchmark::DoNotOptimize(mll_with_grad(train, p, layout));
}
BENCHMARK(BM_MllWithGrad)->RangeMultiplier(2)->Range(16, 128);

void BM_Suggest(benchmark::State& state) {
  CampaignConfig cfg;
  cfg.suggest.n_init = static_cast<int>(state.range(0));
  Campaign base(objective().space, cfg);
  while (!base.pending_initial().empty()) {
    const MixedPoint p = base.pending_initial().front();
    base.tell(p, objective()(p));
  }
  for (auto _ : state) {
    state.PauseTiming();
    Campaign c = base;
    state.ResumeTiming();
    benchmark::DoNotOptimize(c.suggest());
  }
}
BENCHMARK(BM_Suggest)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

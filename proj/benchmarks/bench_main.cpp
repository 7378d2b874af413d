// Copyright 2026 The DuetFair Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <vector>

#include "duetfair/duetfair.hpp"

namespace {

using namespace duetfair;

std::vector<double> losses(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> l(n);
  for (double& x : l) x = rng.uniform();
  return l;
}

void BM_SolveRobustRisk(benchmark::State& state) {
  const auto l = losses(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_robust_risk(l, 0.3));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveRobustRisk)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_BruteForcePrimal(benchmark::State& state) {
  const auto l = losses(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_primal(l, 0.3));
}
BENCHMARK(BM_BruteForcePrimal)->DenseRange(2, 6, 2)->Unit(benchmark::kMillisecond);

void BM_LossAndGrad(benchmark::State& state) {
  const Cohort cohort = generate_cohort(SynthConfig::benchmark(0));
  ModelConfig mc = model_config_for(cohort);
  mc.use_dmoe = state.range(0) != 0;
  const ModelParams params = ModelParams::initialize(mc, 0);
  const std::span<const Sample> batch(cohort.samples.data(), 64);
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad(batch, params, mc));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_LossAndGrad)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_AggregateObjective(benchmark::State& state) {
  const Cohort cohort = generate_cohort(SynthConfig::benchmark(0));
  const auto partition = build_partition(cohort);
  const LossVector l(losses(cohort.samples.size(), 3));
  ObjectiveConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(aggregate_objective(l, partition, cfg));
}
BENCHMARK(BM_AggregateObjective);

void BM_Bootstrap(benchmark::State& state) {
  const auto values = losses(500, 4);
  std::vector<SubgroupId> groups(values.size());
  for (std::size_t i = 0; i < groups.size(); ++i) groups[i] = SubgroupId{static_cast<std::uint32_t>(i % 4)};
  BootstrapConfig cfg;
  const auto stat = state.range(0) == 0 ? Statistic::kMean : Statistic::kEquityScaled;
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_ci(values, groups, stat, cfg));
}
BENCHMARK(BM_Bootstrap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

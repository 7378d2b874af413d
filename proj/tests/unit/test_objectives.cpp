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

#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "duetfair/objectives.hpp"
#include "duetfair/rng.hpp"
#include "test_support.hpp"

using namespace duetfair;

namespace {

GroupPartition partition_of(const std::vector<std::uint32_t>& groups, std::size_t G) {
  std::vector<Sample> batch(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    batch[i].group = SubgroupId{groups[i]};
    batch[i].sample_id = static_cast<std::int64_t>(i);
  }
  return partition_batch(batch, G);
}

ObjectiveConfig config_for(ObjectiveVariant v, double rho = 0.1) {
  ObjectiveConfig c;
  c.variant = v;
  c.robustness.default_rho = rho;
  return c;
}

double sum_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("parse_variant") {
  CHECK(parse_variant("erm") == ObjectiveVariant::kErm);
  CHECK(parse_variant("FairDRO") == ObjectiveVariant::kFairDro);
  CHECK(parse_variant("GROUPDRO") == ObjectiveVariant::kGroupDro);
  CHECK(parse_variant("fairdro_penalty") == ObjectiveVariant::kFairDroPenalty);
  CHECK(parse_variant(to_string(ObjectiveVariant::kFairDroPenalty)) ==
        ObjectiveVariant::kFairDroPenalty);
  CHECK_THROWS_AS(parse_variant("cvar"), Error);
}

TEST_CASE("subgroup_risks") {
  const auto p = partition_of({0, 0, 1}, 2);
  const auto r = subgroup_risks(LossVector({0.2, 0.4, 0.6}), p);
  CHECK(r[0] == doctest::Approx(0.3));
  CHECK(r[1] == doctest::Approx(0.6));
  CHECK(subgroup_risks(LossVector({0.2, 0.4, 0.9}), partition_of({0, 0, 0}, 1))[0] ==
        doctest::Approx(0.5));
  CHECK(subgroup_risks(LossVector({0.0, 0.0, 0.0}), p) == std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(subgroup_risks(LossVector({0.1, 0.2}), partition_of({0, 0}, 2)), Error);
  CHECK_THROWS_AS(subgroup_risks(LossVector({0.1}), p), Error);
}

TEST_CASE("aggregate_objective examples") {
  const auto p = partition_of({0, 0, 1}, 2);
  const LossVector l({0.2, 0.8, 0.5});

  SUBCASE("ERM") {
    const auto ev = aggregate_objective(l, p, config_for(ObjectiveVariant::kErm));
    CHECK(ev.value == doctest::Approx(0.5));
    for (double c : ev.per_sample_weights) CHECK(c == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("FAIRDRO two groups") {
    const auto ev = aggregate_objective(l, p, config_for(ObjectiveVariant::kFairDro, 0.1));
    // 0.5 * 0.631876775696845839 + 0.5 * 0.5, from the two-point oracle.
    const double q2 = testing::two_point_worst_weight(0.1);
    const double expected = 0.5 * (0.2 * (1 - q2) + 0.8 * q2) + 0.25;
    CHECK(expected == doctest::Approx(0.5659383878484229).epsilon(1e-12));
    CHECK(std::abs(ev.value - expected) <= 1e-10);
    CHECK(std::abs(ev.per_sample_weights[0] - 0.5 * (1 - q2)) <= 1e-8);
    CHECK(std::abs(ev.per_sample_weights[1] - 0.5 * q2) <= 1e-8);
    CHECK(ev.per_sample_weights[2] == doctest::Approx(0.5));
    CHECK(std::abs(sum_of(ev.per_sample_weights) - 1.0) <= 1e-10);
  }
  SUBCASE("GROUPDRO") {
    const auto p2 = partition_of({0, 0, 1, 1}, 2);
    const auto ev =
        aggregate_objective(LossVector({0.2, 0.4, 0.5, 0.7}), p2, config_for(ObjectiveVariant::kGroupDro));
    CHECK(ev.value == doctest::Approx(0.6));
    CHECK(ev.active_group == SubgroupId{1});
    CHECK(ev.per_sample_weights == std::vector<double>{0.0, 0.0, 0.5, 0.5});
  }
  SUBCASE("GROUPDRO tie goes to the lowest id") {
    const auto p2 = partition_of({1, 0, 1, 0}, 2);
    const auto ev =
        aggregate_objective(LossVector({0.3, 0.1, 0.3, 0.5}), p2, config_for(ObjectiveVariant::kGroupDro));
    CHECK(ev.active_group == SubgroupId{0});
    CHECK(ev.per_sample_weights == std::vector<double>{0.0, 0.5, 0.0, 0.5});
  }
  SUBCASE("penalty") {
    auto cfg = config_for(ObjectiveVariant::kFairDroPenalty, 0.1);
    cfg.lambda_rob = 2.0;
    const auto ev = aggregate_objective(l, p, cfg);
    const double q2 = testing::two_point_worst_weight(0.1);
    const double robust0 = 0.2 * (1 - q2) + 0.8 * q2;  // above group 1's 0.5
    CHECK(ev.active_group == SubgroupId{0});
    CHECK(std::abs(ev.value - (0.5 + 2.0 * robust0)) <= 1e-9);
    CHECK(std::abs(ev.per_sample_weights[1] - (1.0 / 3.0 + 2.0 * q2)) <= 1e-7);
    CHECK(ev.per_sample_weights[2] == doctest::Approx(1.0 / 3.0));

    cfg.lambda_rob = 0.0;
    const auto off = aggregate_objective(l, p, cfg);
    const auto erm = aggregate_objective(l, p, config_for(ObjectiveVariant::kErm));
    CHECK(off.value == erm.value);
    CHECK(off.per_sample_weights == erm.per_sample_weights);
  }
  CHECK_THROWS_AS(aggregate_objective(LossVector({0.1}), p, config_for(ObjectiveVariant::kErm)),
                  Error);
}

TEST_CASE("aggregation weights") {
  const auto p = partition_of({0, 2, 2, 0, 2}, 3);  // group 1 empty
  AggregationWeights uniform;
  CHECK(uniform.resolve(p) == std::vector<double>{0.5, 0.0, 0.5});
  AggregationWeights freq{AggregationMode::kFrequency, {}};
  CHECK(freq.resolve(p) == std::vector<double>{0.4, 0.0, 0.6});
  AggregationWeights expl{AggregationMode::kExplicit, {0.2, 0.5, 0.3}};
  const auto w = expl.resolve(p);
  CHECK(w[0] == doctest::Approx(0.4));
  CHECK(w[2] == doctest::Approx(0.6));
  AggregationWeights bad{AggregationMode::kExplicit, {0.2, 0.5, 0.4}};
  CHECK_THROWS_AS(bad.resolve(p), Error);
  AggregationWeights only_empty{AggregationMode::kExplicit, {0.0, 1.0, 0.0}};
  CHECK_THROWS_AS(only_empty.resolve(p), Error);
}

TEST_CASE("objective config validation") {
  ObjectiveConfig c;
  c.lambda_rob = -1.0;
  CHECK_THROWS_AS(c.validate(2), Error);
  c.lambda_rob = 1.0;
  c.aggregation = {AggregationMode::kExplicit, {1.0}};
  CHECK_THROWS_AS(c.validate(2), Error);
  c.aggregation = {AggregationMode::kExplicit, {0.25, 0.75}};
  CHECK_NOTHROW(c.validate(2));
}

TEST_CASE("objective properties over random instances") {
  Rng rng(404);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t G = 2 + rng.below(4);
    const std::size_t n = G + rng.below(30);
    std::vector<std::uint32_t> groups(n);
    for (std::size_t i = 0; i < n; ++i) {
      groups[i] = static_cast<std::uint32_t>(i < G ? i : rng.below(G));
    }
    const auto p = partition_of(groups, G);
    std::vector<double> raw(n);
    for (double& x : raw) x = rng.uniform(0.0, 2.0);
    const LossVector l(raw);

    const auto erm = aggregate_objective(l, p, config_for(ObjectiveVariant::kErm));
    const auto gdro = aggregate_objective(l, p, config_for(ObjectiveVariant::kGroupDro));
    CHECK(gdro.value >= erm.value - 1e-15);

    auto zero = config_for(ObjectiveVariant::kFairDro, 0.0);
    zero.aggregation.mode = AggregationMode::kFrequency;
    const auto fd0 = aggregate_objective(l, p, zero);
    CHECK(std::abs(fd0.value - erm.value) <= 1e-12);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(fd0.per_sample_weights[i] - erm.per_sample_weights[i]) <= 1e-12);
    }

    double prev = -1.0;
    for (double rho : {0.0, 0.02, 0.1, 0.4, 1.0, 3.0}) {
      const auto ev = aggregate_objective(l, p, config_for(ObjectiveVariant::kFairDro, rho));
      CHECK(ev.value >= prev - 1e-10);
      prev = ev.value;
      for (double c : ev.per_sample_weights) CHECK(c >= 0.0);
      CHECK(std::abs(sum_of(ev.per_sample_weights) - 1.0) <= 1e-10);
      // The value is the composite-weighted loss at the worst case.
      double weighted = 0.0;
      for (std::size_t i = 0; i < n; ++i) weighted += ev.per_sample_weights[i] * raw[i];
      CHECK(std::abs(weighted - ev.value) <= 1e-7);
    }

    // Raising one group's rho alone never lowers the value.
    auto base = config_for(ObjectiveVariant::kFairDro, 0.1);
    auto raised = base;
    raised.robustness.per_group.assign(G, 0.1);
    raised.robustness.per_group[rng.below(G)] = 0.5;
    CHECK(aggregate_objective(l, p, raised).value >=
          aggregate_objective(l, p, base).value - 1e-10);
  }
}

TEST_CASE("composite_sample_weights") {
  SUBCASE("uniform") {
    const auto p = partition_of({0, 0, 1, 1}, 2);
    const auto c = composite_sample_weights({{0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}}}, p);
    CHECK(c == std::vector<double>{0.25, 0.25, 0.25, 0.25});
  }
  SUBCASE("all mass in group 0") {
    const auto p = partition_of({0, 1, 0, 1}, 2);
    const auto c = composite_sample_weights({{1.0, 0.0}, {{0.5, 0.5}, {0.5, 0.5}}}, p);
    CHECK(c == std::vector<double>{0.5, 0.0, 0.5, 0.0});
  }
  SUBCASE("products") {
    const auto p = partition_of({0, 0, 1}, 2);
    const auto c = composite_sample_weights({{0.6, 0.4}, {{0.5, 0.5}, {1.0}}}, p);
    CHECK(c[0] == doctest::Approx(0.3));
    CHECK(c[1] == doctest::Approx(0.3));
    CHECK(c[2] == doctest::Approx(0.4));
  }
  SUBCASE("simplex violations") {
    const auto p = partition_of({0, 0, 1}, 2);
    CHECK_THROWS_AS(composite_sample_weights({{0.6, 0.5}, {{0.5, 0.5}, {1.0}}}, p), Error);
    CHECK_THROWS_AS(composite_sample_weights({{0.6, 0.4}, {{0.7, 0.5}, {1.0}}}, p), Error);
    CHECK_THROWS_AS(composite_sample_weights({{0.6, 0.4}, {{1.0}, {1.0}}}, p), Error);
    CHECK_THROWS_AS(composite_sample_weights({{1.2, -0.2}, {{0.5, 0.5}, {1.0}}}, p), Error);
  }
}

TEST_CASE("two-level collapse") {
  const Cohort cohort = testing::small_cohort(8);
  ModelConfig mc = model_config_for(cohort);
  mc.feature_dim = 4;
  const auto params = testing::random_params(mc, 3);
  const auto lg = loss_and_grad(cohort.samples, params, mc);
  const auto p = build_partition(cohort);

  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    TwoLevelWeights tw;
    tw.alpha.resize(p.num_groups());
    for (double& a : tw.alpha) a = rng.uniform();
    const double asum = sum_of(tw.alpha);
    for (double& a : tw.alpha) a /= asum;
    for (std::size_t g = 0; g < p.num_groups(); ++g) {
      std::vector<double> b(p.sizes[g]);
      for (double& x : b) x = rng.uniform();
      const double bsum = sum_of(b);
      for (double& x : b) x /= bsum;
      tw.beta.push_back(b);
    }
    const auto c = composite_sample_weights(tw, p);
    CHECK(std::abs(sum_of(c) - 1.0) <= 1e-12);

    double nested = 0.0;
    std::vector<double> nested_grad(params.size(), 0.0);
    for (std::size_t g = 0; g < p.num_groups(); ++g) {
      double inner = 0.0;
      std::vector<double> inner_grad(params.size(), 0.0);
      for (std::size_t k = 0; k < p.sizes[g]; ++k) {
        const std::size_t i = p.index_sets[g][k];
        inner += tw.beta[g][k] * lg.losses[i];
        const auto gi = lg.gradients.sample(i);
        for (std::size_t j = 0; j < params.size(); ++j) inner_grad[j] += tw.beta[g][k] * gi[j];
      }
      nested += tw.alpha[g] * inner;
      for (std::size_t j = 0; j < params.size(); ++j) nested_grad[j] += tw.alpha[g] * inner_grad[j];
    }
    double flat = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) flat += c[i] * lg.losses[i];
    CHECK(std::abs(nested - flat) <= 1e-12);

    ObjectiveEvaluation ev;
    ev.per_sample_weights = c;
    const auto grad = objective_gradient(ev, lg.gradients);
    for (std::size_t j = 0; j < params.size(); ++j) {
      CHECK(std::abs(grad[j] - nested_grad[j]) <= 1e-12);
    }
  }
}

TEST_CASE("objective_gradient") {
  const Cohort cohort = testing::small_cohort(9);
  ModelConfig mc = model_config_for(cohort);
  mc.feature_dim = 4;
  const auto params = testing::random_params(mc, 4);
  const auto lg = loss_and_grad(cohort.samples, params, mc);
  const auto p = build_partition(cohort);

  SUBCASE("ERM weights give the mean gradient") {
    const auto ev = aggregate_objective(lg.losses, p, config_for(ObjectiveVariant::kErm));
    const auto grad = objective_gradient(ev, lg.gradients);
    const double n = static_cast<double>(cohort.size());
    for (std::size_t j = 0; j < params.size(); ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < cohort.size(); ++i) mean += lg.gradients.sample(i)[j];
      CHECK(std::abs(grad[j] - mean / n) <= 1e-10);
    }
  }
  SUBCASE("single-sample batch") {
    const std::vector<Sample> one{cohort.samples[4]};
    const auto lg1 = loss_and_grad(one, params, mc);
    const auto ev = aggregate_objective(lg1.losses, partition_batch(one, mc.num_groups),
                                        config_for(ObjectiveVariant::kFairDro, 0.3));
    const auto grad = objective_gradient(ev, lg1.gradients);
    const double c = ev.per_sample_weights[0];
    CHECK(c == doctest::Approx(1.0));
    for (std::size_t j = 0; j < params.size(); ++j) {
      CHECK(grad[j] == doctest::Approx(c * lg1.gradients.sample(0)[j]));
    }
  }
  SUBCASE("batch mismatch") {
    ObjectiveEvaluation ev;
    ev.per_sample_weights.assign(3, 0.1);
    CHECK_THROWS_AS(objective_gradient(ev, lg.gradients), Error);
  }
}

TEST_CASE("Danskin gradient matches finite differences at interior points") {
  const Cohort cohort = testing::small_cohort(10, {5, 6, 4});
  ModelConfig mc = model_config_for(cohort);
  mc.feature_dim = 4;
  const auto p = build_partition(cohort);

  for (auto variant : {ObjectiveVariant::kFairDro, ObjectiveVariant::kFairDroPenalty}) {
    const auto cfg = config_for(variant, 0.2);
    const auto params = testing::random_params(mc, 31);
    REQUIRE(smoothness(cohort.samples, params, mc).min_topk_margin > 1e-4);
    const auto lg = loss_and_grad(cohort.samples, params, mc);
    const auto ev = aggregate_objective(lg.losses, p, cfg);
    for (const auto& term : ev.per_group) REQUIRE(term.robust->interior());
    const auto grad = objective_gradient(ev, lg.gradients);

    auto value = [&](const std::vector<double>& flat) {
      const ModelParams q(params.layout(), flat);
      return aggregate_objective(batch_losses(cohort.samples, q, mc), p, cfg).value;
    };
    const std::vector<double> x(params.flat().begin(), params.flat().end());
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
      const auto j = static_cast<std::size_t>(rng.below(x.size()));
      const double fd = testing::central_difference(value, x, j, 1e-5);
      CAPTURE(j);
      CHECK(testing::rel_error(grad[j], fd) <= 1e-4);
    }
  }
}

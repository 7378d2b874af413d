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
#include <vector>

#include "doctest.h"
#include "duetfair/duetfair.hpp"
#include "test_support.hpp"

using namespace duetfair;

namespace {

// One bright blob per sample, no hard subset, little noise.
Cohort separable_cohort(std::uint64_t seed) {
  SynthConfig c = SynthConfig::benchmark(seed);
  c.samples_per_group = {6, 6, 6, 6};
  c.grid_size = 10;
  c.hard_fraction = 0.0;
  c.base_noise_sigma = 0.02;
  c.background_level = {0.1, 0.1, 0.1, 0.1};
  return generate_cohort(c);
}

ModelConfig tiny_model(const Cohort& c, bool dmoe = true) {
  ModelConfig base;
  base.feature_dim = 4;
  base.use_dmoe = dmoe;
  return model_config_for(c, base);
}

TrainConfig quick(std::size_t epochs, std::uint64_t seed = 0) {
  TrainConfig t;
  t.epochs = epochs;
  t.seed = seed;
  return t;
}

ObjectiveConfig objective(ObjectiveVariant v, double rho = 0.3) {
  ObjectiveConfig o;
  o.variant = v;
  o.robustness.default_rho = rho;
  return o;
}

std::vector<double> report_numbers(const MetricsReport& r) {
  std::vector<double> v{r.population.dice, r.population.iou, r.es_dice, r.es_iou,
                        r.worst_group_dice.value, r.hard.dice, r.easy.dice};
  for (const auto& g : r.per_group) v.push_back(g.dice);
  for (const auto& s : r.per_sample) {
    v.push_back(s.dice);
    v.push_back(s.loss);
  }
  for (const auto& [name, ci] : r.cis) {
    v.push_back(ci.lo);
    v.push_back(ci.hi);
  }
  return v;
}

}  // namespace

TEST_CASE("zero learning rate keeps the initial parameters") {
  const Cohort c = testing::small_cohort(1);
  const auto mc = tiny_model(c);
  auto tc = quick(3, 5);
  tc.learning_rate = 0.0;
  const auto r = train(c, mc, objective(ObjectiveVariant::kFairDro), tc);
  CHECK(r.params == ModelParams::initialize(mc, 5));
  CHECK(r.log.final_params == r.params);
  CHECK(r.log.epochs.size() == 3);
}

TEST_CASE("ERM objective decreases over the first ten epochs") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Cohort c = separable_cohort(seed);
    const auto r = train(c, tiny_model(c), objective(ObjectiveVariant::kErm), quick(10, seed));
    CAPTURE(seed);
    for (std::size_t e = 1; e < r.log.epochs.size(); ++e) {
      CHECK(r.log.epochs[e].objective < r.log.epochs[e - 1].objective);
    }
  }
}

TEST_CASE("training is deterministic") {
  const Cohort c = testing::small_cohort(2);
  const auto mc = tiny_model(c);
  for (std::size_t batch : {std::size_t{0}, std::size_t{4}}) {
    auto tc = quick(4, 9);
    tc.batch_size = batch;
    tc.eval_every = 2;
    const auto a = train(c, mc, objective(ObjectiveVariant::kFairDro), tc);
    const auto b = train(c, mc, objective(ObjectiveVariant::kFairDro), tc);
    CHECK(a.params == b.params);
    CHECK(train_log_to_jsonl(a.log) == train_log_to_jsonl(b.log));
    CHECK(a.log.epochs[1].metrics.has_value());
    CHECK_FALSE(a.log.epochs[0].metrics.has_value());
  }
}

TEST_CASE("rho 0 with frequency weights follows the ERM trajectory") {
  const Cohort c = testing::small_cohort(3, {4, 7, 5});
  const auto mc = tiny_model(c);
  auto fair = objective(ObjectiveVariant::kFairDro, 0.0);
  fair.aggregation.mode = AggregationMode::kFrequency;

  std::vector<ModelParams> erm_steps, fair_steps;
  train(c, mc, objective(ObjectiveVariant::kErm), quick(15, 4),
        [&](std::size_t, const ModelParams& p, const ObjectiveEvaluation&) { erm_steps.push_back(p); });
  train(c, mc, fair, quick(15, 4),
        [&](std::size_t, const ModelParams& p, const ObjectiveEvaluation&) { fair_steps.push_back(p); });
  REQUIRE(erm_steps.size() == fair_steps.size());
  for (std::size_t s = 0; s < erm_steps.size(); ++s) {
    double diff = 0.0;
    for (std::size_t j = 0; j < erm_steps[s].size(); ++j) {
      diff = std::max(diff, std::abs(erm_steps[s].flat()[j] - fair_steps[s].flat()[j]));
    }
    CHECK(diff <= 1e-10);
  }
}

TEST_CASE("FAIRDRO objective bounds ERM along a trajectory") {
  const Cohort c = testing::small_cohort(4);
  const auto mc = tiny_model(c);
  const auto part = build_partition(c);
  auto fair = objective(ObjectiveVariant::kFairDro, 0.3);
  fair.aggregation.mode = AggregationMode::kFrequency;
  std::size_t checked = 0;
  train(c, mc, fair, quick(12, 1),
        [&](std::size_t, const ModelParams& p, const ObjectiveEvaluation&) {
          const auto losses = batch_losses(c.samples, p, mc);
          const double f = aggregate_objective(losses, part, fair).value;
          const double e = aggregate_objective(losses, part, objective(ObjectiveVariant::kErm)).value;
          CHECK(f >= e - 1e-12);
          ++checked;
        });
  CHECK(checked == 12);
}

TEST_CASE("minibatch mode") {
  const Cohort c = testing::small_cohort(5, {6, 9, 5});
  auto tc = quick(2, 3);
  tc.batch_size = 7;
  std::size_t steps = 0;
  const auto r = train(c, tiny_model(c), objective(ObjectiveVariant::kFairDro), tc,
                       [&](std::size_t step, const ModelParams&, const ObjectiveEvaluation& ev) {
                         CHECK(step == steps);
                         ++steps;
                         // Groups below the in-batch floor fall back to their mean.
                         for (const auto& t : ev.per_group) {
                           if (t.members > 0 && t.members < kMinibatchRobustMinMembers) {
                             CHECK(t.robust_risk == doctest::Approx(t.mean_risk));
                           }
                         }
                       });
  CHECK(steps == 2 * 3);  // ceil(20 / 7) batches per epoch
  CHECK(r.log.epochs.size() == 2);
  CHECK(r.log.epochs[1].group_risk.size() == 3);
}

TEST_CASE("train rejects bad inputs") {
  const Cohort c = testing::small_cohort(6);
  const auto mc = tiny_model(c);
  const auto obj = objective(ObjectiveVariant::kErm);
  CHECK_THROWS_AS(train(c, mc, obj, quick(0)), Error);
  auto tc = quick(1);
  tc.momentum = 1.0;
  CHECK_THROWS_AS(train(c, mc, obj, tc), Error);
  auto other = mc;
  other.num_groups = 5;
  CHECK_THROWS_AS(train(c, other, obj, quick(1)), Error);
  Cohort broken = c;
  broken.samples[0].mask(0, 0) = 0.5;
  CHECK_THROWS_AS(train(broken, mc, obj, quick(1)), Error);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("non-finite objective aborts with its location") {
  const Cohort c = testing::small_cohort(7);
  const auto mc = tiny_model(c);
  auto tc = quick(50, 2);
  tc.learning_rate = 1e300;
  try {
    train(c, mc, objective(ObjectiveVariant::kErm), tc);
    FAIL("expected divergence");
  } catch (const TrainingError& e) {
    CHECK(e.epoch() >= 1);
    CHECK(e.step() == e.epoch());
    CHECK(std::string(e.what()).find("epoch " + std::to_string(e.epoch())) != std::string::npos);
  }
}

TEST_CASE("evaluate examples") {
  const Cohort c = testing::small_cohort(8);
  const auto mc = tiny_model(c);

  SUBCASE("perfect predictions") {
    // Encoder reads the centre pixel; the image is a clean two-level picture
    // of the mask, so a steep threshold reproduces it.
    SynthConfig sc = SynthConfig::benchmark(3);
    sc.samples_per_group = {3, 3, 3, 3};
    sc.grid_size = 10;
    sc.base_noise_sigma = 0.0;
    sc.hard_fraction = 0.0;
    sc.background_level = {0.1, 0.1, 0.1, 0.1};
    const Cohort clean = generate_cohort(sc);
    const auto cfg = tiny_model(clean, false);
    ModelParams p = ModelParams::zeros(cfg);
    p.block("encoder.weight")[4] = 10.0;
    p.block("encoder.bias")[0] = -4.75;
    p.block("decoder.weight")[0] = 30.0;
    const auto r = evaluate(clean, p, cfg, BootstrapConfig{100, 0.95, 1});
    CHECK(r.population.dice == 1.0);
    CHECK(r.es_dice == 1.0);
    CHECK(r.cis.at("es_dice").lo == 1.0);
  }
  SUBCASE("all-background prediction") {
    ModelParams p = ModelParams::zeros(mc);
    p.block("decoder.bias")[0] = -10.0;
    const auto r = evaluate(c, p, mc, std::nullopt);
    CHECK(r.population.dice == 0.0);
    for (const auto& s : r.per_sample) CHECK(s.dice == 0.0);
    CHECK(r.attribute_name == c.attribute_name);
  }
}

TEST_CASE("golden benchmark report") {
  const Cohort c = generate_cohort(SynthConfig::benchmark(0));
  const auto mc = model_config_for(c);
  const auto trained = train(c, mc, objective(ObjectiveVariant::kFairDro), quick(3, 0));
  const auto r = evaluate(c, trained.params, mc, BootstrapConfig{200, 0.95, 0});
  CHECK(testing::stable_hash(report_numbers(r)) == 0x5438c6102c362f7bULL);
}

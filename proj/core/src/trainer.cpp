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

#include "duetfair/trainer.hpp"

#include <cmath>
#include <numeric>

#include "duetfair/rng.hpp"

namespace duetfair {
namespace {

void require_valid_cohort(const Cohort& cohort) {
  if (cohort.samples.empty()) throw Error("empty cohort");
  const auto violations = validate_cohort(cohort);
  if (!violations.empty()) {
    throw Error("invalid cohort (" + std::to_string(violations.size()) +
                " violations), first: " + violations.front().message);
  }
}

void require_compatible(const Cohort& cohort, const ModelConfig& config) {
  if (config.height != cohort.height || config.width != cohort.width ||
      config.num_groups != cohort.num_groups()) {
    throw Error("model configuration does not match the cohort grid or group count");
  }
}

EpochRecord record_from(std::size_t epoch, const LossVector& losses,
                        const ObjectiveEvaluation& ev) {
  EpochRecord rec;
  rec.epoch = epoch;
  rec.objective = ev.value;
  for (const GroupTerm& t : ev.per_group) {
    rec.group_risk.push_back(t.mean_risk);
    rec.group_robust_risk.push_back(t.robust_risk);
  }
  const auto v = losses.values();
  rec.mean_loss = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return rec;
}

void step_params(ModelParams& params, std::vector<double>& velocity,
                 const std::vector<double>& grad, const TrainConfig& tc) {
  auto flat = params.flat();
  for (std::size_t j = 0; j < flat.size(); ++j) {
    velocity[j] = tc.momentum * velocity[j] + grad[j];
    flat[j] -= tc.learning_rate * velocity[j];
  }
}

// Runs `f` with parameter and loss failures reported as a TrainingError that
// records where training diverged.
template <typename F>
auto located(const ModelParams& params, std::size_t epoch, std::size_t step, F&& f)
    -> decltype(f()) {
  const std::string where = " at epoch " + std::to_string(epoch) + ", step " + std::to_string(step);
  for (double v : params.flat()) {
    if (!std::isfinite(v)) throw TrainingError("non-finite parameters" + where, epoch, step);
  }
  try {
    return f();
  } catch (const TrainingError&) {
    throw;
  } catch (const Error& e) {
    throw TrainingError(e.what() + where, epoch, step);
  }
}

void require_finite(double value, std::size_t epoch, std::size_t step) {
  if (!std::isfinite(value)) {
    throw TrainingError("non-finite objective at epoch " + std::to_string(epoch) + ", step " +
                            std::to_string(step),
                        epoch, step);
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw Error("train: epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error("train: learning_rate must be > 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw Error("train: momentum must lie in [0,1)");
}

ModelConfig model_config_for(const Cohort& cohort, ModelConfig base) {
  base.height = cohort.height;
  base.width = cohort.width;
  base.num_groups = cohort.num_groups();
  return base;
}

TrainResult train(const Cohort& cohort, const ModelConfig& model_config,
                  const ObjectiveConfig& objective_config, const TrainConfig& train_config,
                  const StepObserver& observer) {
  // learning_rate == 0 is accepted here so that a frozen run can be checked;
  // configuration files still go through TrainConfig::validate.
  if (train_config.epochs < 1) throw Error("train: epochs must be >= 1");
  if (!(train_config.learning_rate >= 0.0)) throw Error("train: learning_rate must be >= 0");
  if (!(train_config.momentum >= 0.0 && train_config.momentum < 1.0)) {
    throw Error("train: momentum must lie in [0,1)");
  }
  model_config.validate();
  require_valid_cohort(cohort);
  require_compatible(cohort, model_config);
  objective_config.validate(cohort.num_groups());

  ModelParams params = ModelParams::initialize(model_config, train_config.seed);
  std::vector<double> velocity(params.size(), 0.0);
  TrainLog log;
  std::size_t step = 0;

  const std::span<const Sample> all(cohort.samples);
  const GroupPartition full_partition = partition_batch(all, cohort.num_groups());

  ObjectiveConfig batch_objective = objective_config;
  if (!train_config.full_batch()) batch_objective.robust_min_members = kMinibatchRobustMinMembers;

  std::vector<std::size_t> order(cohort.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Sample> batch;

  for (std::size_t epoch = 0; epoch < train_config.epochs; ++epoch) {
    EpochRecord rec;
    if (train_config.full_batch()) {
      const LossAndGrad lg =
          located(params, epoch, step, [&] { return loss_and_grad(all, params, model_config); });
      const ObjectiveEvaluation ev = aggregate_objective(lg.losses, full_partition, objective_config);
      require_finite(ev.value, epoch, step);
      rec = record_from(epoch, lg.losses, ev);
      step_params(params, velocity, objective_gradient(ev, lg.gradients), train_config);
      if (observer) observer(step, params, ev);
      ++step;
    } else {
      // Fisher-Yates on the epoch's own substream.
      Rng rng(train_config.seed, 0x5348'5546'0000'0000ULL + epoch);
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
      }
      for (std::size_t start = 0; start < order.size(); start += train_config.batch_size) {
        const std::size_t stop = std::min(order.size(), start + train_config.batch_size);
        batch.clear();
        for (std::size_t k = start; k < stop; ++k) batch.push_back(cohort.samples[order[k]]);
        const LossAndGrad lg = located(params, epoch, step,
                                       [&] { return loss_and_grad(batch, params, model_config); });
        const GroupPartition part = partition_batch(batch, cohort.num_groups());
        const ObjectiveEvaluation ev = aggregate_objective(lg.losses, part, batch_objective);
        require_finite(ev.value, epoch, step);
        step_params(params, velocity, objective_gradient(ev, lg.gradients), train_config);
        if (observer) observer(step, params, ev);
        ++step;
      }
      const LossVector losses =
          located(params, epoch, step, [&] { return batch_losses(all, params, model_config); });
      const ObjectiveEvaluation ev = aggregate_objective(losses, full_partition, objective_config);
      require_finite(ev.value, epoch, step);
      rec = record_from(epoch, losses, ev);
    }
    if (train_config.eval_every > 0 && (epoch + 1) % train_config.eval_every == 0) {
      rec.metrics = evaluate(cohort, params, model_config, std::nullopt);
    }
    log.epochs.push_back(std::move(rec));
  }
  log.final_params = params;
  return TrainResult{std::move(params), std::move(log)};
}

std::vector<SampleMetrics> score_samples(const Cohort& cohort, const ModelParams& params,
                                         const ModelConfig& model_config) {
  std::vector<SampleMetrics> out;
  out.reserve(cohort.size());
  for (const Sample& s : cohort.samples) {
    const PredictionMap pred = forward(s, params, model_config);
    const DiceIou di = dice_iou(binarize(pred), s.mask);
    out.push_back({s.sample_id, s.group, s.hard_flag, di.dice, di.iou,
                   per_sample_loss(pred, s.mask)});
  }
  return out;
}

MetricsReport evaluate(const Cohort& cohort, const ModelParams& params,
                       const ModelConfig& model_config,
                       const std::optional<BootstrapConfig>& bootstrap) {
  require_compatible(cohort, model_config);
  MetricsReport report =
      summarize(score_samples(cohort, params, model_config), cohort.group_labels, bootstrap);
  report.attribute_name = cohort.attribute_name;
  return report;
}

}  // namespace duetfair

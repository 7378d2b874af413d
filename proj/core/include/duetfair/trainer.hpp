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

#ifndef DUETFAIR_TRAINER_HPP_
#define DUETFAIR_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "duetfair/metrics.hpp"
#include "duetfair/model.hpp"
#include "duetfair/objectives.hpp"
#include "duetfair/types.hpp"

namespace duetfair {

struct TrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 0;
  std::size_t eval_every = 0;  // 0 = never

  bool full_batch() const { return batch_size == 0; }
  void validate() const;
};

/// Minimum in-batch group size for the robust risk in minibatch mode.
inline constexpr std::size_t kMinibatchRobustMinMembers = 4;

struct EpochRecord {
  std::size_t epoch = 0;
  double objective = 0.0;
  std::vector<double> group_risk;
  std::vector<double> group_robust_risk;
  double mean_loss = 0.0;
  std::optional<MetricsReport> metrics;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  ModelParams final_params;
};

struct TrainResult {
  ModelParams params;
  TrainLog log;
};

/// Raised when the objective turns non-finite; carries where it happened.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::size_t epoch, std::size_t step)
      : Error(what), epoch_(epoch), step_(step) {}
  std::size_t epoch() const { return epoch_; }
  std::size_t step() const { return step_; }

 private:
  std::size_t epoch_;
  std::size_t step_;
};

/// Called after every parameter update with the global step index (from 0).
using StepObserver = std::function<void(std::size_t step, const ModelParams& params,
                                        const ObjectiveEvaluation& evaluation)>;

/// Momentum gradient descent, v <- momentum * v + g, p <- p - lr * v, on the
/// objective's composite-weighted gradient. Deterministic given the seeds.
TrainResult train(const Cohort& cohort, const ModelConfig& model_config,
                  const ObjectiveConfig& objective_config, const TrainConfig& train_config,
                  const StepObserver& observer = {});

/// Forward, binarize at 0.5, and summarize with CIs.
MetricsReport evaluate(const Cohort& cohort, const ModelParams& params,
                       const ModelConfig& model_config,
                       const std::optional<BootstrapConfig>& bootstrap);

/// Per-sample Dice/IoU/loss for a cohort.
std::vector<SampleMetrics> score_samples(const Cohort& cohort, const ModelParams& params,
                                         const ModelConfig& model_config);

/// Model configuration matching a cohort's grid and group count.
ModelConfig model_config_for(const Cohort& cohort, ModelConfig base = {});

}  // namespace duetfair

#endif  // DUETFAIR_TRAINER_HPP_

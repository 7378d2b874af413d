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

#ifndef DUETFAIR_OBJECTIVES_HPP_
#define DUETFAIR_OBJECTIVES_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "duetfair/model.hpp"
#include "duetfair/robust.hpp"
#include "duetfair/types.hpp"

namespace duetfair {

enum class ObjectiveVariant { kErm, kFairDro, kGroupDro, kFairDroPenalty };

std::string_view to_string(ObjectiveVariant v);
/// Accepts "erm", "fairdro", "groupdro", "fairdro-penalty" (case-insensitive,
/// '_' and '-' interchangeable).
ObjectiveVariant parse_variant(std::string_view name);

/// How subgroup risks are combined by the robust variants.
enum class AggregationMode {
  kUniform,    // w_g = 1 / |G|
  kFrequency,  // w_g = n_g / n, under which rho = 0 reduces to ERM
  kExplicit,   // w_g taken from AggregationWeights::w
};

struct AggregationWeights {
  AggregationMode mode = AggregationMode::kUniform;
  std::vector<double> w;  // kExplicit only; simplex over groups

  /// Resolved weights for a partition. Groups with no members are dropped and
  /// the remaining weights renormalized.
  std::vector<double> resolve(const GroupPartition& partition) const;
};

/// alpha over groups; beta[g] over the members of group g in partition order.
struct TwoLevelWeights {
  std::vector<double> alpha;
  std::vector<std::vector<double>> beta;
};

struct ObjectiveConfig {
  ObjectiveVariant variant = ObjectiveVariant::kFairDro;
  RobustnessConfig robustness;
  double lambda_rob = 1.0;
  AggregationWeights aggregation;
  /// Groups with fewer members than this use their plain mean instead of the
  /// robust risk (minibatch guard). 1 disables the guard.
  std::size_t robust_min_members = 1;

  void validate(std::size_t num_groups) const;
};

struct GroupTerm {
  std::size_t members = 0;
  double mean_risk = 0.0;
  double robust_risk = 0.0;  // equals mean_risk for non-robust variants
  std::optional<RobustRiskSolution> robust;
};

struct ObjectiveEvaluation {
  double value = 0.0;
  std::vector<double> per_sample_weights;  // c_i, aligned with the losses
  std::vector<GroupTerm> per_group;
  std::optional<SubgroupId> active_group;  // arg-max group for GROUPDRO / penalty
};

/// Mean loss per group; throws if any group is empty.
std::vector<double> subgroup_risks(const LossVector& losses, const GroupPartition& partition);

ObjectiveEvaluation aggregate_objective(const LossVector& losses, const GroupPartition& partition,
                                        const ObjectiveConfig& config);

/// c_i = alpha_{g(i)} * beta_i^{(g(i))}.
std::vector<double> composite_sample_weights(const TwoLevelWeights& weights,
                                             const GroupPartition& partition);

/// sum_i c_i grad(l_i) with the evaluation's composite weights.
std::vector<double> objective_gradient(const ObjectiveEvaluation& evaluation,
                                       const PerSampleGradients& gradients);

/// Partition of an arbitrary batch over `num_groups` declared groups. Unlike
/// build_partition, groups may be empty.
GroupPartition partition_batch(std::span<const Sample> batch, std::size_t num_groups);

}  // namespace duetfair

#endif  // DUETFAIR_OBJECTIVES_HPP_

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

#ifndef DUETFAIR_METRICS_HPP_
#define DUETFAIR_METRICS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "duetfair/model.hpp"
#include "duetfair/types.hpp"

namespace duetfair {

inline constexpr double kBinarizeThreshold = 0.5;

struct DiceIou {
  double dice = 0.0;
  double iou = 0.0;
};

/// Overlap of two binary masks. Two empty masks score (1, 1).
DiceIou dice_iou(const Grid& pred_mask, const Grid& true_mask);

/// 1 where p >= 0.5, else 0.
Grid binarize(const PredictionMap& pred, double threshold = kBinarizeThreshold);

/// population / (1 + sum_a |population - subgroup_a|).
double equity_scaled(double population_value, std::span<const double> subgroup_values);

struct WorstGroup {
  SubgroupId group;
  double value = 0.0;
};

/// Minimum-valued entry; ties resolve to the lowest group id.
WorstGroup worst_group(std::span<const std::pair<SubgroupId, double>> per_group);

enum class Statistic { kMean, kEquityScaled };

struct BootstrapConfig {
  std::size_t resamples = 1000;
  double level = 0.95;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap. For kEquityScaled, `groups` gives each value's
/// subgroup and every resample recomputes its own population and subgroup
/// means; groups absent from a resample contribute no deviation. Resample r
/// draws from its own substream (seed, r).
Interval bootstrap_ci(std::span<const double> values, std::span<const SubgroupId> groups,
                      Statistic statistic, const BootstrapConfig& config);

/// Equity-scaled mean of `values` grouped by `groups`.
double equity_scaled_mean(std::span<const double> values, std::span<const SubgroupId> groups);

struct SampleMetrics {
  std::int64_t sample_id = 0;
  SubgroupId group;
  bool hard_flag = false;
  double dice = 0.0;
  double iou = 0.0;
  double loss = 0.0;
};

struct GroupMetrics {
  double dice = 0.0;
  double iou = 0.0;
  std::size_t n = 0;
};

struct MetricsReport {
  std::string method;
  std::string attribute_name;
  std::vector<std::string> group_labels;
  std::vector<SampleMetrics> per_sample;
  std::vector<GroupMetrics> per_group;  // indexed by group id; n == 0 if absent
  GroupMetrics population;
  double es_dice = 0.0;
  double es_iou = 0.0;
  WorstGroup worst_group_dice;
  WorstGroup worst_group_iou;
  GroupMetrics hard;  // samples with hard_flag
  GroupMetrics easy;
  std::map<std::string, Interval> cis;
};

/// Aggregates per-sample metrics into a full report; CIs are added when
/// `bootstrap` is given.
MetricsReport summarize(std::vector<SampleMetrics> per_sample,
                        std::vector<std::string> group_labels,
                        const std::optional<BootstrapConfig>& bootstrap);

}  // namespace duetfair

#endif  // DUETFAIR_METRICS_HPP_

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

#include "duetfair/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "duetfair/rng.hpp"

namespace duetfair {
namespace {

double percentile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::size_t max_group(std::span<const SubgroupId> groups) {
  std::size_t G = 0;
  for (SubgroupId g : groups) G = std::max(G, g.index() + 1);
  return G;
}

// Equity-scaled mean over the entries selected by `pick` (indices into values).
double es_of(std::span<const double> values, std::span<const SubgroupId> groups,
             std::span<const std::size_t> pick, std::size_t num_groups,
             std::vector<double>& sums, std::vector<std::size_t>& counts) {
  std::fill(sums.begin(), sums.end(), 0.0);
  std::fill(counts.begin(), counts.end(), 0);
  double total = 0.0;
  for (std::size_t i : pick) {
    total += values[i];
    sums[groups[i].index()] += values[i];
    ++counts[groups[i].index()];
  }
  const double pop = total / static_cast<double>(pick.size());
  double delta = 0.0;
  for (std::size_t g = 0; g < num_groups; ++g) {
    if (counts[g] == 0) continue;
    delta += std::abs(pop - sums[g] / static_cast<double>(counts[g]));
  }
  return pop / (1.0 + delta);
}

GroupMetrics mean_metrics(const std::vector<const SampleMetrics*>& members) {
  GroupMetrics m;
  m.n = members.size();
  if (members.empty()) return m;
  for (const SampleMetrics* s : members) {
    m.dice += s->dice;
    m.iou += s->iou;
  }
  m.dice /= static_cast<double>(m.n);
  m.iou /= static_cast<double>(m.n);
  return m;
}

}  // namespace

DiceIou dice_iou(const Grid& pred_mask, const Grid& true_mask) {
  if (!pred_mask.same_shape(true_mask)) throw Error("dice_iou: mask shapes differ");
  std::size_t p = 0, t = 0, both = 0;
  const auto pv = pred_mask.values();
  const auto tv = true_mask.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const bool a = pv[i] != 0.0;
    const bool b = tv[i] != 0.0;
    p += a;
    t += b;
    both += a && b;
  }
  if (p + t == 0) return {1.0, 1.0};
  const double inter = static_cast<double>(both);
  return {2.0 * inter / static_cast<double>(p + t),
          inter / static_cast<double>(p + t - both)};
}

Grid binarize(const PredictionMap& pred, double threshold) {
  Grid out(pred.probabilities.height(), pred.probabilities.width());
  const auto in = pred.probabilities.values();
  auto o = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = in[i] >= threshold ? 1.0 : 0.0;
  return out;
}

double equity_scaled(double population_value, std::span<const double> subgroup_values) {
  if (subgroup_values.empty()) throw Error("equity_scaled: no subgroup values");
  double delta = 0.0;
  for (double v : subgroup_values) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error("equity_scaled: subgroup value outside [0,1]");
    delta += std::abs(population_value - v);
  }
  return population_value / (1.0 + delta);
}

WorstGroup worst_group(std::span<const std::pair<SubgroupId, double>> per_group) {
  if (per_group.empty()) throw Error("worst_group: no groups");
  WorstGroup best{per_group.front().first, per_group.front().second};
  for (const auto& [g, v] : per_group) {
    if (v < best.value || (v == best.value && g < best.group)) best = {g, v};
  }
  return best;
}

void BootstrapConfig::validate() const {
  if (resamples < 1) throw Error("bootstrap: resamples must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw Error("bootstrap: level must lie in (0,1)");
}

double equity_scaled_mean(std::span<const double> values, std::span<const SubgroupId> groups) {
  if (values.empty() || values.size() != groups.size()) {
    throw Error("equity_scaled_mean: values and groups must be non-empty and aligned");
  }
  const std::size_t G = max_group(groups);
  std::vector<double> sums(G);
  std::vector<std::size_t> counts(G);
  std::vector<std::size_t> all(values.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return es_of(values, groups, all, G, sums, counts);
}

Interval bootstrap_ci(std::span<const double> values, std::span<const SubgroupId> groups,
                      Statistic statistic, const BootstrapConfig& config) {
  config.validate();
  if (values.empty()) throw Error("bootstrap_ci: no values");
  if (statistic == Statistic::kEquityScaled && groups.size() != values.size()) {
    throw Error("bootstrap_ci: equity-scaled statistic needs one group per value");
  }
  const std::size_t n = values.size();
  const std::size_t G = statistic == Statistic::kEquityScaled ? max_group(groups) : 0;
  std::vector<double> sums(G);
  std::vector<std::size_t> counts(G);
  std::vector<std::size_t> pick(n);
  std::vector<double> stats(config.resamples);
  for (std::size_t r = 0; r < config.resamples; ++r) {
    Rng rng(config.seed, r);
    for (std::size_t i = 0; i < n; ++i) pick[i] = static_cast<std::size_t>(rng.below(n));
    if (statistic == Statistic::kMean) {
      double s = 0.0;
      for (std::size_t i : pick) s += values[i];
      stats[r] = s / static_cast<double>(n);
    } else {
      stats[r] = es_of(values, groups, pick, G, sums, counts);
    }
  }
  std::sort(stats.begin(), stats.end());
  const double tail = (1.0 - config.level) / 2.0;
  return {percentile(stats, tail), percentile(stats, 1.0 - tail)};
}

MetricsReport summarize(std::vector<SampleMetrics> per_sample,
                        std::vector<std::string> group_labels,
                        const std::optional<BootstrapConfig>& bootstrap) {
  if (per_sample.empty()) throw Error("summarize: no samples");
  MetricsReport report;
  report.group_labels = std::move(group_labels);
  report.per_sample = std::move(per_sample);
  const std::size_t G = report.group_labels.size();

  std::vector<std::vector<const SampleMetrics*>> by_group(G);
  std::vector<const SampleMetrics*> all, hard, easy;
  for (const SampleMetrics& s : report.per_sample) {
    if (s.group.index() >= G) {
      throw Error("sample " + std::to_string(s.sample_id) + " has out-of-range group");
    }
    by_group[s.group.index()].push_back(&s);
    all.push_back(&s);
    (s.hard_flag ? hard : easy).push_back(&s);
  }
  report.population = mean_metrics(all);
  report.hard = mean_metrics(hard);
  report.easy = mean_metrics(easy);

  std::vector<double> dice_groups, iou_groups;
  std::vector<std::pair<SubgroupId, double>> dice_pairs, iou_pairs;
  for (std::size_t g = 0; g < G; ++g) {
    report.per_group.push_back(mean_metrics(by_group[g]));
    const GroupMetrics& m = report.per_group.back();
    if (m.n == 0) continue;
    const SubgroupId id{static_cast<std::uint32_t>(g)};
    dice_groups.push_back(m.dice);
    iou_groups.push_back(m.iou);
    dice_pairs.emplace_back(id, m.dice);
    iou_pairs.emplace_back(id, m.iou);
  }
  report.es_dice = equity_scaled(report.population.dice, dice_groups);
  report.es_iou = equity_scaled(report.population.iou, iou_groups);
  report.worst_group_dice = worst_group(dice_pairs);
  report.worst_group_iou = worst_group(iou_pairs);

  if (bootstrap) {
    std::vector<double> dice, iou;
    std::vector<SubgroupId> groups;
    for (const SampleMetrics& s : report.per_sample) {
      dice.push_back(s.dice);
      iou.push_back(s.iou);
      groups.push_back(s.group);
    }
    report.cis["dice"] = bootstrap_ci(dice, groups, Statistic::kMean, *bootstrap);
    report.cis["iou"] = bootstrap_ci(iou, groups, Statistic::kMean, *bootstrap);
    report.cis["es_dice"] = bootstrap_ci(dice, groups, Statistic::kEquityScaled, *bootstrap);
    report.cis["es_iou"] = bootstrap_ci(iou, groups, Statistic::kEquityScaled, *bootstrap);
    for (std::size_t g = 0; g < G; ++g) {
      std::vector<double> member;
      for (const SampleMetrics* s : by_group[g]) member.push_back(s->dice);
      if (member.empty()) continue;
      report.cis["dice/" + report.group_labels[g]] =
          bootstrap_ci(member, {}, Statistic::kMean, *bootstrap);
    }
  }
  return report;
}

}  // namespace duetfair

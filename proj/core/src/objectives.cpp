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

#include "duetfair/objectives.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace duetfair {
namespace {

constexpr double kSimplexTol = 1e-12;

void require_simplex(std::span<const double> w, const std::string& what) {
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw Error(what + " has a negative or non-finite entry");
    sum += x;
  }
  if (std::abs(sum - 1.0) > kSimplexTol) {
    throw Error(what + " sums to " + std::to_string(sum) + ", not 1");
  }
}

void require_aligned(const LossVector& losses, const GroupPartition& partition) {
  if (losses.size() != partition.num_samples()) {
    throw Error("loss vector has " + std::to_string(losses.size()) +
                " entries but the partition covers " +
                std::to_string(partition.num_samples()) + " samples");
  }
}

double mean_over(const LossVector& losses, std::span<const std::size_t> idx) {
  double s = 0.0;
  for (std::size_t i : idx) s += losses[i];
  return s / static_cast<double>(idx.size());
}

// Lowest group id with the largest value among non-empty groups.
std::size_t argmax_group(const std::vector<GroupTerm>& terms, bool robust) {
  std::size_t best = terms.size();
  double best_value = 0.0;
  for (std::size_t g = 0; g < terms.size(); ++g) {
    if (terms[g].members == 0) continue;
    const double v = robust ? terms[g].robust_risk : terms[g].mean_risk;
    if (best == terms.size() || v > best_value) {
      best = g;
      best_value = v;
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(ObjectiveVariant v) {
  switch (v) {
    case ObjectiveVariant::kErm: return "erm";
    case ObjectiveVariant::kFairDro: return "fairdro";
    case ObjectiveVariant::kGroupDro: return "groupdro";
    case ObjectiveVariant::kFairDroPenalty: return "fairdro-penalty";
  }
  return "unknown";
}

ObjectiveVariant parse_variant(std::string_view name) {
  std::string key;
  for (char c : name) {
    key.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "erm") return ObjectiveVariant::kErm;
  if (key == "fairdro") return ObjectiveVariant::kFairDro;
  if (key == "groupdro") return ObjectiveVariant::kGroupDro;
  if (key == "fairdro-penalty") return ObjectiveVariant::kFairDroPenalty;
  throw Error("unknown objective variant '" + std::string(name) + "'");
}

std::vector<double> AggregationWeights::resolve(const GroupPartition& partition) const {
  const std::size_t G = partition.num_groups();
  std::vector<double> w(G, 0.0);
  switch (mode) {
    case AggregationMode::kUniform:
      std::fill(w.begin(), w.end(), 1.0);
      break;
    case AggregationMode::kFrequency:
      // Frequencies are already n_g / n; used verbatim.
      return partition.frequencies;
    case AggregationMode::kExplicit:
      if (this->w.size() != G) {
        throw Error("aggregation weights list " + std::to_string(this->w.size()) +
                    " entries for " + std::to_string(G) + " groups");
      }
      require_simplex(this->w, "aggregation weights");
      w = this->w;
      break;
  }
  double total = 0.0;
  for (std::size_t g = 0; g < G; ++g) {
    if (partition.sizes[g] == 0) w[g] = 0.0;
    total += w[g];
  }
  if (!(total > 0.0)) throw Error("aggregation weights put no mass on any non-empty group");
  for (double& x : w) x /= total;
  return w;
}

void ObjectiveConfig::validate(std::size_t num_groups) const {
  robustness.validate(num_groups);
  if (!(lambda_rob >= 0.0) || !std::isfinite(lambda_rob)) {
    throw Error("lambda_rob must be finite and >= 0, got " + std::to_string(lambda_rob));
  }
  if (aggregation.mode == AggregationMode::kExplicit) {
    if (aggregation.w.size() != num_groups) {
      throw Error("aggregation weights must list one value per group");
    }
    require_simplex(aggregation.w, "aggregation weights");
  }
  if (robust_min_members < 1) throw Error("robust_min_members must be >= 1");
}

std::vector<double> subgroup_risks(const LossVector& losses, const GroupPartition& partition) {
  require_aligned(losses, partition);
  std::vector<double> risks(partition.num_groups());
  for (std::size_t g = 0; g < partition.num_groups(); ++g) {
    const auto& idx = partition.index_sets[g];
    if (idx.empty()) throw Error("group " + std::to_string(g) + " has no samples");
    risks[g] = mean_over(losses, idx);
  }
  return risks;
}

ObjectiveEvaluation aggregate_objective(const LossVector& losses, const GroupPartition& partition,
                                        const ObjectiveConfig& config) {
  require_aligned(losses, partition);
  if (losses.size() == 0) throw Error("aggregate_objective: empty batch");
  const std::size_t G = partition.num_groups();
  const std::size_t n = losses.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  ObjectiveEvaluation ev;
  ev.per_group.resize(G);
  ev.per_sample_weights.assign(n, 0.0);

  const bool robust = config.variant == ObjectiveVariant::kFairDro ||
                      config.variant == ObjectiveVariant::kFairDroPenalty;
  for (std::size_t g = 0; g < G; ++g) {
    const auto& idx = partition.index_sets[g];
    GroupTerm& term = ev.per_group[g];
    term.members = idx.size();
    if (idx.empty()) continue;
    term.mean_risk = mean_over(losses, idx);
    term.robust_risk = term.mean_risk;
    if (robust) {
      const auto slice = losses.gather(idx);
      const double rho = idx.size() < config.robust_min_members
                             ? 0.0
                             : config.robustness.rho_for(SubgroupId{static_cast<std::uint32_t>(g)});
      term.robust = solve_robust_risk(slice, rho);
      term.robust_risk = term.robust->value;
    }
  }

  switch (config.variant) {
    case ObjectiveVariant::kErm: {
      double sum = 0.0;
      for (double l : losses.values()) sum += l;
      ev.value = sum * inv_n;
      std::fill(ev.per_sample_weights.begin(), ev.per_sample_weights.end(), inv_n);
      break;
    }
    case ObjectiveVariant::kFairDro: {
      const auto w = config.aggregation.resolve(partition);
      for (std::size_t g = 0; g < G; ++g) {
        const GroupTerm& term = ev.per_group[g];
        if (term.members == 0) continue;
        ev.value += w[g] * term.robust_risk;
        const auto& idx = partition.index_sets[g];
        for (std::size_t k = 0; k < idx.size(); ++k) {
          ev.per_sample_weights[idx[k]] = w[g] * term.robust->weights[k];
        }
      }
      break;
    }
    case ObjectiveVariant::kGroupDro: {
      const std::size_t g = argmax_group(ev.per_group, false);
      ev.active_group = SubgroupId{static_cast<std::uint32_t>(g)};
      ev.value = ev.per_group[g].mean_risk;
      const auto& idx = partition.index_sets[g];
      for (std::size_t i : idx) ev.per_sample_weights[i] = 1.0 / static_cast<double>(idx.size());
      break;
    }
    case ObjectiveVariant::kFairDroPenalty: {
      double sum = 0.0;
      for (double l : losses.values()) sum += l;
      const std::size_t g = argmax_group(ev.per_group, true);
      ev.active_group = SubgroupId{static_cast<std::uint32_t>(g)};
      ev.value = sum * inv_n + config.lambda_rob * ev.per_group[g].robust_risk;
      std::fill(ev.per_sample_weights.begin(), ev.per_sample_weights.end(), inv_n);
      const auto& idx = partition.index_sets[g];
      for (std::size_t k = 0; k < idx.size(); ++k) {
        ev.per_sample_weights[idx[k]] += config.lambda_rob * ev.per_group[g].robust->weights[k];
      }
      break;
    }
  }
  return ev;
}

std::vector<double> composite_sample_weights(const TwoLevelWeights& weights,
                                             const GroupPartition& partition) {
  const std::size_t G = partition.num_groups();
  if (weights.alpha.size() != G || weights.beta.size() != G) {
    throw Error("two-level weights do not match the number of groups");
  }
  require_simplex(weights.alpha, "alpha");
  std::vector<double> c(partition.num_samples(), 0.0);
  for (std::size_t g = 0; g < G; ++g) {
    const auto& idx = partition.index_sets[g];
    const auto& beta = weights.beta[g];
    if (beta.size() != idx.size()) {
      throw Error("beta for group " + std::to_string(g) + " has the wrong length");
    }
    if (idx.empty()) continue;
    require_simplex(beta, "beta for group " + std::to_string(g));
    for (std::size_t k = 0; k < idx.size(); ++k) c[idx[k]] = weights.alpha[g] * beta[k];
  }
  return c;
}

std::vector<double> objective_gradient(const ObjectiveEvaluation& evaluation,
                                       const PerSampleGradients& gradients) {
  if (evaluation.per_sample_weights.size() != gradients.num_samples()) {
    throw Error("objective evaluation and gradients come from different batches");
  }
  return gradients.combine(evaluation.per_sample_weights);
}

GroupPartition partition_batch(std::span<const Sample> batch, std::size_t num_groups) {
  GroupPartition p;
  p.index_sets.resize(num_groups);
  for (std::size_t pos = 0; pos < batch.size(); ++pos) {
    const SubgroupId g = batch[pos].group;
    if (g.index() >= num_groups) {
      throw Error("sample " + std::to_string(batch[pos].sample_id) + " has out-of-range group");
    }
    p.index_sets[g.index()].push_back(pos);
    p.group_of.push_back(g);
  }
  const double n = static_cast<double>(batch.size());
  for (const auto& set : p.index_sets) {
    p.sizes.push_back(set.size());
    p.frequencies.push_back(batch.empty() ? 0.0 : static_cast<double>(set.size()) / n);
  }
  return p;
}

}  // namespace duetfair

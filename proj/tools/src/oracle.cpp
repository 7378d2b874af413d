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

#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "duetfair/duetfair.hpp"
#include "json.hpp"

namespace duetfair::cli {
namespace {

using nlohmann::json;

constexpr double kRhos[] = {0.01, 0.05, 0.1, 0.3, 0.7};
// A step of 1e-5 moves logits and gate scores by far less than this.
constexpr double kKinkMargin = 1e-4;

double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

json dual_primal_sweep(const OracleOptions& o, std::size_t& agreements) {
  Rng rng(o.seed, 0);
  json failures = json::array();
  double worst = 0.0;
  agreements = 0;
  for (std::size_t k = 0; k < o.instances; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.below(kOracleMaxSamples - 1));
    std::vector<double> losses(n);
    for (double& l : losses) l = rng.uniform();
    const double rho = kRhos[rng.below(std::size(kRhos))];
    const double dual = solve_robust_risk(losses, rho).value;
    const double primal = brute_force_primal(losses, rho).value;
    const double err = std::abs(dual - primal);
    worst = std::max(worst, err);
    if (err <= o.dual_primal_tolerance) {
      ++agreements;
    } else {
      failures.push_back({{"instance", k}, {"losses", losses}, {"rho", rho},
                          {"dual", dual}, {"primal", primal}, {"abs_error", err}});
    }
  }
  return {{"instances", o.instances},
          {"agreements", agreements},
          {"tolerance", o.dual_primal_tolerance},
          {"max_abs_error", worst},
          {"failures", std::move(failures)}};
}

Cohort oracle_cohort(std::uint64_t seed) {
  SynthConfig c;
  c.num_groups = 3;
  c.samples_per_group = {5, 6, 4};
  c.grid_size = 8;
  c.seed = seed;
  for (std::size_t g = 0; g < 3; ++g) {
    const double x = static_cast<double>(g);
    c.blob_center_shift.push_back({0.0, x - 1.0});
    c.blob_radius_range.push_back({1.5, 2.5 + 0.5 * x});
    c.background_level.push_back(0.1 + 0.05 * x);
    c.group_labels.push_back("G" + std::to_string(g));
  }
  c.hard_group = SubgroupId{1};
  c.center_jitter = 0.5;
  return generate_cohort(c);
}

ModelParams random_params(const ModelConfig& config, std::uint64_t seed) {
  ModelParams p = ModelParams::zeros(config);
  Rng rng(seed);
  for (double& v : p.flat()) v = rng.uniform(-0.5, 0.5);
  return p;
}

// The objective is differentiable at the evaluation point: no routing or clip
// kink nearby, interior robust solutions, and a unique arg-max group.
bool smooth_at(const Cohort& cohort, const ModelParams& params, const ModelConfig& mc,
               const ObjectiveEvaluation& ev, ObjectiveVariant variant) {
  const auto s = smoothness(cohort.samples, params, mc);
  if (s.min_topk_margin <= kKinkMargin || s.min_clip_margin <= kKinkMargin) return false;
  for (const auto& term : ev.per_group) {
    if (term.robust && !term.robust->interior()) return false;
  }
  if (variant == ObjectiveVariant::kGroupDro || variant == ObjectiveVariant::kFairDroPenalty) {
    std::vector<double> r;
    for (const auto& term : ev.per_group) {
      r.push_back(variant == ObjectiveVariant::kGroupDro ? term.mean_risk : term.robust_risk);
    }
    std::sort(r.rbegin(), r.rend());
    if (r.size() > 1 && r[0] - r[1] <= kKinkMargin) return false;
  }
  return true;
}

json gradient_case(const OracleOptions& o, const Cohort& cohort, ObjectiveVariant variant,
                   bool& passed) {
  ModelConfig mc = model_config_for(cohort);
  mc.feature_dim = 4;
  const auto partition = build_partition(cohort);
  ObjectiveConfig cfg;
  cfg.variant = variant;
  cfg.robustness.default_rho = 0.2;

  for (std::uint64_t attempt = 0; attempt < 50; ++attempt) {
    const std::uint64_t param_seed = substream_seed(o.seed, 100 + attempt);
    const ModelParams params = random_params(mc, param_seed);
    const auto lg = loss_and_grad(cohort.samples, params, mc);
    const auto ev = aggregate_objective(lg.losses, partition, cfg);
    if (!smooth_at(cohort, params, mc, ev, variant)) continue;
    const auto grad = objective_gradient(ev, lg.gradients);

    std::vector<double> x(params.flat().begin(), params.flat().end());
    auto value = [&](double xj, std::size_t j) {
      std::vector<double> y = x;
      y[j] = xj;
      const ModelParams q(params.layout(), std::move(y));
      return aggregate_objective(batch_losses(cohort.samples, q, mc), partition, cfg).value;
    };
    Rng rng(param_seed, 1);
    json failures = json::array();
    double worst = 0.0;
    for (std::size_t t = 0; t < o.fd_coordinates; ++t) {
      const auto j = static_cast<std::size_t>(rng.below(x.size()));
      const double fd =
          (value(x[j] + o.fd_step, j) - value(x[j] - o.fd_step, j)) / (2.0 * o.fd_step);
      const double err = rel_error(grad[j], fd);
      worst = std::max(worst, err);
      if (!(err <= o.fd_tolerance)) {
        failures.push_back({{"coordinate", j}, {"analytic", grad[j]}, {"finite_difference", fd},
                            {"rel_error", err}, {"param_seed", param_seed}});
      }
    }
    passed = failures.empty();
    return {{"variant", std::string(to_string(variant))},
            {"param_seed", param_seed},
            {"coordinates", o.fd_coordinates},
            {"max_rel_error", worst},
            {"tolerance", o.fd_tolerance},
            {"pass", passed},
            {"failures", std::move(failures)}};
  }
  passed = false;
  return {{"variant", std::string(to_string(variant))},
          {"pass", false},
          {"failures", json::array({{{"reason", "no differentiable point found in 50 draws"}}})}};
}

}  // namespace

OracleOutcome run_oracle(const OracleOptions& o) {
  OracleOutcome out;
  out.instances = o.instances;
  json sweep = dual_primal_sweep(o, out.agreements);

  const Cohort cohort = oracle_cohort(o.seed);
  json cases = json::array();
  bool gradients_ok = true;
  for (auto v : {ObjectiveVariant::kErm, ObjectiveVariant::kFairDro, ObjectiveVariant::kGroupDro,
                 ObjectiveVariant::kFairDroPenalty}) {
    bool ok = false;
    cases.push_back(gradient_case(o, cohort, v, ok));
    gradients_ok = gradients_ok && ok;
  }
  out.passed = out.agreements == o.instances && gradients_ok;
  json j = {{"pass", out.passed},
            {"seed", o.seed},
            {"dual_primal", std::move(sweep)},
            {"gradient", {{"step", o.fd_step}, {"cases", std::move(cases)}}}};
  out.report_json = j.dump(2) + "\n";
  return out;
}

}  // namespace duetfair::cli

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

// Acceptance gate: one PASS/FAIL line per criterion.
//
//   acceptance                 run every criterion
//   acceptance --criterion N   run only criterion N
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "duetfair/duetfair.hpp"

using namespace duetfair;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

std::vector<double> uniform_losses(Rng& rng, std::size_t n) {
  std::vector<double> l(n);
  for (double& x : l) x = rng.uniform();
  return l;
}

double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// Small cohort for gradient and identity checks: three populated groups.
Cohort toy_cohort(std::uint64_t seed) {
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

// --- 1 ---------------------------------------------------------------------

Outcome es_reproduction() {
  const auto t0 = Clock::now();
  const double rim = equity_scaled(0.816, std::vector<double>{0.780, 0.782, 0.827});
  const double t3 = equity_scaled(0.665, std::vector<double>{0.758, 0.620, 0.689, 0.758});
  const double secs = seconds_since(t0);
  const bool pass = std::abs(rim - 0.755) <= 0.0005 && std::abs(t3 - 0.530) <= 0.0005 && secs < 1.0;
  return {pass, format("ES %.4f (0.755), %.4f (0.530), %.3fs", rim, t3, secs)};
}

// --- 2 ---------------------------------------------------------------------

Outcome dual_primal() {
  const auto t0 = Clock::now();
  const double rhos[] = {0.01, 0.05, 0.1, 0.3, 0.7};
  Rng rng(2);
  std::size_t agree = 0;
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.below(5));
    const auto l = uniform_losses(rng, n);
    const double rho = rhos[rng.below(5)];
    const double err =
        std::abs(solve_robust_risk(l, rho).value - brute_force_primal(l, rho).value);
    worst = std::max(worst, err);
    if (err <= 1e-6) ++agree;
  }
  const double secs = seconds_since(t0);
  return {agree == 200 && secs < 30.0,
          format("%zu/200 within 1e-6, max error %.2e, %.1fs", agree, worst, secs)};
}

// --- 3 ---------------------------------------------------------------------

Outcome rho_zero_reduction() {
  const auto t0 = Clock::now();
  const Cohort cohort = generate_cohort(SynthConfig::benchmark(0));
  const ModelConfig mc = model_config_for(cohort);
  TrainConfig tc;
  tc.epochs = 50;  // full batch: one step per epoch
  tc.seed = 0;

  ObjectiveConfig erm;
  erm.variant = ObjectiveVariant::kErm;
  std::vector<std::vector<double>> erm_params;
  std::vector<double> erm_values;
  train(cohort, mc, erm, tc, [&](std::size_t, const ModelParams& p, const ObjectiveEvaluation& e) {
    erm_params.emplace_back(p.flat().begin(), p.flat().end());
    erm_values.push_back(e.value);
  });

  ObjectiveConfig fair;
  fair.variant = ObjectiveVariant::kFairDro;
  fair.robustness.default_rho = 0.0;
  fair.aggregation.mode = AggregationMode::kFrequency;
  double worst_param = 0.0, worst_value = 0.0;
  std::size_t steps = 0;
  train(cohort, mc, fair, tc, [&](std::size_t step, const ModelParams& p,
                                  const ObjectiveEvaluation& e) {
    ++steps;
    if (step >= erm_params.size()) return;
    for (std::size_t i = 0; i < p.size(); ++i) {
      worst_param = std::max(worst_param, std::abs(p.flat()[i] - erm_params[step][i]));
    }
    worst_value = std::max(worst_value, std::abs(e.value - erm_values[step]));
  });
  const double secs = seconds_since(t0);
  const bool pass = steps == 50 && erm_params.size() == 50 && worst_param <= 1e-10 &&
                    worst_value <= 1e-10 && secs < 120.0;
  return {pass, format("%zu steps, max |dparam| %.2e, max |dvalue| %.2e, %.1fs", steps,
                       worst_param, worst_value, secs)};
}

// --- 4 ---------------------------------------------------------------------

Outcome boundary_case() {
  Rng rng(4);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.below(30));
    auto l = uniform_losses(rng, n);
    // Plant tied maxima on some instances.
    const std::size_t ties = k % 3 == 0 ? 1 + static_cast<std::size_t>(rng.below(n - 1)) : 0;
    const double top = *std::max_element(l.begin(), l.end());
    for (std::size_t t = 0; t < ties; ++t) l[rng.below(n)] = top;
    const auto m = static_cast<double>(std::count(l.begin(), l.end(), top));
    const double rho = std::log(static_cast<double>(n) / m) + (k % 2 == 0 ? 0.0 : rng.uniform());
    worst = std::max(worst, std::abs(solve_robust_risk(l, rho).value - top));
  }
  return {worst <= 1e-9, format("50 instances, max |value - max loss| %.2e", worst)};
}

// --- 5 ---------------------------------------------------------------------

Outcome monotone_sandwich() {
  Rng rng(5);
  std::size_t violations = 0;
  for (int k = 0; k < 100; ++k) {
    const auto l = uniform_losses(rng, 2 + static_cast<std::size_t>(rng.below(40)));
    const double mean = std::accumulate(l.begin(), l.end(), 0.0) / static_cast<double>(l.size());
    const double top = *std::max_element(l.begin(), l.end());
    double prev = -1.0;
    for (int j = 0; j <= 20; ++j) {
      const double v = solve_robust_risk(l, 0.05 * j).value;
      if (v < prev - 1e-10 || v < mean - 1e-10 || v > top + 1e-10) ++violations;
      prev = v;
    }
  }
  return {violations == 0, format("100 vectors x 21 radii, %zu violations", violations)};
}

// --- 6 ---------------------------------------------------------------------

Outcome danskin_check() {
  const auto t0 = Clock::now();
  const Cohort cohort = toy_cohort(6);
  ModelConfig mc = model_config_for(cohort);
  mc.feature_dim = 4;
  const auto partition = build_partition(cohort);
  ObjectiveConfig cfg;
  cfg.variant = ObjectiveVariant::kFairDro;
  cfg.robustness.default_rho = 0.2;

  std::size_t points = 0, checked = 0, failed = 0;
  double worst = 0.0;
  const std::size_t num_params = ModelParams::zeros(mc).size();
  for (std::uint64_t seed = 100; points < 3 && seed < 200; ++seed) {
    const ModelParams params = random_params(mc, seed);
    const auto s = smoothness(cohort.samples, params, mc);
    if (s.min_topk_margin <= 1e-4 || s.min_clip_margin <= 1e-4) continue;
    const auto lg = loss_and_grad(cohort.samples, params, mc);
    const auto ev = aggregate_objective(lg.losses, partition, cfg);
    if (!std::all_of(ev.per_group.begin(), ev.per_group.end(),
                     [](const GroupTerm& t) { return t.robust && t.robust->interior(); })) {
      continue;
    }
    ++points;
    const auto grad = objective_gradient(ev, lg.gradients);
    std::vector<double> x(params.flat().begin(), params.flat().end());
    auto value = [&](std::size_t j, double xj) {
      std::vector<double> y = x;
      y[j] = xj;
      return aggregate_objective(batch_losses(cohort.samples, ModelParams(params.layout(), y), mc),
                                 partition, cfg)
          .value;
    };
    Rng rng(seed, 1);
    for (int t = 0; t < 20; ++t) {
      const auto j = static_cast<std::size_t>(rng.below(x.size()));
      const double fd = (value(j, x[j] + 1e-5) - value(j, x[j] - 1e-5)) / 2e-5;
      const double err = rel_error(grad[j], fd);
      worst = std::max(worst, err);
      ++checked;
      if (!(err <= 1e-4)) ++failed;
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = points == 3 && checked == 60 && failed == 0 && num_params <= 2000 && secs < 120;
  return {pass, format("%zu params, %zu points, %zu coordinates, max rel error %.2e, %.1fs",
                       num_params, points, checked, worst, secs)};
}

// --- 7 ---------------------------------------------------------------------

std::vector<double> simplex(Rng& rng, std::size_t n) {
  std::vector<double> w(n);
  for (double& x : w) x = -std::log(1.0 - rng.uniform());
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

Outcome two_level_collapse() {
  Rng rng(7);
  double worst_value = 0.0, worst_grad = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Cohort cohort = toy_cohort(700 + k);
    ModelConfig mc = model_config_for(cohort);
    mc.feature_dim = 3;
    const auto partition = build_partition(cohort);
    const auto lg = loss_and_grad(cohort.samples, random_params(mc, 7000 + k), mc);

    TwoLevelWeights w;
    w.alpha = simplex(rng, partition.num_groups());
    for (const auto& members : partition.index_sets) w.beta.push_back(simplex(rng, members.size()));

    // Nested form: sum_g alpha_g sum_{i in g} beta_i (l_i, grad l_i).
    double nested_value = 0.0;
    std::vector<double> nested_grad(lg.gradients.num_params(), 0.0);
    for (std::size_t g = 0; g < partition.num_groups(); ++g) {
      double inner_value = 0.0;
      std::vector<double> inner_grad(nested_grad.size(), 0.0);
      for (std::size_t r = 0; r < partition.index_sets[g].size(); ++r) {
        const std::size_t i = partition.index_sets[g][r];
        inner_value += w.beta[g][r] * lg.losses[i];
        const auto row = lg.gradients.sample(i);
        for (std::size_t p = 0; p < row.size(); ++p) inner_grad[p] += w.beta[g][r] * row[p];
      }
      nested_value += w.alpha[g] * inner_value;
      for (std::size_t p = 0; p < nested_grad.size(); ++p) {
        nested_grad[p] += w.alpha[g] * inner_grad[p];
      }
    }

    const auto c = composite_sample_weights(w, partition);
    double flat_value = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) flat_value += c[i] * lg.losses[i];
    const auto flat_grad = lg.gradients.combine(c);
    worst_value = std::max(worst_value, std::abs(flat_value - nested_value));
    for (std::size_t p = 0; p < flat_grad.size(); ++p) {
      worst_grad = std::max(worst_grad, std::abs(flat_grad[p] - nested_grad[p]));
    }
  }
  return {worst_value <= 1e-10 && worst_grad <= 1e-10,
          format("50 weightings, max |dvalue| %.2e, max |dgrad| %.2e", worst_value, worst_grad)};
}

// --- 8 ---------------------------------------------------------------------

Outcome residual_identity() {
  const Cohort cohort = generate_cohort(SynthConfig::benchmark(8));
  ModelConfig with = model_config_for(cohort);
  ModelConfig without = with;
  without.use_dmoe = false;
  ModelParams moe = ModelParams::initialize(with, 8);
  for (const ParamBlock& b : moe.layout()) {
    if (b.name.starts_with("expert") || b.name.starts_with("gate")) {
      for (double& v : moe.block(b.name)) v = 0.0;
    }
  }
  ModelParams plain = ModelParams::zeros(without);
  for (const ParamBlock& b : plain.layout()) {
    const auto src = moe.block(b.name);
    std::copy(src.begin(), src.end(), plain.block(b.name).begin());
  }
  Rng rng(8);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Sample& s = cohort.samples[rng.below(cohort.samples.size())];
    const PredictionMap a = forward(s, moe, with);
    const PredictionMap b = forward(s, plain, without);
    for (std::size_t i = 0; i < a.probabilities.values().size(); ++i) {
      worst = std::max(worst, std::abs(a.probabilities.values()[i] - b.probabilities.values()[i]));
    }
  }
  return {worst <= 1e-12, format("20 samples, max |dp| %.2e", worst)};
}

// --- 9 ---------------------------------------------------------------------

// Study schedule, shared by all four methods.
constexpr std::size_t kStudyEpochs = 100;
constexpr double kStudyLearningRate = 0.075;
constexpr int kStudySeeds = 10;

struct StudyRow {
  double worst = 0.0;
  double hard = 0.0;
};

StudyRow study_run(const Cohort& train_cohort, const Cohort& test_cohort, bool dmoe,
                   ObjectiveVariant variant, std::uint64_t seed) {
  ModelConfig mc = model_config_for(train_cohort);
  mc.use_dmoe = dmoe;
  ObjectiveConfig oc;
  oc.variant = variant;
  TrainConfig tc;
  tc.epochs = kStudyEpochs;
  tc.learning_rate = kStudyLearningRate;
  tc.seed = seed;
  const auto result = train(train_cohort, mc, oc, tc);
  const auto report = evaluate(test_cohort, result.params, mc, std::nullopt);
  return {report.worst_group_dice.value, report.hard.dice};
}

Outcome dual_axis_study() {
  const auto t0 = Clock::now();
  double gap_sum = 0.0;
  int hard_wins = 0, both_wins = 0;
  std::printf("  seed   ERM worst/hard   dMoE-ERM worst   SG-DRO worst   FairDRO worst/hard\n");
  for (int s = 0; s < kStudySeeds; ++s) {
    const Cohort train_cohort = generate_cohort(SynthConfig::benchmark(1000 + s));
    const Cohort test_cohort = generate_cohort(SynthConfig::benchmark(5000 + s));
    const auto seed = static_cast<std::uint64_t>(s);
    const StudyRow erm = study_run(train_cohort, test_cohort, false, ObjectiveVariant::kErm, seed);
    const StudyRow moe = study_run(train_cohort, test_cohort, true, ObjectiveVariant::kErm, seed);
    const StudyRow sg = study_run(train_cohort, test_cohort, false, ObjectiveVariant::kFairDro, seed);
    const StudyRow fair =
        study_run(train_cohort, test_cohort, true, ObjectiveVariant::kFairDro, seed);
    gap_sum += fair.worst - erm.worst;
    if (fair.hard > erm.hard) ++hard_wins;
    if (fair.worst >= moe.worst && fair.worst >= sg.worst) ++both_wins;
    std::printf("  %4d   %.3f / %.3f    %.3f            %.3f          %.3f / %.3f\n", s, erm.worst,
                erm.hard, moe.worst, sg.worst, fair.worst, fair.hard);
    std::fflush(stdout);
  }
  const double gap = gap_sum / kStudySeeds;
  const double secs = seconds_since(t0);
  const bool a = gap >= 0.02, b = hard_wins >= 8, c = both_wins >= 7;
  return {a && b && c && secs < 900.0,
          format("(a) worst-group gap %+.3f %s; (b) hard subset %d/10 %s; (c) beats both "
                 "ablations %d/10 %s; %.0fs",
                 gap, a ? "ok" : "short", hard_wins, b ? "ok" : "short", both_wins,
                 c ? "ok" : "short", secs)};
}

// --- 10 --------------------------------------------------------------------

Outcome bootstrap_checks() {
  BootstrapConfig cfg;
  cfg.resamples = 1000;
  cfg.seed = 10;
  const std::vector<double> constant(200, 0.625);
  const Interval flat = bootstrap_ci(constant, {}, Statistic::kMean, cfg);
  const bool degenerate = flat.lo == 0.625 && flat.hi == 0.625;

  Rng rng(10);
  std::vector<double> values(500);
  std::vector<SubgroupId> groups(500);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = rng.uniform();
    groups[i] = SubgroupId{static_cast<std::uint32_t>(rng.below(4))};
  }
  const auto t0 = Clock::now();
  const Interval first = bootstrap_ci(values, groups, Statistic::kMean, cfg);
  const double secs = seconds_since(t0);
  const Interval second = bootstrap_ci(values, groups, Statistic::kMean, cfg);
  const Interval es1 = bootstrap_ci(values, groups, Statistic::kEquityScaled, cfg);
  const Interval es2 = bootstrap_ci(values, groups, Statistic::kEquityScaled, cfg);
  const bool identical = std::memcmp(&first, &second, sizeof first) == 0 &&
                         std::memcmp(&es1, &es2, sizeof es1) == 0;
  return {degenerate && identical && secs < 5.0,
          format("constant CI [%g, %g], repeat identical %s, 1000x500 in %.3fs", flat.lo, flat.hi,
                 identical ? "yes" : "no", secs)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  const std::vector<Criterion> criteria{
      {1, "ES-metric reproduction", es_reproduction},
      {2, "KL-DRO dual/primal equivalence", dual_primal},
      {3, "rho=0 reduction to ERM", rho_zero_reduction},
      {4, "boundary case", boundary_case},
      {5, "monotonicity and sandwich", monotone_sandwich},
      {6, "Danskin gradient check", danskin_check},
      {7, "two-level collapse identity", two_level_collapse},
      {8, "residual identity", residual_identity},
      {9, "synthetic dual-axis study", dual_axis_study},
      {10, "bootstrap degeneracy and determinism", bootstrap_checks},
  };
  bool all = true;
  bool ran = false;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ran = true;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %d %s: %s (%s)\n", c.id, o.pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  if (!ran) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return all ? 0 : 1;
}

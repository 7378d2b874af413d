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

#include "commands.hpp"

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "config.hpp"
#include "duetfair/duetfair.hpp"
#include "json.hpp"
#include "manifest.hpp"
#include "oracle.hpp"
#include "report.hpp"

namespace duetfair::cli {
namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> objective;
  std::optional<double> rho;
  std::optional<double> lambda_rob;
  bool no_dmoe = false;
  std::string cohort;
  std::string params;
  std::vector<std::string> inputs;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Experiment config (JSON)");
  cmd->add_option("--seed", f.seed, "Seed for data, training and bootstrap");
  cmd->add_option("--out", f.out, "Output directory");
}

void add_model_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--objective", f.objective, "erm | fairdro | groupdro | fairdro-penalty");
  cmd->add_option("--rho", f.rho, "KL radius for every group");
  cmd->add_option("--lambda-rob", f.lambda_rob, "Penalty weight");
  cmd->add_flag("--no-dmoe", f.no_dmoe, "Disable the mixture-of-experts layer");
  cmd->add_option("--cohort", f.cohort, "Cohort JSON instead of generating one");
}

ExperimentConfig resolve(const Flags& f) {
  Overrides o;
  o.seed = f.seed;
  if (f.out) o.out = *f.out;
  o.objective = f.objective;
  o.rho = f.rho;
  o.lambda_rob = f.lambda_rob;
  o.no_dmoe = f.no_dmoe;
  return load_config(f.config, o);
}

Cohort load_or_generate(const std::string& path, const SynthConfig& synth) {
  Cohort cohort = path.empty() ? generate_cohort(synth) : cohort_from_json(read_file(path));
  const auto violations = validate_cohort(cohort);
  if (!violations.empty()) {
    throw Error("cohort is invalid: " + violations.front().message);
  }
  return cohort;
}

SynthConfig test_synth(const ExperimentConfig& c) {
  SynthConfig s = c.synth;
  s.seed = c.test_seed;
  return s;
}

int gen_data(const Flags& f, std::ostream& out) {
  const ExperimentConfig c = resolve(f);
  RunManifest manifest("gen-data", c.run_name, config_to_json(c), c.output_dir);
  manifest.emit("cohort.json", cohort_to_json(generate_cohort(c.synth)));
  manifest.emit("test_cohort.json", cohort_to_json(generate_cohort(test_synth(c))));
  out << "wrote " << manifest.finish().string() << '\n';
  return kExitOk;
}

int train_cmd(const Flags& f, std::ostream& out) {
  const ExperimentConfig c = resolve(f);
  const Cohort cohort = load_or_generate(f.cohort, c.synth);
  const ModelConfig mc = model_config_for(cohort, c.model);
  RunManifest manifest("train", c.run_name, config_to_json(c), c.output_dir);
  const TrainResult result = train(cohort, mc, c.objective, c.train);
  manifest.emit("params.json", params_to_json(result.params));
  manifest.emit("train_log.jsonl", train_log_to_jsonl(result.log));
  const auto& last = result.log.epochs.back();
  out << "epoch " << last.epoch << " objective " << last.objective << "\nwrote "
      << manifest.finish().string() << '\n';
  return kExitOk;
}

int eval_cmd(const Flags& f, std::ostream& out) {
  const ExperimentConfig c = resolve(f);
  const Cohort cohort = load_or_generate(f.cohort, test_synth(c));
  const ModelConfig mc = model_config_for(cohort, c.model);
  const auto params_path =
      f.params.empty() ? c.output_dir / "params.json" : std::filesystem::path(f.params);
  const ModelParams params = params_from_json(read_file(params_path));
  if (!params.matches(mc)) {
    throw ConfigError("params in '" + params_path.string() +
                      "' do not match the model config (check model.* and --no-dmoe)");
  }
  RunManifest manifest("eval", c.run_name, config_to_json(c), c.output_dir);
  MetricsReport report = evaluate(cohort, params, mc, c.bootstrap);
  report.method = c.run_name;
  manifest.emit("report.json", report_to_json(report));
  manifest.emit("per_sample.csv", per_sample_csv(report));
  out << "dice " << report.population.dice << " es_dice " << report.es_dice << " worst "
      << report.group_labels.at(report.worst_group_dice.group.index()) << ' '
      << report.worst_group_dice.value << "\nwrote " << manifest.finish().string() << '\n';
  return kExitOk;
}

int oracle_cmd(const Flags& f, std::ostream& out, std::ostream& err) {
  const ExperimentConfig c = resolve(f);
  OracleOptions o;
  o.seed = c.synth.seed;
  const OracleOutcome result = run_oracle(o);
  RunManifest manifest("oracle", c.run_name, config_to_json(c), c.output_dir);
  manifest.emit("oracle.json", result.report_json);
  manifest.finish();
  out << "dual/primal " << result.agreements << '/' << result.instances << " agree\n";
  if (!result.passed) {
    err << "oracle failure; report:\n" << result.report_json;
    return kExitOracleFailure;
  }
  out << "oracle passed\n";
  return kExitOk;
}

int report_cmd(const Flags& f, std::ostream& out) {
  std::vector<MetricsReport> reports;
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& path : f.inputs) {
    const std::string text = read_file(path);
    reports.push_back(report_from_json(text));
    inputs.push_back({{"path", path}, {"sha256", sha256_hex(text)}});
  }
  std::filesystem::path dir;
  if (f.out) {
    dir = *f.out;
  } else if (const char* env = std::getenv("DUETFAIR_OUT"); env != nullptr && *env != '\0') {
    dir = env;
  } else {
    dir = "duetfair_report";
  }
  RunManifest manifest("report", "report", nlohmann::json{{"inputs", inputs}}.dump(), dir);
  emit_report(std::move(reports), manifest);
  out << "wrote " << manifest.finish().string() << '\n';
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"duetfair: subgroup-robust training and fairness reports"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  Flags f;

  auto* gen = app.add_subcommand("gen-data", "Generate train and test cohorts");
  add_common(gen, f);
  auto* tr = app.add_subcommand("train", "Train a model");
  add_common(tr, f);
  add_model_flags(tr, f);
  auto* ev = app.add_subcommand("eval", "Evaluate trained params on the test cohort");
  add_common(ev, f);
  add_model_flags(ev, f);
  ev->add_option("--params", f.params, "Params JSON (default <out>/params.json)");
  auto* orc = app.add_subcommand("oracle", "Dual/primal and gradient verification sweeps");
  add_common(orc, f);
  auto* rep = app.add_subcommand("report", "Compare eval reports");
  rep->add_option("reports", f.inputs, "report.json files")->required();
  rep->add_option("--out", f.out, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (gen->parsed()) return gen_data(f, out);
    if (tr->parsed()) return train_cmd(f, out);
    if (ev->parsed()) return eval_cmd(f, out);
    if (orc->parsed()) return oracle_cmd(f, out, err);
    return report_cmd(f, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

}  // namespace duetfair::cli

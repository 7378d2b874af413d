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

#include "config.hpp"

#include <cstdlib>
#include <set>

#include "json.hpp"

namespace duetfair::cli {
namespace {

using nlohmann::json;

// Typed access to one JSON object that rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key " + where(key.c_str()));
    }
  }

  std::string where(const char* key = nullptr) const {
    std::string p = path_.empty() ? "" : path_;
    if (key != nullptr) p += (p.empty() ? "" : ".") + std::string(key);
    return "'" + (p.empty() ? std::string("<root>") : p) + "'";
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Pairs>
void read_pairs(Section& s, const char* key, Pairs& out) {
  std::vector<std::vector<double>> raw;
  s.read(key, raw);
  if (raw.empty()) return;
  out.clear();
  for (const auto& p : raw) {
    if (p.size() != 2) throw ConfigError(s.where(key) + " entries must be [a, b] pairs");
    out.emplace_back(p[0], p[1]);
  }
}

void parse_synth(const json& j, ExperimentConfig& c, bool& test_seed_given) {
  Section s(j, "synth");
  std::uint64_t seed = 0;
  s.read("seed", seed);
  // Benchmark values for anything the file leaves out.
  SynthConfig& out = c.synth;
  out = SynthConfig::benchmark(seed);
  s.read("num_groups", out.num_groups);
  s.read("samples_per_group", out.samples_per_group);
  s.read("grid_size", out.grid_size);
  read_pairs(s, "blob_center_shift", out.blob_center_shift);
  read_pairs(s, "blob_radius_range", out.blob_radius_range);
  std::uint32_t hard_group = out.hard_group.value;
  s.read("hard_group", hard_group);
  out.hard_group = SubgroupId{hard_group};
  s.read("hard_fraction", out.hard_fraction);
  s.read("hard_noise_sigma", out.hard_noise_sigma);
  s.read("hard_contrast", out.hard_contrast);
  s.read("base_noise_sigma", out.base_noise_sigma);
  s.read("foreground_intensity", out.foreground_intensity);
  s.read("background_level", out.background_level);
  s.read("center_jitter", out.center_jitter);
  s.read("attribute_name", out.attribute_name);
  s.read("group_labels", out.group_labels);
  c.test_seed = seed + 1;
  test_seed_given = s.child("test_seed") != nullptr;
  s.read("test_seed", c.test_seed);
  s.finish();
}

void parse_model(const json& j, ModelConfig& m) {
  Section s(j, "model");
  s.read("feature_dim", m.feature_dim);
  s.read("num_experts", m.num_experts);
  s.read("top_k", m.top_k);
  s.read("use_dmoe", m.use_dmoe);
  s.finish();
}

void parse_objective(const json& j, ObjectiveConfig& o) {
  Section s(j, "objective");
  std::string variant{to_string(o.variant)};
  s.read("variant", variant);
  try {
    o.variant = parse_variant(variant);
  } catch (const Error& e) {
    throw ConfigError(s.where("variant") + ": " + e.what());
  }
  if (const json* rho = s.child("rho")) {
    if (rho->is_number()) {
      o.robustness.default_rho = rho->get<double>();
      o.robustness.per_group.clear();
    } else if (rho->is_array()) {
      s.read("rho", o.robustness.per_group);
    } else {
      throw ConfigError(s.where("rho") + " must be a number or a list of numbers");
    }
  }
  s.read("lambda_rob", o.lambda_rob);
  if (const json* agg = s.child("aggregation")) {
    if (agg->is_string()) {
      const auto mode = agg->get<std::string>();
      if (mode == "uniform") {
        o.aggregation = {AggregationMode::kUniform, {}};
      } else if (mode == "frequency") {
        o.aggregation = {AggregationMode::kFrequency, {}};
      } else {
        throw ConfigError(s.where("aggregation") + " must be \"uniform\", \"frequency\" or a list");
      }
    } else {
      o.aggregation.mode = AggregationMode::kExplicit;
      s.read("aggregation", o.aggregation.w);
    }
  }
  s.read("robust_min_members", o.robust_min_members);
  s.finish();
}

void parse_train(const json& j, TrainConfig& t) {
  Section s(j, "train");
  s.read("epochs", t.epochs);
  s.read("learning_rate", t.learning_rate);
  s.read("momentum", t.momentum);
  s.read("batch_size", t.batch_size);
  s.read("seed", t.seed);
  s.read("eval_every", t.eval_every);
  s.finish();
}

void parse_bootstrap(const json& j, BootstrapConfig& b) {
  Section s(j, "bootstrap");
  s.read("resamples", b.resamples);
  s.read("level", b.level);
  s.read("seed", b.seed);
  s.finish();
}

// Re-throws library validation errors as configuration errors.
template <typename F>
void as_config_error(const char* section, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string(section) + ": " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (run_name.empty()) throw ConfigError("run_name must not be empty");
  as_config_error("synth", [&] { synth.validate(); });
  ModelConfig m = model;
  m.num_groups = synth.num_groups;
  m.height = m.width = synth.grid_size;
  as_config_error("model", [&] { m.validate(); });
  as_config_error("objective", [&] { objective.validate(synth.num_groups); });
  as_config_error("train", [&] { train.validate(); });
  as_config_error("bootstrap", [&] { bootstrap.validate(); });
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Section root(j, "");
  root.read("run_name", c.run_name);
  std::string out;
  root.read("output_dir", out);
  c.output_dir = out;
  bool test_seed_given = false;
  if (const json* s = root.child("synth")) {
    parse_synth(*s, c, test_seed_given);
  }
  if (const json* m = root.child("model")) parse_model(*m, c.model);
  if (const json* o = root.child("objective")) parse_objective(*o, c.objective);
  if (const json* t = root.child("train")) parse_train(*t, c.train);
  if (const json* b = root.child("bootstrap")) parse_bootstrap(*b, c.bootstrap);
  root.finish();
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  const SynthConfig& s = c.synth;
  auto pairs = [](const std::vector<std::pair<double, double>>& v) {
    json a = json::array();
    for (const auto& [x, y] : v) a.push_back({x, y});
    return a;
  };
  json rho = c.objective.robustness.per_group.empty() ? json(c.objective.robustness.default_rho)
                                                      : json(c.objective.robustness.per_group);
  json aggregation;
  switch (c.objective.aggregation.mode) {
    case AggregationMode::kUniform: aggregation = "uniform"; break;
    case AggregationMode::kFrequency: aggregation = "frequency"; break;
    case AggregationMode::kExplicit: aggregation = c.objective.aggregation.w; break;
  }
  json j = {
      {"run_name", c.run_name},
      {"output_dir", c.output_dir.string()},
      {"synth",
       {{"num_groups", s.num_groups},
        {"samples_per_group", s.samples_per_group},
        {"grid_size", s.grid_size},
        {"blob_center_shift", pairs(s.blob_center_shift)},
        {"blob_radius_range", pairs(s.blob_radius_range)},
        {"hard_group", s.hard_group.value},
        {"hard_fraction", s.hard_fraction},
        {"hard_noise_sigma", s.hard_noise_sigma},
        {"hard_contrast", s.hard_contrast},
        {"base_noise_sigma", s.base_noise_sigma},
        {"foreground_intensity", s.foreground_intensity},
        {"background_level", s.background_level},
        {"center_jitter", s.center_jitter},
        {"attribute_name", s.attribute_name},
        {"group_labels", s.group_labels},
        {"seed", s.seed},
        {"test_seed", c.test_seed}}},
      {"model",
       {{"feature_dim", c.model.feature_dim},
        {"num_experts", c.model.num_experts},
        {"top_k", c.model.top_k},
        {"use_dmoe", c.model.use_dmoe}}},
      {"objective",
       {{"variant", std::string(to_string(c.objective.variant))},
        {"rho", rho},
        {"lambda_rob", c.objective.lambda_rob},
        {"aggregation", aggregation},
        {"robust_min_members", c.objective.robust_min_members}}},
      {"train",
       {{"epochs", c.train.epochs},
        {"learning_rate", c.train.learning_rate},
        {"momentum", c.train.momentum},
        {"batch_size", c.train.batch_size},
        {"seed", c.train.seed},
        {"eval_every", c.train.eval_every}}},
      {"bootstrap",
       {{"resamples", c.bootstrap.resamples},
        {"level", c.bootstrap.level},
        {"seed", c.bootstrap.seed}}},
  };
  return j.dump(2);
}

ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& o) {
  ExperimentConfig c;
  if (!path.empty()) {
    std::string text;
    try {
      text = read_file(path);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    c = parse_config(text);
  }
  if (c.output_dir.empty()) {
    if (const char* env = std::getenv("DUETFAIR_OUT"); env != nullptr && *env != '\0') {
      c.output_dir = env;
    }
  }
  if (o.out) c.output_dir = *o.out;
  if (c.output_dir.empty()) c.output_dir = "duetfair_out";
  if (o.seed) {
    c.synth.seed = *o.seed;
    c.test_seed = *o.seed + 1;
    c.train.seed = *o.seed;
    c.bootstrap.seed = *o.seed;
  }
  if (o.objective) {
    try {
      c.objective.variant = parse_variant(*o.objective);
    } catch (const Error& e) {
      throw ConfigError(std::string("--objective: ") + e.what());
    }
  }
  if (o.rho) {
    if (!(*o.rho >= 0.0) || !std::isfinite(*o.rho)) {
      throw ConfigError("--rho must be a finite value >= 0, got " + std::to_string(*o.rho));
    }
    c.objective.robustness.default_rho = *o.rho;
    c.objective.robustness.per_group.clear();
  }
  if (o.lambda_rob) {
    if (!(*o.lambda_rob >= 0.0) || !std::isfinite(*o.lambda_rob)) {
      throw ConfigError("--lambda-rob must be a finite value >= 0, got " +
                        std::to_string(*o.lambda_rob));
    }
    c.objective.lambda_rob = *o.lambda_rob;
  }
  if (o.no_dmoe) c.model.use_dmoe = false;
  c.validate();
  return c;
}

}  // namespace duetfair::cli

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

#ifndef DUETFAIR_TOOLS_CONFIG_HPP_
#define DUETFAIR_TOOLS_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "duetfair/duetfair.hpp"

namespace duetfair::cli {

/// Raised for invalid configuration or command-line input (exit status 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  std::string run_name = "run";
  std::filesystem::path output_dir;
  SynthConfig synth = SynthConfig::benchmark(0);
  std::uint64_t test_seed = 1;  // seed of the held-out evaluation cohort
  ModelConfig model;
  ObjectiveConfig objective;
  TrainConfig train;
  BootstrapConfig bootstrap;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Parses a config document. Every key is optional; unknown keys are errors.
/// Synth fields not given fall back to the benchmark cohort.
ExperimentConfig parse_config(std::string_view text);

/// Canonical JSON for `config`; parse_config(config_to_json(c)) == c.
std::string config_to_json(const ExperimentConfig& config);

/// Command-line overrides, applied after the file and the environment.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::string> objective;
  std::optional<double> rho;
  std::optional<double> lambda_rob;
  bool no_dmoe = false;
};

/// Loads `path` (or the defaults when empty), applies DUETFAIR_OUT when the
/// file names no output_dir, then `overrides`, then validates.
ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides);

}  // namespace duetfair::cli

#endif  // DUETFAIR_TOOLS_CONFIG_HPP_

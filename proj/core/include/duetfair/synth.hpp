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

#ifndef DUETFAIR_SYNTH_HPP_
#define DUETFAIR_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "duetfair/types.hpp"

namespace duetfair {

/// Synthetic cohort recipe. Each sample is one elliptical blob on a noisy
/// background; groups differ in blob placement, size and background level,
/// and a seeded subset of `hard_group` gets low-contrast, noisy foreground.
struct SynthConfig {
  std::size_t num_groups = 4;
  std::vector<std::size_t> samples_per_group{26, 227, 425, 43};
  std::size_t grid_size = 16;
  std::vector<std::pair<double, double>> blob_center_shift;  // (dy, dx) per group
  std::vector<std::pair<double, double>> blob_radius_range;  // (min, max) per group
  SubgroupId hard_group{2};
  double hard_fraction = 0.3;
  double hard_noise_sigma = 0.15;
  double hard_contrast = 0.4;
  double base_noise_sigma = 0.05;
  std::uint64_t seed = 0;

  // Appearance knobs beyond the shift/size axes.
  double foreground_intensity = 0.85;
  std::vector<double> background_level;  // per group
  double center_jitter = 1.0;             // std-dev of blob center, pixels

  std::string attribute_name = "t_stage";
  std::vector<std::string> group_labels;

  /// The benchmark cohort: four tumour-stage-like groups with 4/31/59/6%
  /// imbalance and the hard subset planted inside the largest group.
  static SynthConfig benchmark(std::uint64_t seed = 0);

  /// Throws Error describing the first violated invariant.
  void validate() const;
};

Cohort generate_cohort(const SynthConfig& config);

/// Positions (within the hard group, ascending) that receive the hard
/// treatment. Exposed for tests.
std::vector<std::size_t> select_hard_members(std::size_t group_size, std::size_t count,
                                             std::uint64_t seed);

}  // namespace duetfair

#endif  // DUETFAIR_SYNTH_HPP_

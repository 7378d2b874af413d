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

#include "duetfair/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "duetfair/rng.hpp"

namespace duetfair {
namespace {

constexpr std::uint64_t kHardSelectionStream = 0xA5A5'0000'0000'0001ULL;

std::size_t hard_count(const SynthConfig& c) {
  const auto n = static_cast<double>(c.samples_per_group[c.hard_group.index()]);
  return static_cast<std::size_t>(std::llround(c.hard_fraction * n));
}

Sample make_sample(const SynthConfig& c, std::size_t group, std::int64_t sample_id,
                   bool hard) {
  const std::size_t size = c.grid_size;
  Rng rng(c.seed, static_cast<std::uint64_t>(sample_id));

  const double mid = (static_cast<double>(size) - 1.0) / 2.0;
  const double lo = 2.0;
  const double hi = static_cast<double>(size) - 3.0;
  const auto [shift_y, shift_x] = c.blob_center_shift[group];
  const double cy = std::clamp(mid + shift_y + c.center_jitter * rng.normal(), lo, hi);
  const double cx = std::clamp(mid + shift_x + c.center_jitter * rng.normal(), lo, hi);
  const auto [rmin, rmax] = c.blob_radius_range[group];
  const double ry = rng.uniform(rmin, rmax);
  const double rx = rng.uniform(rmin, rmax);
  const double angle = rng.uniform(0.0, std::numbers::pi);
  const double cos_a = std::cos(angle);
  const double sin_a = std::sin(angle);

  Sample s;
  s.group = SubgroupId{static_cast<std::uint32_t>(group)};
  s.sample_id = sample_id;
  s.hard_flag = hard;
  s.image = Grid(size, size);
  s.mask = Grid(size, size);

  const double background = c.background_level[group];
  const double foreground =
      hard ? c.foreground_intensity * c.hard_contrast : c.foreground_intensity;
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t col = 0; col < size; ++col) {
      const double dy = static_cast<double>(r) - cy;
      const double dx = static_cast<double>(col) - cx;
      const double u = dx * cos_a + dy * sin_a;
      const double v = -dx * sin_a + dy * cos_a;
      const bool inside = (u / rx) * (u / rx) + (v / ry) * (v / ry) <= 1.0;
      s.mask(r, col) = inside ? 1.0 : 0.0;

      double value = inside ? foreground : background;
      value += c.base_noise_sigma * rng.normal();
      if (hard) value += c.hard_noise_sigma * rng.normal();
      s.image(r, col) = std::clamp(value, 0.0, 1.0);
    }
  }
  return s;
}

}  // namespace

SynthConfig SynthConfig::benchmark(std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  c.blob_center_shift = {{-2.0, -2.0}, {0.0, 1.0}, {1.0, 0.0}, {2.0, 2.0}};
  c.blob_radius_range = {{1.5, 3.0}, {2.5, 4.5}, {3.0, 5.0}, {3.5, 5.5}};
  c.background_level = {0.35, 0.10, 0.10, 0.10};
  c.group_labels = {"T1", "T2", "T3", "T4"};
  // Largest group hosts the hard subset.
  const auto largest = std::max_element(c.samples_per_group.begin(), c.samples_per_group.end());
  c.hard_group = SubgroupId{static_cast<std::uint32_t>(largest - c.samples_per_group.begin())};
  return c;
}

void SynthConfig::validate() const {
  if (num_groups < 2) throw Error("synth: num_groups must be >= 2");
  auto check_len = [&](std::size_t len, const char* name) {
    if (len != num_groups) {
      throw Error(std::string("synth: ") + name + " must have one entry per group (" +
                  std::to_string(num_groups) + "), got " + std::to_string(len));
    }
  };
  check_len(samples_per_group.size(), "samples_per_group");
  check_len(blob_center_shift.size(), "blob_center_shift");
  check_len(blob_radius_range.size(), "blob_radius_range");
  check_len(background_level.size(), "background_level");
  check_len(group_labels.size(), "group_labels");
  for (std::size_t g = 0; g < num_groups; ++g) {
    if (samples_per_group[g] == 0) {
      throw Error("synth: group " + std::to_string(g) + " has zero samples");
    }
    const auto [rmin, rmax] = blob_radius_range[g];
    if (!(rmin > 0.0) || !(rmax >= rmin)) {
      throw Error("synth: blob_radius_range for group " + std::to_string(g) +
                  " must satisfy 0 < min <= max");
    }
  }
  if (grid_size < 6) throw Error("synth: grid_size must be >= 6");
  if (hard_group.index() >= num_groups) throw Error("synth: hard_group out of range");
  if (!(hard_fraction >= 0.0 && hard_fraction <= 1.0)) {
    throw Error("synth: hard_fraction must lie in [0,1]");
  }
  if (!(hard_noise_sigma >= 0.0) || !(base_noise_sigma >= 0.0) || !(center_jitter >= 0.0)) {
    throw Error("synth: noise sigmas and center_jitter must be >= 0");
  }
  if (!(hard_contrast > 0.0 && hard_contrast <= 1.0)) {
    throw Error("synth: hard_contrast must lie in (0,1]");
  }
  if (!(foreground_intensity >= 0.0 && foreground_intensity <= 1.0)) {
    throw Error("synth: foreground_intensity must lie in [0,1]");
  }
}

std::vector<std::size_t> select_hard_members(std::size_t group_size, std::size_t count,
                                             std::uint64_t seed) {
  // Partial Fisher-Yates over the group's member positions.
  std::vector<std::size_t> perm(group_size);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed, kHardSelectionStream);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(group_size - i));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(count);
  std::sort(perm.begin(), perm.end());
  return perm;
}

Cohort generate_cohort(const SynthConfig& config) {
  config.validate();
  const std::size_t g_hard = config.hard_group.index();
  const auto hard = select_hard_members(config.samples_per_group[g_hard],
                                        hard_count(config), config.seed);

  Cohort cohort;
  cohort.attribute_name = config.attribute_name;
  cohort.group_labels = config.group_labels;
  cohort.height = config.grid_size;
  cohort.width = config.grid_size;
  cohort.samples.reserve(std::accumulate(config.samples_per_group.begin(),
                                         config.samples_per_group.end(), std::size_t{0}));
  std::int64_t next_id = 0;
  for (std::size_t g = 0; g < config.num_groups; ++g) {
    for (std::size_t k = 0; k < config.samples_per_group[g]; ++k) {
      const bool is_hard = g == g_hard && std::binary_search(hard.begin(), hard.end(), k);
      cohort.samples.push_back(make_sample(config, g, next_id++, is_hard));
    }
  }
  return cohort;
}

}  // namespace duetfair

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

#include "duetfair/types.hpp"

#include <cmath>
#include <set>
#include <unordered_set>

namespace duetfair {

Grid::Grid(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (data_.size() != height_ * width_) {
    throw Error("grid data length " + std::to_string(data_.size()) +
                " does not match " + std::to_string(height_) + "x" +
                std::to_string(width_));
  }
}

LossVector::LossVector(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw Error("loss at position " + std::to_string(i) +
                  " is not a finite non-negative value");
    }
  }
}

std::vector<double> LossVector::gather(std::span<const std::size_t> positions) const {
  std::vector<double> out;
  out.reserve(positions.size());
  for (std::size_t p : positions) out.push_back(values_.at(p));
  return out;
}

GroupPartition build_partition(const Cohort& cohort) {
  if (cohort.samples.empty()) throw Error("empty cohort");
  const std::size_t num_groups = cohort.num_groups();
  GroupPartition partition;
  partition.index_sets.resize(num_groups);
  partition.group_of.reserve(cohort.size());
  for (std::size_t pos = 0; pos < cohort.size(); ++pos) {
    const Sample& s = cohort.samples[pos];
    if (s.group.index() >= num_groups) {
      throw Error("sample " + std::to_string(s.sample_id) + " has group id " +
                  std::to_string(s.group.value) + " but only " +
                  std::to_string(num_groups) + " groups are declared");
    }
    partition.index_sets[s.group.index()].push_back(pos);
    partition.group_of.push_back(s.group);
  }
  const double n = static_cast<double>(cohort.size());
  for (const auto& set : partition.index_sets) {
    partition.sizes.push_back(set.size());
    partition.frequencies.push_back(static_cast<double>(set.size()) / n);
  }
  return partition;
}

std::vector<Violation> validate_cohort(const Cohort& cohort) {
  std::vector<Violation> out;
  std::set<std::string> labels;
  for (const auto& label : cohort.group_labels) {
    if (!labels.insert(label).second) {
      out.push_back({-1, "unique_labels", "group label '" + label + "' is duplicated"});
    }
  }
  std::unordered_set<std::int64_t> ids;
  for (const Sample& s : cohort.samples) {
    const auto id = s.sample_id;
    const std::string who = "sample " + std::to_string(id);
    if (!ids.insert(id).second) {
      out.push_back({id, "unique_sample_id", who + " reuses an existing sample_id"});
    }
    if (s.group.index() >= cohort.num_groups()) {
      out.push_back({id, "group_in_range", who + " has out-of-range group " +
                                               std::to_string(s.group.value)});
    }
    if (s.image.height() != cohort.height || s.image.width() != cohort.width) {
      out.push_back({id, "image_shape", who + " image is not " +
                                            std::to_string(cohort.height) + "x" +
                                            std::to_string(cohort.width)});
    }
    if (!s.image.same_shape(s.mask)) {
      out.push_back({id, "mask_shape", who + " mask shape differs from image shape"});
    }
    for (double v : s.mask.values()) {
      if (v != 0.0 && v != 1.0) {
        out.push_back({id, "binary_mask", who + " mask contains non-binary value " +
                                              std::to_string(v)});
        break;
      }
    }
    for (double v : s.image.values()) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        out.push_back({id, "image_range", who + " image has intensity outside [0,1]"});
        break;
      }
    }
  }
  return out;
}

}  // namespace duetfair

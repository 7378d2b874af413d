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

#ifndef DUETFAIR_TYPES_HPP_
#define DUETFAIR_TYPES_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace duetfair {

/// Base class for every error raised by the library. Callers that need to
/// distinguish user-facing validation failures from bugs catch this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index of a subgroup within the attribute's label list.
struct SubgroupId {
  std::uint32_t value = 0;

  constexpr auto operator<=>(const SubgroupId&) const = default;
  constexpr std::size_t index() const { return value; }
};

/// Row-major 2-D grid of reals.
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, double fill = 0.0)
      : height_(height), width_(width), data_(height * width, fill) {}
  Grid(std::size_t height, std::size_t width, std::vector<double> data);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  double operator()(std::size_t row, std::size_t col) const {
    return data_[row * width_ + col];
  }
  double& operator()(std::size_t row, std::size_t col) {
    return data_[row * width_ + col];
  }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  bool same_shape(const Grid& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// One image with its binary mask and subgroup attribute. `hard_flag` marks
/// synthetic provenance and must only be read by evaluation code.
struct Sample {
  Grid image;
  Grid mask;
  SubgroupId group;
  std::int64_t sample_id = 0;
  bool hard_flag = false;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Cohort {
  std::vector<Sample> samples;
  std::string attribute_name;
  std::vector<std::string> group_labels;
  std::size_t height = 16;
  std::size_t width = 16;

  std::size_t num_groups() const { return group_labels.size(); }
  std::size_t size() const { return samples.size(); }

  friend bool operator==(const Cohort&, const Cohort&) = default;
};

/// Materialized subgroup index sets over a cohort's positions.
struct GroupPartition {
  std::vector<std::vector<std::size_t>> index_sets;
  std::vector<std::size_t> sizes;
  std::vector<double> frequencies;
  /// Group of each position, for O(1) reverse lookup.
  std::vector<SubgroupId> group_of;

  std::size_t num_groups() const { return index_sets.size(); }
  std::size_t num_samples() const { return group_of.size(); }

  friend bool operator==(const GroupPartition&, const GroupPartition&) = default;
};

/// Per-sample losses aligned with cohort order. Values are finite and >= 0.
class LossVector {
 public:
  LossVector() = default;
  explicit LossVector(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Losses restricted to `positions`, in the given order.
  std::vector<double> gather(std::span<const std::size_t> positions) const;

 private:
  std::vector<double> values_;
};

GroupPartition build_partition(const Cohort& cohort);

struct Violation {
  std::int64_t sample_id = -1;  // -1 for cohort-level violations
  std::string rule;
  std::string message;
};

/// Collects every invariant violation; an empty result means the cohort is
/// valid. Never throws.
std::vector<Violation> validate_cohort(const Cohort& cohort);

}  // namespace duetfair

#endif  // DUETFAIR_TYPES_HPP_

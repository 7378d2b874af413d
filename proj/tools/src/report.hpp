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

#ifndef DUETFAIR_TOOLS_REPORT_HPP_
#define DUETFAIR_TOOLS_REPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "duetfair/metrics.hpp"

namespace duetfair::cli {

class RunManifest;

inline constexpr double kEsConsistencyTolerance = 1e-9;

/// Throws ConfigError when the reports carry different group labels or when
/// a report's ES fields disagree with its own population and group means.
void check_reports(const std::vector<MetricsReport>& reports);

/// Rows of comparison.csv: one per (method, group).
std::string comparison_csv(const std::vector<MetricsReport>& reports);

/// ES metrics, recomputed from each report, and CIs per method.
std::string summary_json(const std::vector<MetricsReport>& reports);

/// 640x240 SVG for one group: a Dice histogram per method, a white diamond
/// at the mean and ticks at the 25th, 50th and 75th percentiles. Every
/// method row is a translated copy of the same markup for the same data.
std::string group_svg(const std::vector<MetricsReport>& reports, std::size_t group);

/// File name of the SVG for `group`.
std::string group_svg_name(const MetricsReport& report, std::size_t group);

/// Checks, then writes the whole bundle through `manifest`.
void emit_report(std::vector<MetricsReport> reports, RunManifest& manifest);

}  // namespace duetfair::cli

#endif  // DUETFAIR_TOOLS_REPORT_HPP_

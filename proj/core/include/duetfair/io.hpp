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

#ifndef DUETFAIR_IO_HPP_
#define DUETFAIR_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "duetfair/metrics.hpp"
#include "duetfair/model.hpp"
#include "duetfair/trainer.hpp"
#include "duetfair/types.hpp"

namespace duetfair {

// File formats. All parsers throw Error with the offending field named.
//
// Cohort:   {attribute_name, group_labels, height, width,
//            samples: [{sample_id, group, hard_flag, image, mask}]}
//           image and mask are row-major flat arrays.
// Params:   {layout: [{name, offset, shape}], flat: [...]}
// Metrics:  see report_to_json.
// TrainLog: one JSON object per line, one line per epoch.

std::string cohort_to_json(const Cohort& cohort);
Cohort cohort_from_json(std::string_view text);

std::string params_to_json(const ModelParams& params);
ModelParams params_from_json(std::string_view text);

std::string report_to_json(const MetricsReport& report);
MetricsReport report_from_json(std::string_view text);

/// Header: sample_id,group,hard_flag,dice,iou,loss
std::string per_sample_csv(const MetricsReport& report);

std::string train_log_to_jsonl(const TrainLog& log);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace duetfair

#endif  // DUETFAIR_IO_HPP_

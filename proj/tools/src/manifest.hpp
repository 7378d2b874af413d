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

#ifndef DUETFAIR_TOOLS_MANIFEST_HPP_
#define DUETFAIR_TOOLS_MANIFEST_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace duetfair::cli {

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

std::string tool_version();

/// Records what one command emitted. Files are listed relative to the output
/// directory with their SHA-256 and size.
class RunManifest {
 public:
  RunManifest(std::string command, std::string run_name, std::string config_json,
              std::filesystem::path output_dir);

  /// Writes `content` under the output directory and records it.
  std::filesystem::path emit(const std::filesystem::path& relative, std::string_view content);

  /// Stamps the end time and writes `<command>.manifest.json`.
  std::filesystem::path finish();

  const std::filesystem::path& output_dir() const { return output_dir_; }

 private:
  struct Entry {
    std::string path;
    std::string sha256;
    std::size_t bytes = 0;
  };

  std::string command_;
  std::string run_name_;
  std::string config_json_;
  std::filesystem::path output_dir_;
  std::string started_;
  std::vector<Entry> files_;
};

}  // namespace duetfair::cli

#endif  // DUETFAIR_TOOLS_MANIFEST_HPP_

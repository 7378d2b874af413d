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

#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <memory>

#include "duetfair/io.hpp"
#include "json.hpp"

#ifndef DUETFAIR_VERSION
#define DUETFAIR_VERSION "unknown"
#endif

namespace duetfair::cli {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string tool_version() { return DUETFAIR_VERSION; }

RunManifest::RunManifest(std::string command, std::string run_name, std::string config_json,
                         std::filesystem::path output_dir)
    : command_(std::move(command)),
      run_name_(std::move(run_name)),
      config_json_(std::move(config_json)),
      output_dir_(std::move(output_dir)),
      started_(utc_timestamp()) {}

std::filesystem::path RunManifest::emit(const std::filesystem::path& relative,
                                        std::string_view content) {
  const auto path = output_dir_ / relative;
  write_file(path, content);
  files_.push_back({relative.generic_string(), sha256_hex(content), content.size()});
  return path;
}

std::filesystem::path RunManifest::finish() {
  using nlohmann::json;
  json files = json::array();
  for (const Entry& e : files_) {
    files.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  }
  json j = {{"run_name", run_name_},
            {"command", command_},
            {"tool_version", tool_version()},
            {"config_sha256", sha256_hex(config_json_)},
            {"config", json::parse(config_json_)},
            {"started_at", started_},
            {"finished_at", utc_timestamp()},
            {"files", std::move(files)}};
  const auto path = output_dir_ / (command_ + ".manifest.json");
  write_file(path, j.dump(2) + "\n");
  return path;
}

}  // namespace duetfair::cli

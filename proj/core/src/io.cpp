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

#include "duetfair/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace duetfair {
namespace {

using nlohmann::json;

json parse(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string(what) + ": malformed JSON: " + e.what());
  }
}

// Wraps nlohmann access errors so callers see a library Error with context.
template <typename F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(std::string(what) + ": " + e.what());
  }
}

json group_metrics_json(const GroupMetrics& m) {
  return {{"dice", m.dice}, {"iou", m.iou}, {"n", m.n}};
}

GroupMetrics group_metrics_from(const json& j) {
  return {j.at("dice").get<double>(), j.at("iou").get<double>(), j.at("n").get<std::size_t>()};
}

}  // namespace

std::string cohort_to_json(const Cohort& cohort) {
  json samples = json::array();
  for (const Sample& s : cohort.samples) {
    samples.push_back({{"sample_id", s.sample_id},
                       {"group", s.group.value},
                       {"hard_flag", s.hard_flag},
                       {"image", std::vector<double>(s.image.values().begin(), s.image.values().end())},
                       {"mask", std::vector<double>(s.mask.values().begin(), s.mask.values().end())}});
  }
  json j = {{"attribute_name", cohort.attribute_name},
            {"group_labels", cohort.group_labels},
            {"height", cohort.height},
            {"width", cohort.width},
            {"samples", std::move(samples)}};
  return j.dump();
}

Cohort cohort_from_json(std::string_view text) {
  const json j = parse(text, "cohort");
  return guarded("cohort", [&] {
    Cohort c;
    c.attribute_name = j.at("attribute_name").get<std::string>();
    c.group_labels = j.at("group_labels").get<std::vector<std::string>>();
    c.height = j.at("height").get<std::size_t>();
    c.width = j.at("width").get<std::size_t>();
    for (const json& s : j.at("samples")) {
      if (!s.contains("group")) {
        throw Error("cohort: sample " + s.value("sample_id", json(-1)).dump() +
                    " is missing its subgroup attribute");
      }
      Sample sample;
      sample.sample_id = s.at("sample_id").get<std::int64_t>();
      sample.group = SubgroupId{s.at("group").get<std::uint32_t>()};
      sample.hard_flag = s.at("hard_flag").get<bool>();
      auto image = s.at("image").get<std::vector<double>>();
      auto mask = s.at("mask").get<std::vector<double>>();
      if (image.size() != c.height * c.width || mask.size() != c.height * c.width) {
        throw Error("cohort: sample " + std::to_string(sample.sample_id) +
                    " image/mask length does not match height*width");
      }
      sample.image = Grid(c.height, c.width, std::move(image));
      sample.mask = Grid(c.height, c.width, std::move(mask));
      c.samples.push_back(std::move(sample));
    }
    return c;
  });
}

std::string params_to_json(const ModelParams& params) {
  json layout = json::array();
  for (const ParamBlock& b : params.layout()) {
    layout.push_back({{"name", b.name}, {"offset", b.offset}, {"shape", b.shape}});
  }
  json j = {{"layout", std::move(layout)},
            {"flat", std::vector<double>(params.flat().begin(), params.flat().end())}};
  return j.dump();
}

ModelParams params_from_json(std::string_view text) {
  const json j = parse(text, "params");
  return guarded("params", [&] {
    std::vector<ParamBlock> layout;
    for (const json& b : j.at("layout")) {
      layout.push_back({b.at("name").get<std::string>(), b.at("offset").get<std::size_t>(),
                        b.at("shape").get<std::vector<std::size_t>>()});
    }
    return ModelParams(std::move(layout), j.at("flat").get<std::vector<double>>());
  });
}

std::string report_to_json(const MetricsReport& r) {
  json per_sample = json::array();
  for (const SampleMetrics& s : r.per_sample) {
    per_sample.push_back({{"sample_id", s.sample_id},
                          {"group", s.group.value},
                          {"hard_flag", s.hard_flag},
                          {"dice", s.dice},
                          {"iou", s.iou},
                          {"loss", s.loss}});
  }
  json per_group = json::array();
  for (std::size_t g = 0; g < r.per_group.size(); ++g) {
    json entry = group_metrics_json(r.per_group[g]);
    entry["group"] = g;
    entry["label"] = r.group_labels.at(g);
    per_group.push_back(std::move(entry));
  }
  const auto& worst = r.worst_group_dice;
  json cis = json::object();
  for (const auto& [name, ci] : r.cis) cis[name] = {ci.lo, ci.hi};
  json j = {
      {"method", r.method},
      {"attribute_name", r.attribute_name},
      {"group_labels", r.group_labels},
      {"per_sample", std::move(per_sample)},
      {"per_group", std::move(per_group)},
      {"population", group_metrics_json(r.population)},
      {"es", {{"es_dice", r.es_dice}, {"es_iou", r.es_iou}}},
      {"worst_group",
       {{"group", worst.group.value},
        {"label", r.group_labels.at(worst.group.index())},
        {"dice", worst.value},
        {"iou", r.per_group.at(worst.group.index()).iou}}},
      {"worst_group_iou",
       {{"group", r.worst_group_iou.group.value},
        {"label", r.group_labels.at(r.worst_group_iou.group.index())},
        {"iou", r.worst_group_iou.value}}},
      {"hard_stratified",
       {{"hard", group_metrics_json(r.hard)}, {"easy", group_metrics_json(r.easy)}}},
      {"cis", std::move(cis)},
  };
  return j.dump(2);
}

MetricsReport report_from_json(std::string_view text) {
  const json j = parse(text, "metrics report");
  return guarded("metrics report", [&] {
    MetricsReport r;
    r.method = j.at("method").get<std::string>();
    r.attribute_name = j.at("attribute_name").get<std::string>();
    r.group_labels = j.at("group_labels").get<std::vector<std::string>>();
    for (const json& s : j.at("per_sample")) {
      r.per_sample.push_back({s.at("sample_id").get<std::int64_t>(),
                              SubgroupId{s.at("group").get<std::uint32_t>()},
                              s.at("hard_flag").get<bool>(), s.at("dice").get<double>(),
                              s.at("iou").get<double>(), s.at("loss").get<double>()});
    }
    r.per_group.resize(r.group_labels.size());
    for (const json& g : j.at("per_group")) {
      r.per_group.at(g.at("group").get<std::size_t>()) = group_metrics_from(g);
    }
    r.population = group_metrics_from(j.at("population"));
    r.es_dice = j.at("es").at("es_dice").get<double>();
    r.es_iou = j.at("es").at("es_iou").get<double>();
    r.worst_group_dice = {SubgroupId{j.at("worst_group").at("group").get<std::uint32_t>()},
                          j.at("worst_group").at("dice").get<double>()};
    r.worst_group_iou = {SubgroupId{j.at("worst_group_iou").at("group").get<std::uint32_t>()},
                         j.at("worst_group_iou").at("iou").get<double>()};
    r.hard = group_metrics_from(j.at("hard_stratified").at("hard"));
    r.easy = group_metrics_from(j.at("hard_stratified").at("easy"));
    for (const auto& [name, ci] : j.at("cis").items()) {
      r.cis[name] = {ci.at(0).get<double>(), ci.at(1).get<double>()};
    }
    return r;
  });
}

std::string per_sample_csv(const MetricsReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "sample_id,group,hard_flag,dice,iou,loss\n";
  for (const SampleMetrics& s : report.per_sample) {
    out << s.sample_id << ',' << s.group.value << ',' << (s.hard_flag ? 1 : 0) << ','
        << s.dice << ',' << s.iou << ',' << s.loss << '\n';
  }
  return out.str();
}

std::string train_log_to_jsonl(const TrainLog& log) {
  std::string out;
  for (const EpochRecord& e : log.epochs) {
    json j = {{"epoch", e.epoch},
              {"objective", e.objective},
              {"group_risk", e.group_risk},
              {"group_robust_risk", e.group_robust_risk},
              {"mean_loss", e.mean_loss}};
    if (e.metrics) {
      j["metrics"] = {{"dice", e.metrics->population.dice},
                      {"iou", e.metrics->population.iou},
                      {"es_dice", e.metrics->es_dice},
                      {"es_iou", e.metrics->es_iou},
                      {"worst_group", e.metrics->worst_group_dice.group.value},
                      {"worst_group_dice", e.metrics->worst_group_dice.value}};
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace duetfair

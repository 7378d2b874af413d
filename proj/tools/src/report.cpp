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

#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "config.hpp"
#include "manifest.hpp"
#include "json.hpp"

namespace duetfair::cli {
namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 240;
constexpr double kPlotLeft = 130.0;
constexpr double kPlotRight = 620.0;
constexpr double kPlotTop = 30.0;
constexpr double kPlotBottom = 205.0;
constexpr std::size_t kBins = 20;

std::string fmt(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::pair<double, double> recomputed_es(const MetricsReport& r) {
  std::vector<double> dice, iou;
  for (const GroupMetrics& g : r.per_group) {
    if (g.n == 0) continue;
    dice.push_back(g.dice);
    iou.push_back(g.iou);
  }
  return {equity_scaled(r.population.dice, dice), equity_scaled(r.population.iou, iou)};
}

// Linear interpolation between order statistics.
double percentile(std::vector<double> sorted, double p) {
  std::sort(sorted.begin(), sorted.end());
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double x_of(double dice) { return kPlotLeft + std::clamp(dice, 0.0, 1.0) * (kPlotRight - kPlotLeft); }

// Histogram row in local coordinates: y from 0 (top) to `height`.
std::string histogram_row(const std::vector<double>& values, double height) {
  std::ostringstream out;
  if (values.empty()) {
    out << "<text x=\"" << fmt(x_of(0.5)) << "\" y=\"" << fmt(height / 2 + 4)
        << "\" text-anchor=\"middle\" font-size=\"11\" fill=\"#666\">no samples</text>";
    return out.str();
  }
  std::vector<std::size_t> counts(kBins, 0);
  for (double v : values) {
    const auto b = std::min(kBins - 1, static_cast<std::size_t>(std::clamp(v, 0.0, 1.0) * kBins));
    ++counts[b];
  }
  const double peak = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
  const double bar_area = height - 10.0;  // room below for percentile ticks
  const double bin_w = (kPlotRight - kPlotLeft) / static_cast<double>(kBins);
  for (std::size_t b = 0; b < kBins; ++b) {
    if (counts[b] == 0) continue;
    const double h = bar_area * static_cast<double>(counts[b]) / peak;
    out << "<rect x=\"" << fmt(kPlotLeft + b * bin_w) << "\" y=\"" << fmt(bar_area - h)
        << "\" width=\"" << fmt(bin_w - 1.0) << "\" height=\"" << fmt(h)
        << "\" fill=\"#4c78a8\"/>";
  }
  for (double p : {0.25, 0.5, 0.75}) {
    const double x = x_of(percentile(values, p));
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(bar_area + 1) << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << fmt(bar_area + (p == 0.5 ? 9 : 6))
        << "\" stroke=\"#222\" stroke-width=\"1.5\"/>";
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  const double cx = x_of(mean), cy = bar_area / 2;
  out << "<polygon points=\"" << fmt(cx) << ',' << fmt(cy - 6) << ' ' << fmt(cx + 5) << ','
      << fmt(cy) << ' ' << fmt(cx) << ',' << fmt(cy + 6) << ' ' << fmt(cx - 5) << ',' << fmt(cy)
      << "\" fill=\"#fff\" stroke=\"#000\" stroke-width=\"1\"/>";
  return out.str();
}

}  // namespace

void check_reports(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw ConfigError("report: at least one eval report is required");
  for (const MetricsReport& r : reports) {
    if (r.group_labels != reports.front().group_labels) {
      throw ConfigError("report: group labels of '" + r.method + "' differ from '" +
                        reports.front().method + "'");
    }
    if (r.per_group.size() != r.group_labels.size()) {
      throw ConfigError("report: '" + r.method + "' has per-group entries for " +
                        std::to_string(r.per_group.size()) + " of " +
                        std::to_string(r.group_labels.size()) + " groups");
    }
    const auto [es_dice, es_iou] = recomputed_es(r);
    const double err = std::max(std::abs(es_dice - r.es_dice), std::abs(es_iou - r.es_iou));
    if (!(err <= kEsConsistencyTolerance)) {
      throw ConfigError("report: ES fields of '" + r.method +
                        "' disagree with its population and per-group means (difference " +
                        std::to_string(err) + ")");
    }
  }
}

std::string comparison_csv(const std::vector<MetricsReport>& reports) {
  std::ostringstream out;
  out.precision(17);
  out << "method,group,label,dice,iou,n,worst_group\n";
  for (const MetricsReport& r : reports) {
    for (std::size_t g = 0; g < r.per_group.size(); ++g) {
      const GroupMetrics& m = r.per_group[g];
      out << csv_field(r.method) << ',' << g << ',' << csv_field(r.group_labels[g]) << ','
          << m.dice << ',' << m.iou << ',' << m.n << ','
          << (r.worst_group_dice.group.index() == g ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

std::string summary_json(const std::vector<MetricsReport>& reports) {
  using nlohmann::json;
  json methods = json::array();
  for (const MetricsReport& r : reports) {
    const auto [es_dice, es_iou] = recomputed_es(r);
    json cis = json::object();
    for (const auto& [name, ci] : r.cis) cis[name] = {ci.lo, ci.hi};
    methods.push_back(
        {{"method", r.method},
         {"population", {{"dice", r.population.dice}, {"iou", r.population.iou},
                         {"n", r.population.n}}},
         {"es_dice", es_dice},
         {"es_iou", es_iou},
         {"worst_group",
          {{"group", r.worst_group_dice.group.value},
           {"label", r.group_labels.at(r.worst_group_dice.group.index())},
           {"dice", r.worst_group_dice.value}}},
         {"hard", {{"dice", r.hard.dice}, {"iou", r.hard.iou}, {"n", r.hard.n}}},
         {"easy", {{"dice", r.easy.dice}, {"iou", r.easy.iou}, {"n", r.easy.n}}},
         {"cis", std::move(cis)}});
  }
  json j = {{"attribute_name", reports.front().attribute_name},
            {"group_labels", reports.front().group_labels},
            {"methods", std::move(methods)}};
  return j.dump(2) + "\n";
}

std::string group_svg(const std::vector<MetricsReport>& reports, std::size_t group) {
  const MetricsReport& first = reports.front();
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"#fafafa\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
      << escape_xml(first.attribute_name + " = " + first.group_labels.at(group))
      << ": per-sample Dice</text>\n";

  const double row_h = (kPlotBottom - kPlotTop) / static_cast<double>(reports.size());
  for (std::size_t m = 0; m < reports.size(); ++m) {
    std::vector<double> values;
    for (const SampleMetrics& s : reports[m].per_sample) {
      if (s.group.index() == group) values.push_back(s.dice);
    }
    const double top = kPlotTop + row_h * static_cast<double>(m);
    out << "<text x=\"" << fmt(kPlotLeft - 8) << "\" y=\"" << fmt(top + row_h / 2 + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << escape_xml(reports[m].method)
        << "</text>\n";
    out << "<g class=\"method\" transform=\"translate(0," << fmt(top) << ")\">"
        << histogram_row(values, row_h - 4.0) << "</g>\n";
  }
  out << "<line x1=\"" << fmt(kPlotLeft) << "\" y1=\"" << fmt(kPlotBottom) << "\" x2=\""
      << fmt(kPlotRight) << "\" y2=\"" << fmt(kPlotBottom) << "\" stroke=\"#000\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = 0.25 * t;
    out << "<line x1=\"" << fmt(x_of(v)) << "\" y1=\"" << fmt(kPlotBottom) << "\" x2=\""
        << fmt(x_of(v)) << "\" y2=\"" << fmt(kPlotBottom + 4) << "\" stroke=\"#000\"/>"
        << "<text x=\"" << fmt(x_of(v)) << "\" y=\"" << fmt(kPlotBottom + 16)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt(v) << "</text>\n";
  }
  out << "<text x=\"" << fmt((kPlotLeft + kPlotRight) / 2) << "\" y=\"" << kHeight - 4
      << "\" text-anchor=\"middle\" font-size=\"10\">Dice</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::string group_svg_name(const MetricsReport& report, std::size_t group) {
  std::string label;
  for (char c : report.group_labels.at(group)) {
    label += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  }
  return "dice_group" + std::to_string(group) + "_" + label + ".svg";
}

void emit_report(std::vector<MetricsReport> reports, RunManifest& manifest) {
  check_reports(reports);
  // Same method twice (e.g. re-runs) stays distinguishable in every output.
  std::set<std::string> seen;
  for (MetricsReport& r : reports) {
    std::string name = r.method;
    for (int k = 2; !seen.insert(name).second; ++k) name = r.method + "#" + std::to_string(k);
    r.method = name;
  }
  manifest.emit("comparison.csv", comparison_csv(reports));
  manifest.emit("summary.json", summary_json(reports));
  for (std::size_t g = 0; g < reports.front().group_labels.size(); ++g) {
    manifest.emit(group_svg_name(reports.front(), g), group_svg(reports, g));
  }
}

}  // namespace duetfair::cli

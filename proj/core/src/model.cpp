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

#include "duetfair/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "duetfair/rng.hpp"

namespace duetfair {
namespace {

// Raw pointers into a flat parameter (or gradient) vector, resolved once per
// call from the expected layout.
template <typename T>
struct BlockPointers {
  T* enc_w = nullptr;
  T* enc_b = nullptr;
  std::vector<T*> exp_w;
  std::vector<T*> exp_b;
  T* gate_w = nullptr;
  T* gate_g = nullptr;
  T* dec_w = nullptr;
  T* dec_b = nullptr;
};

template <typename T>
BlockPointers<T> resolve(T* base, const ModelConfig& config) {
  BlockPointers<T> p;
  const auto layout = expected_layout(config);
  auto at = [&](std::size_t i) { return base + layout[i].offset; };
  std::size_t i = 0;
  p.enc_w = at(i++);
  p.enc_b = at(i++);
  if (config.use_dmoe) {
    for (std::size_t m = 0; m < config.num_experts; ++m) {
      p.exp_w.push_back(at(i++));
      p.exp_b.push_back(at(i++));
    }
    p.gate_w = at(i++);
    p.gate_g = at(i++);
  }
  p.dec_w = at(i++);
  p.dec_b = at(i++);
  return p;
}

void require_layout(const ModelParams& params, const ModelConfig& config) {
  if (!params.matches(config)) {
    throw Error("model parameter layout does not match the model configuration");
  }
}

void fill_patch(const Grid& image, std::size_t row, std::size_t col, double* patch) {
  const auto h = static_cast<std::ptrdiff_t>(image.height());
  const auto w = static_cast<std::ptrdiff_t>(image.width());
  std::size_t k = 0;
  for (std::ptrdiff_t dr = -1; dr <= 1; ++dr) {
    for (std::ptrdiff_t dc = -1; dc <= 1; ++dc) {
      const auto r = static_cast<std::ptrdiff_t>(row) + dr;
      const auto c = static_cast<std::ptrdiff_t>(col) + dc;
      patch[k++] = (r < 0 || c < 0 || r >= h || c >= w)
                       ? 0.0
                       : image(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    }
  }
}

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// Scratch state for one sample's forward pass, kept for the backward pass.
struct Trace {
  std::size_t pixels = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  std::vector<double> patch;   // pixels x 9
  std::vector<double> h;       // pixels x d
  std::vector<std::size_t> sel;  // pixels x k
  std::vector<double> a;       // pixels x k
  std::vector<double> e;       // pixels x k x d
  std::vector<double> hbar;    // pixels x d
  std::vector<double> z_raw;   // pixels
  std::vector<double> p;       // pixels
  double min_topk_margin = std::numeric_limits<double>::infinity();

  void reset(std::size_t n, const ModelConfig& config) {
    pixels = n;
    d = config.feature_dim;
    k = config.use_dmoe ? config.top_k : 0;
    patch.assign(n * kPatchSize, 0.0);
    h.assign(n * d, 0.0);
    sel.assign(n * k, 0);
    a.assign(n * k, 0.0);
    e.assign(n * k * d, 0.0);
    hbar.assign(n * d, 0.0);
    z_raw.assign(n, 0.0);
    p.assign(n, 0.0);
    min_topk_margin = std::numeric_limits<double>::infinity();
  }
};

// Gate scores, top-K selection and softmax for one feature vector. Writes the
// selected indices and renormalized weights; returns the K/K+1 score margin.
double route_pixel(const double* h, std::size_t group, const BlockPointers<const double>& w,
                   const ModelConfig& config, std::vector<double>& scores,
                   std::vector<std::size_t>& order, std::size_t* sel, double* a) {
  const std::size_t d = config.feature_dim;
  const std::size_t m_count = config.num_experts;
  const std::size_t g_count = config.num_groups;
  for (std::size_t m = 0; m < m_count; ++m) {
    const double* row = w.gate_w + m * d;
    double s = w.gate_g[m * g_count + group];
    for (std::size_t j = 0; j < d; ++j) s += row[j] * h[j];
    scores[m] = s;
  }
  // Partial selection sort: K passes, strict '>' keeps the lower index on ties.
  const std::size_t k = config.top_k;
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t passes = std::min(k + 1, m_count);
  for (std::size_t i = 0; i < passes; ++i) {
    std::size_t best = i;
    for (std::size_t j = i + 1; j < m_count; ++j) {
      if (scores[order[j]] > scores[order[best]] ||
          (scores[order[j]] == scores[order[best]] && order[j] < order[best])) {
        best = j;
      }
    }
    std::swap(order[i], order[best]);
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    sel[i] = order[i];
    top = std::max(top, scores[order[i]]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    a[i] = std::exp(scores[sel[i]] - top);
    sum += a[i];
  }
  for (std::size_t i = 0; i < k; ++i) a[i] /= sum;
  return k < m_count ? scores[order[k - 1]] - scores[order[k]]
                     : std::numeric_limits<double>::infinity();
}

// h_bar = h + sum_i a_i (A_{sel_i} h + c_{sel_i}); also stores expert outputs.
void adapt_pixel(const double* h, const std::size_t* sel, const double* a,
                 const BlockPointers<const double>& w, std::size_t d, std::size_t k,
                 double* e, double* hbar) {
  std::copy(h, h + d, hbar);
  for (std::size_t i = 0; i < k; ++i) {
    const double* A = w.exp_w[sel[i]];
    const double* c = w.exp_b[sel[i]];
    double* ei = e + i * d;
    for (std::size_t r = 0; r < d; ++r) {
      double v = c[r];
      const double* row = A + r * d;
      for (std::size_t j = 0; j < d; ++j) v += row[j] * h[j];
      ei[r] = v;
      hbar[r] += a[i] * v;
    }
  }
}

void forward_trace(const Sample& sample, const BlockPointers<const double>& w,
                   const ModelConfig& config, Trace& t) {
  const std::size_t H = sample.image.height();
  const std::size_t W = sample.image.width();
  const std::size_t d = config.feature_dim;
  t.reset(H * W, config);
  std::vector<double> scores(config.num_experts);
  std::vector<std::size_t> order(config.num_experts);
  const std::size_t group = sample.group.index();

  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      const std::size_t px = r * W + c;
      double* patch = &t.patch[px * kPatchSize];
      fill_patch(sample.image, r, c, patch);
      double* h = &t.h[px * d];
      for (std::size_t j = 0; j < d; ++j) {
        double u = w.enc_b[j];
        const double* row = w.enc_w + j * kPatchSize;
        for (std::size_t q = 0; q < kPatchSize; ++q) u += row[q] * patch[q];
        h[j] = std::tanh(u);
      }
      double* hbar = &t.hbar[px * d];
      if (config.use_dmoe) {
        std::size_t* sel = &t.sel[px * t.k];
        double* a = &t.a[px * t.k];
        const double margin = route_pixel(h, group, w, config, scores, order, sel, a);
        t.min_topk_margin = std::min(t.min_topk_margin, margin);
        adapt_pixel(h, sel, a, w, d, t.k, &t.e[px * t.k * d], hbar);
      } else {
        std::copy(h, h + d, hbar);
      }
      double z = w.dec_b[0];
      for (std::size_t j = 0; j < d; ++j) z += w.dec_w[j] * hbar[j];
      t.z_raw[px] = z;
      t.p[px] = sigmoid(std::clamp(z, -kLogitClip, kLogitClip));
    }
  }
}

struct LossSums {
  double bce = 0.0;
  double sum_p = 0.0;
  double sum_y = 0.0;
  double sum_py = 0.0;
};

LossSums loss_sums(std::span<const double> p, std::span<const double> y) {
  LossSums s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pc = std::clamp(p[i], kProbClip, 1.0 - kProbClip);
    s.bce -= y[i] * std::log(pc) + (1.0 - y[i]) * std::log(1.0 - pc);
    s.sum_p += p[i];
    s.sum_y += y[i];
    s.sum_py += p[i] * y[i];
  }
  s.bce /= static_cast<double>(p.size());
  return s;
}

double combine_loss(const LossSums& s) {
  const double soft_dice =
      1.0 - (2.0 * s.sum_py + kDiceSmooth) / (s.sum_p + s.sum_y + kDiceSmooth);
  return 0.5 * s.bce + 0.5 * soft_dice;
}

// Accumulates d(loss)/d(params) for one traced sample into `grad`.
void backward_trace(const Trace& t, const Sample& sample, const LossSums& sums,
                    const BlockPointers<const double>& w, const ModelConfig& config,
                    const BlockPointers<double>& g) {
  const std::size_t d = config.feature_dim;
  const std::size_t k = t.k;
  const std::size_t group = sample.group.index();
  const std::size_t g_count = config.num_groups;
  const auto y = sample.mask.values();
  const double n = static_cast<double>(t.pixels);
  const double numer = 2.0 * sums.sum_py + kDiceSmooth;
  const double denom = sums.sum_p + sums.sum_y + kDiceSmooth;

  std::vector<double> gbar(d), gh(d), ga(k), gs(k);
  for (std::size_t px = 0; px < t.pixels; ++px) {
    if (std::abs(t.z_raw[px]) > kLogitClip) continue;
    const double p = t.p[px];
    const double d_bce = (p - y[px]) / n;
    const double d_dice = -(2.0 * y[px] * denom - numer) / (denom * denom) * p * (1.0 - p);
    const double dz = 0.5 * d_bce + 0.5 * d_dice;

    const double* hbar = &t.hbar[px * d];
    const double* h = &t.h[px * d];
    g.dec_b[0] += dz;
    for (std::size_t j = 0; j < d; ++j) {
      g.dec_w[j] += dz * hbar[j];
      gbar[j] = dz * w.dec_w[j];
      gh[j] = gbar[j];
    }

    if (config.use_dmoe) {
      const std::size_t* sel = &t.sel[px * k];
      const double* a = &t.a[px * k];
      const double* e = &t.e[px * k * d];
      double mean_ga = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t m = sel[i];
        const double* ei = e + i * d;
        const double* A = w.exp_w[m];
        double* gA = g.exp_w[m];
        double* gc = g.exp_b[m];
        double dot = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
          const double up = a[i] * gbar[r];
          gc[r] += up;
          double* gA_row = gA + r * d;
          const double* A_row = A + r * d;
          for (std::size_t j = 0; j < d; ++j) {
            gA_row[j] += up * h[j];
            gh[j] += up * A_row[j];
          }
          dot += gbar[r] * ei[r];
        }
        ga[i] = dot;
        mean_ga += a[i] * dot;
      }
      for (std::size_t i = 0; i < k; ++i) {
        gs[i] = a[i] * (ga[i] - mean_ga);
        const std::size_t m = sel[i];
        g.gate_g[m * g_count + group] += gs[i];
        double* gw_row = g.gate_w + m * d;
        const double* w_row = w.gate_w + m * d;
        for (std::size_t j = 0; j < d; ++j) {
          gw_row[j] += gs[i] * h[j];
          gh[j] += gs[i] * w_row[j];
        }
      }
    }

    const double* patch = &t.patch[px * kPatchSize];
    for (std::size_t j = 0; j < d; ++j) {
      const double du = gh[j] * (1.0 - h[j] * h[j]);
      g.enc_b[j] += du;
      double* row = g.enc_w + j * kPatchSize;
      for (std::size_t q = 0; q < kPatchSize; ++q) row[q] += du * patch[q];
    }
  }
}

void require_sample_shape(const Sample& sample, const ModelConfig& config) {
  if (sample.image.height() != config.height || sample.image.width() != config.width) {
    throw Error("sample " + std::to_string(sample.sample_id) +
                " image shape does not match the model grid");
  }
  if (sample.group.index() >= config.num_groups) {
    throw Error("sample " + std::to_string(sample.sample_id) + " has out-of-range group");
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (feature_dim < 1) throw Error("model: feature_dim must be >= 1");
  if (num_groups < 1) throw Error("model: num_groups must be >= 1");
  if (height < 1 || width < 1) throw Error("model: grid must be non-empty");
  if (use_dmoe && (top_k < 1 || top_k > num_experts)) {
    throw Error("model: top_k must satisfy 1 <= top_k <= num_experts");
  }
}

std::size_t ParamBlock::size() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::vector<ParamBlock> expected_layout(const ModelConfig& config) {
  const std::size_t d = config.feature_dim;
  std::vector<ParamBlock> layout;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::vector<std::size_t> shape) {
    ParamBlock b{std::move(name), offset, std::move(shape)};
    offset += b.size();
    layout.push_back(std::move(b));
  };
  add("encoder.weight", {d, kPatchSize});
  add("encoder.bias", {d});
  if (config.use_dmoe) {
    for (std::size_t m = 0; m < config.num_experts; ++m) {
      add("expert" + std::to_string(m) + ".weight", {d, d});
      add("expert" + std::to_string(m) + ".bias", {d});
    }
    add("gate.weight", {config.num_experts, d});
    add("gate.group", {config.num_experts, config.num_groups});
  }
  add("decoder.weight", {d});
  add("decoder.bias", {1});
  return layout;
}

ModelParams::ModelParams(std::vector<ParamBlock> layout, std::vector<double> flat)
    : layout_(std::move(layout)), flat_(std::move(flat)) {
  std::size_t total = 0;
  for (const auto& b : layout_) {
    if (b.offset != total) throw Error("parameter block '" + b.name + "' has a gap or overlap");
    total += b.size();
  }
  if (total != flat_.size()) {
    throw Error("parameter vector length " + std::to_string(flat_.size()) +
                " does not match layout total " + std::to_string(total));
  }
  for (double v : flat_) {
    if (!std::isfinite(v)) throw Error("parameter vector contains a non-finite value");
  }
}

ModelParams ModelParams::zeros(const ModelConfig& config) {
  config.validate();
  auto layout = expected_layout(config);
  const std::size_t total = layout.back().offset + layout.back().size();
  return ModelParams(std::move(layout), std::vector<double>(total, 0.0));
}

ModelParams ModelParams::initialize(const ModelConfig& config, std::uint64_t seed) {
  ModelParams params = zeros(config);
  Rng rng(seed);
  auto fill = [&](std::string_view name, std::size_t fan_in) {
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : params.block(name)) v = rng.uniform(-s, s);
  };
  fill("encoder.weight", kPatchSize);
  fill("encoder.bias", kPatchSize);
  fill("decoder.weight", config.feature_dim);
  fill("decoder.bias", config.feature_dim);
  if (config.use_dmoe) {
    // Zero experts keep the residual identity; gates must start asymmetric or
    // the selected experts receive identical updates and routing never moves.
    fill("gate.weight", config.feature_dim + config.num_groups);
    fill("gate.group", config.feature_dim + config.num_groups);
  }
  return params;
}

const ParamBlock* ModelParams::find(std::string_view name) const {
  for (const auto& b : layout_) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

std::span<const double> ModelParams::block(std::string_view name) const {
  const ParamBlock* b = find(name);
  if (b == nullptr) throw Error("no parameter block named '" + std::string(name) + "'");
  return std::span<const double>(flat_).subspan(b->offset, b->size());
}

std::span<double> ModelParams::block(std::string_view name) {
  const ParamBlock* b = find(name);
  if (b == nullptr) throw Error("no parameter block named '" + std::string(name) + "'");
  return std::span<double>(flat_).subspan(b->offset, b->size());
}

bool ModelParams::matches(const ModelConfig& config) const {
  return layout_ == expected_layout(config);
}

std::vector<std::size_t> select_top_k(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });
  order.resize(std::min(k, order.size()));
  return order;
}

std::vector<double> gate_scores(std::span<const double> feature, SubgroupId group,
                                const ModelParams& params, const ModelConfig& config) {
  require_layout(params, config);
  if (!config.use_dmoe) throw Error("gate_scores requires use_dmoe");
  const auto w = resolve(params.flat().data(), config);
  std::vector<double> scores(config.num_experts);
  for (std::size_t m = 0; m < config.num_experts; ++m) {
    double s = w.gate_g[m * config.num_groups + group.index()];
    for (std::size_t j = 0; j < config.feature_dim; ++j) {
      s += w.gate_w[m * config.feature_dim + j] * feature[j];
    }
    scores[m] = s;
  }
  return scores;
}

FeatureMap encode(const Grid& image, const ModelParams& params, const ModelConfig& config) {
  require_layout(params, config);
  const auto w = resolve(params.flat().data(), config);
  const std::size_t d = config.feature_dim;
  FeatureMap out{image.height(), image.width(), d,
                 std::vector<double>(image.size() * d)};
  double patch[kPatchSize];
  for (std::size_t r = 0; r < image.height(); ++r) {
    for (std::size_t c = 0; c < image.width(); ++c) {
      fill_patch(image, r, c, patch);
      auto h = out.pixel(r, c);
      for (std::size_t j = 0; j < d; ++j) {
        double u = w.enc_b[j];
        for (std::size_t q = 0; q < kPatchSize; ++q) u += w.enc_w[j * kPatchSize + q] * patch[q];
        h[j] = std::tanh(u);
      }
    }
  }
  return out;
}

FeatureMap dmoe_adapt(const FeatureMap& features, SubgroupId group, const ModelParams& params,
                      const ModelConfig& config) {
  if (!config.use_dmoe) throw Error("dmoe_adapt requires use_dmoe");
  require_layout(params, config);
  if (features.dim != config.feature_dim ||
      features.data.size() != features.height * features.width * features.dim) {
    throw Error("feature map shape does not match the model configuration");
  }
  if (group.index() >= config.num_groups) throw Error("dmoe_adapt: group out of range");
  for (double v : features.data) {
    if (!std::isfinite(v)) throw Error("dmoe_adapt: non-finite feature value");
  }
  const auto w = resolve(params.flat().data(), config);
  const std::size_t d = config.feature_dim;
  const std::size_t k = config.top_k;
  FeatureMap out = features;
  std::vector<double> scores(config.num_experts);
  std::vector<std::size_t> order(config.num_experts);
  std::vector<std::size_t> sel(k);
  std::vector<double> a(k), e(k * d);
  const std::size_t pixels = features.height * features.width;
  for (std::size_t px = 0; px < pixels; ++px) {
    const double* h = &features.data[px * d];
    route_pixel(h, group.index(), w, config, scores, order, sel.data(), a.data());
    adapt_pixel(h, sel.data(), a.data(), w, d, k, e.data(), &out.data[px * d]);
  }
  return out;
}

PredictionMap forward(const Sample& sample, const ModelParams& params,
                      const ModelConfig& config) {
  require_layout(params, config);
  require_sample_shape(sample, config);
  const auto w = resolve(params.flat().data(), config);
  Trace t;
  forward_trace(sample, w, config, t);
  return PredictionMap{Grid(sample.image.height(), sample.image.width(), std::move(t.p))};
}

double per_sample_loss(const PredictionMap& pred, const Grid& mask) {
  if (!pred.probabilities.same_shape(mask)) {
    throw Error("prediction and mask shapes differ");
  }
  return combine_loss(loss_sums(pred.probabilities.values(), mask.values()));
}

PerSampleGradients::PerSampleGradients(std::size_t num_params,
                                       std::vector<std::int64_t> sample_ids,
                                       std::vector<double> rows)
    : num_params_(num_params), sample_ids_(std::move(sample_ids)), rows_(std::move(rows)) {
  if (rows_.size() != num_params_ * sample_ids_.size()) {
    throw Error("per-sample gradient storage has the wrong size");
  }
  order_.resize(sample_ids_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t x, std::size_t y) {
    return sample_ids_[x] < sample_ids_[y];
  });
}

std::span<const double> PerSampleGradients::sample(std::size_t i) const {
  return std::span<const double>(rows_).subspan(i * num_params_, num_params_);
}

std::vector<double> PerSampleGradients::combine(std::span<const double> weights) const {
  if (weights.size() != sample_ids_.size()) {
    throw Error("gradient weights cover " + std::to_string(weights.size()) +
                " samples but the batch has " + std::to_string(sample_ids_.size()));
  }
  std::vector<double> out(num_params_, 0.0);
  for (std::size_t i : order_) {
    const double c = weights[i];
    if (c == 0.0) continue;
    const double* row = &rows_[i * num_params_];
    for (std::size_t j = 0; j < num_params_; ++j) out[j] += c * row[j];
  }
  return out;
}

LossAndGrad loss_and_grad(std::span<const Sample> batch, const ModelParams& params,
                          const ModelConfig& config) {
  if (batch.empty()) throw Error("loss_and_grad: empty batch");
  require_layout(params, config);
  const auto w = resolve(params.flat().data(), config);
  const std::size_t P = params.size();

  std::vector<double> losses(batch.size());
  std::vector<std::int64_t> ids(batch.size());
  std::vector<double> rows(batch.size() * P, 0.0);
  Trace t;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Sample& s = batch[i];
    require_sample_shape(s, config);
    forward_trace(s, w, config, t);
    const LossSums sums = loss_sums(t.p, s.mask.values());
    const double loss = combine_loss(sums);
    if (!std::isfinite(loss)) {
      throw Error("non-finite loss for sample " + std::to_string(s.sample_id));
    }
    losses[i] = loss;
    ids[i] = s.sample_id;
    const auto g = resolve(&rows[i * P], config);
    backward_trace(t, s, sums, w, config, g);
  }
  return LossAndGrad{LossVector(std::move(losses)),
                     PerSampleGradients(P, std::move(ids), std::move(rows))};
}

LossVector batch_losses(std::span<const Sample> batch, const ModelParams& params,
                        const ModelConfig& config) {
  require_layout(params, config);
  const auto w = resolve(params.flat().data(), config);
  std::vector<double> losses(batch.size());
  Trace t;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    require_sample_shape(batch[i], config);
    forward_trace(batch[i], w, config, t);
    losses[i] = combine_loss(loss_sums(t.p, batch[i].mask.values()));
    if (!std::isfinite(losses[i])) {
      throw Error("non-finite loss for sample " + std::to_string(batch[i].sample_id));
    }
  }
  return LossVector(std::move(losses));
}

SmoothnessReport smoothness(std::span<const Sample> batch, const ModelParams& params,
                            const ModelConfig& config) {
  require_layout(params, config);
  const auto w = resolve(params.flat().data(), config);
  SmoothnessReport report{std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity()};
  Trace t;
  for (const Sample& s : batch) {
    forward_trace(s, w, config, t);
    report.min_topk_margin = std::min(report.min_topk_margin, t.min_topk_margin);
    for (double z : t.z_raw) {
      report.min_clip_margin = std::min(report.min_clip_margin, kLogitClip - std::abs(z));
    }
  }
  return report;
}

}  // namespace duetfair

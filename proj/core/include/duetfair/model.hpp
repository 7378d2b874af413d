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

#ifndef DUETFAIR_MODEL_HPP_
#define DUETFAIR_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "duetfair/types.hpp"

namespace duetfair {

// Pixel-wise segmentation model:
//
//   h      = tanh(W_enc * patch3x3(x) + b_enc)                  (d features)
//   h_bar  = h + sum_{m in TopK(s)} a_m * (A_m h + c_m)         (dMoE, optional)
//            s = W_gate h + V_gate[:, g],  a = softmax(s restricted to TopK)
//   p      = sigmoid(clip(w_dec . h_bar + b_dec, -15, 15))
//
// Top-K is chosen by score with ties broken by the lower expert index and is
// held fixed under differentiation.

struct ModelConfig {
  std::size_t feature_dim = 8;
  std::size_t num_experts = 4;
  std::size_t top_k = 2;
  bool use_dmoe = true;
  std::size_t num_groups = 4;
  std::size_t height = 16;
  std::size_t width = 16;

  void validate() const;
};

inline constexpr std::size_t kPatchSize = 9;
inline constexpr double kLogitClip = 15.0;
inline constexpr double kProbClip = 1e-7;
inline constexpr double kDiceSmooth = 1.0;

struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::vector<std::size_t> shape;

  std::size_t size() const;
  friend bool operator==(const ParamBlock&, const ParamBlock&) = default;
};

/// Layout the model expects for `config`. Expert and gate blocks are present
/// only when dMoE is enabled.
std::vector<ParamBlock> expected_layout(const ModelConfig& config);

class ModelParams {
 public:
  ModelParams() = default;
  ModelParams(std::vector<ParamBlock> layout, std::vector<double> flat);

  /// All-zero parameters for `config`.
  static ModelParams zeros(const ModelConfig& config);

  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], drawn for encoder, then
  /// decoder, then gates (fan_in = d + |G|). Experts start at zero, so the
  /// adaptation layer starts as the identity. Encoder/decoder values are
  /// identical with and without dMoE.
  static ModelParams initialize(const ModelConfig& config, std::uint64_t seed);

  const std::vector<ParamBlock>& layout() const { return layout_; }
  std::span<const double> flat() const { return flat_; }
  std::span<double> flat() { return flat_; }
  std::size_t size() const { return flat_.size(); }

  const ParamBlock* find(std::string_view name) const;
  std::span<const double> block(std::string_view name) const;
  std::span<double> block(std::string_view name);

  bool matches(const ModelConfig& config) const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  std::vector<ParamBlock> layout_;
  std::vector<double> flat_;
};

/// Per-pixel feature vectors, H x W x d, row-major with features innermost.
struct FeatureMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t dim = 0;
  std::vector<double> data;

  std::span<const double> pixel(std::size_t row, std::size_t col) const {
    return std::span<const double>(data).subspan((row * width + col) * dim, dim);
  }
  std::span<double> pixel(std::size_t row, std::size_t col) {
    return std::span<double>(data).subspan((row * width + col) * dim, dim);
  }
};

/// Per-pixel foreground probabilities, strictly inside (0, 1).
struct PredictionMap {
  Grid probabilities;
};

/// Indices of the `k` largest scores, ordered by descending score; equal
/// scores resolve to the lower index.
std::vector<std::size_t> select_top_k(std::span<const double> scores, std::size_t k);

/// Gate scores for every expert at one feature vector.
std::vector<double> gate_scores(std::span<const double> feature, SubgroupId group,
                                const ModelParams& params, const ModelConfig& config);

FeatureMap encode(const Grid& image, const ModelParams& params, const ModelConfig& config);

FeatureMap dmoe_adapt(const FeatureMap& features, SubgroupId group, const ModelParams& params,
                      const ModelConfig& config);

PredictionMap forward(const Sample& sample, const ModelParams& params,
                      const ModelConfig& config);

/// 0.5 * mean BCE + 0.5 * (1 - (2 sum(p y) + 1) / (sum p + sum y + 1)), with
/// probabilities clipped to [1e-7, 1 - 1e-7] inside the logarithms.
double per_sample_loss(const PredictionMap& pred, const Grid& mask);

/// Per-sample gradients of a batch; forms sum_i c_i grad(l_i) for arbitrary
/// weights without re-running the model. Reductions run in ascending
/// sample_id order.
class PerSampleGradients {
 public:
  PerSampleGradients() = default;
  PerSampleGradients(std::size_t num_params, std::vector<std::int64_t> sample_ids,
                     std::vector<double> rows);

  std::size_t num_samples() const { return sample_ids_.size(); }
  std::size_t num_params() const { return num_params_; }
  std::span<const std::int64_t> sample_ids() const { return sample_ids_; }
  std::span<const double> sample(std::size_t i) const;

  std::vector<double> combine(std::span<const double> weights) const;

 private:
  std::size_t num_params_ = 0;
  std::vector<std::int64_t> sample_ids_;
  std::vector<std::size_t> order_;  // positions sorted by sample_id
  std::vector<double> rows_;
};

struct LossAndGrad {
  LossVector losses;
  PerSampleGradients gradients;
};

LossAndGrad loss_and_grad(std::span<const Sample> batch, const ModelParams& params,
                          const ModelConfig& config);

/// Losses only; cheaper than loss_and_grad.
LossVector batch_losses(std::span<const Sample> batch, const ModelParams& params,
                        const ModelConfig& config);

/// Distances to the non-smooth points of the forward map over a batch.
struct SmoothnessReport {
  double min_topk_margin = 0.0;  // gap between K-th and (K+1)-th gate score
  double min_clip_margin = 0.0;  // distance of a raw logit to +/-15
};

SmoothnessReport smoothness(std::span<const Sample> batch, const ModelParams& params,
                            const ModelConfig& config);

}  // namespace duetfair

#endif  // DUETFAIR_MODEL_HPP_

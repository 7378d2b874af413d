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

#ifndef DUETFAIR_ROBUST_HPP_
#define DUETFAIR_ROBUST_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "duetfair/types.hpp"

namespace duetfair {

// Worst-case expected loss over reweightings q of n samples with
// KL(q || uniform) = sum_i q_i log(n q_i) <= rho. Solved through the dual
//
//   R(rho) = inf_{eta > 0}  eta * rho + eta * log( (1/n) sum_i exp(l_i / eta) )
//
// whose minimizer eta* yields the exponentially tilted worst-case weights
// q_i ∝ exp(l_i / eta*).

struct RobustnessConfig {
  double default_rho = 0.3;
  std::vector<double> per_group;  // overrides default_rho when non-empty

  double rho_for(SubgroupId group) const;
  void validate(std::size_t num_groups) const;
};

enum class EtaKind {
  kInterior,  // finite minimizer of the dual
  kBoundary,  // eta -> 0 limit: rho >= log(n / m), mass on the maximal losses
  kInfinite,  // eta -> infinity limit: rho == 0, uniform weights
};

struct RobustRiskSolution {
  double value = 0.0;
  EtaKind eta_kind = EtaKind::kInfinite;
  double eta_star = 0.0;  // meaningful only for kInterior
  std::vector<double> weights;
  double dual_gap_bound = 0.0;

  bool interior() const { return eta_kind == EtaKind::kInterior; }
};

/// Relative KL of q against the uniform distribution on n points, with
/// 0 log 0 = 0. Throws if q is not on the simplex within 1e-10.
double kl_divergence(std::span<const double> q, std::size_t n);

/// Dual objective, stabilized by subtracting the maximal loss.
double dual_objective(double eta, std::span<const double> losses, double rho);

/// q_i = exp(l_i / eta) / sum_j exp(l_j / eta), stabilized.
std::vector<double> tilted_weights(std::span<const double> losses, double eta);

RobustRiskSolution solve_robust_risk(std::span<const double> losses, double rho);

struct PrimalSolution {
  double value = 0.0;
  std::vector<double> weights;
};

/// Independent primal oracle for n <= 6: simplex grid search, each grid point
/// pushed along the ray from uniform to the KL (or simplex) boundary, then
/// refined by pairwise mass transfers with a shrinking step.
PrimalSolution brute_force_primal(std::span<const double> losses, double rho);

inline constexpr std::size_t kOracleMaxSamples = 6;

}  // namespace duetfair

#endif  // DUETFAIR_ROBUST_HPP_

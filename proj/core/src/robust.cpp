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

#include "duetfair/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace duetfair {
namespace {

constexpr double kSimplexTol = 1e-10;
constexpr double kMaxTieTol = 1e-12;
constexpr double kGoldenTol = 1e-10;    // on log(eta), i.e. relative on eta
constexpr double kSweepSlack = 1e-9;
constexpr std::size_t kSweepPoints = 32;
constexpr std::size_t kFallbackPoints = 4096;

void require_losses(std::span<const double> losses) {
  if (losses.empty()) throw Error("robust risk: empty loss slice");
  for (double l : losses) {
    if (!std::isfinite(l)) throw Error("robust risk: non-finite loss");
  }
}

void require_rho(double rho) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw Error("robust risk: rho must be finite and >= 0, got " + std::to_string(rho));
  }
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// KL(q_eta || uniform) for tilted weights at eta = exp(t). Decreasing in t.
double tilted_kl(std::span<const double> losses, double t) {
  const auto q = tilted_weights(losses, std::exp(t));
  const double n = static_cast<double>(q.size());
  double kl = 0.0;
  for (double qi : q) {
    if (qi > 0.0) kl += qi * std::log(n * qi);
  }
  return kl;
}

// Golden-section minimization of f on [a, b].
template <typename F>
double golden_section(F&& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

// Root of KL(q_eta) = rho in t = log(eta), the stationarity condition of the
// dual. Brackets outward from `t0`, then bisects to rounding level.
double stationary_log_eta(std::span<const double> losses, double rho, double t0) {
  auto phi = [&](double t) { return tilted_kl(losses, t) - rho; };
  double lo = t0;
  double hi = t0;
  double step = 1.0;
  for (int i = 0; i < 200 && phi(lo) <= 0.0; ++i) {
    lo -= step;
    step *= 2.0;
  }
  step = 1.0;
  for (int i = 0; i < 200 && phi(hi) > 0.0; ++i) {
    hi += step;
    step *= 2.0;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (phi(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double RobustnessConfig::rho_for(SubgroupId group) const {
  if (per_group.empty()) return default_rho;
  if (group.index() >= per_group.size()) {
    throw Error("no rho configured for group " + std::to_string(group.value));
  }
  return per_group[group.index()];
}

void RobustnessConfig::validate(std::size_t num_groups) const {
  require_rho(default_rho);
  if (!per_group.empty() && per_group.size() != num_groups) {
    throw Error("rho must list one value per group (" + std::to_string(num_groups) + ")");
  }
  for (double r : per_group) require_rho(r);
}

double kl_divergence(std::span<const double> q, std::size_t n) {
  if (q.size() != n || n == 0) {
    throw Error("kl_divergence: weight vector has " + std::to_string(q.size()) +
                " entries, expected " + std::to_string(n));
  }
  double sum = 0.0;
  for (double qi : q) {
    if (!(qi >= -kSimplexTol) || !std::isfinite(qi)) {
      throw Error("kl_divergence: weights are not on the simplex");
    }
    sum += qi;
  }
  if (std::abs(sum - 1.0) > kSimplexTol) {
    throw Error("kl_divergence: weights sum to " + std::to_string(sum) + ", not 1");
  }
  const double nd = static_cast<double>(n);
  double kl = 0.0;
  for (double qi : q) {
    if (qi > 0.0) kl += qi * std::log(nd * qi);
  }
  return std::max(kl, 0.0);
}

double dual_objective(double eta, std::span<const double> losses, double rho) {
  if (!(eta > 0.0)) throw Error("dual_objective: eta must be > 0");
  require_losses(losses);
  const double top = *std::max_element(losses.begin(), losses.end());
  double sum = 0.0;
  for (double l : losses) sum += std::exp((l - top) / eta);
  return eta * rho + top + eta * std::log(sum / static_cast<double>(losses.size()));
}

std::vector<double> tilted_weights(std::span<const double> losses, double eta) {
  if (!(eta > 0.0)) throw Error("tilted_weights: eta must be > 0");
  require_losses(losses);
  const double top = *std::max_element(losses.begin(), losses.end());
  std::vector<double> q(losses.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    q[i] = std::exp((losses[i] - top) / eta);
    sum += q[i];
  }
  for (double& qi : q) qi /= sum;
  return q;
}

RobustRiskSolution solve_robust_risk(std::span<const double> losses, double rho) {
  require_losses(losses);
  require_rho(rho);
  const std::size_t n = losses.size();
  const double mean = mean_of(losses);
  const auto [min_it, max_it] = std::minmax_element(losses.begin(), losses.end());
  const double top = *max_it;
  const double spread = top - *min_it;

  RobustRiskSolution sol;
  if (rho == 0.0) {
    sol.value = mean;
    sol.eta_kind = EtaKind::kInfinite;
    sol.weights.assign(n, 1.0 / static_cast<double>(n));
    return sol;
  }

  const auto m = static_cast<std::size_t>(std::count_if(
      losses.begin(), losses.end(), [&](double l) { return l >= top - kMaxTieTol; }));
  if (rho >= std::log(static_cast<double>(n) / static_cast<double>(m))) {
    sol.eta_kind = EtaKind::kBoundary;
    sol.value = top;
    sol.weights.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (losses[i] >= top - kMaxTieTol) sol.weights[i] = 1.0 / static_cast<double>(m);
    }
    sol.dual_gap_bound = std::abs(top - dot(sol.weights, losses));
    return sol;
  }

  auto dual_at = [&](double t) { return dual_objective(std::exp(t), losses, rho); };
  const double t_lo = std::log(1e-6 * spread);
  const double t_hi = std::log(1e3 * spread);
  double t_star = golden_section(dual_at, t_lo, t_hi, kGoldenTol);

  // The golden search resolves eta only to the flatness of the dual; the
  // stationarity root pins it to rounding level.
  const double t_root = stationary_log_eta(losses, rho, t_star);
  if (dual_at(t_root) <= dual_at(t_star) + 1e-15) t_star = t_root;
  double value = dual_at(t_star);

  bool sweep_ok = true;
  for (std::size_t i = 0; i < kSweepPoints; ++i) {
    const double t = t_lo + (t_hi - t_lo) * static_cast<double>(i) / (kSweepPoints - 1);
    if (dual_at(t) < value - kSweepSlack) {
      sweep_ok = false;
      break;
    }
  }
  if (!sweep_ok) {
    double best_t = t_lo;
    double best = dual_at(t_lo);
    const double h = (t_hi - t_lo) / (kFallbackPoints - 1);
    for (std::size_t i = 1; i < kFallbackPoints; ++i) {
      const double t = t_lo + h * static_cast<double>(i);
      const double v = dual_at(t);
      if (v < best) {
        best = v;
        best_t = t;
      }
    }
    t_star = golden_section(dual_at, best_t - h, best_t + h, kGoldenTol);
    const double refined = stationary_log_eta(losses, rho, t_star);
    if (dual_at(refined) <= dual_at(t_star)) t_star = refined;
    value = dual_at(t_star);
  }

  sol.eta_kind = EtaKind::kInterior;
  sol.eta_star = std::exp(t_star);
  sol.weights = tilted_weights(losses, sol.eta_star);
  sol.value = value;
  sol.dual_gap_bound = std::abs(value - dot(sol.weights, losses));
  return sol;
}

namespace {

// Value of the best point on the ray from uniform through q that satisfies
// both the simplex and the KL constraint. The objective is linear along the
// ray and KL is convex with KL(0) = 0, so the optimum on the ray is its
// feasible end.
struct RayResult {
  double value;
  double t;
};

double kl_plain(std::span<const double> q) {
  const double n = static_cast<double>(q.size());
  double kl = 0.0;
  for (double qi : q) {
    if (qi > 0.0) kl += qi * std::log(n * qi);
  }
  return kl;
}

RayResult ray_value(std::span<const double> losses, std::span<const double> q, double rho,
                    double mean, std::vector<double>& scratch) {
  const std::size_t n = losses.size();
  const double u = 1.0 / static_cast<double>(n);
  // Zero-sum direction scaled to unit max norm. Near-uniform q would
  // otherwise give a tiny direction whose rounding error gets multiplied by
  // the long step to the boundary.
  std::vector<double> v(n);
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) shift += q[i] - u;
  shift /= static_cast<double>(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = q[i] - u - shift;
    scale = std::max(scale, std::abs(v[i]));
  }
  if (!(scale > 1e-12)) return {mean, 0.0};
  double slope = 0.0;
  double t_simplex = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    v[i] /= scale;
    slope += v[i] * losses[i];
    if (v[i] < 0.0) t_simplex = std::min(t_simplex, u / -v[i]);
  }
  if (!(slope > 0.0) || !std::isfinite(t_simplex)) return {mean, 0.0};
  auto point_at = [&](double t) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      scratch[i] = std::max(0.0, u + t * v[i]);
      total += scratch[i];
    }
    for (std::size_t i = 0; i < n; ++i) scratch[i] /= total;
    return std::span<const double>(scratch);
  };
  // The reported value is that of the feasible point itself.
  auto value_at = [&](double t) {
    const auto p = point_at(t);
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) value += p[i] * losses[i];
    return value;
  };
  if (kl_plain(point_at(t_simplex)) <= rho) return {value_at(t_simplex), t_simplex};
  double lo = 0.0;
  double hi = t_simplex;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (kl_plain(point_at(mid)) <= rho) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {value_at(lo), lo};
}

// Enumerates grid points q = k / units whose entries are non-decreasing along
// ascending loss order. Reordering weights to follow the losses never lowers
// the objective and leaves KL unchanged, so the optimum lies in this set.
template <typename Visit>
void enumerate_sorted(std::size_t n, int units, std::vector<int>& counts, std::size_t pos,
                      int remaining, int floor, Visit&& visit) {
  if (pos + 1 == n) {
    if (remaining >= floor) {
      counts[pos] = remaining;
      visit(counts);
    }
    return;
  }
  const int slots = static_cast<int>(n - pos);
  for (int c = floor; c * slots <= remaining; ++c) {
    counts[pos] = c;
    enumerate_sorted(n, units, counts, pos + 1, remaining - c, c, visit);
  }
}

}  // namespace

PrimalSolution brute_force_primal(std::span<const double> losses, double rho) {
  require_losses(losses);
  require_rho(rho);
  const std::size_t n = losses.size();
  if (n > kOracleMaxSamples) throw Error("oracle scale exceeded");
  const double mean = mean_of(losses);
  const double u = 1.0 / static_cast<double>(n);

  std::vector<std::size_t> rank(n);
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::stable_sort(rank.begin(), rank.end(),
                   [&](std::size_t a, std::size_t b) { return losses[a] < losses[b]; });

  std::vector<double> scratch(n);
  std::vector<double> q(n);
  std::vector<double> best_q(n, u);
  double best = mean;

  constexpr int kUnits = 50;  // coarse step 0.02
  std::vector<int> counts(n);
  enumerate_sorted(n, kUnits, counts, 0, kUnits, 0, [&](const std::vector<int>& c) {
    for (std::size_t k = 0; k < n; ++k) {
      q[rank[k]] = static_cast<double>(c[k]) / kUnits;
    }
    const RayResult r = ray_value(losses, q, rho, mean, scratch);
    if (r.value > best) {
      best = r.value;
      best_q = q;
    }
  });

  // Local refinement by pairwise mass transfers; step shrinks by 10 per level.
  for (double step = 0.002; step >= 1e-11; step /= 10.0) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          for (int k = 1; k <= 10; ++k) {
            const double delta = step * k;
            if (best_q[j] < delta) break;
            q = best_q;
            q[i] += delta;
            q[j] -= delta;
            const RayResult r = ray_value(losses, q, rho, mean, scratch);
            if (r.value > best + 1e-16) {
              best = r.value;
              best_q = q;
              improved = true;
            }
          }
        }
      }
    }
  }

  PrimalSolution out;
  out.value = best;
  ray_value(losses, best_q, rho, mean, scratch);
  out.weights = scratch;
  return out;
}

}  // namespace duetfair

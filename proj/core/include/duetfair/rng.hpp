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

#ifndef DUETFAIR_RNG_HPP_
#define DUETFAIR_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>

namespace duetfair {

/// SplitMix64 finalizer (Steele, Lea & Flood 2014). Used only to derive
/// substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for the substream identified by (seed, stream).
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Portable random stream: std::mt19937_64, whose output sequence is fixed by
/// the C++ standard, with hand-rolled conversions so that doubles and normals
/// do not depend on the standard library's distribution implementations.
///   uniform():  (x >> 11) * 2^-53, in [0, 1)
///   normal():   Box-Muller on (1 - uniform(), uniform()), pairs cached
///   below(n):   rejection of the 2^64 mod n lowest outputs, then modulo
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(substream_seed(seed, stream)) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (cached_) {
      const double v = *cached_;
      cached_.reset();
      return v;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    return r * std::cos(theta);
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    // Reject the 2^64 mod n lowest outputs so the modulo is unbiased.
    const std::uint64_t threshold = (0 - n) % n;
    std::uint64_t r = next();
    while (r < threshold) r = next();
    return r % n;
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> cached_;
};

}  // namespace duetfair

#endif  // DUETFAIR_RNG_HPP_

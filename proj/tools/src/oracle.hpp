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

#ifndef DUETFAIR_TOOLS_ORACLE_HPP_
#define DUETFAIR_TOOLS_ORACLE_HPP_

#include <cstdint>
#include <string>

namespace duetfair::cli {

struct OracleOptions {
  std::uint64_t seed = 0;
  std::size_t instances = 200;
  double dual_primal_tolerance = 1e-6;
  std::size_t fd_coordinates = 20;
  double fd_step = 1e-5;
  double fd_tolerance = 1e-4;
};

struct OracleOutcome {
  bool passed = false;
  std::size_t agreements = 0;
  std::size_t instances = 0;
  std::string report_json;  // full report, failing instances included
};

/// Dual/primal equivalence sweep over random instances, then finite-difference
/// checks of the objective gradient for every variant on a small cohort.
OracleOutcome run_oracle(const OracleOptions& options);

}  // namespace duetfair::cli

#endif  // DUETFAIR_TOOLS_ORACLE_HPP_

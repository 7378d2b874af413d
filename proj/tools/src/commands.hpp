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

#ifndef DUETFAIR_TOOLS_COMMANDS_HPP_
#define DUETFAIR_TOOLS_COMMANDS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace duetfair::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitOracleFailure = 2;

/// Runs one subcommand. `args` excludes the program name. Diagnostics go to
/// `err`, progress to `out`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace duetfair::cli

#endif  // DUETFAIR_TOOLS_COMMANDS_HPP_

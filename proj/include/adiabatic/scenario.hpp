// Copyright 2026 The Adiabatic PMP Authors
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

#pragma once

// Scenario runner behind the command-line tool: reads a YAML scenario,
// runs one pipeline and writes tab-separated data plus a YAML summary.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace adiabatic::scenario {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

const std::vector<std::string>& subcommands();

struct Invocation {
  std::string subcommand;
  std::string config_path;
  std::string out_dir = ".";
  /// Overrides integrator.rel_tol; abs_tol becomes 1e-2 of it.
  std::optional<double> tol;
  bool seedless = false;
};

/// Runs the scenario and returns the process exit status. Diagnostics go
/// to err, a one-line result to out.
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Same, with the YAML document given as text (config_path is ignored).
int run_text(const Invocation& inv, const std::string& yaml, std::ostream& out, std::ostream& err);

}  // namespace adiabatic::scenario

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

// adpass: runs one scenario of the adiabatic-passage toolkit.
//
//   adpass <subcommand> --config <path> [--out <dir>] [--tol <float>] [--seedless]

#include <CLI11.hpp>

#include <iostream>

#include "adiabatic/scenario.hpp"

int main(int argc, char** argv) {
  namespace sc = adiabatic::scenario;
  CLI::App app{"Optimal-control pipelines for three-level and tripod adiabatic passage"};
  app.set_version_flag("--version", "adpass 1.0.0");

  sc::Invocation inv;
  std::string choices;
  for (const auto& s : sc::subcommands()) choices += (choices.empty() ? "" : ", ") + s;
  app.add_option("subcommand", inv.subcommand, "one of: " + choices)
      ->required()
      ->check(CLI::IsMember(sc::subcommands()));
  app.add_option("--config", inv.config_path, "scenario YAML file")->required();
  app.add_option("--out", inv.out_dir, "output directory (created if missing)");
  app.add_option("--tol", inv.tol, "relative integrator tolerance; overrides the config")
      ->check(CLI::PositiveNumber);
  app.add_flag("--seedless", inv.seedless, "accepted for compatibility; every run is deterministic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return sc::kExitConfig;
  }
  return sc::run(inv, std::cout, std::cerr);
}

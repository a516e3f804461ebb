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

// Fixed-horizon transfer by shooting on the initial costates, and the
// metric suite used to characterize extremal control fields.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "adiabatic/errors.hpp"
#include "adiabatic/integrator.hpp"

namespace adiabatic {

enum class SystemKind { kThreeLevel, kTripod };
enum class CostKind { kEnergy, kStirap };

const char* to_string(SystemKind s);
const char* to_string(CostKind c);

struct Interval {
  double lo = 0.0, hi = 0.0;

  bool collapsed() const { return lo == hi; }
};

struct ShootingProblem {
  SystemKind system = SystemKind::kThreeLevel;
  CostKind cost = CostKind::kEnergy;
  double k = 1.0;
  /// Energy cost: must be >= 0 (0 means no evolution). Stirap cost: <= 0
  /// selects the computed transfer time.
  double horizon = 0.0;
  std::vector<double> start;
  std::vector<double> target;
  /// Offset of theta (three-level) or theta2 (tripod) below the start
  /// chart value on the stirap branch.
  double regularization = 0.02;
  /// theta1(0) for tripod starts on the theta1 = 0 axis.
  double theta1_regularization = 0.01;
  /// Constant w1 on the tripod stirap branch.
  double w1 = 1.0;
  /// One interval per free costate, in the order of costate_names().
  std::vector<Interval> box;
  IntegratorConfig integrator;

  /// Throws DomainError on inconsistent sizes, non unit-norm states or an
  /// empty box.
  void validate() const;
};

/// Free initial costates: three-level energy (p_theta, p_phi, p_rho),
/// three-level stirap (p_phi, p_rho), tripod energy (p_theta1, p_theta2,
/// p_theta3, p_rho), tripod stirap (p_theta1, p_theta3, p_rho).
std::vector<std::string> costate_names(SystemKind s, CostKind c);

struct MetricsReport {
  double C = 0.0;     ///< int sum u_i^2 dt
  double Freq = 0.0;  ///< mean zero-crossing rate of the control components
  double Amp = 0.0;   ///< time average of |u|
  double fidelity = 0.0;
  /// Conserved-quantity drifts of the run, by name.
  std::vector<std::pair<std::string, double>> drifts;
};

/// Controls named u1, u2 (and u3 when present) are read from the aux
/// channels. Throws DomainError for fewer than 8 samples.
MetricsReport metrics(const Trajectory& traj);

/// Relative deadband under which a control value counts as zero when
/// counting sign changes.
inline constexpr double kZeroCrossingDeadband = 1e-9;

/// Integration failure of a shot, carrying the costates that caused it.
class ShootingError : public IntegrationError {
 public:
  ShootingError(const IntegrationError& cause, std::vector<double> costates);

  const std::vector<double>& costates() const noexcept { return costates_; }

 private:
  std::vector<double> costates_;
};

struct ShotResult {
  MetricsReport report;
  Trajectory trajectory;
  std::vector<double> final_state;
  double distance = 0.0;
  double horizon = 0.0;
};

ShotResult shoot(const ShootingProblem& p, const std::vector<double>& costates);

struct SearchOptions {
  std::size_t grid_points = 41;
  /// Best grid nodes refined by the simplex, each with its own budget.
  std::size_t starts = 1;
  std::size_t simplex_evaluations = 500;
  /// Looser tolerances used during the grid stage only.
  double grid_rel_tol = 1e-7;
  double grid_abs_tol = 1e-9;
  /// Simplex stops once its characteristic size falls below this fraction
  /// of the box width.
  double simplex_size_tol = 1e-7;
};

struct SearchResult {
  std::vector<double> costates;
  ShotResult best;
  std::size_t grid_evaluations = 0;
  std::size_t grid_failures = 0;
  std::size_t simplex_evaluations = 0;  ///< summed over the starts
  /// The winning simplex used its whole budget without meeting the size criterion.
  bool budget_exhausted = false;
  bool improved_by_simplex = false;
};

/// Grid over the box, then Nelder-Mead on the distance to the target over
/// the non-collapsed dimensions from the best `starts` grid nodes.
/// Deterministic for a given problem.
SearchResult search(const ShootingProblem& p, const SearchOptions& options = {});

}  // namespace adiabatic

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

// Extremal flow for the cost C = int theta_dot^2 dt. Only v1 is fixed by
// the maximization (v1 = p_theta - k sin cos); v2 is an exogenous input, and
// the minimizing branch p_theta = 0 selects the constant
//
//   v2 = -2 k (r p_r) sin^3(th) cos(th) / p_phi.
//
// On that branch theta stays put while phi sweeps 0 -> pi/2 at the rate
// -cot(th) v2, which gives the counterintuitive pulse order.

#include <optional>

#include "adiabatic/energy_flow.hpp"

namespace adiabatic {

/// Extremal point plus the exogenous second control.
struct StirapExtremal {
  ExtremalPoint point;
  double v2 = 0.0;
};

/// Canonical equations of H = -k p_rho cos^2 + p_theta^2/2 - v2 cot p_phi.
ExtremalPoint stirap_rhs(const StirapExtremal& s, DissipationRate k);

/// Value of H above at a point (not maximized over v2).
double stirap_hamiltonian(const StirapExtremal& s, DissipationRate k);

/// Control v2 that keeps p_theta_dot = 0. Throws DomainError when p_phi = 0.
double stirap_v2(double theta, double rpr, double p_phi, DissipationRate k);

/// H on the minimizing branch: 2 k rpr cos^2 (sin^2 - 1/2).
double stirap_hamiltonian_value(double theta, double rpr, DissipationRate k);

/// Horizon of the quarter turn of phi, |pi / (2 v2 cot th)|. Throws
/// DomainError on the equator or for v2 = 0 (infinite duration).
double stirap_duration(double theta, double v2);

/// |pi p_phi / (4 rpr sin^2 th)|; equals k cos^2(th) T on the branch.
double adiabaticity_margin(double p_phi, double rpr, double theta);

enum class MarginBand { kAdiabatic, kWarning, kViolated };

inline constexpr double kMarginAdiabatic = 0.01;
inline constexpr double kMarginWarning = 0.1;

MarginBand classify_margin(double margin);
const char* to_string(MarginBand band);

struct StirapOptions {
  /// User horizon; the quarter-turn duration is used when empty.
  std::optional<double> horizon;
};

struct StirapRun {
  /// State: rho, theta, phi, p_rho, p_theta, p_phi, cost.
  /// Aux: u1, u2, v1, v2, x1, x2, x3.
  Trajectory trajectory;
  double horizon = 0.0;
  double computed_horizon = 0.0;  ///< quarter-turn duration
  double v2 = 0.0;
  double margin = 0.0;
  MarginBand band = MarginBand::kAdiabatic;

  std::array<double, 3> final_populations{};
  double final_fidelity = 0.0;     ///< x3(T)^2 with r(0) = 1
  double relative_transfer = 0.0;  ///< x3(T)^2 / |x(T)|^2
  double cost = 0.0;

  double max_abs_p_theta = 0.0;
  double max_theta_deviation = 0.0;
  double hamiltonian_expected = 0.0;   ///< closed-form branch value
  double max_hamiltonian_error = 0.0;  ///< numerical H vs closed form

  /// max |u2/u1 - x1/x3| over samples with phi inside the ratio window.
  double ratio_residual = 0.0;
  /// max |u2 x3 - u1 x1| over the whole run; equals r sin(th) |v1|.
  double cross_residual = 0.0;

  double pump_peak_time = 0.0;
  double stokes_peak_time = 0.0;
  bool counterintuitive = false;
};

/// Window of the azimuth inside which the u2/u1 ratio is compared (both
/// pulses and both populations are bounded away from zero there).
inline constexpr double kRatioWindowLow = 0.05 * 3.14159265358979323846;
inline constexpr double kRatioWindowHigh = 0.45 * 3.14159265358979323846;

/// Minimizing branch from (theta0, phi0) with p_theta(0) = 0, r(0) = 1.
StirapRun propagate_stirap(double theta0, double phi0, double rpr, double p_phi, DissipationRate k,
                           const IntegratorConfig& cfg, const StirapOptions& options = {});

}  // namespace adiabatic

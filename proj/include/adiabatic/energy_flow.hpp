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

// Extremal flow of the three-level system for the energy cost
// C = int (u1^2 + u2^2) dt, regular case (p0 = -1/2).
//
// In the chart (rho = log r, theta, phi) with momenta (p_rho = r p_r,
// p_theta, p_phi) the maximized Hamiltonian is
//
//   H = -k p_rho cos^2(th) + k cos(th) sin(th) p_theta
//       + p_theta^2 / 2 + cot^2(th) p_phi^2 / 2
//
// and the optimal rotated controls are v1 = p_theta, v2 = -cot(th) p_phi.

#include <array>

#include "adiabatic/integrator.hpp"
#include "adiabatic/state_space.hpp"

namespace adiabatic {

struct ExtremalPoint {
  double rho = 0.0;  ///< log r
  double theta = 0.5 * 3.14159265358979323846;
  double phi = 0.0;
  double p_rho = 0.0;  ///< r p_r
  double p_theta = 0.0;
  double p_phi = 0.0;

  double r() const;
  Spherical3 spherical() const { return {r(), theta, phi}; }
  RealState3 cartesian() const { return sph_to_cart(spherical()); }

  std::array<double, 6> to_array() const { return {rho, theta, phi, p_rho, p_theta, p_phi}; }
  static ExtremalPoint from_array(const double* v) { return {v[0], v[1], v[2], v[3], v[4], v[5]}; }
};

/// Point on the equator theta = pi/2, phi = 0, r = 1 whose energy is H:
/// there H reduces to p_theta^2 / 2, so p_theta = sign * sqrt(2 H).
ExtremalPoint equator_start(double H, double p_phi, double p_rho, int sign = 1);

double hamiltonian_energy(const ExtremalPoint& e, DissipationRate k);

/// Hamilton's equations. p_rho and p_phi derivatives are exactly zero.
ExtremalPoint extremal_rhs(const ExtremalPoint& e, DissipationRate k);

struct ExtremalControls {
  RotatedControls v;
  ControlPair u;
};

ExtremalControls recover_controls(const ExtremalPoint& e);

struct PropagationOptions {
  /// Co-integrate the complex amplitudes under -iH(t) driven by the
  /// recovered controls, starting from the state matching init.
  bool track_wavefunction = false;
  /// Relative H drift above which the run is aborted.
  double max_energy_drift = 1e-6;
};

struct ConservationDrift {
  double hamiltonian = 0.0;
  double p_phi = 0.0;
  double p_rho = 0.0;
};

struct ExtremalRun {
  /// State layout: rho, theta, phi, p_rho, p_theta, p_phi, cost (and
  /// Re/Im c1..c3 when tracked). Aux: u1, u2, v1, v2, x1, x2, x3.
  Trajectory trajectory;
  double horizon = 0.0;
  double cost = 0.0;
  double final_fidelity = 0.0;  ///< x3(T)^2
  double energy = 0.0;          ///< H at t = 0
  ConservationDrift drift;
};

/// Column positions in ExtremalRun::trajectory state vectors.
namespace extremal_layout {
inline constexpr std::size_t kCost = 6;
inline constexpr std::size_t kWavefunction = 7;
inline constexpr std::size_t kSize = 7;
inline constexpr std::size_t kSizeWithWavefunction = 13;
}  // namespace extremal_layout

/// Propagates the extremal over [0, T]. Throws IntegrationError when the
/// energy drift exceeds options.max_energy_drift.
ExtremalRun propagate_extremal(const ExtremalPoint& init, DissipationRate k, double T, const IntegratorConfig& cfg,
                               const PropagationOptions& options = {});

/// Complex amplitudes stored in a sample of a wavefunction-tracking run.
ComplexState3 tracked_wavefunction(const Sample& s);

/// max over samples and components of |x_chart - x_amplitudes|, where the
/// amplitudes are mapped to (x1, x2, x3) through the real coefficients.
/// Needs a wavefunction-tracking run.
double chart_deviation(const Trajectory& traj);

}  // namespace adiabatic

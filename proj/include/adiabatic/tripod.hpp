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

// Four-level tripod: one lossy excited level |2> coupled by the pump u1 to
// |1> and by two Stokes fields u2, u3 to |3> and |4>.
//
// Real dynamics
//   x1' = -u1 x2,  x2' = -k x2 + u1 x1 - u2 x3 - u3 x4,
//   x3' =  u2 x2,  x4' =  u3 x2,
// chart x1 = r c1 s2, x2 = r c2, x3 = r s1 s2 c3, x4 = r s1 s2 s3
// (ci = cos(theta_i), si = sin(theta_i)).

#include <array>
#include <functional>
#include <optional>

#include "adiabatic/integrator.hpp"
#include "adiabatic/state_space.hpp"

namespace adiabatic {

struct RealState4 {
  double x1 = 0.0, x2 = 0.0, x3 = 0.0, x4 = 0.0;

  double norm2() const { return x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4; }
};

struct Spherical4 {
  double r = 1.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;
};

/// Chart point with flags for the two coordinate degeneracies. On
/// sin(theta2) ~ 0 both theta1 and theta3 are set to 0; on sin(theta1) ~ 0
/// theta3 is set to 0.
struct Spherical4Chart {
  Spherical4 point;
  bool degenerate_theta2 = false;
  bool degenerate_theta1 = false;
};

/// Throws DomainError for the zero vector.
Spherical4Chart cart_to_sph4(const RealState4& x);
RealState4 sph4_to_cart(const Spherical4& s);

struct ControlTriple {
  double u1 = 0.0, u2 = 0.0, u3 = 0.0;

  double norm2() const { return u1 * u1 + u2 * u2 + u3 * u3; }
};

/// Controls in the frame of (theta1, theta3).
struct TripodFrameControls {
  double w1 = 0.0, w2 = 0.0, v3 = 0.0;

  double norm2() const { return w1 * w1 + w2 * w2 + v3 * v3; }
};

/// v2 = u2 c3 + u3 s3, v3 = -u2 s3 + u3 c3, then
/// w1 = u1 s1 + v2 c1, w2 = -u1 c1 + v2 s1.
TripodFrameControls rotate_controls(ControlTriple u, double theta1, double theta3);
ControlTriple unrotate_controls(TripodFrameControls w, double theta1, double theta3);

RealState4 tripod_real_rhs(const RealState4& x, ControlTriple u, DissipationRate k);

/// (r', theta1', theta2', theta3'). Throws DegeneracyError when sin(theta1)
/// or sin(theta2) falls below the pole guard.
Spherical4 tripod_sph_rhs(const Spherical4& s, ControlTriple u, DissipationRate k);

/// Chart point (rho = log r) and momenta (p_rho = r p_r).
struct TripodExtremal {
  double rho = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.5 * 3.14159265358979323846;
  double theta3 = 0.0;
  double p_rho = 0.0;
  double p_theta1 = 0.0;
  double p_theta2 = 0.0;
  double p_theta3 = 0.0;

  double r() const;
  Spherical4 spherical() const { return {r(), theta1, theta2, theta3}; }
  RealState4 cartesian() const { return sph4_to_cart(spherical()); }

  std::array<double, 8> to_array() const { return {rho, theta1, theta2, theta3, p_rho, p_theta1, p_theta2, p_theta3}; }
  static TripodExtremal from_array(const double* v) { return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]}; }
};

/// Pseudo-Hamiltonian at given frame controls, energy cost (1/2) sum u^2:
/// -k p_rho c2^2 + k c2 s2 p_theta2 + w1 cot2 p_theta1 + w2 p_theta2
/// + v3 cot2 p_theta3 / s1 - (w1^2 + w2^2 + v3^2) / 2.
double tripod_energy_hamiltonian(const TripodExtremal& e, TripodFrameControls w, DissipationRate k);

/// Maximizing controls w1 = cot2 p_theta1, w2 = p_theta2,
/// v3 = cot2 p_theta3 / s1.
TripodFrameControls tripod_energy_controls(const TripodExtremal& e);

/// Pseudo-Hamiltonian at the maximizing controls.
double tripod_energy_hamiltonian_max(const TripodExtremal& e, DissipationRate k);

/// Hamilton's equations of the maximized energy Hamiltonian.
TripodExtremal tripod_energy_rhs(const TripodExtremal& e, DissipationRate k);

/// Cartesian costates by the chain rule of the chart.
std::array<double, 4> tripod_cartesian_costates(const TripodExtremal& e);

struct TripodConstants {
  double L1 = 0.0;  ///< x3 p4 - x4 p3
  double L3 = 0.0;  ///< x1 p4 - x4 p1
  double L4 = 0.0;  ///< x1 p3 - x3 p1
};

TripodConstants tripod_constants(const RealState4& x, const std::array<double, 4>& p);

struct TripodEnergyDrift {
  double hamiltonian = 0.0, L1 = 0.0, L3 = 0.0, L4 = 0.0;
};

struct TripodEnergyRun {
  /// State: rho, theta1, theta2, theta3, p_rho, p_theta1, p_theta2,
  /// p_theta3, cost. Aux: u1, u2, u3, w1, w2, v3, x1..x4.
  Trajectory trajectory;
  double cost = 0.0;  ///< (1/2) int (u1^2 + u2^2 + u3^2) dt
  double energy = 0.0;
  TripodEnergyDrift drift;
};

TripodEnergyRun propagate_tripod_energy(const TripodExtremal& init, DissipationRate k, double T,
                                        const IntegratorConfig& cfg);

/// Cost int theta2'^2 dt with w2 = p_theta2 - k s2 c2 substituted:
/// -k p_rho c2^2 + p_theta2^2 / 2 + w1 cot2 p_theta1 + v3 cot2 p_theta3 / s1.
double tripod_stirap_hamiltonian(const TripodExtremal& e, double w1, double v3, DissipationRate k);

/// v3 that keeps p_theta2' = 0:
/// (2 k rpr c2 s2^3 - w1 p_theta1) s1 / p_theta3. Throws DomainError when
/// p_theta3 = 0.
double tripod_v3(double w1, double theta1, double theta2, double p_theta1, double p_theta3, double rpr,
                 DissipationRate k);

/// Canonical equations of the Hamiltonian above for given (w1, v3).
TripodExtremal tripod_stirap_rhs(const TripodExtremal& e, double w1, double v3, DissipationRate k);

struct TripodStirapParams {
  /// Initial point; x = (1, 0, 0, 0) regularized by a small theta1 and
  /// theta2 slightly below pi/2. p_theta2 must be 0.
  TripodExtremal init;
  double w1 = 1.0;
  double k = 1.0;
  /// Horizon; when empty, the time for theta1 to reach pi/2 at constant w1.
  std::optional<double> horizon;
  /// Time-dependent w1 replacing the constant; requires an explicit horizon.
  std::function<double(double)> w1_profile;
};

struct TripodStirapRun {
  /// State: rho, theta1, theta2, theta3, p_rho, p_theta1, p_theta2,
  /// p_theta3, cost. Aux: u1, u2, u3, w1, w2, v3, P1..P4.
  Trajectory trajectory;
  double horizon = 0.0;
  std::array<double, 4> final_populations{};
  double max_population2 = 0.0;
  double max_abs_p_theta2 = 0.0;
  double max_theta2_deviation = 0.0;
  double max_norm_identity_error = 0.0;  ///< |u|^2 - |w|^2 over samples
  double cost = 0.0;
  double pump_peak_time = 0.0;
  double stokes_peak_time = 0.0;  ///< peak of sqrt(u2^2 + u3^2)
  bool counterintuitive = false;
};

/// Time for theta1 to move from theta1_0 to pi/2 at the rate w1 cot(theta2).
double tripod_horizon(double theta1_0, double theta2, double w1);

TripodStirapRun propagate_tripod_stirap(const TripodStirapParams& params, const IntegratorConfig& cfg);

/// theta1(0) in [lo, hi] for which theta3 at the computed horizon equals
/// theta3_target. Throws DomainError if the bracket does not straddle it.
double tune_tripod_theta1(const TripodStirapParams& params, double theta3_target, double lo, double hi,
                          const IntegratorConfig& cfg);

}  // namespace adiabatic

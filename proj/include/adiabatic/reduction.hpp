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

// Reduction of the energy-cost flow by the rotation symmetry in (x1, x3).
//
// The invariant polynomials of the rotation are
//   pi1 = x2, pi2 = p_x2, pi3 = x1 p_x3 - x3 p_x1 (= p_phi),
//   pi4 = p_x1^2 + p_x3^2, pi5 = x1^2 + x3^2, pi6 = x1 p_x1 + x3 p_x3,
// tied by pi6^2 + pi3^2 = pi4 pi5.

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "adiabatic/energy_flow.hpp"

namespace adiabatic {

struct CartesianPhasePoint {
  RealState3 x;
  std::array<double, 3> p{};
};

/// Cartesian costates of a chart point by the chain rule of the spherical
/// map. With projected = true the point is placed on the unit sphere (r = 1)
/// so that x . p = p_rho.
CartesianPhasePoint to_cartesian(const ExtremalPoint& e, bool projected = true);

struct ReductionPoint {
  double pi1 = 0.0, pi2 = 0.0, pi3 = 0.0, pi4 = 0.0, pi5 = 0.0, pi6 = 0.0;

  /// pi6^2 + pi3^2 - pi4 pi5.
  double relation_residual() const { return pi6 * pi6 + pi3 * pi3 - pi4 * pi5; }
};

ReductionPoint invariants_of(const RealState3& x, const std::array<double, 3>& p);
inline ReductionPoint invariants_of(const CartesianPhasePoint& c) { return invariants_of(c.x, c.p); }

/// -k pi1 pi2 + (pi1^2 pi4 + pi2^2 pi5 - 2 pi1 pi2 pi6) / 2.
double reduced_hamiltonian(const ReductionPoint& rp, double k);

inline constexpr double kConstraintTolerance = 1e-8;

/// Form valid on the sphere with x . p = rpr:
/// -(k + rpr) pi1 pi2 + (pi1^2 pi4 + pi2^2 pi1^2 + pi2^2) / 2.
/// Throws DomainError when either constraint is violated by more than
/// kConstraintTolerance.
double reduced_hamiltonian_constrained(const ReductionPoint& rp, double rpr, double k);

/// pi4 fixed by the reduced phase-space relation on the sphere,
/// (rpr - pi1 pi2)^2 + pi3^2 = pi4 (1 - pi1^2).
double constrained_pi4(double pi1, double pi2, double p_phi, double rpr);

struct SectionGrid {
  std::size_t n1 = 401;
  std::size_t n2 = 401;
  double pi1_lo = -0.999, pi1_hi = 0.999;
  double pi2_lo = -4.0, pi2_hi = 4.0;
};

struct SectionPoint {
  double pi1 = 0.0, pi2 = 0.0, pi4 = 0.0;
};

struct BitorusSection {
  double H = 0.0, p_phi = 0.0, rpr = 0.0, k = 0.0;
  SectionGrid grid;
  /// Zero crossings of the energy residual between neighbouring grid nodes,
  /// refined by a bracketed root solve along the edge.
  std::vector<SectionPoint> points;
  /// Residual at the origin of the (pi1, pi2) plane.
  double origin_residual = 0.0;
  /// Sign components of the residual inside a thin annulus around the
  /// origin: 1 when the curve misses it, 2 for a smooth curve through it,
  /// 4 or more for a crossing.
  int annulus_components = 0;
  bool pinch_at_origin = false;

  bool empty() const { return points.empty(); }
};

/// Energy residual H_red(pi1, pi2) - H on the constrained section.
double section_residual(double pi1, double pi2, double H, double p_phi, double rpr, double k);

BitorusSection bitorus_section(double H, double p_phi, double rpr, double k, const SectionGrid& grid = {});

/// Roots p_theta of H(theta, p_theta) = 0 at fixed (p_phi, p_rho), ordered
/// (smaller, larger). Throws DomainError when the fibre misses theta.
std::pair<double, double> zero_energy_momenta(double theta, double p_phi, double p_rho, DissipationRate k);

/// x2^2 + p_x2^2, which vanishes on the singular circle.
double singular_circle_distance(const CartesianPhasePoint& c);

}  // namespace adiabatic

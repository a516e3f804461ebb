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

// Three-level Lambda system: state charts and the raw controlled dynamics.
//
// Real coefficients follow c1 = x1 + i x4, c2 = x5 - i x2, c3 = x3 + i x6.
// Only (x1, x2, x3) couple under the resonant Hamiltonian
//
//        |  0   u1    0  |
//   H =  |  u1  -ik  -u2 |
//        |  0  -u2    0  |
//
// and the spherical chart is x1 = r sin(th) cos(ph), x2 = r cos(th),
// x3 = r sin(th) sin(ph).

#include <array>
#include <cmath>
#include <complex>

namespace adiabatic {

using Complex = std::complex<double>;

/// sin(theta) below this value is treated as a chart pole.
inline constexpr double kPoleGuard = 1e-9;

/// cos(theta) with the rounding residue of the double nearest pi/2 (about
/// 6e-17) flushed to zero, so that equator points evaluate exactly.
inline double chart_cos(double theta) {
  const double c = std::cos(theta);
  return std::abs(c) < 1e-15 ? 0.0 : c;
}

struct ComplexState3 {
  Complex c1{}, c2{}, c3{};

  double norm2() const { return std::norm(c1) + std::norm(c2) + std::norm(c3); }
};

struct RealState3 {
  double x1 = 0.0, x2 = 0.0, x3 = 0.0;

  double norm2() const { return x1 * x1 + x2 * x2 + x3 * x3; }
};

/// The six real coefficients x1..x6 of a ComplexState3 (index 0 holds x1).
using RealCoefficients = std::array<double, 6>;

struct Spherical3 {
  double r = 1.0;
  double theta = 0.0;
  double phi = 0.0;
};

/// Spherical coordinates plus a flag raised when the point sits on the
/// x2 axis, where phi is undefined and set to 0.
struct SphericalChart {
  Spherical3 point;
  bool degenerate = false;
};

/// Pump (u1) and Stokes (u2) Rabi frequencies.
struct ControlPair {
  double u1 = 0.0, u2 = 0.0;

  double norm2() const { return u1 * u1 + u2 * u2; }
};

/// Controls rotated into the frame attached to the azimuth phi.
struct RotatedControls {
  double v1 = 0.0, v2 = 0.0;

  double norm2() const { return v1 * v1 + v2 * v2; }
};

/// Relaxation rate of the intermediate level. Always finite and >= 0.
class DissipationRate {
 public:
  explicit DissipationRate(double k);

  double value() const noexcept { return k_; }

 private:
  double k_;
};

RealCoefficients complex_to_real(const ComplexState3& c);
ComplexState3 real_to_complex(const RealCoefficients& x);

/// Projection of the six real coefficients on the coupled triple.
inline RealState3 reduced_part(const RealCoefficients& x) { return {x[0], x[1], x[2]}; }

/// Time derivative of the coupled triple (x1, x2, x3).
RealState3 reduced_rhs(const RealState3& x, ControlPair u, DissipationRate k);

/// -i H(t) c.
ComplexState3 schrodinger_rhs(const ComplexState3& c, ControlPair u, DissipationRate k);

/// Throws DomainError for the zero vector. Poles come back flagged.
SphericalChart cart_to_sph(const RealState3& x);
RealState3 sph_to_cart(const Spherical3& s);

/// (r_dot, theta_dot, phi_dot) of the reduced dynamics in the spherical chart.
/// Throws DegeneracyError at a pole.
Spherical3 spherical_rhs(const Spherical3& s, ControlPair u, DissipationRate k);

RotatedControls controls_uv(ControlPair u, double phi);
ControlPair controls_vu(RotatedControls v, double phi);

}  // namespace adiabatic

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

#include "adiabatic/state_space.hpp"

#include <cmath>

#include "adiabatic/errors.hpp"

namespace adiabatic {

DissipationRate::DissipationRate(double k) : k_(k) {
  if (!std::isfinite(k) || k < 0.0) {
    throw DomainError("dissipation rate must be finite and non-negative, got " + std::to_string(k));
  }
}

RealCoefficients complex_to_real(const ComplexState3& c) {
  return {c.c1.real(), -c.c2.imag(), c.c3.real(), c.c1.imag(), c.c2.real(), c.c3.imag()};
}

ComplexState3 real_to_complex(const RealCoefficients& x) {
  return {Complex(x[0], x[3]), Complex(x[4], -x[1]), Complex(x[2], x[5])};
}

// Real part of -iH c pulled back through the coefficient map. The u2 terms
// carry the sign fixed by the complex Hamiltonian, so that this field, the
// Schrodinger equation and the spherical chart all describe the same flow.
RealState3 reduced_rhs(const RealState3& x, ControlPair u, DissipationRate k) {
  return {-u.u1 * x.x2, u.u1 * x.x1 - k.value() * x.x2 - u.u2 * x.x3, u.u2 * x.x2};
}

ComplexState3 schrodinger_rhs(const ComplexState3& c, ControlPair u, DissipationRate k) {
  const Complex i(0.0, 1.0);
  const Complex h1 = u.u1 * c.c2;
  const Complex h2 = u.u1 * c.c1 - i * k.value() * c.c2 - u.u2 * c.c3;
  const Complex h3 = -u.u2 * c.c2;
  return {-i * h1, -i * h2, -i * h3};
}

SphericalChart cart_to_sph(const RealState3& x) {
  const double r = std::sqrt(x.norm2());
  if (!(r > 0.0)) {
    throw DomainError("cart_to_sph: zero vector has no spherical coordinates");
  }
  const double rho_perp = std::hypot(x.x1, x.x3);
  SphericalChart out;
  out.point.r = r;
  out.point.theta = std::atan2(rho_perp, x.x2);
  if (rho_perp / r < kPoleGuard) {
    out.point.phi = 0.0;
    out.degenerate = true;
  } else {
    out.point.phi = std::atan2(x.x3, x.x1);
  }
  return out;
}

RealState3 sph_to_cart(const Spherical3& s) {
  const double st = std::sin(s.theta);
  return {s.r * st * std::cos(s.phi), s.r * std::cos(s.theta), s.r * st * std::sin(s.phi)};
}

Spherical3 spherical_rhs(const Spherical3& s, ControlPair u, DissipationRate k) {
  const double st = std::sin(s.theta);
  const double ct = std::cos(s.theta);
  if (std::abs(st) < kPoleGuard) {
    throw DegeneracyError("spherical_rhs: sin(theta) below pole guard");
  }
  const double cp = std::cos(s.phi);
  const double sp = std::sin(s.phi);
  const double kv = k.value();
  return {-kv * s.r * ct * ct, kv * st * ct - u.u1 * cp + u.u2 * sp, ct / st * (u.u1 * sp + u.u2 * cp)};
}

RotatedControls controls_uv(ControlPair u, double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return {-u.u1 * c + u.u2 * s, -u.u1 * s - u.u2 * c};
}

ControlPair controls_vu(RotatedControls v, double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return {-v.v1 * c - v.v2 * s, v.v1 * s - v.v2 * c};
}

}  // namespace adiabatic

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

// Reference computations written independently of the library: Cartesian
// Hamiltonian flows integrated with a fixed-step 7(8) Fehlberg scheme, and
// chart maps restated from scratch.

#include <array>
#include <cmath>
#include <random>

#include <boost/numeric/odeint.hpp>

namespace oracle {

// Three-level energy flow in (x1, x2, x3, p1, p2, p3) with
//   H = -k x2 p2 + (A^2 + B^2) / 2,  A = x1 p2 - x2 p1,  B = x2 p3 - x3 p2,
// the optimal fields being u1 = A, u2 = B. Component 6 accumulates
// int (A^2 + B^2) dt.
using State3 = std::array<double, 7>;

struct Flow3 {
  double k;
  void operator()(const State3& s, State3& d, double) const {
    const double x1 = s[0], x2 = s[1], x3 = s[2], p1 = s[3], p2 = s[4], p3 = s[5];
    const double A = x1 * p2 - x2 * p1;
    const double B = x2 * p3 - x3 * p2;
    d[0] = -A * x2;
    d[1] = -k * x2 + A * x1 - B * x3;
    d[2] = B * x2;
    d[3] = -A * p2;
    d[4] = k * p2 + A * p1 - B * p3;
    d[5] = B * p2;
    d[6] = A * A + B * B;
  }
};

inline double energy3(const State3& s, double k) {
  const double A = s[0] * s[4] - s[1] * s[3];
  const double B = s[1] * s[5] - s[2] * s[4];
  return -k * s[1] * s[4] + 0.5 * (A * A + B * B);
}

// Cartesian point of the chart (log r, theta, phi) with momenta
// (r p_r, p_theta, p_phi); x1 = r s cos(phi), x2 = r c, x3 = r s sin(phi).
inline State3 from_chart3(double rho, double theta, double phi, double p_rho, double p_theta, double p_phi) {
  const double r = std::exp(rho);
  const double s = std::sin(theta), c = std::cos(theta);
  const double cp = std::cos(phi), sp = std::sin(phi);
  // Gradient of each chart momentum: p_x = J^{-T} (p_r, p_theta, p_phi).
  const double pr = p_rho / r;
  State3 out{};
  out[0] = r * s * cp;
  out[1] = r * c;
  out[2] = r * s * sp;
  out[3] = pr * s * cp + p_theta / r * c * cp - p_phi / (r * s) * sp;
  out[4] = pr * c - p_theta / r * s;
  out[5] = pr * s * sp + p_theta / r * c * sp + p_phi / (r * s) * cp;
  out[6] = 0.0;
  return out;
}

inline State3 integrate3(State3 s, double k, double T, double dt) {
  boost::numeric::odeint::runge_kutta_fehlberg78<State3> stepper;
  boost::numeric::odeint::integrate_const(stepper, Flow3{k}, s, 0.0, T, dt);
  return s;
}

// Tripod energy flow in (x1..x4, p1..p4), H = -k x2 p2 + (A^2+B^2+C^2)/2
// with A = x1 p2 - x2 p1, B = x2 p3 - x3 p2, C = x2 p4 - x4 p2.
using State4 = std::array<double, 9>;

struct Flow4 {
  double k;
  void operator()(const State4& s, State4& d, double) const {
    const double x1 = s[0], x2 = s[1], x3 = s[2], x4 = s[3];
    const double p1 = s[4], p2 = s[5], p3 = s[6], p4 = s[7];
    const double A = x1 * p2 - x2 * p1;
    const double B = x2 * p3 - x3 * p2;
    const double C = x2 * p4 - x4 * p2;
    d[0] = -A * x2;
    d[1] = -k * x2 + A * x1 - B * x3 - C * x4;
    d[2] = B * x2;
    d[3] = C * x2;
    d[4] = -A * p2;
    d[5] = k * p2 + A * p1 - B * p3 - C * p4;
    d[6] = B * p2;
    d[7] = C * p2;
    d[8] = 0.5 * (A * A + B * B + C * C);
  }
};

inline State4 integrate4(State4 s, double k, double T, double dt) {
  boost::numeric::odeint::runge_kutta_fehlberg78<State4> stepper;
  boost::numeric::odeint::integrate_const(stepper, Flow4{k}, s, 0.0, T, dt);
  return s;
}

// x1 = r c1 s2, x2 = r c2, x3 = r s1 s2 c3, x4 = r s1 s2 s3.
inline std::array<double, 4> chart4(double r, double t1, double t2, double t3) {
  return {r * std::cos(t1) * std::sin(t2), r * std::cos(t2), r * std::sin(t1) * std::sin(t2) * std::cos(t3),
          r * std::sin(t1) * std::sin(t2) * std::sin(t3)};
}

// Inverse chart on the open domain (theta1, theta2 in (0, pi)).
inline std::array<double, 4> inverse_chart4(const std::array<double, 4>& x) {
  const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
  const double t2 = std::acos(x[1] / r);
  const double t1 = std::atan2(std::sqrt(x[2] * x[2] + x[3] * x[3]), x[0]);
  const double t3 = std::atan2(x[3], x[2]);
  return {r, t1, t2, t3};
}

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20260514);
  return g;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

}  // namespace oracle

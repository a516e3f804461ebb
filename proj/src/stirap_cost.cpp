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

#include "adiabatic/stirap_cost.hpp"

#include <cmath>
#include <numbers>

#include "adiabatic/errors.hpp"

namespace adiabatic {

namespace {

void check_pole(double sin_theta, const char* where) {
  if (std::abs(sin_theta) < kPoleGuard) {
    throw DegeneracyError(std::string(where) + ": sin(theta) below pole guard");
  }
}

// cos(pi/2) evaluates to ~6e-17; anything this close is the equator.
constexpr double kEquatorGuard = 1e-12;

}  // namespace

double stirap_v2(double theta, double rpr, double p_phi, DissipationRate k) {
  if (p_phi == 0.0) {
    throw DomainError("stirap_v2: p_phi must be non-zero");
  }
  const double s = std::sin(theta);
  return -2.0 * k.value() * rpr * s * s * s * std::cos(theta) / p_phi;
}

ExtremalPoint stirap_rhs(const StirapExtremal& st, DissipationRate k) {
  const ExtremalPoint& e = st.point;
  const double s = std::sin(e.theta);
  const double c = std::cos(e.theta);
  check_pole(s, "stirap_rhs");
  const double kv = k.value();
  ExtremalPoint d;
  d.rho = -kv * c * c;
  d.theta = e.p_theta;
  d.phi = -c / s * st.v2;
  d.p_rho = 0.0;
  // -2k rpr s c - p_phi v2 / s^2, written as a multiple of the offset from
  // the balancing control so that the branch p_theta = 0 is an exact fixed
  // point in floating point as well.
  if (e.p_phi != 0.0) {
    d.p_theta = -e.p_phi / (s * s) * (st.v2 - stirap_v2(e.theta, e.p_rho, e.p_phi, k));
  } else {
    d.p_theta = -2.0 * kv * e.p_rho * s * c;
  }
  d.p_phi = 0.0;
  return d;
}

double stirap_hamiltonian(const StirapExtremal& st, DissipationRate k) {
  const ExtremalPoint& e = st.point;
  const double s = std::sin(e.theta);
  const double c = std::cos(e.theta);
  check_pole(s, "stirap_hamiltonian");
  return -k.value() * e.p_rho * c * c + 0.5 * e.p_theta * e.p_theta - st.v2 * c / s * e.p_phi;
}

double stirap_hamiltonian_value(double theta, double rpr, DissipationRate k) {
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  return 2.0 * k.value() * rpr * c * c * (s * s - 0.5);
}

double stirap_duration(double theta, double v2) {
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  check_pole(s, "stirap_duration");
  if (std::abs(c) < kEquatorGuard || v2 == 0.0) {
    throw DomainError("stirap_duration: zero sweep rate, the transfer time is infinite");
  }
  return std::abs(std::numbers::pi / (2.0 * v2 * c / s));
}

double adiabaticity_margin(double p_phi, double rpr, double theta) {
  if (rpr == 0.0) {
    throw DomainError("adiabaticity_margin: r p_r must be non-zero");
  }
  const double s = std::sin(theta);
  check_pole(s, "adiabaticity_margin");
  return std::abs(std::numbers::pi * p_phi / (4.0 * rpr * s * s));
}

MarginBand classify_margin(double margin) {
  if (margin < kMarginAdiabatic) return MarginBand::kAdiabatic;
  if (margin <= kMarginWarning) return MarginBand::kWarning;
  return MarginBand::kViolated;
}

const char* to_string(MarginBand band) {
  switch (band) {
    case MarginBand::kAdiabatic:
      return "adiabatic";
    case MarginBand::kWarning:
      return "warning";
    case MarginBand::kViolated:
      return "violated";
  }
  return "unknown";
}

StirapRun propagate_stirap(double theta0, double phi0, double rpr, double p_phi, DissipationRate k,
                           const IntegratorConfig& cfg, const StirapOptions& options) {
  StirapRun run;
  run.v2 = stirap_v2(theta0, rpr, p_phi, k);
  run.computed_horizon = stirap_duration(theta0, run.v2);
  run.horizon = options.horizon.value_or(run.computed_horizon);
  if (!(run.horizon > 0.0)) {
    throw DomainError("propagate_stirap: horizon must be positive");
  }
  run.margin = adiabaticity_margin(p_phi, rpr, theta0);
  run.band = classify_margin(run.margin);

  ExtremalPoint init;
  init.rho = 0.0;
  init.theta = theta0;
  init.phi = phi0;
  init.p_rho = rpr;
  init.p_theta = 0.0;
  init.p_phi = p_phi;

  const double v2 = run.v2;
  VectorField rhs = [k, v2](double, std::span<const double> y, std::span<double> dy) {
    const StirapExtremal st{ExtremalPoint::from_array(y.data()), v2};
    const auto d = stirap_rhs(st, k).to_array();
    std::copy(d.begin(), d.end(), dy.begin());
    dy[extremal_layout::kCost] = st.point.p_theta * st.point.p_theta;
  };

  StateVector y0(extremal_layout::kSize, 0.0);
  const auto a = init.to_array();
  std::copy(a.begin(), a.end(), y0.begin());
  run.trajectory = integrate(rhs, y0, 0.0, run.horizon, cfg);

  auto& traj = run.trajectory;
  traj.state_names = {"rho", "theta", "phi", "p_rho", "p_theta", "p_phi", "cost"};
  traj.aux_names = {"u1", "u2", "v1", "v2", "x1", "x2", "x3"};

  run.hamiltonian_expected = stirap_hamiltonian_value(theta0, rpr, k);
  double pump_peak = -1.0;
  double stokes_peak = -1.0;
  for (auto& s : traj.samples) {
    const ExtremalPoint e = ExtremalPoint::from_array(s.y.data());
    const double sn = std::sin(e.theta);
    const double v1 = e.p_theta - k.value() * sn * std::cos(e.theta);
    const ControlPair u = controls_vu({v1, v2}, e.phi);
    const RealState3 x = e.cartesian();
    s.aux = {u.u1, u.u2, v1, v2, x.x1, x.x2, x.x3};

    run.max_abs_p_theta = std::max(run.max_abs_p_theta, std::abs(e.p_theta));
    run.max_theta_deviation = std::max(run.max_theta_deviation, std::abs(e.theta - theta0));
    run.max_hamiltonian_error = std::max(
        run.max_hamiltonian_error, std::abs(stirap_hamiltonian({e, v2}, k) - run.hamiltonian_expected));

    run.cross_residual = std::max(run.cross_residual, std::abs(u.u2 * x.x3 - u.u1 * x.x1));
    const double phi_turn = e.phi - phi0;
    if (phi_turn >= kRatioWindowLow && phi_turn <= kRatioWindowHigh) {
      run.ratio_residual = std::max(run.ratio_residual, std::abs(u.u2 / u.u1 - x.x1 / x.x3));
    }
    if (std::abs(u.u1) > pump_peak) {
      pump_peak = std::abs(u.u1);
      run.pump_peak_time = s.t;
    }
    if (std::abs(u.u2) > stokes_peak) {
      stokes_peak = std::abs(u.u2);
      run.stokes_peak_time = s.t;
    }
  }
  run.counterintuitive = run.stokes_peak_time < run.pump_peak_time;

  const auto& last = traj.back().aux;
  run.final_populations = {last[4] * last[4], last[5] * last[5], last[6] * last[6]};
  run.final_fidelity = run.final_populations[2];
  const double total = run.final_populations[0] + run.final_populations[1] + run.final_populations[2];
  run.relative_transfer = total > 0.0 ? run.final_populations[2] / total : 0.0;
  run.cost = traj.back().y[extremal_layout::kCost];
  return run;
}

}  // namespace adiabatic

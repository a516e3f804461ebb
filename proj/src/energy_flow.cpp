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

#include "adiabatic/energy_flow.hpp"

#include <algorithm>
#include <cmath>

#include "adiabatic/errors.hpp"

namespace adiabatic {

namespace {

void check_pole(double sin_theta, const char* where) {
  if (std::abs(sin_theta) < kPoleGuard) {
    throw DegeneracyError(std::string(where) + ": sin(theta) below pole guard");
  }
}

}  // namespace

double ExtremalPoint::r() const { return std::exp(rho); }

ExtremalPoint equator_start(double H, double p_phi, double p_rho, int sign) {
  if (!(H >= 0.0)) {
    throw DomainError("equator_start: the equator only carries H >= 0");
  }
  ExtremalPoint e;
  e.rho = 0.0;
  e.theta = std::acos(0.0);
  e.phi = 0.0;
  e.p_rho = p_rho;
  e.p_theta = (sign < 0 ? -1.0 : 1.0) * std::sqrt(2.0 * H);
  e.p_phi = p_phi;
  return e;
}

double hamiltonian_energy(const ExtremalPoint& e, DissipationRate k) {
  const double s = std::sin(e.theta);
  const double c = chart_cos(e.theta);
  check_pole(s, "hamiltonian_energy");
  const double kv = k.value();
  const double cot = c / s;
  return -kv * e.p_rho * c * c + kv * c * s * e.p_theta + 0.5 * e.p_theta * e.p_theta +
         0.5 * cot * cot * e.p_phi * e.p_phi;
}

ExtremalPoint extremal_rhs(const ExtremalPoint& e, DissipationRate k) {
  const double s = std::sin(e.theta);
  const double c = chart_cos(e.theta);
  check_pole(s, "extremal_rhs");
  const double kv = k.value();
  const double cot = c / s;
  ExtremalPoint d;
  d.rho = -kv * c * c;
  d.theta = kv * s * c + e.p_theta;
  d.phi = cot * cot * e.p_phi;
  d.p_rho = 0.0;
  d.p_theta = -kv * e.p_rho * (2.0 * s * c) - kv * std::cos(2.0 * e.theta) * e.p_theta +
              e.p_phi * e.p_phi * c / (s * s * s);
  d.p_phi = 0.0;
  return d;
}

ExtremalControls recover_controls(const ExtremalPoint& e) {
  const double s = std::sin(e.theta);
  check_pole(s, "recover_controls");
  ExtremalControls out;
  out.v = {e.p_theta, -chart_cos(e.theta) / s * e.p_phi};
  out.u = controls_vu(out.v, e.phi);
  return out;
}

ComplexState3 tracked_wavefunction(const Sample& s) {
  using namespace extremal_layout;
  const auto& y = s.y;
  if (y.size() < kSizeWithWavefunction) {
    throw DomainError("sample carries no wavefunction");
  }
  const std::size_t w = kWavefunction;
  return {Complex(y[w], y[w + 1]), Complex(y[w + 2], y[w + 3]), Complex(y[w + 4], y[w + 5])};
}

double chart_deviation(const Trajectory& traj) {
  double worst = 0.0;
  for (const auto& s : traj.samples) {
    const RealState3 a = reduced_part(complex_to_real(tracked_wavefunction(s)));
    const RealState3 x = ExtremalPoint::from_array(s.y.data()).cartesian();
    worst = std::max({worst, std::abs(a.x1 - x.x1), std::abs(a.x2 - x.x2), std::abs(a.x3 - x.x3)});
  }
  return worst;
}

ExtremalRun propagate_extremal(const ExtremalPoint& init, DissipationRate k, double T, const IntegratorConfig& cfg,
                               const PropagationOptions& options) {
  using namespace extremal_layout;
  const std::size_t n = options.track_wavefunction ? kSizeWithWavefunction : kSize;

  StateVector y0(n, 0.0);
  const auto a = init.to_array();
  std::copy(a.begin(), a.end(), y0.begin());
  if (options.track_wavefunction) {
    const RealState3 x = init.cartesian();
    const ComplexState3 c{Complex(x.x1, 0.0), Complex(0.0, -x.x2), Complex(x.x3, 0.0)};
    y0[kWavefunction + 0] = c.c1.real();
    y0[kWavefunction + 1] = c.c1.imag();
    y0[kWavefunction + 2] = c.c2.real();
    y0[kWavefunction + 3] = c.c2.imag();
    y0[kWavefunction + 4] = c.c3.real();
    y0[kWavefunction + 5] = c.c3.imag();
  }

  const bool track = options.track_wavefunction;
  VectorField rhs = [k, track](double, std::span<const double> y, std::span<double> dy) {
    const ExtremalPoint e = ExtremalPoint::from_array(y.data());
    const ExtremalPoint d = extremal_rhs(e, k);
    const auto da = d.to_array();
    std::copy(da.begin(), da.end(), dy.begin());
    const ExtremalControls ctl = recover_controls(e);
    dy[kCost] = ctl.v.norm2();
    if (track) {
      const std::size_t w = kWavefunction;
      const ComplexState3 c{Complex(y[w], y[w + 1]), Complex(y[w + 2], y[w + 3]), Complex(y[w + 4], y[w + 5])};
      const ComplexState3 dc = schrodinger_rhs(c, ctl.u, k);
      dy[w + 0] = dc.c1.real();
      dy[w + 1] = dc.c1.imag();
      dy[w + 2] = dc.c2.real();
      dy[w + 3] = dc.c2.imag();
      dy[w + 4] = dc.c3.real();
      dy[w + 5] = dc.c3.imag();
    }
  };

  ExtremalRun run;
  run.horizon = T;
  run.trajectory = integrate(rhs, y0, 0.0, T, cfg);
  auto& traj = run.trajectory;
  traj.state_names = {"rho", "theta", "phi", "p_rho", "p_theta", "p_phi", "cost"};
  if (track) {
    for (const char* name : {"re_c1", "im_c1", "re_c2", "im_c2", "re_c3", "im_c3"}) {
      traj.state_names.emplace_back(name);
    }
  }
  traj.aux_names = {"u1", "u2", "v1", "v2", "x1", "x2", "x3"};
  for (auto& s : traj.samples) {
    const ExtremalPoint e = ExtremalPoint::from_array(s.y.data());
    const ExtremalControls ctl = recover_controls(e);
    const RealState3 x = e.cartesian();
    s.aux = {ctl.u.u1, ctl.u.u2, ctl.v.v1, ctl.v.v2, x.x1, x.x2, x.x3};
  }

  const auto drifts = monitor_conserved(
      traj, {[k](const Sample& s) { return hamiltonian_energy(ExtremalPoint::from_array(s.y.data()), k); },
             [](const Sample& s) { return s.y[5]; }, [](const Sample& s) { return s.y[3]; }});
  run.drift = {drifts[0], drifts[1], drifts[2]};
  run.energy = hamiltonian_energy(init, k);
  run.cost = traj.back().y[kCost];
  const double x3 = traj.back().aux[6];
  run.final_fidelity = x3 * x3;

  if (run.drift.hamiltonian > options.max_energy_drift) {
    throw IntegrationError(T, "energy drift " + std::to_string(run.drift.hamiltonian) + " exceeds limit " +
                                  std::to_string(options.max_energy_drift));
  }
  return run;
}

}  // namespace adiabatic

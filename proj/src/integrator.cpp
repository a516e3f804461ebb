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

#include "adiabatic/integrator.hpp"

#include <algorithm>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "adiabatic/errors.hpp"

namespace adiabatic {

namespace odeint = boost::numeric::odeint;

void IntegratorConfig::validate() const {
  auto tol_ok = [](double v) { return std::isfinite(v) && v > 0.0 && v <= 1e-2; };
  if (!tol_ok(rel_tol) || !tol_ok(abs_tol)) {
    throw DomainError("integrator tolerances must lie in (0, 1e-2]");
  }
  if (!(max_step > 0.0) || !std::isfinite(max_step)) {
    throw DomainError("integrator max_step must be positive");
  }
  if (!(sample_interval > 0.0) || !std::isfinite(sample_interval)) {
    throw DomainError("integrator sample_interval must be positive");
  }
}

std::size_t Trajectory::aux_index(const std::string& name) const {
  const auto it = std::find(aux_names.begin(), aux_names.end(), name);
  if (it == aux_names.end()) {
    throw DomainError("trajectory has no aux channel '" + name + "'");
  }
  return static_cast<std::size_t>(it - aux_names.begin());
}

namespace {

struct NonFiniteRhs {
  double t;
};

}  // namespace

Trajectory integrate(const VectorField& rhs, const StateVector& y0, double t0, double T,
                     const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(T > t0)) {
    throw DomainError("integrate: final time must exceed initial time");
  }
  for (double v : y0) {
    if (!std::isfinite(v)) {
      throw IntegrationError(t0, "non-finite initial state");
    }
  }

  Trajectory traj;
  std::size_t evaluations = 0;
  auto system = [&](const StateVector& y, StateVector& dydt, double t) {
    ++evaluations;
    rhs(t, std::span<const double>(y), std::span<double>(dydt));
    for (double v : dydt) {
      if (!std::isfinite(v)) {
        throw NonFiniteRhs{t};
      }
    }
  };

  using Stepper = odeint::runge_kutta_dopri5<StateVector>;
  const double horizon = T - t0;
  const double max_step = std::min(cfg.max_step, horizon);
  auto stepper = odeint::make_dense_output(cfg.abs_tol, cfg.rel_tol, max_step, Stepper());

  const double h = cfg.sample_interval;
  const auto n_grid = static_cast<std::size_t>(std::floor(horizon / h));
  auto grid_time = [&](std::size_t i) { return t0 + static_cast<double>(i) * h; };
  // The final sample is T itself; a grid point closer than this to T is dropped.
  const double end_slack = 1e-9 * h;

  traj.samples.reserve(n_grid + 2);
  traj.samples.push_back({t0, y0, {}});
  std::size_t next = 1;

  const double min_step = 1e-14 * std::max(1.0, std::abs(T));
  StateVector y_interp(y0.size());
  try {
    stepper.initialize(y0, t0, std::min(max_step, 1e-3 * horizon));
    while (stepper.current_time() < T) {
      stepper.do_step(system);
      ++traj.stats.accepted_steps;
      const double t_now = stepper.current_time();
      while (next <= n_grid && grid_time(next) <= t_now && grid_time(next) < T - end_slack) {
        stepper.calc_state(grid_time(next), y_interp);
        traj.samples.push_back({grid_time(next), y_interp, {}});
        ++next;
      }
      if (t_now < T && stepper.current_time_step() < min_step) {
        throw IntegrationError(t_now, "step-size underflow");
      }
    }
    stepper.calc_state(T, y_interp);
    traj.samples.push_back({T, y_interp, {}});
  } catch (const NonFiniteRhs& e) {
    throw IntegrationError(e.t, "non-finite right-hand side");
  } catch (const odeint::odeint_error& e) {
    throw IntegrationError(stepper.current_time(), std::string("step-size control failed: ") + e.what());
  }
  traj.stats.rhs_evaluations = evaluations;
  return traj;
}

std::vector<double> monitor_conserved(const Trajectory& traj, const std::vector<ConservedQuantity>& quantities) {
  if (traj.empty()) {
    throw DomainError("monitor_conserved: empty trajectory");
  }
  std::vector<double> drift;
  drift.reserve(quantities.size());
  for (const auto& q : quantities) {
    const double q0 = q(traj.front());
    const double scale = std::max(1.0, std::abs(q0));
    double worst = 0.0;
    for (const auto& s : traj.samples) {
      worst = std::max(worst, std::abs(q(s) - q0) / scale);
    }
    drift.push_back(worst);
  }
  return drift;
}

}  // namespace adiabatic

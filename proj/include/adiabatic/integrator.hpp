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

// Adaptive integration of first-order ODE systems.
//
// Stepping is done by an embedded Dormand-Prince 5(4) pair with its
// continuous extension; samples on the regular output grid are interpolated
// after each accepted step, never forced by shortening steps.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace adiabatic {

using StateVector = std::vector<double>;

/// dy/dt = f(t, y). The callback writes into dydt, sized like y.
using VectorField = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.05;
  double sample_interval = 0.01;

  /// Throws DomainError unless both tolerances lie in (0, 1e-2] and the
  /// step and sample sizes are positive.
  void validate() const;
};

struct Sample {
  double t = 0.0;
  StateVector y;
  /// Derived channels (recovered controls, populations...) filled in by the
  /// flow that produced the trajectory; names live in Trajectory::aux_names.
  std::vector<double> aux;
};

struct IntegrationStats {
  std::size_t accepted_steps = 0;
  std::size_t rhs_evaluations = 0;
};

struct Trajectory {
  std::vector<Sample> samples;
  std::vector<std::string> state_names;
  std::vector<std::string> aux_names;
  IntegrationStats stats;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  const Sample& front() const { return samples.front(); }
  const Sample& back() const { return samples.back(); }

  /// Index of a named aux channel; throws DomainError if absent.
  std::size_t aux_index(const std::string& name) const;
};

/// Integrates from t0 to T. The first sample is (t0, y0) and the last one is
/// at T exactly. Throws IntegrationError on step-size underflow or a
/// non-finite right-hand side.
Trajectory integrate(const VectorField& rhs, const StateVector& y0, double t0, double T,
                     const IntegratorConfig& cfg);

using ConservedQuantity = std::function<double(const Sample&)>;

/// max_t |Q(t) - Q(t0)| / max(1, |Q(t0)|) for each quantity.
std::vector<double> monitor_conserved(const Trajectory& traj, const std::vector<ConservedQuantity>& quantities);

}  // namespace adiabatic

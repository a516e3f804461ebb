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

#include <doctest.h>

#include <cmath>

#include "adiabatic/errors.hpp"
#include "adiabatic/integrator.hpp"

using namespace adiabatic;

namespace {

VectorField decay(double rate) {
  return [rate](double, std::span<const double> y, std::span<double> d) { d[0] = -rate * y[0]; };
}

VectorField oscillator() {
  return [](double, std::span<const double> y, std::span<double> d) {
    d[0] = y[1];
    d[1] = -y[0];
  };
}

}  // namespace

TEST_CASE("exponential decay to tolerance") {
  const Trajectory tr = integrate(decay(1.0), {1.0}, 0.0, 5.0, IntegratorConfig{});
  for (const auto& s : tr.samples) CHECK(std::abs(s.y[0] - std::exp(-s.t)) < 1e-10);
}

TEST_CASE("output grid starts at t0, ends at T, follows the sample interval") {
  IntegratorConfig cfg;
  cfg.sample_interval = 0.25;
  const Trajectory tr = integrate(decay(0.5), {2.0}, 1.0, 2.1, cfg);
  CHECK(tr.front().t == 1.0);
  CHECK(tr.front().y[0] == 2.0);
  CHECK(tr.back().t == 2.1);
  REQUIRE(tr.size() == 6);
  for (std::size_t i = 1; i + 1 < tr.size(); ++i) CHECK(tr.samples[i].t == doctest::Approx(1.0 + 0.25 * i));
  CHECK(tr.stats.accepted_steps > 0);
  CHECK(tr.stats.rhs_evaluations > tr.stats.accepted_steps);
}

TEST_CASE("grid point coinciding with T is not duplicated") {
  IntegratorConfig cfg;
  cfg.sample_interval = 0.5;
  const Trajectory tr = integrate(decay(1.0), {1.0}, 0.0, 2.0, cfg);
  CHECK(tr.size() == 5);
  CHECK(tr.back().t == 2.0);
}

TEST_CASE("error falls as the tolerance is tightened") {
  double previous = INFINITY;
  for (double tol : {1e-5, 1e-6, 1e-7, 1e-8, 1e-9}) {
    IntegratorConfig cfg;
    cfg.rel_tol = tol;
    cfg.abs_tol = tol * 1e-2;
    cfg.max_step = 1.0;
    const Trajectory tr = integrate(oscillator(), {1.0, 0.0}, 0.0, 20.0, cfg);
    double err = 0.0;
    for (const auto& s : tr.samples) err = std::max(err, std::abs(s.y[0] - std::cos(s.t)));
    CHECK(err < previous);
    previous = err;
  }
  CHECK(previous < 1e-7);
}

TEST_CASE("interpolated samples keep the order of the stepper") {
  IntegratorConfig cfg;
  cfg.max_step = 0.5;
  cfg.sample_interval = 0.013;
  const Trajectory tr = integrate(oscillator(), {1.0, 0.0}, 0.0, 10.0, cfg);
  for (const auto& s : tr.samples) {
    CHECK(std::abs(s.y[0] - std::cos(s.t)) < 1e-8);
    CHECK(std::abs(s.y[1] + std::sin(s.t)) < 1e-8);
  }
}

TEST_CASE("blow-up is reported as an integration error with its time") {
  VectorField blow = [](double, std::span<const double> y, std::span<double> d) { d[0] = y[0] * y[0]; };
  try {
    integrate(blow, {1.0}, 0.0, 2.0, IntegratorConfig{});
    FAIL("expected an IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.time() > 0.9);
    CHECK(e.time() <= 1.0 + 1e-6);
  }
}

TEST_CASE("non-finite right-hand side") {
  VectorField bad = [](double t, std::span<const double>, std::span<double> d) {
    d[0] = t > 0.5 ? std::nan("") : 1.0;
  };
  CHECK_THROWS_AS(integrate(bad, {0.0}, 0.0, 1.0, IntegratorConfig{}), IntegrationError);
  CHECK_THROWS_AS(integrate(decay(1.0), {std::nan("")}, 0.0, 1.0, IntegratorConfig{}), IntegrationError);
}

TEST_CASE("configuration validation") {
  IntegratorConfig cfg;
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.rel_tol = 0.1;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = IntegratorConfig{};
  cfg.max_step = -1;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = IntegratorConfig{};
  cfg.sample_interval = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  CHECK_THROWS_AS(integrate(decay(1.0), {1.0}, 1.0, 1.0, IntegratorConfig{}), DomainError);
}

TEST_CASE("conserved-quantity monitor") {
  const Trajectory tr = integrate(oscillator(), {3.0, 0.0}, 0.0, 30.0, IntegratorConfig{});
  const auto drift = monitor_conserved(tr, {[](const Sample& s) { return s.y[0] * s.y[0] + s.y[1] * s.y[1]; },
                                            [](const Sample& s) { return s.y[0]; }});
  CHECK(drift[0] < 1e-8);
  CHECK(drift[1] == doctest::Approx(2.0).epsilon(1e-6));  // x swings from 3 to -3, scaled by 3
  CHECK_THROWS_AS(monitor_conserved(Trajectory{}, {}), DomainError);
}

TEST_CASE("aux channel lookup") {
  Trajectory tr;
  tr.aux_names = {"u1", "u2"};
  CHECK(tr.aux_index("u2") == 1);
  CHECK_THROWS_AS(tr.aux_index("u3"), DomainError);
}

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

#include <chrono>
#include <cmath>
#include <numbers>

#include "adiabatic/energy_flow.hpp"
#include "adiabatic/shooting.hpp"
#include "adiabatic/stirap_cost.hpp"

using namespace adiabatic;

namespace {

Trajectory control_record(double T, std::size_t n, double (*u1)(double), double (*u2)(double)) {
  Trajectory traj;
  traj.aux_names = {"u1", "u2"};
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = T * static_cast<double>(i) / static_cast<double>(n);
    traj.samples.push_back({t, {0.0}, {u1(t), u2(t)}});
  }
  return traj;
}

ShootingProblem reference_problem() {
  ShootingProblem p;
  p.k = 1.0;
  p.horizon = 30.0;
  p.start = {1, 0, 0};
  p.target = {0, 0, 1};
  const double pt = std::sqrt(0.66);
  p.box = {{pt, pt}, {15, 15}, {69, 69}};
  return p;
}

ShootingProblem branch_problem() {
  ShootingProblem p;
  p.cost = CostKind::kStirap;
  p.k = 1.0;
  p.start = {1, 0, 0};
  p.target = {0, 0, 1};
  p.box = {{0.02, 0.1}, {10, 20}};
  return p;
}

}  // namespace

TEST_CASE("metrics on analytic control records") {
  SUBCASE("constant pulse") {
    const MetricsReport m = metrics(control_record(2.0, 200, [](double) { return 1.0; }, [](double) { return 0.0; }));
    CHECK(m.C == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(m.Amp == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.Freq == 0.0);
  }
  SUBCASE("sine at five cycles per unit time") {
    const MetricsReport m = metrics(control_record(
        1.0, 4000, [](double t) { return std::sin(2 * std::numbers::pi * 5 * t); }, [](double) { return 0.0; }));
    CHECK(m.Freq == doctest::Approx(5.0).epsilon(1e-3));
    CHECK(m.Amp == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-5));
    CHECK(m.C == doctest::Approx(0.5).epsilon(1e-5));
  }
  SUBCASE("mean over the oscillating channels") {
    const MetricsReport m = metrics(control_record(
        2.0, 8000, [](double t) { return std::cos(2 * std::numbers::pi * 2 * t); },
        [](double t) { return std::sin(2 * std::numbers::pi * 4 * t); }));
    CHECK(m.Freq == doctest::Approx(3.0).epsilon(1e-2));
  }
  CHECK_THROWS_AS(metrics(control_record(1.0, 6, [](double) { return 1.0; }, [](double) { return 0.0; })),
                  DomainError);
  Trajectory bare = control_record(1.0, 20, [](double) { return 1.0; }, [](double) { return 0.0; });
  bare.aux_names = {"a", "b"};
  CHECK_THROWS_AS(metrics(bare), DomainError);
}

TEST_CASE("metrics of the reference extremal") {
  const ExtremalRun run = propagate_extremal(equator_start(0.33, 15, 69, 1), DissipationRate(1.0), 30.0, IntegratorConfig{});
  const MetricsReport m = metrics(run.trajectory);
  // Trapezoid over the 0.01 sample grid against the integrated cost.
  CHECK(m.C == doctest::Approx(run.cost).epsilon(1e-5));
  CHECK(m.C >= 0.0);
  // Loose agreement with the tabulated averages (1.26 and 1.5).
  CHECK(m.Amp == doctest::Approx(1.26).epsilon(0.15));
  CHECK(m.Freq == doctest::Approx(1.5).epsilon(0.15));
}

TEST_CASE("single shots") {
  SUBCASE("reference costates") {
    const ShootingProblem p = reference_problem();
    const ShotResult r = shoot(p, {std::sqrt(0.66), 15, 69});
    const ExtremalRun direct = propagate_extremal(equator_start(0.33, 15, 69, 1), DissipationRate(1.0), 30.0, IntegratorConfig{});
    CHECK(r.report.fidelity == doctest::Approx(direct.final_fidelity).epsilon(1e-12));
    CHECK(r.report.fidelity == doctest::Approx(0.82).epsilon(0.05));
    CHECK(r.report.C == doctest::Approx(direct.cost).epsilon(1e-5));
    CHECK(r.horizon == 30.0);
    REQUIRE(r.report.drifts.size() == 3);
    CHECK(r.report.drifts[0].second < 1e-8);
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) d2 += std::pow(r.final_state[i] - p.target[i], 2);
    CHECK(r.distance == doctest::Approx(std::sqrt(d2)));
  }
  SUBCASE("start on the singular circle") {
    ShootingProblem p = reference_problem();
    p.box = {{0, 0}, {0.1, 0.1}, {4, 4}};
    const ShotResult r = shoot(p, {0, 0.1, 4});
    CHECK(r.report.fidelity < 1e-12);
    CHECK(r.report.C < 1e-12);
  }
  SUBCASE("zero duration") {
    ShootingProblem p = reference_problem();
    p.horizon = 0.0;
    p.target = {std::sqrt(0.5), 0, std::sqrt(0.5)};
    const ShotResult r = shoot(p, {std::sqrt(0.66), 15, 69});
    CHECK(r.report.fidelity == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(r.report.C == 0.0);
  }
  SUBCASE("stirap branch matches the direct propagation") {
    const ShootingProblem p = branch_problem();
    const ShotResult r = shoot(p, {0.1, 10});
    const StirapRun direct = propagate_stirap(std::numbers::pi / 2 - 0.02, 0.0, 10.0, 0.1, DissipationRate(1.0),
                                              IntegratorConfig{});
    CHECK(r.report.fidelity == doctest::Approx(direct.final_fidelity).epsilon(1e-12));
    CHECK(r.horizon == direct.horizon);
  }
  SUBCASE("tripod shots") {
    ShootingProblem p;
    p.system = SystemKind::kTripod;
    p.cost = CostKind::kStirap;
    p.horizon = 0.0;
    p.start = {1, 0, 0, 0};
    p.target = {0, 0, std::sqrt(0.5), std::sqrt(0.5)};
    p.box = {{16.85, 16.85}, {-1, -1}, {100, 100}};
    const ShotResult r = shoot(p, {16.85, -1, 100});
    CHECK(r.final_state.size() == 4);
    CHECK(r.report.fidelity > 0.5);

    p.cost = CostKind::kEnergy;
    p.start = {0.5, 0.5, 0.5, 0.5};
    p.horizon = 2.0;
    p.box = {{0.3, 0.3}, {0.1, 0.1}, {-0.2, -0.2}, {1, 1}};
    const ShotResult e = shoot(p, {0.3, 0.1, -0.2, 1});
    REQUIRE(e.report.drifts.size() == 4);
    for (const auto& d : e.report.drifts) CHECK(d.second < 1e-8);
  }
}

TEST_CASE("shot validation and failures") {
  ShootingProblem p = reference_problem();
  CHECK_THROWS_AS(shoot(p, {0.9, 15, 69}), DomainError);
  CHECK_THROWS_AS(shoot(p, {0.9, 15}), DomainError);
  p.start = {1, 0, 0.1};
  CHECK_THROWS_AS(shoot(p, {std::sqrt(0.66), 15, 69}), DomainError);
  p = reference_problem();
  p.box.pop_back();
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = reference_problem();
  p.box[0] = {1, 0};
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = reference_problem();
  p.start = {0, 1, 0};
  CHECK_THROWS_AS(shoot(p, {std::sqrt(0.66), 15, 69}), DomainError);

  SUBCASE("integration failure carries the costates") {
    ShootingProblem q = reference_problem();
    q.integrator.rel_tol = 1e-2;
    q.integrator.abs_tol = 1e-2;
    q.integrator.max_step = 1.0;
    q.box = {{0.8, 0.8}, {150, 150}, {690, 690}};
    try {
      shoot(q, {0.8, 150, 690});
      FAIL("expected a shooting error");
    } catch (const ShootingError& e) {
      CHECK(e.costates() == std::vector<double>{0.8, 150, 690});
    }
  }
  CHECK(costate_names(SystemKind::kTripod, CostKind::kStirap) ==
        std::vector<std::string>{"p_theta1", "p_theta3", "p_rho"});
}

TEST_CASE("search") {
  SUBCASE("collapsed box returns the point's report") {
    const ShootingProblem p = reference_problem();
    const SearchResult s = search(p);
    CHECK(s.grid_evaluations == 1);
    CHECK(s.simplex_evaluations == 0);
    CHECK(s.costates == std::vector<double>{std::sqrt(0.66), 15, 69});
    CHECK(s.best.report.fidelity == doctest::Approx(shoot(p, s.costates).report.fidelity).epsilon(1e-14));
  }
  SUBCASE("deterministic and at least as good as the reference") {
    ShootingProblem p = reference_problem();
    const double pt = std::sqrt(0.66);
    p.box = {{pt - 0.05, pt + 0.05}, {14, 16}, {66, 72}};
    SearchOptions opts;
    opts.grid_points = 5;
    opts.simplex_evaluations = 120;
    const SearchResult a = search(p, opts);
    const SearchResult b = search(p, opts);
    CHECK(a.costates == b.costates);
    CHECK(a.best.distance == b.best.distance);
    CHECK(a.grid_evaluations == 125);
    CHECK(a.simplex_evaluations <= 120);
    const ShotResult ref = shoot(reference_problem(), {pt, 15, 69});
    CHECK(a.best.distance <= ref.distance);
    CHECK(a.best.report.fidelity >= 0.82);
    for (std::size_t d = 0; d < 3; ++d) {
      CHECK(a.costates[d] >= p.box[d].lo);
      CHECK(a.costates[d] <= p.box[d].hi);
    }
  }
  SUBCASE("stirap box") {
    SearchOptions opts;
    opts.grid_points = 9;
    opts.simplex_evaluations = 100;
    const SearchResult s = search(branch_problem(), opts);
    CHECK(s.best.report.fidelity > 0.99);
  }
}

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
#include <numbers>

#include "adiabatic/errors.hpp"
#include "adiabatic/tripod.hpp"
#include "oracles.hpp"

using namespace adiabatic;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

TripodExtremal random_extremal() {
  TripodExtremal e;
  e.rho = oracle::uniform(-0.3, 0.3);
  e.theta1 = oracle::uniform(0.3, 2.8);
  e.theta2 = oracle::uniform(0.3, 2.8);
  e.theta3 = oracle::uniform(-3, 3);
  e.p_rho = oracle::uniform(-2, 2);
  e.p_theta1 = oracle::uniform(-2, 2);
  e.p_theta2 = oracle::uniform(-2, 2);
  e.p_theta3 = oracle::uniform(-2, 2);
  return e;
}

// The chart is orthogonal, so p_x = sum_j p_j d_j x / |d_j x|^2 with the
// tangent vectors written out by hand.
std::array<double, 4> costates_by_hand(const TripodExtremal& e) {
  const double r = std::exp(e.rho);
  const double c1 = std::cos(e.theta1), s1 = std::sin(e.theta1);
  const double c2 = std::cos(e.theta2), s2 = std::sin(e.theta2);
  const double c3 = std::cos(e.theta3), s3 = std::sin(e.theta3);
  const std::array<std::array<double, 4>, 4> t{{
      {c1 * s2, c2, s1 * s2 * c3, s1 * s2 * s3},
      {-r * s1 * s2, 0.0, r * c1 * s2 * c3, r * c1 * s2 * s3},
      {r * c1 * c2, -r * s2, r * s1 * c2 * c3, r * s1 * c2 * s3},
      {0.0, 0.0, -r * s1 * s2 * s3, r * s1 * s2 * c3},
  }};
  const std::array<double, 4> pq{e.p_rho / r, e.p_theta1, e.p_theta2, e.p_theta3};
  std::array<double, 4> p{};
  for (int j = 0; j < 4; ++j) {
    double n2 = 0.0;
    for (int i = 0; i < 4; ++i) n2 += t[j][i] * t[j][i];
    for (int i = 0; i < 4; ++i) p[i] += pq[j] * t[j][i] / n2;
  }
  return p;
}

double cartesian_energy(const std::array<double, 4>& x, const std::array<double, 4>& p, double k) {
  const double A = x[0] * p[1] - x[1] * p[0];
  const double B = x[1] * p[2] - x[2] * p[1];
  const double C = x[1] * p[3] - x[3] * p[1];
  return -k * x[1] * p[1] + 0.5 * (A * A + B * B + C * C);
}

std::array<double, 4> as_array(const RealState4& x) { return {x.x1, x.x2, x.x3, x.x4}; }

TripodStirapParams superposition_params(double theta1) {
  TripodStirapParams p;
  p.init.theta1 = theta1;
  p.init.theta2 = kHalfPi - 0.02;
  p.init.theta3 = 0.0;
  p.init.p_rho = 100.0;
  p.init.p_theta1 = 16.85;
  p.init.p_theta2 = 0.0;
  p.init.p_theta3 = -1.0;
  p.w1 = 1.0;
  p.k = 1.0;
  return p;
}

}  // namespace

TEST_CASE("real tripod dynamics") {
  const auto a = tripod_real_rhs({1, 0, 0, 0}, {0, 0, 0}, DissipationRate(1.0));
  CHECK(a.norm2() == 0.0);
  const auto b = tripod_real_rhs({1, 0, 0, 0}, {1, 0, 0}, DissipationRate(1.0));
  CHECK(b.x1 == 0.0);
  CHECK(b.x2 == 1.0);
  CHECK(b.x3 == 0.0);
  CHECK(b.x4 == 0.0);
  const auto c = tripod_real_rhs({0, 1, 0, 0}, {0, 1, 1}, DissipationRate(0.0));
  CHECK(c.x1 == 0.0);
  CHECK(c.x2 == 0.0);
  CHECK(c.x3 == 1.0);
  CHECK(c.x4 == 1.0);

  SUBCASE("norm decays at rate 2 k x2^2") {
    for (int n = 0; n < 50; ++n) {
      const RealState4 x{oracle::uniform(-1, 1), oracle::uniform(-1, 1), oracle::uniform(-1, 1), oracle::uniform(-1, 1)};
      const ControlTriple u{oracle::uniform(-2, 2), oracle::uniform(-2, 2), oracle::uniform(-2, 2)};
      const auto d = tripod_real_rhs(x, u, DissipationRate(0.8));
      const double dn = 2 * (x.x1 * d.x1 + x.x2 * d.x2 + x.x3 * d.x3 + x.x4 * d.x4);
      CHECK(dn == doctest::Approx(-1.6 * x.x2 * x.x2).epsilon(1e-12).scale(1));
    }
  }
}

TEST_CASE("tripod chart") {
  for (int n = 0; n < 100; ++n) {
    const Spherical4 s{std::exp(oracle::uniform(-1, 1)), oracle::uniform(0.1, 3.0), oracle::uniform(0.1, 3.0),
                       oracle::uniform(-3.1, 3.1)};
    const RealState4 x = sph4_to_cart(s);
    const auto ref = oracle::chart4(s.r, s.theta1, s.theta2, s.theta3);
    CHECK(x.x1 == doctest::Approx(ref[0]).epsilon(1e-14).scale(1));
    CHECK(x.x4 == doctest::Approx(ref[3]).epsilon(1e-14).scale(1));
    const Spherical4Chart back = cart_to_sph4(x);
    CHECK_FALSE(back.degenerate_theta1);
    CHECK_FALSE(back.degenerate_theta2);
    CHECK(back.point.r == doctest::Approx(s.r).epsilon(1e-12));
    CHECK(back.point.theta1 == doctest::Approx(s.theta1).epsilon(1e-12).scale(1));
    CHECK(back.point.theta2 == doctest::Approx(s.theta2).epsilon(1e-12).scale(1));
    CHECK(back.point.theta3 == doctest::Approx(s.theta3).epsilon(1e-12).scale(1));
  }
  const Spherical4Chart pole = cart_to_sph4({0, 1, 0, 0});
  CHECK(pole.degenerate_theta2);
  CHECK(pole.point.theta1 == 0.0);
  CHECK(pole.point.theta3 == 0.0);
  const Spherical4Chart axis = cart_to_sph4({1, 0, 0, 0});
  CHECK(axis.degenerate_theta1);
  CHECK(axis.point.theta2 == doctest::Approx(kHalfPi));
  CHECK_THROWS_AS(cart_to_sph4({0, 0, 0, 0}), DomainError);
}

TEST_CASE("spherical tripod dynamics") {
  const DissipationRate k(1.0);
  SUBCASE("free decay") {
    const Spherical4 s{1.3, 0.7, 1.1, 0.4};
    const Spherical4 d = tripod_sph_rhs(s, {0, 0, 0}, k);
    CHECK(d.theta1 == 0.0);
    CHECK(d.theta3 == 0.0);
    CHECK(d.r != 0.0);
    CHECK(d.theta2 != 0.0);
    const Spherical4 eq = tripod_sph_rhs({1.0, 0.7, kHalfPi, 0.4}, {0, 0, 0}, k);
    CHECK(std::abs(eq.r) < 1e-15);
  }
  SUBCASE("agrees with the real dynamics through the chart") {
    for (int n = 0; n < 100; ++n) {
      const Spherical4 s{std::exp(oracle::uniform(-0.5, 0.5)), oracle::uniform(0.2, 2.9), oracle::uniform(0.2, 2.9),
                         oracle::uniform(-3, 3)};
      const ControlTriple u{oracle::uniform(-2, 2), oracle::uniform(-2, 2), oracle::uniform(-2, 2)};
      const Spherical4 d = tripod_sph_rhs(s, u, k);
      const auto xdot = as_array(tripod_real_rhs(sph4_to_cart(s), u, k));
      // x' = J q' with J from central differences of the chart map.
      const double h = 1e-5;
      const std::array<double, 4> q{s.r, s.theta1, s.theta2, s.theta3};
      const std::array<double, 4> qd{d.r, d.theta1, d.theta2, d.theta3};
      std::array<double, 4> pushed{};
      for (int j = 0; j < 4; ++j) {
        auto qp = q, qm = q;
        qp[j] += h;
        qm[j] -= h;
        const auto xp = oracle::chart4(qp[0], qp[1], qp[2], qp[3]);
        const auto xm = oracle::chart4(qm[0], qm[1], qm[2], qm[3]);
        for (int i = 0; i < 4; ++i) pushed[i] += (xp[i] - xm[i]) / (2 * h) * qd[j];
      }
      for (int i = 0; i < 4; ++i) CHECK(std::abs(pushed[i] - xdot[i]) < 1e-9);
    }
  }
  CHECK_THROWS_AS(tripod_sph_rhs({1.0, 0.0, 1.0, 0.0}, {1, 0, 0}, k), DegeneracyError);
  CHECK_THROWS_AS(tripod_sph_rhs({1.0, 1.0, 0.0, 0.0}, {1, 0, 0}, k), DegeneracyError);
}

TEST_CASE("control rotations") {
  const TripodFrameControls w = rotate_controls({0.3, -0.7, 1.1}, kHalfPi, 0.0);
  CHECK(w.w1 == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(w.w2 == doctest::Approx(-0.7).epsilon(1e-15));
  CHECK(w.v3 == doctest::Approx(1.1).epsilon(1e-15));
  for (int n = 0; n < 200; ++n) {
    const ControlTriple u{oracle::uniform(-3, 3), oracle::uniform(-3, 3), oracle::uniform(-3, 3)};
    const double t1 = oracle::uniform(0, std::numbers::pi), t3 = oracle::uniform(-std::numbers::pi, std::numbers::pi);
    const TripodFrameControls r = rotate_controls(u, t1, t3);
    const ControlTriple back = unrotate_controls(r, t1, t3);
    CHECK(std::abs(back.u1 - u.u1) < 1e-12);
    CHECK(std::abs(back.u2 - u.u2) < 1e-12);
    CHECK(std::abs(back.u3 - u.u3) < 1e-12);
    CHECK(std::abs(r.norm2() - u.norm2()) < 1e-12);
  }
}

TEST_CASE("energy Hamiltonian") {
  const DissipationRate k(1.0);
  TripodExtremal rest;
  rest.theta1 = 0.8;
  CHECK(tripod_energy_hamiltonian_max(rest, k) == 0.0);

  TripodExtremal e;
  e.theta1 = 0.9;
  e.theta2 = 1.1;
  e.p_rho = 0.7;
  e.p_theta1 = 0.4;
  e.p_theta2 = -0.3;
  e.p_theta3 = 0.6;
  const double c2 = std::cos(1.1), s2 = std::sin(1.1);
  CHECK(tripod_energy_hamiltonian(e, {0, 0, 0}, k) ==
        doctest::Approx(-0.7 * c2 * c2 + c2 * s2 * -0.3).epsilon(1e-14));

  SUBCASE("maximizing controls") {
    for (int n = 0; n < 100; ++n) {
      const TripodExtremal q = random_extremal();
      const TripodFrameControls w = tripod_energy_controls(q);
      const double h = tripod_energy_hamiltonian(q, w, k);
      CHECK(h == doctest::Approx(tripod_energy_hamiltonian_max(q, k)).epsilon(1e-12).scale(1));
      const TripodFrameControls bumped{w.w1 + 1e-3, w.w2 - 1e-3, w.v3 + 1e-3};
      CHECK(tripod_energy_hamiltonian(q, bumped, k) < h);
    }
  }
  SUBCASE("matches the Cartesian Hamiltonian") {
    for (int n = 0; n < 100; ++n) {
      const TripodExtremal q = random_extremal();
      const auto p = costates_by_hand(q);
      const auto x = as_array(q.cartesian());
      CHECK(tripod_energy_hamiltonian_max(q, DissipationRate(0.6)) ==
            doctest::Approx(cartesian_energy(x, p, 0.6)).epsilon(1e-10).scale(1));
      const auto pc = tripod_cartesian_costates(q);
      for (int i = 0; i < 4; ++i) CHECK(pc[i] == doctest::Approx(p[i]).epsilon(1e-12).scale(1));
      // Recovered controls are the Cartesian couplings.
      const ControlTriple u = unrotate_controls(tripod_energy_controls(q), q.theta1, q.theta3);
      CHECK(u.u1 == doctest::Approx(x[0] * p[1] - x[1] * p[0]).epsilon(1e-10).scale(1));
      CHECK(u.u2 == doctest::Approx(x[1] * p[2] - x[2] * p[1]).epsilon(1e-10).scale(1));
      CHECK(u.u3 == doctest::Approx(x[1] * p[3] - x[3] * p[1]).epsilon(1e-10).scale(1));
    }
  }
  SUBCASE("canonical equations") {
    for (int n = 0; n < 50; ++n) {
      const TripodExtremal q = random_extremal();
      const auto d = tripod_energy_rhs(q, k).to_array();
      const auto base = q.to_array();
      const double h = 1e-6;
      for (int j = 0; j < 4; ++j) {
        auto a = base, b = base;
        a[4 + j] += h;
        b[4 + j] -= h;
        const double dq = (tripod_energy_hamiltonian_max(TripodExtremal::from_array(a.data()), k) -
                           tripod_energy_hamiltonian_max(TripodExtremal::from_array(b.data()), k)) /
                          (2 * h);
        CHECK(d[j] == doctest::Approx(dq).epsilon(1e-6).scale(1));
        a = base;
        b = base;
        a[j] += h;
        b[j] -= h;
        const double dp = -(tripod_energy_hamiltonian_max(TripodExtremal::from_array(a.data()), k) -
                            tripod_energy_hamiltonian_max(TripodExtremal::from_array(b.data()), k)) /
                          (2 * h);
        CHECK(d[4 + j] == doctest::Approx(dp).epsilon(1e-6).scale(1));
      }
    }
  }
}

TEST_CASE("constants of the motion") {
  const TripodConstants a = tripod_constants({0, 0, 1, 0}, {0, 0, 0, 1});
  CHECK(a.L1 == 1.0);
  CHECK(a.L3 == 0.0);
  CHECK(a.L4 == 0.0);
  const TripodConstants b = tripod_constants({1, 0, 0, 0}, {0, 0, 1, 0});
  CHECK(b.L1 == 0.0);
  CHECK(b.L3 == 0.0);
  CHECK(b.L4 == 1.0);
}

TEST_CASE("energy extremal against a Cartesian integration") {
  TripodExtremal e;
  e.theta1 = 0.9;
  e.theta2 = 1.2;
  e.theta3 = 0.3;
  e.p_rho = 0.5;
  e.p_theta1 = 0.4;
  e.p_theta2 = -0.2;
  e.p_theta3 = 0.3;
  const double T = 3.0;
  const TripodEnergyRun run = propagate_tripod_energy(e, DissipationRate(1.0), T, IntegratorConfig{});
  const auto x0 = as_array(e.cartesian());
  const auto p0 = costates_by_hand(e);
  oracle::State4 s{x0[0], x0[1], x0[2], x0[3], p0[0], p0[1], p0[2], p0[3], 0.0};
  s = oracle::integrate4(s, 1.0, T, 1e-3);
  const Sample& last = run.trajectory.back();
  CHECK(last.t == T);
  const std::size_t ix = run.trajectory.aux_index("x1");
  for (int i = 0; i < 4; ++i) CHECK(last.aux[ix + i] == doctest::Approx(s[i]).epsilon(1e-7).scale(1));
  CHECK(run.cost == doctest::Approx(s[8]).epsilon(1e-6));
  const std::size_t iu = run.trajectory.aux_index("u1");
  const double A = s[0] * s[5] - s[1] * s[4];
  CHECK(last.aux[iu] == doctest::Approx(A).epsilon(1e-6).scale(1));
}

TEST_CASE("energy extremal conserves H and the three angular momenta") {
  for (int n = 0; n < 3; ++n) {
    TripodExtremal e = random_extremal();
    e.theta1 = oracle::uniform(0.8, 2.3);
    e.theta2 = oracle::uniform(0.8, 2.3);
    const TripodEnergyRun run = propagate_tripod_energy(e, DissipationRate(1.0), 10.0, IntegratorConfig{});
    CHECK(run.drift.hamiltonian < 1e-8);
    CHECK(run.drift.L1 < 1e-8);
    CHECK(run.drift.L3 < 1e-8);
    CHECK(run.drift.L4 < 1e-8);
  }
}

TEST_CASE("stirap-branch Hamiltonian and the v3 relation") {
  const DissipationRate k(1.0);
  TripodExtremal e;
  e.theta1 = 0.7;
  e.p_rho = 3.0;
  e.p_theta1 = 0.4;
  e.p_theta2 = 0.8;
  e.p_theta3 = -0.5;
  CHECK(tripod_stirap_hamiltonian(e, 1.3, -0.4, k) == doctest::Approx(0.32).epsilon(1e-14));
  e.p_theta2 = 0.0;
  CHECK(std::abs(tripod_stirap_hamiltonian(e, 1.3, -0.4, k)) < 1e-15);

  for (int n = 0; n < 50; ++n) {
    const TripodExtremal q = random_extremal();
    const double w1 = oracle::uniform(-2, 2), v3 = oracle::uniform(-2, 2);
    const double c2 = std::cos(q.theta2), s2 = std::sin(q.theta2), s1 = std::sin(q.theta1);
    const double ref = -std::exp(0.0) * q.p_rho * c2 * c2 + 0.5 * q.p_theta2 * q.p_theta2 + w1 * c2 / s2 * q.p_theta1 +
                       v3 * c2 / s2 * q.p_theta3 / s1;
    CHECK(tripod_stirap_hamiltonian(q, w1, v3, k) == doctest::Approx(ref).epsilon(1e-12).scale(1));

    // Canonical equations at frozen (w1, v3).
    const auto d = tripod_stirap_rhs(q, w1, v3, k).to_array();
    const auto base = q.to_array();
    const double h = 1e-6;
    for (int j = 1; j < 4; ++j) {
      auto a = base, b = base;
      a[4 + j] += h;
      b[4 + j] -= h;
      const double dq = (tripod_stirap_hamiltonian(TripodExtremal::from_array(a.data()), w1, v3, k) -
                         tripod_stirap_hamiltonian(TripodExtremal::from_array(b.data()), w1, v3, k)) /
                        (2 * h);
      CHECK(d[j] == doctest::Approx(dq).epsilon(1e-6).scale(1));
      a = base;
      b = base;
      a[j] += h;
      b[j] -= h;
      const double dp = -(tripod_stirap_hamiltonian(TripodExtremal::from_array(a.data()), w1, v3, k) -
                          tripod_stirap_hamiltonian(TripodExtremal::from_array(b.data()), w1, v3, k)) /
                        (2 * h);
      CHECK(d[4 + j] == doctest::Approx(dp).epsilon(1e-6).scale(1));
    }
  }

  CHECK(tripod_v3(0.0, 0.8, kHalfPi, 0.3, -1.0, 100.0, k) == 0.0);
  CHECK(tripod_v3(1.0, kHalfPi, kHalfPi, 1.0, -1.0, 100.0, k) == doctest::Approx(1.0).epsilon(1e-14));
  const double a = tripod_v3(0.5, 0.7, 1.3, 0.4, 2.0, 3.0, k);
  const double b = tripod_v3(1.5, 0.7, 1.3, 0.4, 2.0, 3.0, k);
  const double c = tripod_v3(2.5, 0.7, 1.3, 0.4, 2.0, 3.0, k);
  CHECK(c - b == doctest::Approx(b - a).epsilon(1e-12));
  CHECK_THROWS_AS(tripod_v3(1.0, 0.7, 1.3, 0.4, 0.0, 3.0, k), DomainError);

  SUBCASE("v3 freezes p_theta2") {
    for (int n = 0; n < 50; ++n) {
      TripodExtremal q = random_extremal();
      q.p_theta2 = 0.0;
      const double w1 = oracle::uniform(-2, 2);
      const double v3 = tripod_v3(w1, q.theta1, q.theta2, q.p_theta1, q.p_theta3, q.p_rho, k);
      const TripodExtremal d = tripod_stirap_rhs(q, w1, v3, k);
      CHECK(std::abs(d.p_theta2) < 1e-10 * std::max(1.0, std::abs(v3)));
      CHECK(d.theta2 == 0.0);
    }
  }
}

TEST_CASE("stirap branch with the constant pump frame") {
  const IntegratorConfig cfg;
  const TripodStirapParams p = superposition_params(0.01);
  const TripodStirapRun run = propagate_tripod_stirap(p, cfg);
  CHECK(run.horizon == doctest::Approx(tripod_horizon(0.01, kHalfPi - 0.02, 1.0)).epsilon(1e-15));
  CHECK(run.max_abs_p_theta2 < 1e-9);
  CHECK(run.max_theta2_deviation < 1e-9);
  CHECK(run.max_norm_identity_error < 1e-12);
  CHECK(run.max_population2 < 1e-3);
  CHECK(run.counterintuitive);
  CHECK(run.stokes_peak_time < run.pump_peak_time);
  double total = 0.0;
  for (double q : run.final_populations) total += q;
  CHECK(total == doctest::Approx(run.trajectory.back().aux[run.trajectory.aux_index("P1")] +
                                 run.trajectory.back().aux[run.trajectory.aux_index("P2")] +
                                 run.trajectory.back().aux[run.trajectory.aux_index("P3")] +
                                 run.trajectory.back().aux[run.trajectory.aux_index("P4")]));
  CHECK(run.trajectory.back().y[1] == doctest::Approx(kHalfPi).epsilon(1e-6));

  SUBCASE("tuned start reaches the equal superposition") {
    const double t1 = tune_tripod_theta1(p, std::numbers::pi / 4, 1e-3, 0.05, cfg);
    const TripodStirapRun tuned = propagate_tripod_stirap(superposition_params(t1), cfg);
    CHECK(tuned.trajectory.back().y[3] == doctest::Approx(std::numbers::pi / 4).epsilon(1e-8));
    CHECK(std::abs(tuned.final_populations[2] - tuned.final_populations[3]) < 0.02);
    CHECK(tuned.max_population2 < 1e-3);
    CHECK(tuned.counterintuitive);
    CHECK_THROWS_AS(tune_tripod_theta1(p, std::numbers::pi / 4, 0.02, 0.05, cfg), DomainError);
  }
}

TEST_CASE("no pump frame motion keeps theta1 fixed") {
  TripodStirapParams p = superposition_params(0.6);
  p.w1 = 0.0;
  p.init.p_theta1 = 0.0;
  p.horizon = 5.0;
  const TripodStirapRun run = propagate_tripod_stirap(p, IntegratorConfig{});
  double theta1_dev = 0.0, theta3_span = 0.0;
  for (const Sample& s : run.trajectory.samples) {
    theta1_dev = std::max(theta1_dev, std::abs(s.y[1] - 0.6));
    theta3_span = std::max(theta3_span, std::abs(s.y[3]));
  }
  CHECK(theta1_dev < 1e-12);
  CHECK(theta3_span > 0.0);
  const std::size_t iw = run.trajectory.aux_index("w1");
  for (const Sample& s : run.trajectory.samples) CHECK(s.aux[iw] == 0.0);
}

TEST_CASE("stirap branch preconditions") {
  TripodStirapParams p = superposition_params(0.01);
  p.init.p_theta2 = 0.1;
  CHECK_THROWS_AS(propagate_tripod_stirap(p, IntegratorConfig{}), DomainError);
  p = superposition_params(0.01);
  p.init.p_theta3 = 0.0;
  CHECK_THROWS_AS(propagate_tripod_stirap(p, IntegratorConfig{}), DomainError);
  p = superposition_params(0.01);
  p.w1_profile = [](double) { return 1.0; };
  CHECK_THROWS_AS(propagate_tripod_stirap(p, IntegratorConfig{}), DomainError);
  p.horizon = 10.0;
  CHECK_NOTHROW(propagate_tripod_stirap(p, IntegratorConfig{}));
}

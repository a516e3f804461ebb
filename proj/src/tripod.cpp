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

#include "adiabatic/tripod.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>

#include "adiabatic/errors.hpp"

namespace adiabatic {

namespace {

void check_poles(double s1, double s2, const char* where) {
  if (std::abs(s1) < kPoleGuard || std::abs(s2) < kPoleGuard) {
    throw DegeneracyError(std::string(where) + ": sin(theta1) or sin(theta2) below pole guard");
  }
}

constexpr std::size_t kCostIndex = 8;
constexpr std::size_t kStateSize = 9;

}  // namespace

Spherical4Chart cart_to_sph4(const RealState4& x) {
  const double r = std::sqrt(x.norm2());
  if (r == 0.0) {
    throw DomainError("cart_to_sph4: zero vector has no chart");
  }
  Spherical4Chart out;
  out.point.r = r;
  const double rho34 = std::hypot(x.x3, x.x4);
  const double rho134 = std::hypot(x.x1, rho34);
  out.point.theta2 = std::atan2(rho134, x.x2);
  if (rho134 < kPoleGuard * r) {
    out.degenerate_theta2 = true;
    return out;
  }
  out.point.theta1 = std::atan2(rho34, x.x1);
  if (rho34 < kPoleGuard * rho134) {
    out.degenerate_theta1 = true;
    return out;
  }
  out.point.theta3 = std::atan2(x.x4, x.x3);
  return out;
}

RealState4 sph4_to_cart(const Spherical4& s) {
  const double s1 = std::sin(s.theta1), c1 = std::cos(s.theta1);
  const double s2 = std::sin(s.theta2), c2 = chart_cos(s.theta2);
  const double s3 = std::sin(s.theta3), c3 = std::cos(s.theta3);
  return {s.r * c1 * s2, s.r * c2, s.r * s1 * s2 * c3, s.r * s1 * s2 * s3};
}

TripodFrameControls rotate_controls(ControlTriple u, double theta1, double theta3) {
  const double s1 = std::sin(theta1), c1 = std::cos(theta1);
  const double s3 = std::sin(theta3), c3 = std::cos(theta3);
  const double v2 = u.u2 * c3 + u.u3 * s3;
  const double v3 = -u.u2 * s3 + u.u3 * c3;
  return {u.u1 * s1 + v2 * c1, -u.u1 * c1 + v2 * s1, v3};
}

ControlTriple unrotate_controls(TripodFrameControls w, double theta1, double theta3) {
  const double s1 = std::sin(theta1), c1 = std::cos(theta1);
  const double s3 = std::sin(theta3), c3 = std::cos(theta3);
  const double u1 = s1 * w.w1 - c1 * w.w2;
  const double v2 = c1 * w.w1 + s1 * w.w2;
  return {u1, c3 * v2 - s3 * w.v3, s3 * v2 + c3 * w.v3};
}

RealState4 tripod_real_rhs(const RealState4& x, ControlTriple u, DissipationRate k) {
  return {-u.u1 * x.x2, -k.value() * x.x2 + u.u1 * x.x1 - u.u2 * x.x3 - u.u3 * x.x4, u.u2 * x.x2, u.u3 * x.x2};
}

Spherical4 tripod_sph_rhs(const Spherical4& s, ControlTriple u, DissipationRate k) {
  const double s1 = std::sin(s.theta1), c1 = std::cos(s.theta1);
  const double s2 = std::sin(s.theta2), c2 = chart_cos(s.theta2);
  const double s3 = std::sin(s.theta3), c3 = std::cos(s.theta3);
  check_poles(s1, s2, "tripod_sph_rhs");
  const double kv = k.value();
  const double cot2 = c2 / s2;
  Spherical4 d;
  d.r = -kv * s.r * c2 * c2;
  d.theta1 = u.u1 * s1 * cot2 + u.u2 * cot2 * c1 * c3 + u.u3 * cot2 * c1 * s3;
  d.theta2 = kv * s2 * c2 - u.u1 * c1 + u.u2 * s1 * c3 + u.u3 * s1 * s3;
  d.theta3 = (-u.u2 * s3 + u.u3 * c3) * cot2 / s1;
  return d;
}

double TripodExtremal::r() const { return std::exp(rho); }

double tripod_energy_hamiltonian(const TripodExtremal& e, TripodFrameControls w, DissipationRate k) {
  const double s1 = std::sin(e.theta1);
  const double s2 = std::sin(e.theta2), c2 = chart_cos(e.theta2);
  check_poles(s1, s2, "tripod_energy_hamiltonian");
  const double kv = k.value();
  const double cot2 = c2 / s2;
  return -kv * e.p_rho * c2 * c2 + kv * c2 * s2 * e.p_theta2 + w.w1 * cot2 * e.p_theta1 + w.w2 * e.p_theta2 +
         w.v3 * cot2 / s1 * e.p_theta3 - 0.5 * w.norm2();
}

TripodFrameControls tripod_energy_controls(const TripodExtremal& e) {
  const double s1 = std::sin(e.theta1);
  const double s2 = std::sin(e.theta2), c2 = chart_cos(e.theta2);
  check_poles(s1, s2, "tripod_energy_controls");
  const double cot2 = c2 / s2;
  return {cot2 * e.p_theta1, e.p_theta2, cot2 * e.p_theta3 / s1};
}

double tripod_energy_hamiltonian_max(const TripodExtremal& e, DissipationRate k) {
  return tripod_energy_hamiltonian(e, tripod_energy_controls(e), k);
}

TripodExtremal tripod_energy_rhs(const TripodExtremal& e, DissipationRate k) {
  const double s1 = std::sin(e.theta1), c1 = std::cos(e.theta1);
  const double s2 = std::sin(e.theta2), c2 = chart_cos(e.theta2);
  check_poles(s1, s2, "tripod_energy_rhs");
  const double kv = k.value();
  const double cot2 = c2 / s2;
  const double q = e.p_theta1 * e.p_theta1 + e.p_theta3 * e.p_theta3 / (s1 * s1);
  TripodExtremal d;
  d.rho = -kv * c2 * c2;
  d.theta1 = cot2 * cot2 * e.p_theta1;
  d.theta2 = kv * s2 * c2 + e.p_theta2;
  d.theta3 = cot2 * cot2 * e.p_theta3 / (s1 * s1);
  d.p_rho = 0.0;
  d.p_theta1 = cot2 * cot2 * e.p_theta3 * e.p_theta3 * c1 / (s1 * s1 * s1);
  d.p_theta2 = -2.0 * kv * e.p_rho * c2 * s2 - kv * std::cos(2.0 * e.theta2) * e.p_theta2 + c2 / (s2 * s2 * s2) * q;
  d.p_theta3 = 0.0;
  return d;
}

std::array<double, 4> tripod_cartesian_costates(const TripodExtremal& e) {
  const double r = e.r();
  const double s1 = std::sin(e.theta1), c1 = std::cos(e.theta1);
  const double s2 = std::sin(e.theta2), c2 = chart_cos(e.theta2);
  const double s3 = std::sin(e.theta3), c3 = std::cos(e.theta3);
  check_poles(s1, s2, "tripod_cartesian_costates");
  // Orthogonal chart: p_x = sum_j (dx/dq_j) p_j / |dx/dq_j|^2.
  const std::array<double, 4> d_rho{r * c1 * s2, r * c2, r * s1 * s2 * c3, r * s1 * s2 * s3};
  const std::array<double, 4> d_t1{-r * s1 * s2, 0.0, r * c1 * s2 * c3, r * c1 * s2 * s3};
  const std::array<double, 4> d_t2{r * c1 * c2, -r * s2, r * s1 * c2 * c3, r * s1 * c2 * s3};
  const std::array<double, 4> d_t3{0.0, 0.0, -r * s1 * s2 * s3, r * s1 * s2 * c3};
  const double r2 = r * r;
  const double a = e.p_rho / r2;
  const double b = e.p_theta1 / (r2 * s2 * s2);
  const double c = e.p_theta2 / r2;
  const double d = e.p_theta3 / (r2 * s1 * s1 * s2 * s2);
  std::array<double, 4> p{};
  for (int i = 0; i < 4; ++i) p[i] = a * d_rho[i] + b * d_t1[i] + c * d_t2[i] + d * d_t3[i];
  return p;
}

TripodConstants tripod_constants(const RealState4& x, const std::array<double, 4>& p) {
  return {x.x3 * p[3] - x.x4 * p[2], x.x1 * p[3] - x.x4 * p[0], x.x1 * p[2] - x.x3 * p[0]};
}

namespace {

StateVector pack(const TripodExtremal& e) {
  StateVector y(kStateSize, 0.0);
  const auto a = e.to_array();
  std::copy(a.begin(), a.end(), y.begin());
  return y;
}

void name_tripod_columns(Trajectory& traj, bool stirap) {
  traj.state_names = {"rho", "theta1", "theta2", "theta3", "p_rho", "p_theta1", "p_theta2", "p_theta3", "cost"};
  if (stirap) {
    traj.aux_names = {"u1", "u2", "u3", "w1", "w2", "v3", "P1", "P2", "P3", "P4"};
  } else {
    traj.aux_names = {"u1", "u2", "u3", "w1", "w2", "v3", "x1", "x2", "x3", "x4"};
  }
}

}  // namespace

TripodEnergyRun propagate_tripod_energy(const TripodExtremal& init, DissipationRate k, double T,
                                        const IntegratorConfig& cfg) {
  VectorField rhs = [k](double, std::span<const double> y, std::span<double> dy) {
    const TripodExtremal e = TripodExtremal::from_array(y.data());
    const auto d = tripod_energy_rhs(e, k).to_array();
    std::copy(d.begin(), d.end(), dy.begin());
    dy[kCostIndex] = 0.5 * tripod_energy_controls(e).norm2();
  };
  TripodEnergyRun run;
  run.trajectory = integrate(rhs, pack(init), 0.0, T, cfg);
  auto& traj = run.trajectory;
  name_tripod_columns(traj, false);
  for (auto& s : traj.samples) {
    const TripodExtremal e = TripodExtremal::from_array(s.y.data());
    const TripodFrameControls w = tripod_energy_controls(e);
    const ControlTriple u = unrotate_controls(w, e.theta1, e.theta3);
    const RealState4 x = e.cartesian();
    s.aux = {u.u1, u.u2, u.u3, w.w1, w.w2, w.v3, x.x1, x.x2, x.x3, x.x4};
  }
  auto constants = [](const Sample& s) {
    const TripodExtremal e = TripodExtremal::from_array(s.y.data());
    return tripod_constants(e.cartesian(), tripod_cartesian_costates(e));
  };
  const auto drift = monitor_conserved(
      traj, {[k](const Sample& s) { return tripod_energy_hamiltonian_max(TripodExtremal::from_array(s.y.data()), k); },
             [&](const Sample& s) { return constants(s).L1; }, [&](const Sample& s) { return constants(s).L3; },
             [&](const Sample& s) { return constants(s).L4; }});
  run.drift = {drift[0], drift[1], drift[2], drift[3]};
  run.energy = tripod_energy_hamiltonian_max(init, k);
  run.cost = traj.back().y[kCostIndex];
  return run;
}

double tripod_stirap_hamiltonian(const TripodExtremal& e, double w1, double v3, DissipationRate k) {
  const double s1 = std::sin(e.theta1);
  const double s2 = std::sin(e.theta2), c2 = chart_cos(e.theta2);
  check_poles(s1, s2, "tripod_stirap_hamiltonian");
  const double cot2 = c2 / s2;
  return -k.value() * e.p_rho * c2 * c2 + 0.5 * e.p_theta2 * e.p_theta2 + w1 * cot2 * e.p_theta1 +
         v3 * cot2 * e.p_theta3 / s1;
}

double tripod_v3(double w1, double theta1, double theta2, double p_theta1, double p_theta3, double rpr,
                 DissipationRate k) {
  if (p_theta3 == 0.0) {
    throw DomainError("tripod_v3: p_theta3 must be non-zero");
  }
  const double s2 = std::sin(theta2);
  return (2.0 * k.value() * rpr * chart_cos(theta2) * s2 * s2 * s2 - w1 * p_theta1) * std::sin(theta1) / p_theta3;
}

TripodExtremal tripod_stirap_rhs(const TripodExtremal& e, double w1, double v3, DissipationRate k) {
  const double s1 = std::sin(e.theta1), c1 = std::cos(e.theta1);
  const double s2 = std::sin(e.theta2), c2 = chart_cos(e.theta2);
  check_poles(s1, s2, "tripod_stirap_rhs");
  const double kv = k.value();
  const double cot2 = c2 / s2;
  TripodExtremal d;
  d.rho = -kv * c2 * c2;
  d.theta1 = w1 * cot2;
  d.theta2 = e.p_theta2;
  d.theta3 = v3 * cot2 / s1;
  d.p_rho = 0.0;
  d.p_theta1 = v3 * cot2 * e.p_theta3 * c1 / (s1 * s1);
  // -2k rpr c2 s2 + (w1 p_theta1 + v3 p_theta3 / s1) / s2^2, factored around
  // the balancing v3 so the branch p_theta2 = 0 stays exact.
  if (e.p_theta3 != 0.0) {
    const double v3_bal = tripod_v3(w1, e.theta1, e.theta2, e.p_theta1, e.p_theta3, e.p_rho, k);
    d.p_theta2 = e.p_theta3 / (s1 * s2 * s2) * (v3 - v3_bal);
  } else {
    d.p_theta2 = -2.0 * kv * e.p_rho * c2 * s2 + w1 * e.p_theta1 / (s2 * s2);
  }
  d.p_theta3 = 0.0;
  return d;
}

double tripod_horizon(double theta1_0, double theta2, double w1) {
  const double s2 = std::sin(theta2);
  if (std::abs(s2) < kPoleGuard) {
    throw DegeneracyError("tripod_horizon: sin(theta2) below pole guard");
  }
  const double rate = w1 * chart_cos(theta2) / s2;
  const double span = 0.5 * std::numbers::pi - theta1_0;
  if (!(rate * span > 0.0)) {
    throw DomainError("tripod_horizon: theta1 never reaches pi/2 at this w1 and theta2");
  }
  return span / rate;
}

TripodStirapRun propagate_tripod_stirap(const TripodStirapParams& params, const IntegratorConfig& cfg) {
  const DissipationRate k(params.k);
  const TripodExtremal& init = params.init;
  if (init.p_theta2 != 0.0) {
    throw DomainError("propagate_tripod_stirap: the branch requires p_theta2(0) = 0");
  }
  if (init.p_theta3 == 0.0) {
    throw DomainError("propagate_tripod_stirap: p_theta3 must be non-zero");
  }
  if (params.w1_profile && !params.horizon) {
    throw DomainError("propagate_tripod_stirap: a time-dependent w1 needs an explicit horizon");
  }
  TripodStirapRun run;
  run.horizon = params.horizon ? *params.horizon : tripod_horizon(init.theta1, init.theta2, params.w1);
  if (!(run.horizon > 0.0)) {
    throw DomainError("propagate_tripod_stirap: horizon must be positive");
  }

  const double w1_const = params.w1;
  const auto profile = params.w1_profile;
  auto w1_at = [w1_const, profile](double t) { return profile ? profile(t) : w1_const; };

  VectorField rhs = [k, w1_at](double t, std::span<const double> y, std::span<double> dy) {
    const TripodExtremal e = TripodExtremal::from_array(y.data());
    const double w1 = w1_at(t);
    const double v3 = tripod_v3(w1, e.theta1, e.theta2, e.p_theta1, e.p_theta3, e.p_rho, k);
    const auto d = tripod_stirap_rhs(e, w1, v3, k).to_array();
    std::copy(d.begin(), d.end(), dy.begin());
    dy[kCostIndex] = e.p_theta2 * e.p_theta2;
  };
  run.trajectory = integrate(rhs, pack(init), 0.0, run.horizon, cfg);
  auto& traj = run.trajectory;
  name_tripod_columns(traj, true);

  double pump_peak = -1.0, stokes_peak = -1.0;
  for (auto& s : traj.samples) {
    const TripodExtremal e = TripodExtremal::from_array(s.y.data());
    const double w1 = w1_at(s.t);
    const double v3 = tripod_v3(w1, e.theta1, e.theta2, e.p_theta1, e.p_theta3, e.p_rho, k);
    const double w2 = e.p_theta2 - k.value() * std::sin(e.theta2) * chart_cos(e.theta2);
    const TripodFrameControls w{w1, w2, v3};
    const ControlTriple u = unrotate_controls(w, e.theta1, e.theta3);
    const RealState4 x = e.cartesian();
    s.aux = {u.u1, u.u2, u.u3, w1, w2, v3, x.x1 * x.x1, x.x2 * x.x2, x.x3 * x.x3, x.x4 * x.x4};

    run.max_population2 = std::max(run.max_population2, x.x2 * x.x2);
    run.max_abs_p_theta2 = std::max(run.max_abs_p_theta2, std::abs(e.p_theta2));
    run.max_theta2_deviation = std::max(run.max_theta2_deviation, std::abs(e.theta2 - init.theta2));
    run.max_norm_identity_error = std::max(run.max_norm_identity_error, std::abs(u.norm2() - w.norm2()));
    if (std::abs(u.u1) > pump_peak) {
      pump_peak = std::abs(u.u1);
      run.pump_peak_time = s.t;
    }
    const double stokes = std::hypot(u.u2, u.u3);
    if (stokes > stokes_peak) {
      stokes_peak = stokes;
      run.stokes_peak_time = s.t;
    }
  }
  run.counterintuitive = run.stokes_peak_time < run.pump_peak_time;
  const auto& last = traj.back().aux;
  run.final_populations = {last[6], last[7], last[8], last[9]};
  run.cost = traj.back().y[kCostIndex];
  return run;
}

double tune_tripod_theta1(const TripodStirapParams& params, double theta3_target, double lo, double hi,
                          const IntegratorConfig& cfg) {
  if (params.horizon || params.w1_profile) {
    throw DomainError("tune_tripod_theta1: tuning uses the computed horizon at constant w1");
  }
  auto miss = [&](double theta1_0) {
    TripodStirapParams p = params;
    p.init.theta1 = theta1_0;
    const TripodStirapRun run = propagate_tripod_stirap(p, cfg);
    return run.trajectory.back().y[3] - theta3_target;
  };
  const double f_lo = miss(lo);
  const double f_hi = miss(hi);
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw DomainError("tune_tripod_theta1: bracket does not straddle the target theta3");
  }
  boost::uintmax_t iterations = 60;
  const auto bracket = boost::math::tools::toms748_solve(miss, lo, hi, f_lo, f_hi,
                                                         boost::math::tools::eps_tolerance<double>(40), iterations);
  return 0.5 * (bracket.first + bracket.second);
}

}  // namespace adiabatic

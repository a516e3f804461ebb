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

#include "adiabatic/shooting.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <optional>

#include "adiabatic/energy_flow.hpp"
#include "adiabatic/stirap_cost.hpp"
#include "adiabatic/tripod.hpp"
#include "parallel.hpp"

namespace adiabatic {

const char* to_string(SystemKind s) { return s == SystemKind::kThreeLevel ? "three-level" : "tripod"; }
const char* to_string(CostKind c) { return c == CostKind::kEnergy ? "energy" : "stirap"; }

std::vector<std::string> costate_names(SystemKind s, CostKind c) {
  if (s == SystemKind::kThreeLevel) {
    if (c == CostKind::kEnergy) return {"p_theta", "p_phi", "p_rho"};
    return {"p_phi", "p_rho"};
  }
  if (c == CostKind::kEnergy) return {"p_theta1", "p_theta2", "p_theta3", "p_rho"};
  return {"p_theta1", "p_theta3", "p_rho"};
}

void ShootingProblem::validate() const {
  const std::size_t dim = system == SystemKind::kThreeLevel ? 3 : 4;
  if (start.size() != dim || target.size() != dim) {
    throw DomainError(std::string("shooting problem: start and target need ") + std::to_string(dim) +
                      " components for the " + to_string(system) + " system");
  }
  auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  if (std::abs(norm(start) - 1.0) > 1e-12 || std::abs(norm(target) - 1.0) > 1e-12) {
    throw DomainError("shooting problem: start and target must be unit vectors");
  }
  const auto names = costate_names(system, cost);
  if (box.size() != names.size()) {
    throw DomainError("shooting problem: box needs " + std::to_string(names.size()) + " intervals");
  }
  for (const auto& iv : box) {
    if (!(iv.hi >= iv.lo) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
      throw DomainError("shooting problem: empty or non-finite box interval");
    }
  }
  if (cost == CostKind::kEnergy && horizon < 0.0) {
    throw DomainError("shooting problem: negative horizon");
  }
  DissipationRate rate(k);
  (void)rate;
  integrator.validate();
}

namespace {

double trapezoid(const Trajectory& traj, const std::function<double(const Sample&)>& f) {
  double acc = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const auto& a = traj.samples[i - 1];
    const auto& b = traj.samples[i];
    acc += 0.5 * (b.t - a.t) * (f(a) + f(b));
  }
  return acc;
}

// Zero-crossing rate of one channel; negative when it has fewer than two
// crossings and so carries no oscillation estimate.
double crossing_rate(const Trajectory& traj, std::size_t ch) {
  double peak = 0.0;
  for (const auto& s : traj.samples) peak = std::max(peak, std::abs(s.aux[ch]));
  const double deadband = kZeroCrossingDeadband * peak;
  std::vector<double> times;
  int last_sign = 0;
  double last_t = 0.0, last_v = 0.0;
  for (const auto& s : traj.samples) {
    const double v = s.aux[ch];
    if (std::abs(v) <= deadband) continue;
    const int sg = v > 0.0 ? 1 : -1;
    if (last_sign != 0 && sg != last_sign) {
      times.push_back(last_t + (s.t - last_t) * last_v / (last_v - v));
    }
    last_sign = sg;
    last_t = s.t;
    last_v = v;
  }
  if (times.size() < 2) return -1.0;
  const double span = times.back() - times.front();
  if (span <= 0.0) return -1.0;
  return static_cast<double>(times.size() - 1) / (2.0 * span);
}

}  // namespace

MetricsReport metrics(const Trajectory& traj) {
  if (traj.size() < 8) {
    throw DomainError("metrics: need at least 8 samples");
  }
  std::vector<std::size_t> channels;
  for (const char* name : {"u1", "u2", "u3"}) {
    const auto it = std::find(traj.aux_names.begin(), traj.aux_names.end(), name);
    if (it != traj.aux_names.end()) channels.push_back(static_cast<std::size_t>(it - traj.aux_names.begin()));
  }
  if (channels.empty()) {
    throw DomainError("metrics: trajectory carries no control channels");
  }
  auto u2sum = [&](const Sample& s) {
    double acc = 0.0;
    for (std::size_t c : channels) acc += s.aux[c] * s.aux[c];
    return acc;
  };
  MetricsReport m;
  m.C = trapezoid(traj, u2sum);
  const double T = traj.back().t - traj.front().t;
  m.Amp = trapezoid(traj, [&](const Sample& s) { return std::sqrt(u2sum(s)); }) / T;
  double rate_sum = 0.0;
  int oscillating = 0;
  for (std::size_t c : channels) {
    const double r = crossing_rate(traj, c);
    if (r >= 0.0) {
      rate_sum += r;
      ++oscillating;
    }
  }
  m.Freq = oscillating > 0 ? rate_sum / oscillating : 0.0;
  return m;
}

ShootingError::ShootingError(const IntegrationError& cause, std::vector<double> costates)
    : IntegrationError(cause.time(), "shot failed: " + std::string(cause.what())), costates_(std::move(costates)) {}

namespace {

struct ShotSettings {
  IntegratorConfig integrator;
  double max_energy_drift = 1e-6;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

TripodExtremal tripod_start(const ShootingProblem& p) {
  const RealState4 x{p.start[0], p.start[1], p.start[2], p.start[3]};
  const Spherical4Chart ch = cart_to_sph4(x);
  if (ch.degenerate_theta2) {
    throw DomainError("shoot: tripod start on the x2 axis has no usable chart");
  }
  TripodExtremal e;
  e.rho = std::log(ch.point.r);
  e.theta1 = ch.degenerate_theta1 ? p.theta1_regularization : ch.point.theta1;
  e.theta2 = ch.point.theta2;
  e.theta3 = ch.point.theta3;
  return e;
}

ExtremalPoint three_level_start(const ShootingProblem& p) {
  const SphericalChart ch = cart_to_sph({p.start[0], p.start[1], p.start[2]});
  if (ch.degenerate) {
    throw DomainError("shoot: three-level start on the x2 axis has no usable chart");
  }
  ExtremalPoint e;
  e.rho = std::log(ch.point.r);
  e.theta = ch.point.theta;
  e.phi = ch.point.phi;
  return e;
}

ShotResult shoot_with(const ShootingProblem& p, const std::vector<double>& q, const ShotSettings& settings) {
  const DissipationRate k(p.k);
  ShotResult out;
  std::vector<std::pair<std::string, double>> drifts;

  if (p.cost == CostKind::kEnergy && p.horizon == 0.0) {
    out.final_state = p.start;
    out.report.fidelity = std::pow(dot(p.start, p.target), 2);
    out.report.C = 0.0;
    out.trajectory.samples.push_back({0.0, p.start, {}});
    out.distance = std::sqrt(std::max(0.0, 2.0 - 2.0 * dot(p.start, p.target)));
    return out;
  }

  try {
    if (p.system == SystemKind::kThreeLevel && p.cost == CostKind::kEnergy) {
      ExtremalPoint e = three_level_start(p);
      e.p_theta = q[0];
      e.p_phi = q[1];
      e.p_rho = q[2];
      PropagationOptions opts;
      opts.max_energy_drift = settings.max_energy_drift;
      ExtremalRun run = propagate_extremal(e, k, p.horizon, settings.integrator, opts);
      const RealState3 x = ExtremalPoint::from_array(run.trajectory.back().y.data()).cartesian();
      out.final_state = {x.x1, x.x2, x.x3};
      drifts = {{"hamiltonian", run.drift.hamiltonian}, {"p_phi", run.drift.p_phi}, {"p_rho", run.drift.p_rho}};
      out.horizon = run.horizon;
      out.trajectory = std::move(run.trajectory);
    } else if (p.system == SystemKind::kThreeLevel) {
      const ExtremalPoint e = three_level_start(p);
      StirapOptions opts;
      if (p.horizon > 0.0) opts.horizon = p.horizon;
      StirapRun run = propagate_stirap(e.theta - p.regularization, e.phi, q[1], q[0], k, settings.integrator, opts);
      const RealState3 x = ExtremalPoint::from_array(run.trajectory.back().y.data()).cartesian();
      out.final_state = {x.x1, x.x2, x.x3};
      drifts = {{"p_theta", run.max_abs_p_theta}, {"hamiltonian", run.max_hamiltonian_error}};
      out.horizon = run.horizon;
      out.trajectory = std::move(run.trajectory);
    } else if (p.cost == CostKind::kEnergy) {
      TripodExtremal e = tripod_start(p);
      e.p_theta1 = q[0];
      e.p_theta2 = q[1];
      e.p_theta3 = q[2];
      e.p_rho = q[3];
      TripodEnergyRun run = propagate_tripod_energy(e, k, p.horizon, settings.integrator);
      const RealState4 x = TripodExtremal::from_array(run.trajectory.back().y.data()).cartesian();
      out.final_state = {x.x1, x.x2, x.x3, x.x4};
      drifts = {{"hamiltonian", run.drift.hamiltonian}, {"L1", run.drift.L1}, {"L3", run.drift.L3},
                {"L4", run.drift.L4}};
      out.horizon = p.horizon;
      out.trajectory = std::move(run.trajectory);
    } else {
      TripodStirapParams params;
      params.init = tripod_start(p);
      params.init.theta2 -= p.regularization;
      params.init.p_theta1 = q[0];
      params.init.p_theta3 = q[1];
      params.init.p_rho = q[2];
      params.w1 = p.w1;
      params.k = p.k;
      if (p.horizon > 0.0) params.horizon = p.horizon;
      TripodStirapRun run = propagate_tripod_stirap(params, settings.integrator);
      const RealState4 x = TripodExtremal::from_array(run.trajectory.back().y.data()).cartesian();
      out.final_state = {x.x1, x.x2, x.x3, x.x4};
      drifts = {{"p_theta2", run.max_abs_p_theta2}, {"theta2", run.max_theta2_deviation}};
      out.horizon = run.horizon;
      out.trajectory = std::move(run.trajectory);
    }
  } catch (const IntegrationError& e) {
    throw ShootingError(e, q);
  }

  out.report = metrics(out.trajectory);
  out.report.drifts = std::move(drifts);
  out.report.fidelity = std::pow(dot(out.final_state, p.target), 2);
  double d2 = 0.0;
  for (std::size_t i = 0; i < p.target.size(); ++i) d2 += std::pow(out.final_state[i] - p.target[i], 2);
  out.distance = std::sqrt(d2);
  return out;
}

void check_in_box(const ShootingProblem& p, const std::vector<double>& q) {
  if (q.size() != p.box.size()) {
    throw DomainError("shoot: expected " + std::to_string(p.box.size()) + " costates");
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double slack = 1e-12 * std::max(1.0, std::abs(q[i]));
    if (q[i] < p.box[i].lo - slack || q[i] > p.box[i].hi + slack) {
      throw DomainError("shoot: costate " + costate_names(p.system, p.cost)[i] + " outside the search box");
    }
  }
}

}  // namespace

ShotResult shoot(const ShootingProblem& p, const std::vector<double>& costates) {
  p.validate();
  check_in_box(p, costates);
  return shoot_with(p, costates, {p.integrator, 1e-6});
}

namespace {

struct SimplexContext {
  const ShootingProblem* problem = nullptr;
  std::vector<std::size_t> free_dims;
  std::vector<double> anchor;
  ShotSettings settings;
  std::size_t evaluations = 0;
  std::size_t budget = 0;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<double> best_point;
};

constexpr double kFailedShot = 1e6;

double simplex_objective(const gsl_vector* v, void* params) {
  auto* ctx = static_cast<SimplexContext*>(params);
  // An iteration may ask for several points; once the budget is spent the
  // remaining ones are refused instead of shot.
  if (ctx->evaluations >= ctx->budget) return kFailedShot;
  ++ctx->evaluations;
  std::vector<double> q = ctx->anchor;
  double outside = 0.0;
  for (std::size_t j = 0; j < ctx->free_dims.size(); ++j) {
    const std::size_t d = ctx->free_dims[j];
    const Interval& iv = ctx->problem->box[d];
    const double raw = gsl_vector_get(v, j);
    const double clamped = std::clamp(raw, iv.lo, iv.hi);
    outside += std::abs(raw - clamped) / std::max(iv.hi - iv.lo, 1e-300);
    q[d] = clamped;
  }
  double value = kFailedShot;
  try {
    value = shoot_with(*ctx->problem, q, ctx->settings).distance + outside;
  } catch (const Error&) {
    value = kFailedShot + outside;
  }
  if (value < ctx->best_value) {
    ctx->best_value = value;
    ctx->best_point = q;
  }
  return value;
}

}  // namespace

namespace {

struct Refinement {
  std::vector<double> point;
  ShotResult shot;
  std::size_t evaluations = 0;
  bool budget_exhausted = false;
  bool improved = false;
};

// Nelder-Mead from a grid node over the free dimensions, with an initial
// step of half the grid spacing.
Refinement refine(const ShootingProblem& p, const SearchOptions& options, const std::vector<std::size_t>& counts,
                  const std::vector<std::size_t>& free_dims, std::vector<double> q, const ShotSettings& fine) {
  Refinement out;
  out.shot = shoot_with(p, q, fine);
  out.point = q;
  if (free_dims.empty() || options.simplex_evaluations == 0) return out;

  SimplexContext ctx;
  ctx.problem = &p;
  ctx.free_dims = free_dims;
  ctx.anchor = q;
  ctx.settings = fine;
  ctx.budget = options.simplex_evaluations;
  ctx.best_value = out.shot.distance;
  ctx.best_point = q;
  const std::size_t n = free_dims.size();
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(n), gsl_vector_free);
  double width = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const Interval& iv = p.box[free_dims[j]];
    gsl_vector_set(x.get(), j, q[free_dims[j]]);
    const double h = counts[free_dims[j]] > 1 ? (iv.hi - iv.lo) / static_cast<double>(counts[free_dims[j]] - 1)
                                              : 0.25 * (iv.hi - iv.lo);
    gsl_vector_set(step.get(), j, 0.5 * h);
    width = std::max(width, iv.hi - iv.lo);
  }
  gsl_multimin_function fn{&simplex_objective, n, &ctx};
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> minimizer(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(minimizer.get(), &fn, x.get(), step.get());
  bool converged = false;
  while (ctx.evaluations < options.simplex_evaluations) {
    if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) break;
    const double size = gsl_multimin_fminimizer_size(minimizer.get());
    if (gsl_multimin_test_size(size, options.simplex_size_tol * width) == GSL_SUCCESS) {
      converged = true;
      break;
    }
  }
  out.evaluations = ctx.evaluations;
  out.budget_exhausted = !converged && ctx.evaluations >= options.simplex_evaluations;
  if (ctx.best_value < out.shot.distance) {
    out.point = ctx.best_point;
    out.shot = shoot_with(p, out.point, fine);
    out.improved = true;
  }
  return out;
}

}  // namespace

SearchResult search(const ShootingProblem& p, const SearchOptions& options) {
  p.validate();
  if (options.grid_points < 1) {
    throw DomainError("search: grid needs at least one point per dimension");
  }
  const std::size_t dims = p.box.size();
  std::vector<std::size_t> counts(dims);
  std::size_t total = 1;
  for (std::size_t d = 0; d < dims; ++d) {
    counts[d] = p.box[d].collapsed() ? 1 : options.grid_points;
    total *= counts[d];
  }
  auto node = [&](std::size_t index) {
    std::vector<double> q(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      const std::size_t i = index % counts[d];
      index /= counts[d];
      const Interval& iv = p.box[d];
      q[d] = counts[d] == 1 ? (iv.collapsed() ? iv.lo : 0.5 * (iv.lo + iv.hi))
                            : iv.lo + (iv.hi - iv.lo) * static_cast<double>(i) / static_cast<double>(counts[d] - 1);
    }
    return q;
  };

  ShotSettings coarse{p.integrator, 1e-3};
  coarse.integrator.rel_tol = std::max(p.integrator.rel_tol, options.grid_rel_tol);
  coarse.integrator.abs_tol = std::max(p.integrator.abs_tol, options.grid_abs_tol);

  std::vector<double> distance(total, std::numeric_limits<double>::infinity());
  detail::parallel_for(total, [&](std::size_t i) {
    try {
      distance[i] = shoot_with(p, node(i), coarse).distance;
    } catch (const Error&) {
      distance[i] = std::numeric_limits<double>::infinity();
    }
  });

  SearchResult result;
  result.grid_evaluations = total;
  result.grid_failures =
      static_cast<std::size_t>(std::count(distance.begin(), distance.end(), std::numeric_limits<double>::infinity()));
  if (result.grid_failures == total) {
    throw DomainError("search: every grid shot failed");
  }
  // Candidates in order of grid distance; the lower index wins ties, so
  // the choice does not depend on the thread schedule.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < total; ++i) {
    if (std::isfinite(distance[i])) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return distance[a] < distance[b]; });
  order.resize(std::min(order.size(), std::max<std::size_t>(options.starts, 1)));

  std::vector<std::size_t> free_dims;
  for (std::size_t d = 0; d < dims; ++d) {
    if (!p.box[d].collapsed()) free_dims.push_back(d);
  }
  const ShotSettings fine{p.integrator, 1e-6};

  std::vector<double> best_q;
  std::optional<ShotResult> best;
  std::exception_ptr first_failure;
  for (std::size_t index : order) {
    Refinement r;
    try {
      r = refine(p, options, counts, free_dims, node(index), fine);
    } catch (const Error&) {
      // The node passed at grid tolerances but not at the fine ones.
      if (!first_failure) first_failure = std::current_exception();
      continue;
    }
    result.simplex_evaluations += r.evaluations;
    if (!best || r.shot.distance < best->distance) {
      best_q = std::move(r.point);
      best = std::move(r.shot);
      result.budget_exhausted = r.budget_exhausted;
      result.improved_by_simplex = r.improved;
    }
  }

  if (!best) std::rethrow_exception(first_failure);
  result.costates = best_q;
  result.best = std::move(*best);
  return result;
}

}  // namespace adiabatic

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

#include "adiabatic/reduction.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <queue>

#include "adiabatic/errors.hpp"
#include "parallel.hpp"

namespace adiabatic {

CartesianPhasePoint to_cartesian(const ExtremalPoint& e, bool projected) {
  const double r = projected ? 1.0 : e.r();
  const double st = std::sin(e.theta);
  const double ct = std::cos(e.theta);
  if (std::abs(st) < kPoleGuard) {
    throw DegeneracyError("to_cartesian: sin(theta) below pole guard");
  }
  const double cp = std::cos(e.phi);
  const double sp = std::sin(e.phi);

  const std::array<double, 3> e_r{st * cp, ct, st * sp};
  const std::array<double, 3> e_theta{ct * cp, -st, ct * sp};
  const std::array<double, 3> e_phi{-sp, 0.0, cp};

  CartesianPhasePoint out;
  out.x = {r * e_r[0], r * e_r[1], r * e_r[2]};
  const double a = e.p_rho / r;
  const double b = e.p_theta / r;
  const double c = e.p_phi / (r * st);
  for (int i = 0; i < 3; ++i) {
    out.p[i] = a * e_r[i] + b * e_theta[i] + c * e_phi[i];
  }
  return out;
}

ReductionPoint invariants_of(const RealState3& x, const std::array<double, 3>& p) {
  ReductionPoint rp;
  rp.pi1 = x.x2;
  rp.pi2 = p[1];
  rp.pi3 = x.x1 * p[2] - x.x3 * p[0];
  rp.pi4 = p[0] * p[0] + p[2] * p[2];
  rp.pi5 = x.x1 * x.x1 + x.x3 * x.x3;
  rp.pi6 = x.x1 * p[0] + x.x3 * p[2];
  return rp;
}

double reduced_hamiltonian(const ReductionPoint& rp, double k) {
  return -k * rp.pi1 * rp.pi2 +
         0.5 * (rp.pi1 * rp.pi1 * rp.pi4 + rp.pi2 * rp.pi2 * rp.pi5 - 2.0 * rp.pi1 * rp.pi2 * rp.pi6);
}

double reduced_hamiltonian_constrained(const ReductionPoint& rp, double rpr, double k) {
  const double sphere = std::abs(rp.pi5 + rp.pi1 * rp.pi1 - 1.0);
  const double radial = std::abs(rp.pi6 + rp.pi1 * rp.pi2 - rpr);
  if (sphere > kConstraintTolerance || radial > kConstraintTolerance * std::max(1.0, std::abs(rpr))) {
    throw DomainError("reduced_hamiltonian_constrained: point violates the sphere constraints");
  }
  const double p1 = rp.pi1, p2 = rp.pi2;
  return -(k + rpr) * p1 * p2 + 0.5 * (p1 * p1 * rp.pi4 + p2 * p2 * p1 * p1 + p2 * p2);
}

double constrained_pi4(double pi1, double pi2, double p_phi, double rpr) {
  const double d = 1.0 - pi1 * pi1;
  if (d <= 0.0) {
    throw DomainError("constrained_pi4: |pi1| must be below 1");
  }
  const double q = rpr - pi1 * pi2;
  return (q * q + p_phi * p_phi) / d;
}

double section_residual(double pi1, double pi2, double H, double p_phi, double rpr, double k) {
  const double pi4 = constrained_pi4(pi1, pi2, p_phi, rpr);
  return -(k + rpr) * pi1 * pi2 + 0.5 * (pi1 * pi1 * pi4 + pi2 * pi2 * pi1 * pi1 + pi2 * pi2) - H;
}

namespace {

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Connected sign components among grid nodes whose index distance from
// (c1, c2) lies in [r_in, r_out].
int annulus_components(const std::vector<double>& F, std::size_t n1, std::size_t n2, double c1, double c2) {
  constexpr double r_in = 3.0, r_out = 10.0;
  auto inside = [&](long i, long j) {
    if (i < 0 || j < 0 || i >= static_cast<long>(n1) || j >= static_cast<long>(n2)) return false;
    const double d = std::hypot(static_cast<double>(i) - c1, static_cast<double>(j) - c2);
    return d >= r_in && d <= r_out;
  };
  std::vector<char> seen(n1 * n2, 0);
  int components = 0;
  const long i_lo = static_cast<long>(std::floor(c1 - r_out)), i_hi = static_cast<long>(std::ceil(c1 + r_out));
  const long j_lo = static_cast<long>(std::floor(c2 - r_out)), j_hi = static_cast<long>(std::ceil(c2 + r_out));
  for (long i = i_lo; i <= i_hi; ++i) {
    for (long j = j_lo; j <= j_hi; ++j) {
      if (!inside(i, j)) continue;
      const std::size_t idx = static_cast<std::size_t>(i) * n2 + static_cast<std::size_t>(j);
      const int sg = sign_of(F[idx]);
      if (seen[idx] || sg == 0) continue;
      ++components;
      std::queue<std::pair<long, long>> q;
      q.push({i, j});
      seen[idx] = 1;
      while (!q.empty()) {
        auto [a, b] = q.front();
        q.pop();
        const long di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int m = 0; m < 4; ++m) {
          const long na = a + di[m], nb = b + dj[m];
          if (!inside(na, nb)) continue;
          const std::size_t nidx = static_cast<std::size_t>(na) * n2 + static_cast<std::size_t>(nb);
          if (seen[nidx] || sign_of(F[nidx]) != sg) continue;
          seen[nidx] = 1;
          q.push({na, nb});
        }
      }
    }
  }
  return components;
}

}  // namespace

BitorusSection bitorus_section(double H, double p_phi, double rpr, double k, const SectionGrid& grid) {
  if (grid.n1 < 2 || grid.n2 < 2 || !(grid.pi1_hi > grid.pi1_lo) || !(grid.pi2_hi > grid.pi2_lo)) {
    throw DomainError("bitorus_section: degenerate grid");
  }
  if (grid.pi1_lo <= -1.0 || grid.pi1_hi >= 1.0) {
    throw DomainError("bitorus_section: pi1 range must lie inside (-1, 1)");
  }
  const DissipationRate rate(k);
  BitorusSection out;
  out.H = H;
  out.p_phi = p_phi;
  out.rpr = rpr;
  out.k = rate.value();
  out.grid = grid;

  const std::size_t n1 = grid.n1, n2 = grid.n2;
  const double h1 = (grid.pi1_hi - grid.pi1_lo) / static_cast<double>(n1 - 1);
  const double h2 = (grid.pi2_hi - grid.pi2_lo) / static_cast<double>(n2 - 1);
  auto pi1_at = [&](std::size_t i) { return grid.pi1_lo + h1 * static_cast<double>(i); };
  auto pi2_at = [&](std::size_t j) { return grid.pi2_lo + h2 * static_cast<double>(j); };

  std::vector<double> F(n1 * n2);
  detail::parallel_for(n1, [&](std::size_t i) {
    for (std::size_t j = 0; j < n2; ++j) {
      F[i * n2 + j] = section_residual(pi1_at(i), pi2_at(j), H, p_phi, rpr, k);
    }
  });

  // Crossing on a grid edge: bracketed root of the residual along the edge
  // (the residual is steep near |pi1| = 1, so plain interpolation is poor).
  auto emit = [&](double a1, double a2, double fa, double b1, double b2, double fb) {
    auto along = [&](double w) {
      return section_residual(a1 + w * (b1 - a1), a2 + w * (b2 - a2), H, p_phi, rpr, k);
    };
    std::uintmax_t iters = 64;
    const auto bracket = boost::math::tools::toms748_solve(along, 0.0, 1.0, fa, fb,
                                                           boost::math::tools::eps_tolerance<double>(48), iters);
    const double w = 0.5 * (bracket.first + bracket.second);
    const double q1 = a1 + w * (b1 - a1);
    const double q2 = a2 + w * (b2 - a2);
    out.points.push_back({q1, q2, constrained_pi4(q1, q2, p_phi, rpr)});
  };
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const double f = F[i * n2 + j];
      if (f == 0.0) {
        out.points.push_back({pi1_at(i), pi2_at(j), constrained_pi4(pi1_at(i), pi2_at(j), p_phi, rpr)});
        continue;
      }
      if (i + 1 < n1) {
        const double g = F[(i + 1) * n2 + j];
        if (g != 0.0 && sign_of(f) != sign_of(g)) emit(pi1_at(i), pi2_at(j), f, pi1_at(i + 1), pi2_at(j), g);
      }
      if (j + 1 < n2) {
        const double g = F[i * n2 + j + 1];
        if (g != 0.0 && sign_of(f) != sign_of(g)) emit(pi1_at(i), pi2_at(j), f, pi1_at(i), pi2_at(j + 1), g);
      }
    }
  }

  out.origin_residual = section_residual(0.0, 0.0, H, p_phi, rpr, k);
  const bool origin_in_grid = grid.pi1_lo < 0.0 && grid.pi1_hi > 0.0 && grid.pi2_lo < 0.0 && grid.pi2_hi > 0.0;
  if (origin_in_grid) {
    const double c1 = -grid.pi1_lo / h1;
    const double c2 = -grid.pi2_lo / h2;
    out.annulus_components = annulus_components(F, n1, n2, c1, c2);
    const double scale = std::max(1.0, std::abs(H) + rpr * rpr + p_phi * p_phi);
    out.pinch_at_origin = std::abs(out.origin_residual) <= 1e-12 * scale && out.annulus_components >= 4;
  }
  return out;
}

std::pair<double, double> zero_energy_momenta(double theta, double p_phi, double p_rho, DissipationRate k) {
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  if (std::abs(s) < kPoleGuard) {
    throw DegeneracyError("zero_energy_momenta: sin(theta) below pole guard");
  }
  const double kv = k.value();
  const double cot = c / s;
  // p^2/2 + k s c p + (-k p_rho c^2 + cot^2 p_phi^2 / 2) = 0
  const double b = kv * s * c;
  const double disc = b * b + 2.0 * kv * p_rho * c * c - cot * cot * p_phi * p_phi;
  if (disc < 0.0) {
    throw DomainError("zero_energy_momenta: the H = 0 fibre does not reach this theta");
  }
  const double root = std::sqrt(disc);
  return {-b - root, -b + root};
}

double singular_circle_distance(const CartesianPhasePoint& c) { return c.x.x2 * c.x.x2 + c.p[1] * c.p[1]; }

}  // namespace adiabatic

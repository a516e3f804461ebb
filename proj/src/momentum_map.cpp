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

#include "adiabatic/momentum_map.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "adiabatic/energy_flow.hpp"
#include "adiabatic/errors.hpp"

namespace adiabatic {

namespace {

void check_pole(double sin_theta, const char* where) {
  if (std::abs(sin_theta) < kPoleGuard) {
    throw DegeneracyError(std::string(where) + ": sin(theta) below pole guard");
  }
}

double boundary_energy_at(double sigma, double p_rho, double k) {
  // sigma = sin^2(theta) on the boundary family.
  const double c2 = 1.0 - sigma;
  return -k * c2 * c2 * (k * sigma + p_rho);
}

double boundary_p_phi2(double sigma, double p_rho, double k) {
  return sigma * sigma * k * (2.0 * p_rho - k + 2.0 * k * sigma);
}

}  // namespace

Eigen::Matrix<double, 4, 2> gradient_matrix(double theta, double p_theta, double p_phi, double p_rho, double k) {
  const double s = std::sin(theta);
  const double c = chart_cos(theta);
  check_pole(s, "gradient_matrix");
  const double cot = c / s;
  Eigen::Matrix<double, 4, 2> m;
  m(0, 0) = k * s * c + p_theta;
  m(1, 0) = cot * cot * p_phi;
  m(2, 0) = k * p_rho * (2.0 * s * c) + k * std::cos(2.0 * theta) * p_theta - c / (s * s * s) * p_phi * p_phi;
  m(3, 0) = 0.0;
  m(0, 1) = 0.0;
  m(1, 1) = 1.0;
  m(2, 1) = 0.0;
  m(3, 1) = 0.0;
  return m;
}

double normalized_min_singular_value(const Eigen::Matrix<double, 4, 2>& m) {
  Eigen::Matrix<double, 4, 2> scaled = m;
  for (int j = 0; j < 2; ++j) {
    const double n = scaled.col(j).norm();
    if (n == 0.0) return 0.0;
    scaled.col(j) /= n;
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 4, 2>> svd(scaled);
  return svd.singularValues().minCoeff();
}

bool is_rank_deficient(const Eigen::Matrix<double, 4, 2>& m, double tol) {
  return normalized_min_singular_value(m) < tol;
}

const char* to_string(PointClass c) {
  switch (c) {
    case PointClass::kRegular:
      return "regular";
    case PointClass::kStirapSingular:
      return "stirap-singular";
    case PointClass::kBoundary:
      return "boundary";
  }
  return "unknown";
}

PointClass classify_point(double theta, double p_theta, double p_phi, double p_rho, double k) {
  const double s = std::sin(theta);
  const double c = chart_cos(theta);
  check_pole(s, "classify_point");
  const double tol = kClassifyTolerance;
  if (std::abs(theta - 0.5 * std::numbers::pi) <= tol && std::abs(p_theta) <= tol) {
    return PointClass::kStirapSingular;
  }
  if (std::abs(p_theta + k * s * c) <= tol && std::abs(c) > tol) {
    const double radicand = s * s * s / c * (k * p_rho * (2.0 * s * c) + k * std::cos(2.0 * theta) * p_theta);
    if (std::abs(p_phi * p_phi - radicand) <= tol * std::max(1.0, std::abs(radicand))) {
      return PointClass::kBoundary;
    }
  }
  return PointClass::kRegular;
}

std::vector<double> open_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g;
  g.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) {
    g.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n + 1));
  }
  return g;
}

BoundaryCurve boundary_curve(double p_rho, double k, const std::vector<double>& theta_grid) {
  const DissipationRate rate(k);
  BoundaryCurve out;
  for (double theta : theta_grid) {
    const double s = std::sin(theta);
    const double c = chart_cos(theta);
    if (std::abs(s) < kPoleGuard || std::abs(c) < kClassifyTolerance) {
      out.skipped_thetas.push_back(theta);
      continue;
    }
    const double p_theta = -k * s * c;
    const double radicand = s * s * s / c * (k * p_rho * (2.0 * s * c) + k * std::cos(2.0 * theta) * p_theta);
    if (radicand < 0.0) {
      out.skipped_thetas.push_back(theta);
      continue;
    }
    const double p_phi = std::sqrt(radicand);
    for (double sign : {1.0, -1.0}) {
      ExtremalPoint e;
      e.theta = theta;
      e.p_theta = p_theta;
      e.p_phi = sign * p_phi;
      e.p_rho = p_rho;
      out.points.push_back({theta, p_theta, sign * p_phi, hamiltonian_energy(e, rate)});
    }
  }
  return out;
}

double lower_boundary_energy(double p_phi, double p_rho, double k) {
  const double target = p_phi * p_phi;
  // Scan sigma = sin^2 in (0, 1] for brackets of p_phi^2(sigma) = target and
  // keep the lowest boundary energy; the equator contributes H = 0.
  double best = 0.0;
  constexpr int kScan = 2048;
  double prev_sigma = 0.0;
  double prev_f = boundary_p_phi2(0.0, p_rho, k) - target;
  for (int i = 1; i <= kScan; ++i) {
    const double sigma = static_cast<double>(i) / kScan;
    const double f = boundary_p_phi2(sigma, p_rho, k) - target;
    if ((prev_f <= 0.0 && f >= 0.0) || (prev_f >= 0.0 && f <= 0.0)) {
      double lo = prev_sigma, hi = sigma, flo = prev_f;
      for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = boundary_p_phi2(mid, p_rho, k) - target;
        if ((fm <= 0.0) == (flo <= 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      best = std::min(best, boundary_energy_at(0.5 * (lo + hi), p_rho, k));
    }
    prev_sigma = sigma;
    prev_f = f;
  }
  return best;
}

std::vector<ImageSample> sample_image(double p_rho, double k, std::size_t budget, const SamplingBox& box) {
  if (budget < 1) {
    throw DomainError("sample_image: budget must be at least 1");
  }
  const DissipationRate rate(k);
  // Additive recurrence on the inverse powers of the root of x^4 = x + 1.
  constexpr double g = 1.2207440846057594753616853491;
  constexpr double a1 = 1.0 / g, a2 = 1.0 / (g * g), a3 = 1.0 / (g * g * g);
  std::vector<ImageSample> out;
  out.reserve(budget);
  for (std::size_t n = 0; n < budget; ++n) {
    const double nd = static_cast<double>(n);
    const double q1 = std::fmod(0.5 + nd * a1, 1.0);
    const double q2 = std::fmod(0.5 + nd * a2, 1.0);
    const double q3 = std::fmod(0.5 + nd * a3, 1.0);
    ExtremalPoint e;
    e.theta = box.theta_lo + q1 * (box.theta_hi - box.theta_lo);
    e.p_theta = box.p_theta_lo + q2 * (box.p_theta_hi - box.p_theta_lo);
    e.p_phi = box.p_phi_lo + q3 * (box.p_phi_hi - box.p_phi_lo);
    e.p_rho = p_rho;
    if (n == 0) {
      // Exact centre, so a one-point budget of the default box lands on the
      // singular circle.
      e.theta = 0.5 * (box.theta_lo + box.theta_hi);
      e.p_theta = 0.5 * (box.p_theta_lo + box.p_theta_hi);
      e.p_phi = 0.5 * (box.p_phi_lo + box.p_phi_hi);
    }
    out.push_back({e.theta, e.p_theta, e.p_phi, hamiltonian_energy(e, rate)});
  }
  return out;
}

MomentumMapDiagram build_diagram(double p_rho, double k, std::size_t budget, std::size_t boundary_points,
                                 const SamplingBox& box) {
  MomentumMapDiagram d;
  d.p_rho = p_rho;
  d.k = k;
  d.image = sample_image(p_rho, k, budget, box);
  d.boundary = boundary_curve(p_rho, k, open_grid(0.0, 0.5 * std::numbers::pi, boundary_points));
  d.singular_p_phi_lo = box.p_phi_lo;
  d.singular_p_phi_hi = box.p_phi_hi;
  return d;
}

DiagramTopology diagram_topology(const MomentumMapDiagram& d) {
  DiagramTopology t;
  const auto& pts = d.boundary.points;
  if (pts.size() < 4) return t;

  t.boundary_below_singular_line =
      std::all_of(pts.begin(), pts.end(), [](const BoundaryPoint& p) { return p.H < 0.0; });

  t.boundary_mirror_symmetric = true;
  for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
    if (pts[i].p_phi != -pts[i + 1].p_phi || pts[i].H != pts[i + 1].H) t.boundary_mirror_symmetric = false;
  }

  t.boundary_monotone_arcs = true;
  for (std::size_t i = 2; i < pts.size(); i += 2) {
    if (!(pts[i].p_phi > pts[i - 2].p_phi && pts[i].H > pts[i - 2].H)) t.boundary_monotone_arcs = false;
  }

  const double endpoint = std::sqrt(d.k * (2.0 * d.p_rho + d.k));
  const double h_min = pts.front().H;
  const BoundaryPoint& last = pts[pts.size() - 2];
  t.boundary_meets_singular_line_at_ends =
      std::abs(last.H) < 1e-6 * std::max(1.0, std::abs(h_min)) && std::abs(last.p_phi - endpoint) < 1e-3 * endpoint;

  t.image_above_lower_boundary = std::all_of(d.image.begin(), d.image.end(), [&](const ImageSample& s) {
    return s.H >= lower_boundary_energy(s.p_phi, d.p_rho, d.k) - 1e-9 * (1.0 + std::abs(s.H));
  });

  t.singular_line_inside_image = true;
  for (double frac : {-0.5, 0.0, 0.5}) {
    const double probe = frac * endpoint;
    bool below = false, above = false;
    for (const auto& s : d.image) {
      if (std::abs(s.p_phi - probe) < 0.25) {
        below = below || s.H < 0.0;
        above = above || s.H > 0.0;
      }
    }
    if (!(below && above && lower_boundary_energy(probe, d.p_rho, d.k) < 0.0)) t.singular_line_inside_image = false;
  }
  return t;
}

}  // namespace adiabatic

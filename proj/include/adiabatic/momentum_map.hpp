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

// Energy-momentum map (theta, phi, p_theta, p_phi) -> (H, p_phi) of the
// energy-cost Hamiltonian at fixed p_rho, and its critical set.
//
// A point is critical when grad H and grad p_phi = (0, 1, 0, 0) are
// parallel, i.e. the 4x2 matrix [grad H | grad p_phi] drops rank. That
// happens on the equator circle theta = pi/2, p_theta = 0 (H = 0), and on
// the boundary family p_theta = -k sin cos,
// p_phi^2 = sin^3/cos (k p_rho sin 2th + k cos 2th p_theta).

#include <Eigen/Core>
#include <cstddef>
#include <vector>

namespace adiabatic {

/// Rows ordered (d/dp_theta, d/dp_phi, d/dtheta, d/dphi).
Eigen::Matrix<double, 4, 2> gradient_matrix(double theta, double p_theta, double p_phi, double p_rho, double k);

/// Smallest singular value of the matrix after scaling each column to unit
/// length (0 when a column vanishes).
double normalized_min_singular_value(const Eigen::Matrix<double, 4, 2>& m);

inline constexpr double kRankTolerance = 1e-10;

bool is_rank_deficient(const Eigen::Matrix<double, 4, 2>& m, double tol = kRankTolerance);

enum class PointClass { kRegular, kStirapSingular, kBoundary };

const char* to_string(PointClass c);

inline constexpr double kClassifyTolerance = 1e-9;

PointClass classify_point(double theta, double p_theta, double p_phi, double p_rho, double k);

struct BoundaryPoint {
  double theta = 0.0;
  double p_theta = 0.0;
  double p_phi = 0.0;
  double H = 0.0;
};

struct BoundaryCurve {
  std::vector<BoundaryPoint> points;  ///< both signs of p_phi, in grid order
  std::vector<double> skipped_thetas;  ///< negative radicand or chart pole
};

BoundaryCurve boundary_curve(double p_rho, double k, const std::vector<double>& theta_grid);

/// Evenly spaced interior grid of n points in (lo, hi).
std::vector<double> open_grid(double lo, double hi, std::size_t n);

/// Lowest H attained at a given p_phi: the boundary value when |p_phi| is
/// below the endpoint sqrt(k (2 p_rho + k)), 0 (the equator) otherwise.
double lower_boundary_energy(double p_phi, double p_rho, double k);

struct SamplingBox {
  double theta_lo = 0.1, theta_hi = 3.14159265358979323846 - 0.1;
  double p_theta_lo = -10.0, p_theta_hi = 10.0;
  double p_phi_lo = -10.0, p_phi_hi = 10.0;
};

struct ImageSample {
  double theta = 0.0;
  double p_theta = 0.0;
  double p_phi = 0.0;
  double H = 0.0;
};

/// Deterministic low-discrepancy sweep of the box; sample 0 is its centre.
std::vector<ImageSample> sample_image(double p_rho, double k, std::size_t budget, const SamplingBox& box = {});

struct MomentumMapDiagram {
  double p_rho = 0.0;
  double k = 0.0;
  std::vector<ImageSample> image;
  BoundaryCurve boundary;
  double singular_p_phi_lo = 0.0;  ///< singular line H = 0 over the sampled p_phi range
  double singular_p_phi_hi = 0.0;
};

MomentumMapDiagram build_diagram(double p_rho, double k, std::size_t budget, std::size_t boundary_points,
                                 const SamplingBox& box = {});

/// Qualitative shape of a diagram, comparable across p_rho.
struct DiagramTopology {
  bool boundary_below_singular_line = false;  ///< every boundary H < 0
  bool boundary_mirror_symmetric = false;
  bool boundary_monotone_arcs = false;  ///< |p_phi| and H increase with theta on each branch
  bool boundary_meets_singular_line_at_ends = false;
  bool image_above_lower_boundary = false;
  bool singular_line_inside_image = false;

  bool operator==(const DiagramTopology&) const = default;
};

DiagramTopology diagram_topology(const MomentumMapDiagram& d);

}  // namespace adiabatic

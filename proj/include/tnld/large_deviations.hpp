// Copyright 2026 The tnld authors
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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tnld/collision.hpp"
#include "tnld/mps.hpp"

namespace tnld {

struct SolverSettings {
  std::size_t d_max = 96;
  double cutoff = 1e-14;
  double tol = 1e-10;
  std::size_t max_iter = 2000;
  std::size_t d_max_ref = 0;  // 0 disables the error-bar rerun
};

struct ScgfPoint {
  double s = 0.0;
  double theta = 0.0;  // per site per step
  std::optional<double> activity;
  std::size_t d_max = 0;
  std::size_t iterations = 0;
  double final_step_residual = 0.0;
  double truncation_error_last_step = 0.0;
  std::optional<double> error_bar;  // |theta(d_max) - theta(d_max_ref)|
  bool converged = false;
};

struct PowerResult {
  ScgfPoint point;
  Mps fixed_point;  // trace-normalized
};

/// Power method on the tilted collision step: the eigenvalue estimate of
/// iteration t is the trace ratio across the step, theta_t = ln(ratio)/L.
/// Converged once the successive-theta difference stays below tol for three
/// iterations in a row.
PowerResult power_iterate_scgf(const ModelParams& p, double s, const SolverSettings& settings,
                               const Mps& rho_init);

/// Same iteration for the adjoint map; fixed_point approximates the left
/// eigenvector omega_s (trace-normalized; rescale against rho_s at use).
PowerResult power_iterate_adjoint(const ModelParams& p, double s, const SolverSettings& settings,
                                  const Mps& omega_init);

Mps left_fixed_point(const ModelParams& p, double s, const SolverSettings& settings);

/// a(s) from the derivative-channel matrix element between the converged
/// left/right eigenvectors; the <omega|rho> = 1 normalization is applied
/// internally.
double activity_hellmann_feynman(const ModelParams& p, double s, const Mps& rho_s,
                                 const Mps& omega_s, double theta,
                                 const SolverSettings& settings);

/// a(0) with the exact identity left eigenvector; only the right fixed point
/// is solved for.
double activity_at_zero(const ModelParams& p, const SolverSettings& settings);

struct ScgfCurve {
  ModelParams params;
  std::vector<ScgfPoint> points;  // strictly increasing in s
  std::optional<double> a0;
};

/// Centered three-point derivatives (exact for quadratics on non-uniform
/// grids), one-sided at the ends.
ScgfCurve activity_finite_difference(ScgfCurve curve);

struct RateFunctionCurve {
  std::vector<std::pair<double, double>> samples;  // (a, phi), parametric in s
  std::vector<double> grid_a;
  std::vector<std::optional<double>> grid_phi;  // absent when the sup runs off the grid
};

RateFunctionCurve rate_function_legendre(const ScgfCurve& curve);
/// sup over the curve's s-grid of [-s a - theta(s)]; absent when attained at
/// a grid boundary (divergent direction).
std::optional<double> legendre_sup(const ScgfCurve& curve, double a);

struct SStarEstimate {
  std::vector<std::pair<std::size_t, double>> per_l;  // (L, s_cross)
  std::optional<double> s_star;
  std::optional<double> uncertainty;  // standard error of the 1/L intercept
  std::vector<std::string> diagnostics;
};

/// Crossing of the flat branch of theta(s) with the perturbative bound
/// -a0 s per system size, extrapolated linearly in 1/L.
SStarEstimate estimate_s_star(const std::vector<ScgfCurve>& curves);

struct ScanSpec {
  std::vector<double> v_over_omega;
  std::vector<double> s_grid;
  std::vector<std::size_t> l_values;
  SolverSettings solver;
  std::size_t jobs = 1;
};

struct PhaseDiagram {
  std::vector<double> v_over_omega;
  std::vector<std::size_t> l_values;
  std::vector<ScgfCurve> curves;  // indexed v * l_values.size() + l
  std::vector<SStarEstimate> estimates;  // per v
  std::vector<std::string> failures;

  const ScgfCurve& curve(std::size_t vi, std::size_t li) const {
    return curves[vi * l_values.size() + li];
  }
};

/// Runs the tilted power method over the (V, L, s) grid with warm starts
/// along each s-chain (ascending |s| from zero, per sign), fills activities,
/// and estimates s* per interaction strength.
PhaseDiagram scan_phase_diagram(const ModelParams& base, const ScanSpec& spec);

/// One scan leg: a full curve (points sorted in s, activities filled, a0 set,
/// error bars when solver.d_max_ref > 0).
ScgfCurve scan_scgf_curve(const ModelParams& p, const std::vector<double>& s_grid,
                          const SolverSettings& settings, std::vector<std::string>* failures = nullptr);

}  // namespace tnld

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

#include "tnld/large_deviations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "parallel_for.hpp"

namespace tnld {

namespace {

cplx raw_trace(const Mps& state) {
  Mps flat = state;
  flat.log_norm = 0.0;
  return trace_vectorized(flat);
}

template <typename StepFn>
PowerResult run_power_iteration(const ModelParams& p, double s, const SolverSettings& settings,
                                const Mps& init, StepFn&& one_step) {
  if (!(settings.tol > 0.0)) throw std::invalid_argument("power method: tol must be > 0");
  if (settings.max_iter < 1) throw std::invalid_argument("power method: max_iter must be >= 1");
  if (!(std::abs(raw_trace(init)) > 0.0)) {
    throw std::invalid_argument("power method: initial state has zero trace");
  }

  Mps state = normalize_trace(init);
  const double inv_l = 1.0 / static_cast<double>(p.n_sites);

  ScgfPoint point;
  point.s = s;
  point.d_max = settings.d_max;

  double theta_prev = std::numeric_limits<double>::quiet_NaN();
  std::size_t streak = 0;
  for (std::size_t t = 1; t <= settings.max_iter; ++t) {
    StepResult r = one_step(state);
    const double theta = r.step_log_weight * inv_l;
    state = normalize_trace(std::move(r.state));
    point.iterations = t;
    point.truncation_error_last_step = r.truncation_error;
    if (t > 1) {
      point.final_step_residual = std::abs(theta - theta_prev);
      streak = point.final_step_residual < settings.tol ? streak + 1 : 0;
    }
    theta_prev = theta;
    point.theta = theta;
    if (streak >= 3) break;
  }
  point.converged = streak >= 3;
  return {point, std::move(state)};
}

}  // namespace

PowerResult power_iterate_scgf(const ModelParams& p, double s, const SolverSettings& settings,
                               const Mps& rho_init) {
  const CollisionStep step(p);
  return run_power_iteration(p, s, settings, rho_init, [&](const Mps& state) {
    return step.apply(state, AncillaClosure::tilt(s), settings.d_max, settings.cutoff);
  });
}

PowerResult power_iterate_adjoint(const ModelParams& p, double s, const SolverSettings& settings,
                                  const Mps& omega_init) {
  const CollisionStep step(p);
  return run_power_iteration(p, s, settings, omega_init, [&](const Mps& state) {
    return step.apply_adjoint(state, s, settings.d_max, settings.cutoff);
  });
}

Mps left_fixed_point(const ModelParams& p, double s, const SolverSettings& settings) {
  return power_iterate_adjoint(p, s, settings, identity_mps(p.n_sites)).fixed_point;
}

double activity_hellmann_feynman(const ModelParams& p, double s, const Mps& rho_s,
                                 const Mps& omega_s, double theta,
                                 const SolverSettings& settings) {
  const CollisionStep step(p);
  const StepResult deriv =
      step.apply(rho_s, AncillaClosure::tilt_derivative(s), settings.d_max, settings.cutoff);
  const cplx den = inner(omega_s, rho_s);
  if (std::abs(den) < 1e-12) {
    throw std::runtime_error("activity_hellmann_feynman: <omega|rho> is degenerate");
  }
  const cplx num = inner(omega_s, deriv.state);
  const double lambda = std::exp(static_cast<double>(p.n_sites) * theta);
  const cplx a = -(num / den) / (static_cast<double>(p.n_sites) * lambda);
  if (std::abs(a.imag()) > 1e-8) {
    throw std::runtime_error("activity_hellmann_feynman: activity has an imaginary part");
  }
  return a.real();
}

double activity_at_zero(const ModelParams& p, const SolverSettings& settings) {
  // At s = 0 the left eigenvector is the identity exactly, so only the right
  // fixed point is iterated and Lambda(0) = 1.
  const PowerResult rho = power_iterate_scgf(p, 0.0, settings, maximally_mixed_mps(p.n_sites));
  return activity_hellmann_feynman(p, 0.0, rho.fixed_point, identity_mps(p.n_sites), 0.0,
                                   settings);
}

ScgfCurve activity_finite_difference(ScgfCurve curve) {
  auto& pts = curve.points;
  if (pts.size() < 3) {
    throw std::invalid_argument("activity_finite_difference: need at least 3 points");
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(pts[i + 1].s > pts[i].s)) {
      throw std::invalid_argument("activity_finite_difference: duplicate or unsorted s values");
    }
  }
  const std::size_t n = pts.size();
  std::vector<double> deriv(n);
  deriv[0] = (pts[1].theta - pts[0].theta) / (pts[1].s - pts[0].s);
  deriv[n - 1] = (pts[n - 1].theta - pts[n - 2].theta) / (pts[n - 1].s - pts[n - 2].s);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = pts[i].s - pts[i - 1].s;
    const double hr = pts[i + 1].s - pts[i].s;
    deriv[i] = -hr / (hl * (hl + hr)) * pts[i - 1].theta +
               (hr - hl) / (hl * hr) * pts[i].theta +
               hl / (hr * (hl + hr)) * pts[i + 1].theta;
  }
  for (std::size_t i = 0; i < n; ++i) pts[i].activity = -deriv[i];
  return curve;
}

std::optional<double> legendre_sup(const ScgfCurve& curve, double a) {
  if (curve.points.empty()) throw std::invalid_argument("legendre_sup: empty curve");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& pt : curve.points) best = std::max(best, -pt.s * a - pt.theta);
  // The transform diverges in a direction the grid cannot certify: only
  // report values whose sup is attained away from the grid boundary.
  bool interior = false;
  for (std::size_t i = 1; i + 1 < curve.points.size(); ++i) {
    if (-curve.points[i].s * a - curve.points[i].theta == best) {
      interior = true;
      break;
    }
  }
  if (!interior) return std::nullopt;
  return best;
}

RateFunctionCurve rate_function_legendre(const ScgfCurve& curve) {
  if (curve.points.empty()) throw std::invalid_argument("rate_function_legendre: empty curve");
  RateFunctionCurve out;
  for (const auto& pt : curve.points) {
    if (!pt.activity) {
      throw std::invalid_argument("rate_function_legendre: activities not filled");
    }
    out.samples.emplace_back(*pt.activity, -pt.s * *pt.activity - pt.theta);
  }
  const std::size_t n_grid = 101;
  for (std::size_t j = 0; j < n_grid; ++j) {
    const double a = static_cast<double>(j) / static_cast<double>(n_grid - 1);
    out.grid_a.push_back(a);
    out.grid_phi.push_back(legendre_sup(curve, a));
  }
  return out;
}

SStarEstimate estimate_s_star(const std::vector<ScgfCurve>& curves) {
  SStarEstimate out;
  for (const auto& curve : curves) {
    const std::size_t l = curve.params.n_sites;
    if (!curve.a0) {
      out.diagnostics.push_back("L=" + std::to_string(l) + ": a0 missing, skipped");
      continue;
    }
    const double a0 = *curve.a0;
    // Points on the flat branch strictly above the perturbative bound -a0 s.
    struct Candidate {
      double s, theta, gap;
    };
    std::vector<Candidate> cands;
    for (const auto& pt : curve.points) {
      if (pt.s > 0.0 && pt.theta > -a0 * pt.s) {
        cands.push_back({pt.s, pt.theta, pt.theta + a0 * pt.s});
      }
    }
    if (cands.size() < 2) {
      out.diagnostics.push_back("L=" + std::to_string(l) +
                                ": fewer than two points above the bound, skipped");
      continue;
    }
    std::sort(cands.begin(), cands.end(),
              [](const Candidate& a, const Candidate& b) { return a.gap < b.gap; });
    Candidate p1 = cands[0], p2 = cands[1];
    if (p2.s < p1.s) std::swap(p1, p2);
    const double slope = (p2.theta - p1.theta) / (p2.s - p1.s);
    const double intercept = p1.theta - slope * p1.s;
    const double denom = slope + a0;
    if (std::abs(denom) < 1e-30) {
      out.diagnostics.push_back("L=" + std::to_string(l) +
                                ": flat-branch fit parallel to the bound, skipped");
      continue;
    }
    out.per_l.emplace_back(l, -intercept / denom);
  }
  std::sort(out.per_l.begin(), out.per_l.end());

  if (out.per_l.size() < 2) {
    out.diagnostics.push_back("fewer than two system sizes: extrapolation unavailable");
    return out;
  }
  const std::size_t n = out.per_l.size();
  double sx = 0, sy = 0;
  for (const auto& [l, y] : out.per_l) {
    sx += 1.0 / static_cast<double>(l);
    sy += y;
  }
  const double xbar = sx / n, ybar = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [l, y] : out.per_l) {
    const double dx = 1.0 / static_cast<double>(l) - xbar;
    sxx += dx * dx;
    sxy += dx * (y - ybar);
  }
  if (!(sxx > 0.0)) {
    out.diagnostics.push_back("degenerate 1/L values: extrapolation unavailable");
    return out;
  }
  const double beta = sxy / sxx;
  const double alpha = ybar - beta * xbar;
  double ssr = 0;
  for (const auto& [l, y] : out.per_l) {
    const double r = y - (alpha + beta / static_cast<double>(l));
    ssr += r * r;
  }
  const double sigma2 = n > 2 ? ssr / static_cast<double>(n - 2) : 0.0;
  out.s_star = alpha;
  out.uncertainty = std::sqrt(sigma2 * (1.0 / n + xbar * xbar / sxx));
  return out;
}

ScgfCurve scan_scgf_curve(const ModelParams& p, const std::vector<double>& s_grid,
                          const SolverSettings& settings, std::vector<std::string>* failures) {
  auto note = [&](const std::string& msg) {
    if (failures) failures->push_back(msg);
  };

  std::vector<double> grid = s_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  // Warm-started chains, ascending |s| from zero for each sign.
  std::vector<double> nonneg, negative;
  for (double s : grid) (s >= 0.0 ? nonneg : negative).push_back(s);
  std::sort(negative.rbegin(), negative.rend());

  struct Solved {
    double s;
    ScgfPoint point;
  };
  std::vector<Solved> solved;
  auto run_chain = [&](const std::vector<double>& chain, const SolverSettings& st,
                       std::vector<Solved>& into) {
    Mps state = maximally_mixed_mps(p.n_sites);
    for (double s : chain) {
      try {
        PowerResult r = power_iterate_scgf(p, s, st, state);
        into.push_back({s, r.point});
        state = std::move(r.fixed_point);
      } catch (const std::exception& e) {
        note("L=" + std::to_string(p.n_sites) + " s=" + std::to_string(s) + ": " + e.what());
        state = maximally_mixed_mps(p.n_sites);
      }
    }
  };
  run_chain(nonneg, settings, solved);
  run_chain(negative, settings, solved);

  if (settings.d_max_ref > 0) {
    SolverSettings ref = settings;
    ref.d_max = settings.d_max_ref;
    ref.d_max_ref = 0;
    std::vector<Solved> ref_solved;
    run_chain(nonneg, ref, ref_solved);
    run_chain(negative, ref, ref_solved);
    for (auto& sv : solved) {
      for (const auto& rv : ref_solved) {
        if (rv.s == sv.s) {
          sv.point.error_bar = std::abs(sv.point.theta - rv.point.theta);
          break;
        }
      }
    }
  }

  ScgfCurve curve;
  curve.params = p;
  std::sort(solved.begin(), solved.end(),
            [](const Solved& a, const Solved& b) { return a.s < b.s; });
  for (auto& sv : solved) curve.points.push_back(sv.point);

  try {
    curve.a0 = activity_at_zero(p, settings);
  } catch (const std::exception& e) {
    note("L=" + std::to_string(p.n_sites) + " a0: " + e.what());
  }

  if (curve.points.size() >= 3) {
    curve = activity_finite_difference(std::move(curve));
  }
  if (curve.a0) {
    for (auto& pt : curve.points) {
      if (pt.s == 0.0) pt.activity = *curve.a0;
    }
  }
  return curve;
}

PhaseDiagram scan_phase_diagram(const ModelParams& base, const ScanSpec& spec) {
  if (spec.v_over_omega.empty() || spec.s_grid.empty() || spec.l_values.empty()) {
    throw std::invalid_argument("scan_phase_diagram: grids must be non-empty");
  }
  PhaseDiagram out;
  out.v_over_omega = spec.v_over_omega;
  out.l_values = spec.l_values;
  const std::size_t nv = spec.v_over_omega.size();
  const std::size_t nl = spec.l_values.size();
  out.curves.resize(nv * nl);

  std::mutex failure_mutex;
  detail::parallel_for(spec.jobs, nv * nl, [&](std::size_t idx) {
    const std::size_t vi = idx / nl, li = idx % nl;
    ModelParams p = base;
    p.v = spec.v_over_omega[vi] * base.omega;
    p.n_sites = spec.l_values[li];
    std::vector<std::string> local;
    out.curves[idx] = scan_scgf_curve(p, spec.s_grid, spec.solver, &local);
    if (!local.empty()) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      for (auto& m : local) out.failures.push_back(m);
    }
  });
  std::sort(out.failures.begin(), out.failures.end());

  for (std::size_t vi = 0; vi < nv; ++vi) {
    std::vector<ScgfCurve> per_v;
    for (std::size_t li = 0; li < nl; ++li) per_v.push_back(out.curve(vi, li));
    out.estimates.push_back(estimate_s_star(per_v));
  }
  return out;
}

}  // namespace tnld

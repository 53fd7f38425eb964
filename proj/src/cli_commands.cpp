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

#include "tnld/cli_commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

#include <Eigen/Dense>
#include <json.hpp>

#include "parallel_for.hpp"
#include "tnld/exact_oracle.hpp"
#include "tnld/trajectories.hpp"
#include "tnld/version.hpp"

namespace tnld {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string gshort(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string hex16(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::ofstream open_output(const fs::path& path, std::uint64_t hash) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "# tnld " << kVersion << "\n# config_hash=" << hex16(hash) << "\n";
  return os;
}

fs::path prepare_out_dir(const RunConfig& cfg) {
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir;
}

json params_to_json(const ModelParams& p) {
  return json{{"L", p.n_sites},   {"omega", p.omega},
              {"v", p.v},         {"gamma", p.gamma},
              {"dt", p.dt},       {"n_trotter", p.n_trotter}};
}

ModelParams params_from_json(const json& j) {
  ModelParams p;
  p.n_sites = j.at("L").get<std::size_t>();
  p.omega = j.at("omega").get<double>();
  p.v = j.at("v").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.dt = j.at("dt").get<double>();
  p.n_trotter = j.at("n_trotter").get<std::size_t>();
  return p;
}

void write_scgf_csv(const fs::path& path, const ScgfCurve& curve, std::uint64_t hash) {
  std::ofstream os = open_output(path, hash);
  os << "s,theta,activity,d_max,iterations,trunc_err,error_bar\n";
  for (const auto& pt : curve.points) {
    os << g12(pt.s) << ',' << g12(pt.theta) << ','
       << (pt.activity ? g12(*pt.activity) : std::string()) << ',' << pt.d_max << ','
       << pt.iterations << ',' << g12(pt.truncation_error_last_step) << ','
       << (pt.error_bar ? g12(*pt.error_bar) : std::string()) << '\n';
  }
}

void write_rate_csv(const fs::path& path, const RateFunctionCurve& rate, std::uint64_t hash) {
  std::ofstream os = open_output(path, hash);
  os << "a,phi\n";
  for (const auto& [a, phi] : rate.samples) os << g12(a) << ',' << g12(phi) << '\n';
}

std::vector<double> default_v_grid(const RunConfig& cfg) {
  if (!cfg.v_over_omega.empty()) return cfg.v_over_omega;
  return {cfg.model.v / cfg.model.omega};
}

std::vector<std::size_t> default_l_grid(const RunConfig& cfg) {
  if (!cfg.l_values.empty()) return cfg.l_values;
  return {cfg.model.n_sites};
}

ScgfCurve synthetic_curve(const RunConfig& cfg, std::size_t l) {
  ScgfCurve curve;
  curve.params = cfg.model;
  curve.params.n_sites = l;
  curve.a0 = cfg.synthetic_a0;
  std::vector<double> grid = cfg.s_grid;
  std::sort(grid.begin(), grid.end());
  for (double s : grid) {
    ScgfPoint pt;
    pt.s = s;
    pt.theta = std::max(-cfg.synthetic_a0 * s, -cfg.synthetic_c) +
               cfg.synthetic_d / static_cast<double>(l) * s;
    pt.converged = true;
    pt.iterations = 1;
    curve.points.push_back(pt);
  }
  return curve;
}

std::string timestamp_utc() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int cmd_scgf_scan(const RunConfig& cfg, std::ostream& log) {
  if (cfg.s_grid.empty()) throw ConfigError("scgf-scan: grids.s must be non-empty");
  const auto v_grid = default_v_grid(cfg);
  const auto l_grid = default_l_grid(cfg);
  const fs::path dir = prepare_out_dir(cfg);
  const std::uint64_t hash = cfg.hash();

  const std::size_t n_tasks = v_grid.size() * l_grid.size();
  std::vector<ScgfCurve> curves(n_tasks);
  std::vector<std::vector<std::string>> failures(n_tasks);
  detail::parallel_for(cfg.jobs, n_tasks, [&](std::size_t idx) {
    const std::size_t vi = idx / l_grid.size(), li = idx % l_grid.size();
    ModelParams p = cfg.model;
    p.n_sites = l_grid[li];
    p.v = v_grid[vi] * cfg.model.omega;
    curves[idx] = scan_scgf_curve(p, cfg.s_grid, cfg.solver, &failures[idx]);
  });

  for (std::size_t idx = 0; idx < n_tasks; ++idx) {
    const std::size_t vi = idx / l_grid.size(), li = idx % l_grid.size();
    const std::string tag = "L" + std::to_string(l_grid[li]) + "_V" + gshort(v_grid[vi]);
    write_scgf_csv(dir / ("scgf_" + tag + ".csv"), curves[idx], hash);
    const bool has_activities =
        !curves[idx].points.empty() &&
        std::all_of(curves[idx].points.begin(), curves[idx].points.end(),
                    [](const ScgfPoint& pt) { return pt.activity.has_value(); });
    if (has_activities) {
      write_rate_csv(dir / ("rate_" + tag + ".csv"), rate_function_legendre(curves[idx]), hash);
    } else {
      log << "scgf-scan: skipping rate function for " << tag << " (activities not available)\n";
    }
    for (const auto& f : failures[idx]) log << "scgf-scan: " << f << "\n";
  }
  return kExitOk;
}

int cmd_phase_diagram(const RunConfig& cfg, std::ostream& log) {
  if (cfg.s_grid.empty()) throw ConfigError("phase-diagram: grids.s must be non-empty");
  const auto v_grid = default_v_grid(cfg);
  const auto l_grid = default_l_grid(cfg);
  const fs::path dir = prepare_out_dir(cfg);
  const std::uint64_t hash = cfg.hash();

  PhaseDiagram diagram;
  if (cfg.synthetic_enabled) {
    diagram.v_over_omega = v_grid;
    diagram.l_values = l_grid;
    for (std::size_t vi = 0; vi < v_grid.size(); ++vi) {
      std::vector<ScgfCurve> per_v;
      for (std::size_t li = 0; li < l_grid.size(); ++li) {
        ScgfCurve c = synthetic_curve(cfg, l_grid[li]);
        if (c.points.size() >= 3) c = activity_finite_difference(std::move(c));
        diagram.curves.push_back(c);
        per_v.push_back(std::move(c));
      }
      diagram.estimates.push_back(estimate_s_star(per_v));
    }
  } else {
    ScanSpec spec;
    spec.v_over_omega = v_grid;
    spec.s_grid = cfg.s_grid;
    spec.l_values = l_grid;
    spec.solver = cfg.solver;
    spec.jobs = cfg.jobs;
    diagram = scan_phase_diagram(cfg.model, spec);
  }

  for (std::size_t li = 0; li < l_grid.size(); ++li) {
    std::ofstream os =
        open_output(dir / ("activity_L" + std::to_string(l_grid[li]) + ".csv"), hash);
    os << "v_over_omega,s,theta,activity,error_bar\n";
    for (std::size_t vi = 0; vi < v_grid.size(); ++vi) {
      for (const auto& pt : diagram.curve(vi, li).points) {
        os << g12(v_grid[vi]) << ',' << g12(pt.s) << ',' << g12(pt.theta) << ','
           << (pt.activity ? g12(*pt.activity) : std::string()) << ','
           << (pt.error_bar ? g12(*pt.error_bar) : std::string()) << '\n';
      }
    }
  }

  json out;
  out["version"] = kVersion;
  out["config_hash"] = hex16(hash);
  out["estimates"] = json::array();
  for (std::size_t vi = 0; vi < v_grid.size(); ++vi) {
    const SStarEstimate& est = diagram.estimates[vi];
    json e;
    e["v_over_omega"] = v_grid[vi];
    e["per_L"] = json::array();
    for (const auto& [l, s_cross] : est.per_l) {
      e["per_L"].push_back(json{{"L", l}, {"s_cross", s_cross}});
    }
    e["s_star"] = est.s_star ? json(*est.s_star) : json(nullptr);
    e["uncertainty"] = est.uncertainty ? json(*est.uncertainty) : json(nullptr);
    e["diagnostics"] = est.diagnostics;
    out["estimates"].push_back(std::move(e));
  }
  std::ofstream js(dir / "s_star.json");
  js << out.dump(2) << "\n";

  for (const auto& f : diagram.failures) log << "phase-diagram: " << f << "\n";
  return kExitOk;
}

int cmd_sample(const RunConfig& cfg, std::ostream& log) {
  if (cfg.sampling_steps < 1) throw ConfigError("sample: sampling.T must be >= 1");
  if (cfg.n_samples < 1) throw ConfigError("sample: sampling.n_samples must be >= 1");
  const fs::path dir = prepare_out_dir(cfg);
  const std::uint64_t hash = cfg.hash();

  const SampleEnsemble ens = sample_ensemble(cfg.model, cfg.sampling_steps, cfg.n_samples,
                                             cfg.seed, cfg.solver.d_max, cfg.solver.cutoff,
                                             cfg.jobs);

  json manifest;
  manifest["version"] = kVersion;
  manifest["config_hash"] = hex16(hash);
  manifest["params"] = params_to_json(cfg.model);
  manifest["seed"] = cfg.seed;
  manifest["T"] = cfg.sampling_steps;
  manifest["n_samples"] = cfg.n_samples;
  manifest["created_utc"] = timestamp_utc();
  manifest["records"] = json::array();
  for (std::size_t i = 0; i < ens.records.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "traj_%05zu.txt", i);
    std::ofstream os(dir / name);
    write_trajectory_file(os, ens.records[i]);
    manifest["records"].push_back(json{{"file", name},
                                       {"seed", ens.records[i].seed},
                                       {"log_prob", ens.records[i].log_prob},
                                       {"activity", ens.records[i].activity}});
  }
  {
    std::ofstream os(dir / "manifest.json");
    os << manifest.dump(2) << "\n";
  }

  // Summary: mean activity, histogram, string correlators.
  const std::size_t max_len =
      cfg.correlator_max_len ? std::min(cfg.correlator_max_len, cfg.sampling_steps)
                             : std::min<std::size_t>(cfg.sampling_steps, 30);
  double mean_a = 0.0;
  for (const auto& r : ens.records) mean_a += r.activity;
  mean_a /= static_cast<double>(ens.records.size());
  double var_a = 0.0;
  for (const auto& r : ens.records) var_a += (r.activity - mean_a) * (r.activity - mean_a);
  const double stderr_a =
      ens.records.size() > 1
          ? std::sqrt(var_a / (static_cast<double>(ens.records.size() - 1) *
                               static_cast<double>(ens.records.size())))
          : 0.0;

  const ActivityHistogram hist = activity_histogram(ens, cfg.histogram_bins);

  json summary;
  summary["version"] = kVersion;
  summary["config_hash"] = hex16(hash);
  summary["mean_activity"] = mean_a;
  summary["stderr_activity"] = stderr_a;
  summary["histogram"] = json{{"centers", hist.centers}, {"density", hist.density}};
  summary["correlator"] = json::object();
  summary["correlator"]["central"] = string_correlator_central(ens, max_len);
  for (std::size_t site : cfg.correlator_sites) {
    summary["correlator"]["site_" + std::to_string(site)] =
        string_correlator(ens, site, max_len);
  }
  {
    std::ofstream os(dir / "summary.json");
    os << summary.dump(2) << "\n";
  }

  std::ofstream corr = open_output(dir / "correlator.csv", hash);
  corr << "ell,c_central";
  for (std::size_t site : cfg.correlator_sites) corr << ",c_site_" << site;
  corr << "\n";
  const auto central = string_correlator_central(ens, max_len);
  std::vector<std::vector<double>> per_site;
  for (std::size_t site : cfg.correlator_sites) {
    per_site.push_back(string_correlator(ens, site, max_len));
  }
  for (std::size_t m = 0; m < max_len; ++m) {
    corr << (m + 1) << ',' << g12(central[m]);
    for (const auto& c : per_site) corr << ',' << g12(c[m]);
    corr << '\n';
  }

  log << "sample: " << ens.records.size() << " trajectories, mean activity " << g12(mean_a)
      << "\n";
  return kExitOk;
}

int cmd_correlator(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir(cfg.out_dir);
  std::ifstream ms(dir / "manifest.json");
  if (!ms) throw ConfigError("correlator: no manifest.json in '" + cfg.out_dir + "'");
  json manifest = json::parse(ms);

  SampleEnsemble ens;
  ens.params = params_from_json(manifest.at("params"));
  ens.seed = manifest.at("seed").get<std::uint64_t>();
  ens.n_steps = manifest.at("T").get<std::size_t>();
  for (const auto& rec : manifest.at("records")) {
    std::ifstream rs(dir / rec.at("file").get<std::string>());
    if (!rs) throw ConfigError("correlator: missing record file " +
                               rec.at("file").get<std::string>());
    ens.records.push_back(read_trajectory_file(rs));
  }

  const std::size_t max_len =
      cfg.correlator_max_len ? std::min(cfg.correlator_max_len, ens.n_steps)
                             : std::min<std::size_t>(ens.n_steps, 30);
  const std::uint64_t hash = manifest.at("config_hash").is_string()
                                 ? std::stoull(manifest.at("config_hash").get<std::string>(),
                                               nullptr, 16)
                                 : 0;

  std::ofstream corr = open_output(dir / "correlator.csv", hash);
  corr << "ell,c_central";
  for (std::size_t site : cfg.correlator_sites) corr << ",c_site_" << site;
  corr << "\n";
  const auto central = string_correlator_central(ens, max_len);
  std::vector<std::vector<double>> per_site;
  for (std::size_t site : cfg.correlator_sites) {
    per_site.push_back(string_correlator(ens, site, max_len));
  }
  for (std::size_t m = 0; m < max_len; ++m) {
    corr << (m + 1) << ',' << g12(central[m]);
    for (const auto& c : per_site) corr << ',' << g12(c[m]);
    corr << '\n';
  }
  log << "correlator: " << ens.records.size() << " records, lengths 1.." << max_len << "\n";
  return kExitOk;
}

namespace {

double operator_norm(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

struct CheckOutcome {
  std::string name;
  double deviation;
  double tolerance;
  bool pass;
};

}  // namespace

int cmd_validate(const RunConfig& cfg, std::ostream& log, bool inject_convention_bug) {
  std::vector<std::size_t> l_grid = cfg.l_values.empty()
                                        ? std::vector<std::size_t>{2, 3}
                                        : cfg.l_values;
  for (std::size_t l : l_grid) {
    if (l > 3) throw ConfigError("validate: grids.L entries must be <= 3");
  }
  std::vector<double> s_grid = cfg.s_grid.empty()
                                   ? std::vector<double>{-0.05, -0.01, 0.0, 0.01, 0.05, 0.2}
                                   : cfg.s_grid;

  auto lossless = [&](std::size_t l) {
    SolverSettings st = cfg.solver;
    st.d_max = std::max<std::size_t>(st.d_max, 1ull << (2 * l));
    st.cutoff = 0.0;
    st.tol = std::min(st.tol, 1e-11);
    st.max_iter = std::max<std::size_t>(st.max_iter, 3000);
    st.d_max_ref = 0;
    return st;
  };
  auto params_for = [&](std::size_t l) {
    ModelParams p = cfg.model;
    p.n_sites = l;
    return p;
  };

  std::vector<CheckOutcome> results;
  auto record = [&](const std::string& name, double dev, double tol) {
    results.push_back({name, dev, tol, dev <= tol});
  };
  auto guarded = [&](const std::string& name, double tol, const std::function<double()>& fn) {
    try {
      record(name, fn(), tol);
    } catch (const std::exception& e) {
      log << "CHECK " << name << ": exception: " << e.what() << "\n";
      results.push_back({name, std::nan(""), tol, false});
    }
  };

  guarded("kraus_completeness", 1e-10, [&]() {
    double worst = 0.0;
    for (std::size_t l : l_grid) {
      const ModelParams p = params_for(l);
      for (const auto& kraus : {exact_kraus_set(p), trotter_kraus_set(p)}) {
        Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(1 << l, 1 << l);
        for (const auto& k : kraus) sum += k.adjoint() * k;
        sum -= Eigen::MatrixXcd::Identity(1 << l, 1 << l);
        worst = std::max(worst, sum.cwiseAbs().maxCoeff());
      }
    }
    return worst;
  });

  guarded("trace_preservation", 1e-9, [&]() {
    double worst = 0.0;
    for (std::size_t l : l_grid) {
      const ModelParams p = params_for(l);
      StepDebugOptions debug;
      debug.skip_bra_conjugation = inject_convention_bug;
      const CollisionStep step(p, debug);
      const SolverSettings st = lossless(l);
      Mps state = maximally_mixed_mps(l);
      for (int iter = 0; iter < 3; ++iter) {
        StepResult r = step.apply(state, AncillaClosure::tilt(0.0), st.d_max, st.cutoff);
        worst = std::max(worst, std::abs(r.step_log_weight) / static_cast<double>(l));
        state = normalize_trace(std::move(r.state));
      }
    }
    return worst;
  });

  guarded("scgf_vs_dense", 1e-8, [&]() {
    double worst = 0.0;
    for (std::size_t l : l_grid) {
      const ModelParams p = params_for(l);
      const ScgfCurve curve = scan_scgf_curve(p, s_grid, lossless(l));
      for (const auto& pt : curve.points) {
        const auto super = dense_tilted_superoperator(p, pt.s, KrausSource::kTrotterized);
        const double theta_dense =
            std::log(dense_dominant_eig(super).lambda) / static_cast<double>(l);
        worst = std::max(worst, std::abs(pt.theta - theta_dense));
      }
    }
    return worst;
  });

  guarded("adjoint_eigenvalue", 1e-8, [&]() {
    const ModelParams p = params_for(l_grid.front());
    const SolverSettings st = lossless(p.n_sites);
    const double s = 0.05;
    const double theta = power_iterate_scgf(p, s, st, maximally_mixed_mps(p.n_sites)).point.theta;
    const double theta_adj =
        power_iterate_adjoint(p, s, st, identity_mps(p.n_sites)).point.theta;
    return std::abs(theta - theta_adj);
  });

  guarded("activity_hellmann_feynman_vs_fd", 1e-4, [&]() {
    const ModelParams p = params_for(l_grid.front());
    const SolverSettings st = lossless(p.n_sites);
    const double h = 1e-3;
    double worst = 0.0;
    for (double s : {0.0, 0.05}) {
      const PowerResult rho = power_iterate_scgf(p, s, st, maximally_mixed_mps(p.n_sites));
      const Mps omega = s == 0.0 ? identity_mps(p.n_sites) : left_fixed_point(p, s, st);
      const double a_hf = activity_hellmann_feynman(p, s, rho.fixed_point, omega,
                                                    s == 0.0 ? 0.0 : rho.point.theta, st);
      const double tp = power_iterate_scgf(p, s + h, st, rho.fixed_point).point.theta;
      const double tm = power_iterate_scgf(p, s - h, st, rho.fixed_point).point.theta;
      const double a_fd = -(tp - tm) / (2 * h);
      worst = std::max(worst, std::abs(a_hf - a_fd) / std::max(std::abs(a_fd), 1e-12));
    }
    return worst;
  });

  guarded("trotter_defect_halving", 0.3, [&]() {
    ModelParams p = params_for(std::min<std::size_t>(l_grid.front(), 2));
    p.n_sites = 2;
    const Eigen::MatrixXcd exact = exact_step_unitary(p);
    std::vector<double> defects;
    for (std::size_t n : {5u, 10u, 20u}) {
      ModelParams pn = p;
      pn.n_trotter = n;
      defects.push_back(operator_norm(trotter_step_unitary(pn) - exact));
    }
    const double r1 = defects[0] / defects[1];
    const double r2 = defects[1] / defects[2];
    return std::max(std::abs(r1 - 2.0), std::abs(r2 - 2.0));
  });

  guarded("tilt_vs_project_weights", 1e-10, [&]() {
    ModelParams p = params_for(2);
    p.n_sites = 2;
    const SolverSettings st = lossless(2);
    const CollisionStep step(p);
    const double s = 0.3;
    const Mps state = maximally_mixed_mps(2);
    const double w_tilt =
        std::exp(step.apply(state, AncillaClosure::tilt(s), st.d_max, st.cutoff).step_log_weight);
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
      const std::vector<int> bits{(k >> 1) & 1, k & 1};
      const double w = std::exp(
          step.apply(state, AncillaClosure::project(bits), st.d_max, st.cutoff).step_log_weight);
      sum += std::exp(-s * (bits[0] + bits[1])) * w;
    }
    return std::abs(w_tilt - sum) / w_tilt;
  });

  guarded("sampler_chain_rule", 1e-9, [&]() {
    ModelParams p = params_for(2);
    p.n_sites = 2;
    const SolverSettings st = lossless(2);
    const CollisionStep step(p);
    const Mps state = maximally_mixed_mps(2);
    const JointStepResult joint = step.apply_layers(state, st.d_max, st.cutoff);
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) {
      const std::vector<std::uint8_t> bits{static_cast<std::uint8_t>((k >> 1) & 1),
                                           static_cast<std::uint8_t>(k & 1)};
      const double p_chain = std::exp(sample_step_forced(joint.state, bits).log_weight);
      const std::vector<int> ibits{bits[0], bits[1]};
      const double p_proj = std::exp(
          step.apply(state, AncillaClosure::project(ibits), st.d_max, st.cutoff).step_log_weight);
      worst = std::max(worst, std::abs(p_chain - p_proj));
    }
    return worst;
  });

  bool all_pass = true;
  for (const auto& r : results) {
    log << "CHECK " << r.name << ": max deviation " << g12(r.deviation) << " (tol "
        << g12(r.tolerance) << ") -> " << (r.pass ? "PASS" : "FAIL") << "\n";
    all_pass = all_pass && r.pass;
  }
  log << (all_pass ? "validate: all checks passed\n" : "validate: FAILURES detected\n");
  return all_pass ? kExitOk : kExitValidationFailure;
}

}  // namespace tnld

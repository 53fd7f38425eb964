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

#include "tnld/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace tnld {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("config: bad number for " + key + ": '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("config: bad integer for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config: bad boolean for " + key + ": '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  for (char c : value) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!item.empty()) items.push_back(std::move(item)), item.clear();
    } else {
      item.push_back(c);
    }
  }
  if (!item.empty()) items.push_back(std::move(item));
  return items;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(parse_double(key, item));
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(value)) {
    out.push_back(static_cast<std::size_t>(parse_u64(key, item)));
  }
  return out;
}

template <typename T>
std::string join_list(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, double>) {
      out += fmt_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string RunConfig::canonical_text() const {
  std::ostringstream os;
  os << "grids.L = " << join_list(l_values) << "\n";
  os << "grids.s = " << join_list(s_grid) << "\n";
  os << "grids.v_over_omega = " << join_list(v_over_omega) << "\n";
  os << "model.L = " << model.n_sites << "\n";
  os << "model.dt = " << fmt_double(model.dt) << "\n";
  os << "model.gamma = " << fmt_double(model.gamma) << "\n";
  os << "model.n_trotter = " << model.n_trotter << "\n";
  os << "model.omega = " << fmt_double(model.omega) << "\n";
  os << "model.v = " << fmt_double(model.v) << "\n";
  os << "sampling.T = " << sampling_steps << "\n";
  os << "sampling.correlator_max_len = " << correlator_max_len << "\n";
  os << "sampling.correlator_sites = " << join_list(correlator_sites) << "\n";
  os << "sampling.histogram_bins = " << histogram_bins << "\n";
  os << "sampling.n_samples = " << n_samples << "\n";
  os << "sampling.seed = " << seed << "\n";
  os << "solver.cutoff = " << fmt_double(solver.cutoff) << "\n";
  os << "solver.d_max = " << solver.d_max << "\n";
  os << "solver.d_max_ref = " << solver.d_max_ref << "\n";
  os << "solver.max_iter = " << solver.max_iter << "\n";
  os << "solver.tol = " << fmt_double(solver.tol) << "\n";
  if (synthetic_enabled) {
    os << "synthetic.a0 = " << fmt_double(synthetic_a0) << "\n";
    os << "synthetic.c = " << fmt_double(synthetic_c) << "\n";
    os << "synthetic.d = " << fmt_double(synthetic_d) << "\n";
    os << "synthetic.enabled = true\n";
  }
  return os.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical_text()); }

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    const std::size_t eq = line.find('=');
    std::string key = line.substr(0, eq == std::string::npos ? line.size() : eq);
    auto trim = [](std::string s) {
      const char* ws = " \t\r\n";
      const auto b = s.find_first_not_of(ws);
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(ws);
      return s.substr(b, e - b + 1);
    };
    key = trim(key);
    if (key.empty()) continue;
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) throw ConfigError("config: empty value for " + key);

    if (key == "model.L") {
      cfg.model.n_sites = static_cast<std::size_t>(parse_u64(key, value));
    } else if (key == "model.omega") {
      cfg.model.omega = parse_double(key, value);
    } else if (key == "model.v") {
      cfg.model.v = parse_double(key, value);
    } else if (key == "model.gamma") {
      cfg.model.gamma = parse_double(key, value);
    } else if (key == "model.dt") {
      cfg.model.dt = parse_double(key, value);
    } else if (key == "model.n_trotter") {
      cfg.model.n_trotter = static_cast<std::size_t>(parse_u64(key, value));
    } else if (key == "solver.d_max") {
      cfg.solver.d_max = static_cast<std::size_t>(parse_u64(key, value));
    } else if (key == "solver.cutoff") {
      cfg.solver.cutoff = parse_double(key, value);
    } else if (key == "solver.tol") {
      cfg.solver.tol = parse_double(key, value);
    } else if (key == "solver.max_iter") {
      cfg.solver.max_iter = static_cast<std::size_t>(parse_u64(key, value));
    } else if (key == "solver.d_max_ref") {
      cfg.solver.d_max_ref = static_cast<std::size_t>(parse_u64(key, value));
    } else if (key == "grids.s") {
      cfg.s_grid = parse_double_list(key, value);
    } else if (key == "grids.v_over_omega") {
      cfg.v_over_omega = parse_double_list(key, value);
    } else if (key == "grids.L") {
      cfg.l_values = parse_size_list(key, value);
    } else if (key == "sampling.T") {
      cfg.sampling_steps = static_cast<std::size_t>(parse_u64(key, value));
    } else if (key == "sampling.n_samples") {
      cfg.n_samples = static_cast<std::size_t>(parse_u64(key, value));
    } else if (key == "sampling.seed") {
      cfg.seed = parse_u64(key, value);
    } else if (key == "sampling.correlator_sites") {
      cfg.correlator_sites = parse_size_list(key, value);
    } else if (key == "sampling.correlator_max_len") {
      cfg.correlator_max_len = static_cast<std::size_t>(parse_u64(key, value));
    } else if (key == "sampling.histogram_bins") {
      cfg.histogram_bins = static_cast<std::size_t>(parse_u64(key, value));
    } else if (key == "output.dir") {
      cfg.out_dir = value;
    } else if (key == "synthetic.enabled") {
      cfg.synthetic_enabled = parse_bool(key, value);
    } else if (key == "synthetic.a0") {
      cfg.synthetic_a0 = parse_double(key, value);
    } else if (key == "synthetic.c") {
      cfg.synthetic_c = parse_double(key, value);
    } else if (key == "synthetic.d") {
      cfg.synthetic_d = parse_double(key, value);
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }

  try {
    cfg.model.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (cfg.solver.d_max < 1) throw ConfigError("config: solver.d_max must be >= 1");
  if (cfg.solver.d_max_ref >= cfg.solver.d_max && cfg.solver.d_max_ref != 0) {
    throw ConfigError("config: solver.d_max_ref must be < solver.d_max (or 0 to disable)");
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace tnld

#pragma once

// Run configuration: JSON with per-study defaults, strict key checking and a
// full echo for reports.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "spde/integrator.hpp"
#include "spde/model.hpp"
#include "spde/polynomial.hpp"

namespace spde {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct ModelConfig {
  std::string preset = "main";  // linear | main | g_channel | polynomial
  double nu = 1.0;
  std::vector<double> f;  // polynomial coefficients c0 + c1 u + ... (preset "polynomial")
  std::vector<double> g;
  std::vector<double> h;
};

struct RunConfig {
  std::string study = "converge";
  ModelConfig model;
  std::string variant = "PHI_EPS";  // simulate only
  std::vector<double> eps_grid;
  int replicas = 20;
  std::uint64_t seed = 42;
  double mode_product = 8.0;  // N = ceil(mode_product / eps)
  int fixed_modes = 0;        // > 0 overrides the product rule
  double dt = 1e-3;
  bool auto_dt = false;
  double auto_dt_min = 1e-5;
  double final_time = 0.5;
  double record_interval = 0.01;
  int oversample = 2;
  double dealias = 2.0 / 3.0;
  double cutoff = 1e3;
  std::string correction = "truncation_matched";  // or "asymptotic"
  double beta = 0.6;  // Sobolev index of the theorem15 error norm
  double u0_decay = 1.5;
  double u0_amplitude = 1.0;
  double gamma = 0.75;
  double alpha = 0.75;
  double averaging_mode_factor = 4.0;  // N = ceil(factor / eps^2)
  std::vector<double> quantiles{0.5, 0.9};
  bool gaussian_v = false;
  std::string output_dir;
  std::string output_prefix;
};

inline std::vector<double> dyadic_grid(int from, int to) {
  std::vector<double> g;
  for (int j = from; j <= to; ++j) g.push_back(std::ldexp(1.0, -j));
  return g;
}

/// Defaults for each study.
inline RunConfig default_config(const std::string& study) {
  RunConfig c;
  c.study = study;
  c.eps_grid = dyadic_grid(2, 7);
  if (study == "converge") {
    c.eps_grid = dyadic_grid(3, 7);
  } else if (study == "theorem15") {
    c.eps_grid = dyadic_grid(4, 9);
    c.replicas = 10;
    c.final_time = 2.0;
    c.dt = 2e-3;
    c.record_interval = 0.04;
    c.u0_decay = 1.3;
  } else if (study == "psi-coupling") {
    c.replicas = 50;
    c.mode_product = 16.0;
    c.final_time = 1.0;
    c.record_interval = 1.0 / 32.0;
    c.model.preset = "linear";
  } else if (study == "averaging") {
    c.replicas = 200;
    c.model.preset = "linear";
  } else if (study == "simulate") {
    c.eps_grid = {0.125};
    c.replicas = 1;
  } else {
    throw ConfigError("unknown study '" + study + "'");
  }
  return c;
}

namespace detail {

template <typename T>
void read_key(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

inline void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("unknown config key '" + where + it.key() + "'");
}

}  // namespace detail

inline void apply_json(RunConfig& c, const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown(j,
                         {"study", "model", "variant", "eps_grid", "replicas", "seed", "mode_product", "fixed_modes",
                          "dt", "auto_dt", "auto_dt_min", "final_time", "record_interval", "oversample", "dealias",
                          "cutoff", "correction", "beta", "u0_decay", "u0_amplitude", "averaging", "output",
                          "schema_version"},
                         "");
  if (j.contains("study") && j.at("study").get<std::string>() != c.study)
    throw ConfigError("config is for study '" + j.at("study").get<std::string>() + "', not '" + c.study + "'");
  if (j.contains("model")) {
    const Json& m = j.at("model");
    if (!m.is_object()) throw ConfigError("config key 'model' must be an object");
    detail::reject_unknown(m, {"preset", "nu", "f", "g", "h"}, "model.");
    detail::read_key(m, "preset", c.model.preset);
    detail::read_key(m, "nu", c.model.nu);
    detail::read_key(m, "f", c.model.f);
    detail::read_key(m, "g", c.model.g);
    detail::read_key(m, "h", c.model.h);
  }
  detail::read_key(j, "variant", c.variant);
  detail::read_key(j, "eps_grid", c.eps_grid);
  detail::read_key(j, "replicas", c.replicas);
  detail::read_key(j, "seed", c.seed);
  detail::read_key(j, "mode_product", c.mode_product);
  detail::read_key(j, "fixed_modes", c.fixed_modes);
  detail::read_key(j, "dt", c.dt);
  detail::read_key(j, "auto_dt", c.auto_dt);
  detail::read_key(j, "auto_dt_min", c.auto_dt_min);
  detail::read_key(j, "final_time", c.final_time);
  detail::read_key(j, "record_interval", c.record_interval);
  detail::read_key(j, "oversample", c.oversample);
  detail::read_key(j, "dealias", c.dealias);
  detail::read_key(j, "cutoff", c.cutoff);
  detail::read_key(j, "correction", c.correction);
  detail::read_key(j, "beta", c.beta);
  detail::read_key(j, "u0_decay", c.u0_decay);
  detail::read_key(j, "u0_amplitude", c.u0_amplitude);
  if (j.contains("averaging")) {
    const Json& a = j.at("averaging");
    detail::reject_unknown(a, {"gamma", "alpha", "mode_factor", "quantiles", "gaussian_v"}, "averaging.");
    detail::read_key(a, "gamma", c.gamma);
    detail::read_key(a, "alpha", c.alpha);
    detail::read_key(a, "mode_factor", c.averaging_mode_factor);
    detail::read_key(a, "quantiles", c.quantiles);
    detail::read_key(a, "gaussian_v", c.gaussian_v);
  }
  if (j.contains("output")) {
    const Json& o = j.at("output");
    detail::reject_unknown(o, {"dir", "prefix"}, "output.");
    detail::read_key(o, "dir", c.output_dir);
    detail::read_key(o, "prefix", c.output_prefix);
  }
}

inline Json to_json(const RunConfig& c) {
  Json j;
  j["study"] = c.study;
  j["model"] = {{"preset", c.model.preset}, {"nu", c.model.nu}, {"f", c.model.f}, {"g", c.model.g}, {"h", c.model.h}};
  j["variant"] = c.variant;
  j["eps_grid"] = c.eps_grid;
  j["replicas"] = c.replicas;
  j["seed"] = c.seed;
  j["mode_product"] = c.mode_product;
  j["fixed_modes"] = c.fixed_modes;
  j["dt"] = c.dt;
  j["auto_dt"] = c.auto_dt;
  j["auto_dt_min"] = c.auto_dt_min;
  j["final_time"] = c.final_time;
  j["record_interval"] = c.record_interval;
  j["oversample"] = c.oversample;
  j["dealias"] = c.dealias;
  j["cutoff"] = c.cutoff;
  j["correction"] = c.correction;
  j["beta"] = c.beta;
  j["u0_decay"] = c.u0_decay;
  j["u0_amplitude"] = c.u0_amplitude;
  j["averaging"] = {{"gamma", c.gamma},
                    {"alpha", c.alpha},
                    {"mode_factor", c.averaging_mode_factor},
                    {"quantiles", c.quantiles},
                    {"gaussian_v", c.gaussian_v}};
  j["output"] = {{"dir", c.output_dir}, {"prefix", c.output_prefix}};
  return j;
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

inline void validate(const RunConfig& c) {
  if (c.eps_grid.empty()) throw ConfigError("eps_grid must not be empty");
  for (double e : c.eps_grid)
    if (!(e > 0.0 && e <= 1.0)) throw ConfigError("eps values must lie in (0, 1]");
  if (c.replicas < 1) throw ConfigError("replicas must be >= 1");
  if (!(c.mode_product > 0.0)) throw ConfigError("mode_product must be positive");
  if (c.fixed_modes < 0) throw ConfigError("fixed_modes must be >= 0");
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(c.auto_dt_min > 0.0)) throw ConfigError("auto_dt_min must be positive");
  if (!(c.final_time > 0.0)) throw ConfigError("final_time must be positive");
  if (!(c.record_interval > 0.0)) throw ConfigError("record_interval must be positive");
  if (c.correction != "truncation_matched" && c.correction != "asymptotic")
    throw ConfigError("correction must be 'truncation_matched' or 'asymptotic'");
  if (!(c.model.nu > 0.0)) throw ConfigError("model.nu must be positive");
  for (double q : c.quantiles)
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantiles must lie in [0, 1]");
}

inline int modes_for(const RunConfig& c, double eps) {
  if (c.fixed_modes > 0) return c.fixed_modes;
  return static_cast<int>(std::ceil(c.mode_product / eps - 1e-9));
}

/// Scalar model from a preset or polynomial coefficients.
inline ModelSpec build_model(const ModelConfig& m) {
  ModelSpec s;
  s.n = 1;
  s.nu = m.nu;
  auto poly_map = [](const std::vector<double>& coeffs) -> PointMap {
    if (coeffs.empty()) return {};
    const Polynomial p = Polynomial::univariate(coeffs);
    return [p](std::span<const double> u, std::span<double> out) { out[0] = p(u); };
  };
  if (m.preset == "linear") {
  } else if (m.preset == "main") {
    s.f = [](std::span<const double> u, std::span<double> out) { out[0] = -u[0]; };
    s.h = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
  } else if (m.preset == "g_channel") {
    s.g = [](std::span<const double> u, std::span<double> out) { out[0] = std::sin(u[0]); };
    s.dg = [](std::span<const double> u, std::span<double> out) { out[0] = std::cos(u[0]); };
  } else if (m.preset == "polynomial") {
    s.f = poly_map(m.f);
    s.h = poly_map(m.h);
    if (!m.g.empty()) {
      s.g = poly_map(m.g);
      s.dg = poly_map([&] {
        std::vector<double> d;
        for (std::size_t i = 1; i < m.g.size(); ++i) d.push_back(m.g[i] * static_cast<double>(i));
        if (d.empty()) d.push_back(0.0);
        return d;
      }());
    }
  } else {
    throw ConfigError("unknown model preset '" + m.preset + "'");
  }
  if (m.preset != "polynomial" && (!m.f.empty() || !m.g.empty() || !m.h.empty()))
    throw ConfigError("model coefficients f/g/h are only used with preset 'polynomial'");
  s.validate();
  return s;
}

inline SimulationConfig simulation_config(const RunConfig& c, double eps, double dt) {
  SimulationConfig s;
  s.max_mode = modes_for(c, eps);
  s.dt = dt;
  s.final_time = c.final_time;
  s.record_stride = std::max(1, static_cast<int>(std::lround(c.record_interval / dt)));
  s.oversample = c.oversample;
  s.dealias = c.dealias;
  s.cutoff = c.cutoff;
  s.correction_mode = c.correction == "asymptotic" ? CorrectionMode::kAsymptotic : CorrectionMode::kTruncationMatched;
  s.validate();
  return s;
}

}  // namespace spde

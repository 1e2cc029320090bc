#pragma once

// spde_lab command line. Exit codes: 0 success, 1 usage or configuration
// error, 2 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "spde/config.hpp"
#include "spde/constants.hpp"
#include "spde/report.hpp"
#include "spde/studies.hpp"

namespace spde {

namespace detail {

struct StudyFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
  std::vector<double> eps;
  std::optional<double> dt;
  bool auto_dt = false;
  std::optional<double> final_time;
  std::optional<int> fixed_modes;
  std::optional<double> mode_product;
  std::optional<std::string> variant;
  std::string output_dir;
  std::string prefix;
  std::vector<std::string> sets;
  int threads = 0;
  bool export_trajectory = false;
};

inline void add_study_flags(CLI::App* sub, StudyFlags& f, bool simulate = false) {
  sub->add_option("--config", f.config_path, "JSON configuration file");
  sub->add_option("--seed", f.seed, "base seed");
  sub->add_option("--replicas", f.replicas, "replicas per eps");
  sub->add_option("--eps", f.eps, "eps values (comma separated)")->delimiter(',');
  sub->add_option("--dt", f.dt, "time step (initial step with --auto-dt)");
  sub->add_flag("--auto-dt", f.auto_dt, "halve dt until the refinement check passes");
  sub->add_option("--T", f.final_time, "final time");
  sub->add_option("--N", f.fixed_modes, "fixed max mode (overrides the eps N rule)");
  sub->add_option("--mode-product", f.mode_product, "N = ceil(product / eps)");
  sub->add_option("--output-dir", f.output_dir, "output directory");
  sub->add_option("--prefix", f.prefix, "output file prefix");
  sub->add_option("--set", f.sets, "override a config key: path.to.key=<json>");
  sub->add_option("--threads", f.threads, "worker threads (default: SPDE_THREADS or all cores)");
  if (simulate) {
    sub->add_option("--variant", f.variant, "PHI_EPS | PHI_ZERO | PHI_BAR | V_EPS | V_LIMIT");
    sub->add_flag("--export-trajectory", f.export_trajectory, "also write the recorded Fourier coefficients");
  }
}

inline void set_path(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  Json* node = &j;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("--set: empty key in '" + path + "'");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = Json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

inline RunConfig resolve_config(const std::string& study, const StudyFlags& f) {
  RunConfig cfg = default_config(study);
  Json j = f.config_path.empty() ? Json::object() : load_json_file(f.config_path);
  for (const auto& s : f.sets) set_path(j, s);
  if (f.seed) j["seed"] = *f.seed;
  if (f.replicas) j["replicas"] = *f.replicas;
  if (!f.eps.empty()) j["eps_grid"] = f.eps;
  if (f.dt) j["dt"] = *f.dt;
  if (f.auto_dt) j["auto_dt"] = true;
  if (f.final_time) j["final_time"] = *f.final_time;
  if (f.fixed_modes) j["fixed_modes"] = *f.fixed_modes;
  if (f.mode_product) j["mode_product"] = *f.mode_product;
  if (f.variant) j["variant"] = *f.variant;
  if (!f.output_dir.empty()) j["output"]["dir"] = f.output_dir;
  if (!f.prefix.empty()) j["output"]["prefix"] = f.prefix;
  apply_json(cfg, j);
  validate(cfg);
  return cfg;
}

inline int thread_count(const StudyFlags& f) { return f.threads > 0 ? f.threads : default_thread_count(); }

inline void print_fit(const char* label, const std::optional<LogLogFit>& fit) {
  if (!fit) return;
  std::printf("%s slope %.4f  95%% CI [%.4f, %.4f]  R2 %.4f\n", label, fit->slope, fit->ci_low, fit->ci_high,
              fit->r2);
}

inline int run_study_command(const std::string& study, const StudyFlags& f) {
  const RunConfig cfg = resolve_config(study, f);
  const int threads = thread_count(f);
  StudyReport rep;
  if (study == "converge") rep = run_convergence_study(cfg, threads);
  else if (study == "theorem15") rep = run_theorem15_study(cfg, threads);
  else rep = run_psi_coupling_study(cfg, threads);
  const auto path = write_report_files(cfg, study_csv(rep), study_json(rep));
  for (const auto& r : rep.rows)
    std::printf("eps %-10s N %-6d mean %-12s se %-12s naive %-12s censored %d\n", format_number(r.eps).c_str(),
                r.max_mode, format_number(r.mean).c_str(), format_number(r.se).c_str(),
                format_number(r.naive_mean).c_str(), r.censored);
  print_fit("corrected", rep.fit);
  print_fit("naive", rep.naive_fit);
  if (rep.naive_ratio) std::printf("naive/corrected at smallest eps: %.4f\n", *rep.naive_ratio);
  for (const auto& n : rep.notes) std::printf("note: %s\n", n.c_str());
  std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

inline int run_averaging_command(const StudyFlags& f) {
  const RunConfig cfg = resolve_config("averaging", f);
  const TailReport rep = run_averaging_study(cfg, thread_count(f));
  const auto path = write_report_files(cfg, averaging_csv(rep), averaging_json(rep, cfg));
  for (std::size_t q = 0; q < rep.phi_fit.size(); ++q)
    std::printf("quantile %.2f: phi slope %.4f, phi_tilde slope %.4f\n", rep.quantiles[q], rep.phi_fit[q].slope,
                rep.phi_tilde_fit[q].slope);
  std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

inline int run_simulate_command(const StudyFlags& f) {
  const RunConfig cfg = resolve_config("simulate", f);
  const ModelSpec spec = build_model(cfg.model);
  const Variant variant = parse_variant(cfg.variant);
  const double eps = cfg.eps_grid.front();
  const SimulationConfig sim = simulation_config(cfg, eps, cfg.dt);
  const SpectralField u0 = random_initial_data(spec.n, sim.max_mode, cfg.u0_decay, cfg.u0_amplitude,
                                               NoiseStream(cfg.seed, kInitialDataReplica));
  const Trajectory traj = run_mild(spec, variant, eps, u0, nullptr, sim, NoiseStream(cfg.seed, 0));

  std::ostringstream csv;
  csv << "time,statistic,value\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const std::string t = format_number(traj.times[i]);
    csv << t << ",sup_norm," << format_number(sup_norm(traj.fields[i])) << '\n';
    csv << t << ",l2_norm," << format_number(sobolev_norm(traj.fields[i], 0.0, spec.nu)) << '\n';
  }
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["study"] = "simulate";
  j["seed"] = cfg.seed;
  j["config"] = to_json(cfg);
  j["variant"] = cfg.variant;
  j["N"] = sim.max_mode;
  j["dt"] = sim.step_size();
  j["correction"] = resolve_correction(sim, spec.nu, eps);
  j["censored"] = traj.censored;
  j["censor_time"] = detail::number_or_null(traj.censor_time);
  j["records"] = traj.times.size();
  const auto path = write_report_files(cfg, csv.str(), j);
  if (f.export_trajectory) {
    std::ostringstream tr;
    tr << "time,component,mode,re,im\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i)
      for (int c = 0; c < spec.n; ++c)
        for (int k = 0; k <= traj.fields[i].max_mode(); ++k) {
          const cplx z = traj.fields[i](c, k);
          tr << format_number(traj.times[i]) << ',' << c << ',' << k << ',' << format_number(z.real()) << ','
             << format_number(z.imag()) << '\n';
        }
    write_atomic(output_directory(cfg) / (output_prefix(cfg) + "_trajectory.csv"), tr.str());
  }
  std::printf("%s: %zu records%s\n", cfg.variant.c_str(), traj.times.size(), traj.censored ? " (censored)" : "");
  std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse number '" + item + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Random probe points with standard normal coordinates scaled by `scale`.
inline std::vector<std::vector<double>> probe_points(int n, int count, double scale, const NoiseStream& stream) {
  std::vector<std::vector<double>> pts(count, std::vector<double>(n));
  for (int p = 0; p < count; ++p)
    for (int i = 0; i < n; ++i)
      pts[p][i] = scale * stream.normal_pair(StreamPurpose::kProbe, static_cast<std::uint64_t>(p), 0,
                                             static_cast<std::uint32_t>(i), 0)[0];
  return pts;
}

}  // namespace detail

inline int cli_main(int argc, char** argv) {
  CLI::App app{"spde_lab: spectral experiments for singularly perturbed stochastic heat equations"};
  app.require_subcommand(1);

  double nu = 1.0, alpha = 0.25, c_eps = 0.125;
  int c_modes = 0;
  std::string q_list;
  auto* constants = app.add_subcommand("constants", "print correction constants as JSON");
  constants->add_option("--nu", nu, "diffusion coefficient");
  constants->add_option("--alpha", alpha, "colour exponent in (0, 1/2)");
  constants->add_option("--q", q_list, "coefficients of Q (comma separated, Q(0) = 1); default 1,1/nu");
  constants->add_option("--eps", c_eps, "eps for the truncation-matched constant and the Riemann gap");
  constants->add_option("--N", c_modes, "mode cutoff for the truncation-matched constant (default ceil(8/eps))");

  detail::StudyFlags sim_flags, conv_flags, t15_flags, psi_flags, avg_flags;
  detail::add_study_flags(app.add_subcommand("simulate", "run one variant and record norms"), sim_flags, true);
  detail::add_study_flags(app.add_subcommand("converge", "corrected vs naive limit rate study"), conv_flags);
  detail::add_study_flags(app.add_subcommand("theorem15", "small-noise equation rate study"), t15_flags);
  detail::add_study_flags(app.add_subcommand("psi-coupling", "rate of psi^eps -> psi^0"), psi_flags);
  detail::add_study_flags(app.add_subcommand("averaging", "scaling of the renormalised products phi"), avg_flags);

  std::string potential;
  double temperature = 1.0, mass = 0.0;
  bool check = false;
  int probes = 100;
  std::uint64_t probe_seed = 7;
  auto* path = app.add_subcommand("path-sampling", "map a potential onto the model and check the drift identity");
  path->add_option("--potential", potential, "coefficients of V (comma separated, constant first)")->required();
  path->add_option("--T", temperature, "temperature");
  path->add_option("--mass", mass, "mass m (eps = m / sqrt(2T))");
  path->add_flag("--check", check, "fail with exit code 2 if the identity discrepancy exceeds 1e-10");
  path->add_option("--probes", probes, "number of probe points");
  path->add_option("--seed", probe_seed, "probe seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*constants) {
      std::vector<double> q = q_list.empty() ? std::vector<double>{1.0, 1.0 / nu} : detail::parse_list(q_list);
      const int n_modes = c_modes > 0 ? c_modes : static_cast<int>(std::ceil(8.0 / c_eps - 1e-9));
      Json j;
      j["schema_version"] = kSchemaVersion;
      j["nu"] = nu;
      j["white_noise_constant"] = white_noise_constant(nu);
      j["alpha"] = alpha;
      j["alpha_constant"] = alpha_constant(nu, alpha);
      j["q"] = q;
      j["poly_constant"] = poly_constant(nu, q);
      j["eps"] = c_eps;
      j["N"] = n_modes;
      j["truncation_matched_constant"] = truncation_matched_constant(nu, c_eps, n_modes);
      j["riemann_gap"] = riemann_gap(nu, c_eps);
      std::cout << j.dump(2) << '\n';
      return 0;
    }
    if (*path) {
      const std::vector<double> coeffs = detail::parse_list(potential);
      const PotentialSpec p = potential_from_polynomial(Polynomial::univariate(coeffs), temperature, mass);
      const auto [spec, eps] = from_potential(p);
      const auto pts = detail::probe_points(1, probes, 1.5, NoiseStream(probe_seed));
      const double worst = check_effective_drift_identity(p, pts);
      Json j;
      j["schema_version"] = kSchemaVersion;
      j["nu"] = spec.nu;
      j["eps"] = eps;
      j["correction"] = white_noise_constant(spec.nu);
      j["probes"] = probes;
      j["max_identity_discrepancy"] = worst;
      std::cout << j.dump(2) << '\n';
      if (check && !(worst <= 1e-10)) {
        std::cerr << "identity check failed: discrepancy " << worst << '\n';
        return 2;
      }
      return 0;
    }
    for (auto* sub : app.get_subcommands()) {
      const std::string name = sub->get_name();
      if (name == "simulate") return detail::run_simulate_command(sim_flags);
      if (name == "converge") return detail::run_study_command(name, conv_flags);
      if (name == "theorem15") return detail::run_study_command(name, t15_flags);
      if (name == "psi-coupling") return detail::run_study_command(name, psi_flags);
      if (name == "averaging") return detail::run_averaging_command(avg_flags);
    }
    std::cerr << app.help();
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "file error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace spde

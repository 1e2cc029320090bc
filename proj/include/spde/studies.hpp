#pragma once

// Monte Carlo rate studies. Replica r of every eps level uses NoiseStream(seed, r),
// so levels are coupled through common Gaussian draws on shared modes.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spde/averaging.hpp"
#include "spde/config.hpp"
#include "spde/integrator.hpp"
#include "spde/parallel.hpp"
#include "spde/stats.hpp"

namespace spde {

inline constexpr std::uint64_t kInitialDataReplica = ~std::uint64_t{0};

struct EpsRow {
  double eps = 0.0;
  int max_mode = 0;
  double dt = 0.0;
  int replicas = 0;
  int censored = 0;
  double mean = std::nan("");
  double se = std::nan("");
  double naive_mean = std::nan("");
  double naive_se = std::nan("");
  double correction = std::nan("");
};

struct StudyReport {
  std::string study;
  std::vector<EpsRow> rows;
  std::optional<LogLogFit> fit;
  std::optional<LogLogFit> naive_fit;
  std::optional<double> naive_ratio;  // naive / corrected mean error at the smallest eps
  double asymptotic_constant = 0.0;
  std::vector<std::string> notes;
  RunConfig config;
};

namespace detail {

struct ReplicaResult {
  bool censored = false;
  double error = 0.0;
  double naive = std::nan("");
};

inline EpsRow aggregate(double eps, int max_mode, double dt, double correction,
                        const std::vector<ReplicaResult>& results) {
  EpsRow row;
  row.eps = eps;
  row.max_mode = max_mode;
  row.dt = dt;
  row.correction = correction;
  std::vector<double> err, naive;
  for (const auto& r : results) {
    if (r.censored) {
      ++row.censored;
      continue;
    }
    err.push_back(r.error);
    if (!std::isnan(r.naive)) naive.push_back(r.naive);
  }
  row.replicas = static_cast<int>(err.size());
  if (!err.empty()) row.mean = mean(err);
  if (err.size() >= 2) row.se = standard_error(err);
  if (!naive.empty()) row.naive_mean = mean(naive);
  if (naive.size() >= 2) row.naive_se = standard_error(naive);
  return row;
}

/// Fits over rows with at least one uncensored replica; needs 4 such rows.
inline void finish_report(StudyReport& rep) {
  std::vector<double> x, y, yn;
  for (const auto& r : rep.rows) {
    if (r.replicas == 0 || !(r.mean > 0.0)) continue;
    x.push_back(r.eps);
    y.push_back(r.mean);
    yn.push_back(r.naive_mean);
  }
  if (x.size() >= 4) {
    rep.fit = regress_loglog(x, y);
    bool naive_ok = true;
    for (double v : yn) naive_ok = naive_ok && v > 0.0;
    if (naive_ok) rep.naive_fit = regress_loglog(x, yn);
  } else {
    rep.notes.push_back("fewer than 4 uncensored eps levels; no slope reported");
  }
  const EpsRow* smallest = nullptr;
  for (const auto& r : rep.rows)
    if (r.replicas > 0 && (!smallest || r.eps < smallest->eps)) smallest = &r;
  if (smallest && smallest->mean > 0.0 && !std::isnan(smallest->naive_mean))
    rep.naive_ratio = smallest->naive_mean / smallest->mean;
  for (const auto& r : rep.rows)
    if (r.replicas == 0) rep.notes.push_back("all replicas censored at eps=" + std::to_string(r.eps));
}

inline SpectralField study_initial_data(const RunConfig& cfg, int n, int max_mode) {
  return random_initial_data(n, max_mode, cfg.u0_decay, cfg.u0_amplitude, NoiseStream(cfg.seed, kInitialDataReplica));
}

}  // namespace detail

/// Halves dt until a run at (dt, 2 noise substeps) and one at (dt/2, 1 substep)
/// on the same noise path differ by less than 10% of the eps-error at the
/// smallest eps (replica 0). Returns the accepted dt.
template <typename RunPair>
double select_dt(double dt, double dt_min, RunPair&& run_pair, std::vector<std::string>& notes) {
  for (;;) {
    const auto [refinement, eps_error] = run_pair(dt);
    if (refinement < 0.1 * eps_error) {
      notes.push_back("auto dt accepted " + std::to_string(dt) + " (refinement " + std::to_string(refinement) +
                      ", eps-error " + std::to_string(eps_error) + ")");
      return dt;
    }
    if (dt / 2.0 < dt_min) {
      notes.push_back("auto dt hit the lower bound " + std::to_string(dt) + " without meeting the 10% rule");
      return dt;
    }
    dt /= 2.0;
  }
}

/// PHI_EPS against PHI_BAR (corrected) and PHI_ZERO (naive) in the sup norm.
inline StudyReport run_convergence_study(const RunConfig& cfg, int threads = 1) {
  validate(cfg);
  const ModelSpec spec = build_model(cfg.model);
  StudyReport rep;
  rep.study = "converge";
  rep.config = cfg;
  rep.asymptotic_constant = white_noise_constant(spec.nu);

  double dt = cfg.dt;
  if (cfg.auto_dt) {
    double eps_min = cfg.eps_grid.front();
    for (double e : cfg.eps_grid) eps_min = std::min(eps_min, e);
    const int n_modes = modes_for(cfg, eps_min);
    const SpectralField u0 = detail::study_initial_data(cfg, spec.n, n_modes);
    dt = select_dt(cfg.dt, cfg.auto_dt_min, [&](double h) {
      SimulationConfig coarse = simulation_config(cfg, eps_min, h);
      coarse.noise_substeps = 2;
      SimulationConfig fine = coarse;
      fine.dt = h / 2.0;
      fine.noise_substeps = 1;
      fine.record_stride = 2 * coarse.record_stride;
      const NoiseStream s(cfg.seed, 0);
      const CoupledRuns a = couple_runs(spec, {eps_min}, u0, coarse, s);
      const CoupledRuns b = couple_runs(spec, {eps_min}, u0, fine, s);
      const double refine = std::max(sup_distance(a.eps_runs[0], b.eps_runs[0]).value,
                                     sup_distance(a.bar, b.bar).value);
      return std::pair{refine, sup_distance(b.eps_runs[0], b.bar).value};
    }, rep.notes);
  }

  const std::size_t ne = cfg.eps_grid.size();
  const auto reps = static_cast<std::size_t>(cfg.replicas);
  std::vector<SpectralField> u0s;
  for (double e : cfg.eps_grid) u0s.push_back(detail::study_initial_data(cfg, spec.n, modes_for(cfg, e)));
  std::vector<detail::ReplicaResult> results(ne * reps);
  parallel_for(ne * reps, threads, [&](std::size_t idx) {
    const std::size_t ie = idx / reps;
    const double e = cfg.eps_grid[ie];
    const SimulationConfig sim = simulation_config(cfg, e, dt);
    const CoupledRuns runs = couple_runs(spec, {e}, u0s[ie], sim, NoiseStream(cfg.seed, idx % reps));
    const Distance bar = sup_distance(runs.eps_runs[0], runs.bar);
    const Distance naive = sup_distance(runs.eps_runs[0], runs.zero);
    results[idx] = {bar.censored || naive.censored, bar.value, naive.value};
  });
  for (std::size_t ie = 0; ie < ne; ++ie) {
    const double e = cfg.eps_grid[ie];
    const SimulationConfig sim = simulation_config(cfg, e, dt);
    std::vector<detail::ReplicaResult> slice(results.begin() + ie * reps, results.begin() + (ie + 1) * reps);
    rep.rows.push_back(detail::aggregate(e, sim.max_mode, sim.step_size(), resolve_correction(sim, spec.nu, e), slice));
  }
  detail::finish_report(rep);
  return rep;
}

/// V_EPS against V_LIMIT (corrected) and the naive limit in the H^beta norm.
inline StudyReport run_theorem15_study(const RunConfig& cfg, int threads = 1) {
  validate(cfg);
  if (!(cfg.beta > 0.5 && cfg.beta < 1.0)) throw ConfigError("theorem15: beta must lie in (1/2, 1)");
  const ModelSpec spec = build_model(cfg.model);
  if (spec.has_g()) throw ConfigError("theorem15: the model must have g = 0");
  StudyReport rep;
  rep.study = "theorem15";
  rep.config = cfg;
  rep.asymptotic_constant = white_noise_constant(spec.nu);
  const Norm norm = Norm::sobolev(cfg.beta, spec.nu);

  double dt = cfg.dt;
  if (cfg.auto_dt) {
    double eps_min = cfg.eps_grid.front();
    for (double e : cfg.eps_grid) eps_min = std::min(eps_min, e);
    const SpectralField u0 = detail::study_initial_data(cfg, spec.n, modes_for(cfg, eps_min));
    dt = select_dt(cfg.dt, cfg.auto_dt_min, [&](double h) {
      SimulationConfig coarse = simulation_config(cfg, eps_min, h);
      coarse.noise_substeps = 2;
      SimulationConfig fine = coarse;
      fine.dt = h / 2.0;
      fine.noise_substeps = 1;
      fine.record_stride = 2 * coarse.record_stride;
      const NoiseStream s(cfg.seed, 0);
      const CoupledVRuns a = couple_v_runs(spec, eps_min, u0, coarse, s);
      const CoupledVRuns b = couple_v_runs(spec, eps_min, u0, fine, s);
      const double refine = std::max(sup_distance(a.v_eps, b.v_eps, norm).value,
                                     sup_distance(a.v_limit, b.v_limit, norm).value);
      return std::pair{refine, sup_distance(b.v_eps, b.v_limit, norm).value};
    }, rep.notes);
  }

  const std::size_t ne = cfg.eps_grid.size();
  const auto reps = static_cast<std::size_t>(cfg.replicas);
  std::vector<SpectralField> u0s;
  for (double e : cfg.eps_grid) u0s.push_back(detail::study_initial_data(cfg, spec.n, modes_for(cfg, e)));
  std::vector<detail::ReplicaResult> results(ne * reps);
  parallel_for(ne * reps, threads, [&](std::size_t idx) {
    const std::size_t ie = idx / reps;
    const double e = cfg.eps_grid[ie];
    const SimulationConfig sim = simulation_config(cfg, e, dt);
    const CoupledVRuns runs = couple_v_runs(spec, e, u0s[ie], sim, NoiseStream(cfg.seed, idx % reps));
    const Distance bar = sup_distance(runs.v_eps, runs.v_limit, norm);
    const Distance naive = sup_distance(runs.v_eps, runs.v_naive, norm);
    results[idx] = {bar.censored || naive.censored, bar.value, naive.value};
  });
  for (std::size_t ie = 0; ie < ne; ++ie) {
    const double e = cfg.eps_grid[ie];
    const SimulationConfig sim = simulation_config(cfg, e, dt);
    std::vector<detail::ReplicaResult> slice(results.begin() + ie * reps, results.begin() + (ie + 1) * reps);
    rep.rows.push_back(detail::aggregate(e, sim.max_mode, sim.step_size(), resolve_correction(sim, spec.nu, e), slice));
  }
  detail::finish_report(rep);
  return rep;
}

/// sup over the recording times of sup_x |psi^eps - psi^0| for one coupled path.
inline double psi_coupling_distance(double nu, double eps, int max_mode, double final_time, double interval,
                                    const NoiseStream& stream) {
  if (!(interval > 0.0) || !(final_time > 0.0)) throw ConfigError("psi coupling: bad time grid");
  CoupledOUState state = sample_stationary({OperatorSpec(nu, 0.0), OperatorSpec(nu, eps)}, 1, max_mode, stream);
  const int steps = static_cast<int>(std::ceil(final_time / interval - 1e-9));
  const double h = final_time / steps;
  double worst = 0.0;
  for (int s = 0;; ++s) {
    SpectralField d = state.field(1);
    d -= state.field(0);
    worst = std::max(worst, sup_norm(d));
    if (s == steps) break;
    state.advance(h);
  }
  return worst;
}

inline StudyReport run_psi_coupling_study(const RunConfig& cfg, int threads = 1) {
  validate(cfg);
  StudyReport rep;
  rep.study = "psi-coupling";
  rep.config = cfg;
  rep.asymptotic_constant = white_noise_constant(cfg.model.nu);
  const std::size_t ne = cfg.eps_grid.size();
  const auto reps = static_cast<std::size_t>(cfg.replicas);
  std::vector<detail::ReplicaResult> results(ne * reps);
  parallel_for(ne * reps, threads, [&](std::size_t idx) {
    const double e = cfg.eps_grid[idx / reps];
    results[idx].error = psi_coupling_distance(cfg.model.nu, e, modes_for(cfg, e), cfg.final_time,
                                               cfg.record_interval, NoiseStream(cfg.seed, idx % reps));
  });
  for (std::size_t ie = 0; ie < ne; ++ie) {
    const double e = cfg.eps_grid[ie];
    std::vector<detail::ReplicaResult> slice(results.begin() + ie * reps, results.begin() + (ie + 1) * reps);
    rep.rows.push_back(detail::aggregate(e, modes_for(cfg, e), cfg.record_interval, std::nan(""), slice));
  }
  detail::finish_report(rep);
  return rep;
}

inline TailReport run_averaging_study(const RunConfig& cfg, int threads = 1) {
  validate(cfg);
  TailOptions opts;
  opts.mode_factor = cfg.averaging_mode_factor;
  opts.quantiles = cfg.quantiles;
  opts.gaussian_v = cfg.gaussian_v;
  opts.threads = threads;
  return tail_experiment(cfg.model.nu, cfg.gamma, cfg.alpha, cfg.eps_grid, cfg.replicas, NoiseStream(cfg.seed),
                         opts);
}

}  // namespace spde

#pragma once

// Exponential Euler for the mild formulation. Every variant is written as
// u = v + (noise part) with
//
//   v_k <- exp(lambda_k h) v_k + etd_weight(lambda_k, h) [F(u)]_k,
//
// where lambda is the shifted symbol (nu d_x^2 - 1 [- eps^2 d_x^4]) and F
// carries the compensating identity term (see model.hpp).

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spde/constants.hpp"
#include "spde/linear_ops.hpp"
#include "spde/model.hpp"
#include "spde/noise_engine.hpp"
#include "spde/spectral.hpp"

namespace spde {

enum class Variant {
  kPhiEps,   // perturbed equation, u = v + psi^eps
  kPhiZero,  // naive limit with drift f, u = v + psi^0
  kPhiBar,   // corrected limit with drift fbar, u = v + psi^0
  kVEps,     // small-noise equation with h(u)(u_x, u_x), u = v + sqrt(eps) psi^eps
  kVLimit,   // its deterministic limit with fbar = f + c Tr h
};

inline std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kPhiEps: return "PHI_EPS";
    case Variant::kPhiZero: return "PHI_ZERO";
    case Variant::kPhiBar: return "PHI_BAR";
    case Variant::kVEps: return "V_EPS";
    case Variant::kVLimit: return "V_LIMIT";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  for (Variant v : {Variant::kPhiEps, Variant::kPhiZero, Variant::kPhiBar, Variant::kVEps, Variant::kVLimit})
    if (variant_name(v) == s) return v;
  throw ConfigError("unknown variant '" + std::string(s) + "'");
}

enum class CorrectionMode { kTruncationMatched, kAsymptotic };

struct SimulationConfig {
  int max_mode = 64;
  double dt = 1e-3;
  double final_time = 1.0;
  int record_stride = 1;
  int oversample = 2;
  double dealias = 2.0 / 3.0;
  double cutoff = 1e3;       // explosion guard on sup |u|
  int noise_substeps = 1;    // noise advanced in dt / noise_substeps increments
  CorrectionMode correction_mode = CorrectionMode::kTruncationMatched;
  std::optional<double> correction;  // explicit constant, overrides the mode
  bool zero_noise = false;

  void validate() const {
    if (max_mode < 1) throw ConfigError("SimulationConfig: N must be >= 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("SimulationConfig: dt must be positive");
    if (!(final_time >= dt)) throw ConfigError("SimulationConfig: T must be >= dt");
    if (record_stride < 1) throw ConfigError("SimulationConfig: record_stride must be >= 1");
    if (oversample < 1) throw ConfigError("SimulationConfig: oversample must be >= 1");
    if (!(dealias > 0.0 && dealias <= 1.0)) throw ConfigError("SimulationConfig: dealias must lie in (0, 1]");
    if (!(cutoff > 0.0)) throw ConfigError("SimulationConfig: cutoff K must be positive");
    if (noise_substeps < 1) throw ConfigError("SimulationConfig: noise_substeps must be >= 1");
  }

  /// dt is shrunk slightly when needed so that an integer number of steps lands on T.
  int steps() const { return static_cast<int>(std::ceil(final_time / dt - 1e-9)); }
  double step_size() const { return final_time / steps(); }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> fields;
  bool censored = false;
  double censor_time = std::numeric_limits<double>::quiet_NaN();
};

inline bool is_stochastic(Variant v) { return v != Variant::kVLimit; }

inline double noise_level_of(Variant v, double eps) {
  return (v == Variant::kPhiEps || v == Variant::kVEps) ? eps : 0.0;
}

/// Constant c in fbar = f + c Tr(h - D_s g).
inline double resolve_correction(const SimulationConfig& cfg, double nu, double eps_ref) {
  if (cfg.correction) return *cfg.correction;
  if (cfg.correction_mode == CorrectionMode::kAsymptotic || !(eps_ref > 0.0)) return white_noise_constant(nu);
  return truncation_matched_constant(nu, eps_ref, cfg.max_mode);
}

/// One variant's state and cached step weights.
class MildStepper {
 public:
  MildStepper(const ModelSpec& spec, Variant variant, double eps, double correction, const SimulationConfig& cfg,
              const SpectralField& u0)
      : spec_(spec), variant_(variant), eps_(eps), op_(spec.nu, noise_level_of(variant, eps)), cfg_(cfg) {
    spec.validate();
    if (!(eps >= 0.0)) throw ConfigError("run_mild: eps must be non-negative");
    if (u0.components() != spec.n) throw ConfigError("run_mild: u0 has the wrong number of components");
    if (u0.max_mode() > cfg.max_mode) throw ConfigError("run_mild: u0 has modes beyond N");
    if ((variant == Variant::kVEps || variant == Variant::kVLimit) && spec.has_g())
      throw ConfigError("run_mild: V variants require g = 0");
    v_ = u0.with_max_mode(cfg.max_mode);
    switch (variant) {
      case Variant::kPhiEps: terms_ = {.identity = true, .correction = 0.0, .g_scale = eps, .h_scale = eps}; break;
      case Variant::kPhiZero: terms_ = {.identity = true}; break;
      case Variant::kPhiBar: terms_ = {.identity = true, .correction = correction}; break;
      case Variant::kVEps: terms_ = {.identity = true, .correction = 0.0, .g_scale = 0.0, .h_scale = 1.0}; break;
      case Variant::kVLimit:
        terms_ = {.identity = true, .correction = correction, .g_scale = 0.0, .h_scale = 1.0};
        break;
    }
    noise_scale_ = variant == Variant::kVEps ? std::sqrt(eps) : 1.0;
  }

  Variant variant() const { return variant_; }
  const SpectralField& v() const { return v_; }

  /// Resolves the noise level this variant reads; -1 when it reads none.
  void bind(const CoupledOUState* noise) {
    level_ = -1;
    if (!is_stochastic(variant_) || noise == nullptr) return;
    if (noise->components() != spec_.n || noise->max_mode() != cfg_.max_mode)
      throw ConfigError("run_mild: noise state shape does not match the configuration");
    level_ = noise->find_level(noise_level_of(variant_, eps_));
    if (level_ < 0) throw ConfigError("run_mild: noise state lacks the level this variant needs");
  }

  SpectralField current_u(const CoupledOUState* noise) const {
    SpectralField u = v_;
    if (level_ >= 0) noise->add_to(u, level_, noise_scale_);
    return u;
  }

  /// Drift at the current state; reports the grid maximum of |u|.
  SpectralField drift(const SpectralField& u, double* umax) const {
    return evaluate_drift(spec_, terms_, u, {cfg_.oversample, cfg_.dealias}, umax);
  }

  void advance(double h, const SpectralField& f) {
    if (h != cached_h_) {
      decay_.resize(cfg_.max_mode + 1);
      weight_.resize(cfg_.max_mode + 1);
      for (int k = 0; k <= cfg_.max_mode; ++k) {
        const double lambda = op_.symbol(k);
        decay_[k] = std::exp(lambda * h);
        weight_[k] = etd_weight(lambda, h);
      }
      cached_h_ = h;
    }
    for (int i = 0; i < spec_.n; ++i)
      for (int k = 0; k <= cfg_.max_mode; ++k) v_(i, k) = decay_[k] * v_(i, k) + weight_[k] * f(i, k);
    v_.enforce_real_mean();
  }

 private:
  ModelSpec spec_;
  Variant variant_;
  double eps_;
  OperatorSpec op_;
  SimulationConfig cfg_;
  DriftTerms terms_;
  double noise_scale_ = 1.0;
  int level_ = -1;
  SpectralField v_;
  double cached_h_ = -1.0;
  std::vector<double> decay_, weight_;
};

/// Steps all variants together on one noise path (which may be null).
inline std::vector<Trajectory> run_lockstep(std::vector<MildStepper>& steppers, CoupledOUState* noise,
                                            const SimulationConfig& cfg) {
  cfg.validate();
  for (auto& s : steppers) s.bind(noise);
  const int steps = cfg.steps();
  const double h = cfg.step_size();
  std::vector<Trajectory> out(steppers.size());
  std::vector<bool> alive(steppers.size(), true);

  auto censor = [&](std::size_t r, double t) {
    alive[r] = false;
    out[r].censored = true;
    out[r].censor_time = t;
  };

  for (int s = 0; s <= steps; ++s) {
    const double t = s * h;
    const bool record = s % cfg.record_stride == 0 || s == steps;
    for (std::size_t r = 0; r < steppers.size(); ++r) {
      if (!alive[r]) continue;
      const SpectralField u = steppers[r].current_u(noise);
      if (s == steps) {
        if (!u.all_finite()) throw NumericalError("step " + std::to_string(s) + ": non-finite state");
        if (sup_norm(u) > cfg.cutoff) {
          censor(r, t);
          continue;
        }
        out[r].times.push_back(t);
        out[r].fields.push_back(u);
        continue;
      }
      double umax = 0.0;
      SpectralField f;
      try {
        f = steppers[r].drift(u, &umax);
      } catch (const NumericalError& e) {
        throw NumericalError("step " + std::to_string(s) + " (" + std::string(variant_name(steppers[r].variant())) +
                             "): " + e.what());
      }
      if (umax > cfg.cutoff) {
        censor(r, t);
        continue;
      }
      if (record) {
        out[r].times.push_back(t);
        out[r].fields.push_back(u);
      }
      steppers[r].advance(h, f);
    }
    if (s < steps && noise != nullptr)
      for (int q = 0; q < cfg.noise_substeps; ++q) noise->advance(h / cfg.noise_substeps);
  }
  return out;
}

/// Single run of one variant. Stochastic variants read `noise` at its current
/// time (copied, never modified) or, when null, a fresh stationary draw from
/// `stream`; with cfg.zero_noise the noise part is frozen at 0.
inline Trajectory run_mild(const ModelSpec& spec, Variant variant, double eps, const SpectralField& u0,
                           const CoupledOUState* noise, const SimulationConfig& cfg, const NoiseStream& stream) {
  cfg.validate();
  const double c = resolve_correction(cfg, spec.nu, eps);
  std::vector<MildStepper> steppers{MildStepper(spec, variant, eps, c, cfg, u0)};
  std::optional<CoupledOUState> state;
  if (is_stochastic(variant) && !cfg.zero_noise) {
    if (noise != nullptr) {
      state = *noise;
    } else {
      state = sample_stationary({OperatorSpec(spec.nu, noise_level_of(variant, eps))}, spec.n, cfg.max_mode, stream);
    }
  }
  auto trajs = run_lockstep(steppers, state ? &*state : nullptr, cfg);
  return std::move(trajs.front());
}

struct CoupledRuns {
  std::vector<double> eps_levels;
  std::vector<Trajectory> eps_runs;  // PHI_EPS, one per level
  Trajectory zero;                   // PHI_ZERO
  Trajectory bar;                    // PHI_BAR
  double correction = 0.0;
};

/// PHI_EPS at every level plus PHI_ZERO and PHI_BAR, all from the same u0 and
/// one Wiener process. The truncation-matched constant uses the smallest eps.
inline CoupledRuns couple_runs(const ModelSpec& spec, const std::vector<double>& eps_levels, const SpectralField& u0,
                               const SimulationConfig& cfg, const NoiseStream& stream) {
  cfg.validate();
  if (eps_levels.empty()) throw ConfigError("couple_runs: at least one eps level required");
  double eps_min = eps_levels.front();
  for (double e : eps_levels) {
    if (!(e > 0.0)) throw ConfigError("couple_runs: eps levels must be positive");
    eps_min = std::min(eps_min, e);
  }
  CoupledRuns res;
  res.eps_levels = eps_levels;
  res.correction = resolve_correction(cfg, spec.nu, eps_min);

  std::vector<OperatorSpec> ops{OperatorSpec(spec.nu, 0.0)};
  std::vector<MildStepper> steppers;
  for (double e : eps_levels) {
    ops.emplace_back(spec.nu, e);
    steppers.emplace_back(spec, Variant::kPhiEps, e, 0.0, cfg, u0);
  }
  steppers.emplace_back(spec, Variant::kPhiZero, 0.0, 0.0, cfg, u0);
  steppers.emplace_back(spec, Variant::kPhiBar, 0.0, res.correction, cfg, u0);

  std::optional<CoupledOUState> noise;
  if (!cfg.zero_noise) noise = sample_stationary(ops, spec.n, cfg.max_mode, stream);
  auto trajs = run_lockstep(steppers, noise ? &*noise : nullptr, cfg);
  const std::size_t m = eps_levels.size();
  res.eps_runs.assign(std::make_move_iterator(trajs.begin()), std::make_move_iterator(trajs.begin() + m));
  res.zero = std::move(trajs[m]);
  res.bar = std::move(trajs[m + 1]);
  return res;
}

struct CoupledVRuns {
  Trajectory v_eps;
  Trajectory v_limit;  // drift fbar = f + c Tr h
  Trajectory v_naive;  // drift f
  double correction = 0.0;
};

inline CoupledVRuns couple_v_runs(const ModelSpec& spec, double eps, const SpectralField& u0,
                                  const SimulationConfig& cfg, const NoiseStream& stream) {
  cfg.validate();
  if (!(eps > 0.0)) throw ConfigError("couple_v_runs: eps must be positive");
  CoupledVRuns res;
  res.correction = resolve_correction(cfg, spec.nu, eps);
  std::vector<MildStepper> steppers{MildStepper(spec, Variant::kVEps, eps, 0.0, cfg, u0),
                                    MildStepper(spec, Variant::kVLimit, eps, res.correction, cfg, u0),
                                    MildStepper(spec, Variant::kVLimit, eps, 0.0, cfg, u0)};
  std::optional<CoupledOUState> noise;
  if (!cfg.zero_noise) noise = sample_stationary({OperatorSpec(spec.nu, eps)}, spec.n, cfg.max_mode, stream);
  auto trajs = run_lockstep(steppers, noise ? &*noise : nullptr, cfg);
  res.v_eps = std::move(trajs[0]);
  res.v_limit = std::move(trajs[1]);
  res.v_naive = std::move(trajs[2]);
  return res;
}

struct Norm {
  enum class Kind { kSup, kSobolev };
  Kind kind = Kind::kSup;
  double alpha = 0.0;
  double nu = 1.0;

  static Norm sup() { return {}; }
  static Norm sobolev(double alpha, double nu = 1.0) { return {Kind::kSobolev, alpha, nu}; }

  double operator()(const SpectralField& f) const {
    return kind == Kind::kSup ? sup_norm(f) : sobolev_norm(f, alpha, nu);
  }
};

struct Distance {
  double value = 0.0;
  bool censored = false;
  std::size_t compared = 0;  // number of common recorded times
};

/// Largest norm of a - b over the common uncensored recording times.
inline Distance sup_distance(const Trajectory& a, const Trajectory& b, const Norm& norm = Norm::sup()) {
  Distance d;
  d.censored = a.censored || b.censored;
  const std::size_t n = std::min(a.times.size(), b.times.size());
  if (!d.censored && a.times.size() != b.times.size())
    throw ConfigError("sup_distance: recording grids differ");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(a.times[i] - b.times[i]) > 1e-12 * std::max(1.0, std::abs(a.times[i])))
      throw ConfigError("sup_distance: recording grids differ");
    const SpectralField& fa = a.fields[i];
    const SpectralField& fb = b.fields[i];
    if (fa.components() != fb.components()) throw ConfigError("sup_distance: component counts differ");
    const int m = std::max(fa.max_mode(), fb.max_mode());
    SpectralField diff = fa.with_max_mode(m);
    diff -= fb.with_max_mode(m);
    d.value = std::max(d.value, norm(diff));
  }
  d.compared = n;
  return d;
}

/// Smooth random initial field: amplitude (1 + k^2)^(-decay) times a standard
/// Gaussian per mode and component (real at k = 0). Mode k's draw does not
/// depend on N, so fields for different N agree on common modes.
inline SpectralField random_initial_data(int n_components, int max_mode, double decay, double amplitude,
                                         const NoiseStream& stream) {
  SpectralField u(n_components, max_mode);
  for (int i = 0; i < n_components; ++i) {
    for (int k = 0; k <= max_mode; ++k) {
      const double s = amplitude * std::pow(1.0 + static_cast<double>(k) * k, -decay);
      if (k == 0) {
        u(i, 0) = s * stream.normal_pair(StreamPurpose::kInitialData, 0, 0, static_cast<std::uint32_t>(i), 0)[0];
      } else {
        u(i, k) = s * stream.complex_normal(StreamPurpose::kInitialData, 0, static_cast<std::uint32_t>(k),
                                            static_cast<std::uint32_t>(i), 0);
      }
    }
  }
  return u;
}

}  // namespace spde

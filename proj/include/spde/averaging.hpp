#pragma once

// Gaussian mode ensembles w_k with variance sigma_k = k^2 / (1 + nu k^2 + eps^2 k^4)
// (the law of sqrt(eps) d_x psi^eps at mode k), and the renormalised
// products phi = v (w^2 - 1/(2 eps sqrt(nu))) and phi~ = v w w~.

#include <cmath>
#include <vector>

#include "spde/noise_engine.hpp"
#include "spde/parallel.hpp"
#include "spde/spectral.hpp"
#include "spde/stats.hpp"

namespace spde {

struct ModeEnsemble {
  double nu = 1.0;
  double eps = 0.0;
  int max_mode = 0;
  std::vector<cplx> w;  // k = 0..N; negative modes by conjugation

  cplx at(int k) const { return k >= 0 ? w.at(k) : std::conj(w.at(-k)); }

  SpectralField field() const {
    SpectralField f(1, max_mode);
    for (int k = 0; k <= max_mode; ++k) f(0, k) = w[k];
    return f;
  }
};

inline double ensemble_variance(double nu, double eps, long k) {
  const double k2 = static_cast<double>(k) * static_cast<double>(k);
  return k2 / (1.0 + nu * k2 + eps * eps * k2 * k2);
}

inline ModeEnsemble sample_w(double nu, double eps, int max_mode, const NoiseStream& stream,
                             StreamPurpose purpose = StreamPurpose::kEnsembleW) {
  if (max_mode < 1) throw ConfigError("sample_w: N must be >= 1");
  if (!(nu > 0.0)) throw ConfigError("sample_w: nu must be positive");
  if (!(eps >= 0.0)) throw ConfigError("sample_w: eps must be non-negative");
  ModeEnsemble e{nu, eps, max_mode, std::vector<cplx>(max_mode + 1)};
  for (int k = 1; k <= max_mode; ++k)
    e.w[k] = std::sqrt(ensemble_variance(nu, eps, k)) *
             stream.complex_normal(purpose, 0, static_cast<std::uint32_t>(k), 0, 0);
  return e;
}

namespace detail {

// Coefficients of the pointwise product of three single-component fields,
// truncated to |n| <= N. A grid of >= 4N + 1 points keeps the retained
// modes free of aliasing from the degree-3N product.
inline SpectralField triple_product(const SpectralField& a, const SpectralField& b, const SpectralField& c) {
  const int n = a.max_mode();
  if (b.max_mode() != n || c.max_mode() != n) throw ConfigError("triple_product: mode counts differ");
  const GridField ga = to_grid(a, 2);
  const GridField gb = to_grid(b, 2);
  const GridField gc = to_grid(c, 2);
  GridField out(1, ga.size);
  for (int j = 0; j < ga.size; ++j) out(0, j) = ga(0, j) * gb(0, j) * gc(0, j);
  return from_grid(out, n);
}

inline void check_phi_inputs(const SpectralField& v, const ModeEnsemble& w) {
  if (v.components() != 1) throw ConfigError("compute_phi: v must be scalar");
  if (v.max_mode() != w.max_mode) throw ConfigError("compute_phi: v and w must share N");
}

}  // namespace detail

/// phi_n = (1/2pi) sum_{k+l+m=n} v_m w_k w_l - v_n / (2 eps sqrt(nu)), |n| <= N.
inline SpectralField compute_phi(const SpectralField& v, const ModeEnsemble& w) {
  detail::check_phi_inputs(v, w);
  if (!(w.eps > 0.0)) throw ConfigError("compute_phi: eps must be positive");
  const SpectralField wf = w.field();
  SpectralField phi = detail::triple_product(v, wf, wf);
  SpectralField shift = v;
  shift *= 1.0 / (2.0 * w.eps * std::sqrt(w.nu));
  phi -= shift;
  return phi;
}

/// phi~_n = (1/2pi) sum_{k+l+m=n} v_m w_k w~_l, |n| <= N.
inline SpectralField compute_phi_tilde(const SpectralField& v, const ModeEnsemble& w, const ModeEnsemble& w_tilde) {
  detail::check_phi_inputs(v, w);
  if (w_tilde.max_mode != w.max_mode) throw ConfigError("compute_phi_tilde: ensembles must share N");
  return detail::triple_product(v, w.field(), w_tilde.field());
}

struct TailOptions {
  double mode_factor = 4.0;  // N = ceil(mode_factor / eps^2)
  std::vector<double> quantiles{0.5, 0.9};
  bool gaussian_v = false;   // v drawn as a stationary psi^eps sample instead
  int threads = 1;
};

/// Deterministic low-mode test function with ||v||_alpha = 1.
inline SpectralField averaging_test_function(int max_mode, double alpha, double nu) {
  SpectralField v(1, max_mode);
  v(0, 0) = 1.0;
  if (max_mode >= 1) v(0, 1) = {0.5, 0.25};
  if (max_mode >= 2) v(0, 2) = {0.0, -0.25};
  v *= 1.0 / sobolev_norm(v, alpha, nu);
  return v;
}

struct TailReport {
  double nu = 1.0, gamma = 0.0, alpha = 0.0;
  int reps = 0;
  std::vector<double> quantiles;
  std::vector<double> eps;
  std::vector<int> max_modes;
  std::vector<std::vector<double>> phi;        // [eps][quantile] of eps ||phi||_{-gamma}
  std::vector<std::vector<double>> phi_tilde;  // [eps][quantile] of eps ||phi~||_{-gamma}
  std::vector<LogLogFit> phi_fit;              // per quantile
  std::vector<LogLogFit> phi_tilde_fit;
};

inline TailReport tail_experiment(double nu, double gamma, double alpha, const std::vector<double>& eps_grid,
                                  int reps, const NoiseStream& stream, const TailOptions& opts = {}) {
  if (!(gamma > 0.5)) throw ConfigError("tail_experiment: gamma must exceed 1/2");
  if (!(alpha > 0.5)) throw ConfigError("tail_experiment: alpha must exceed 1/2");
  if (reps < 2) throw ConfigError("tail_experiment: need at least 2 replicas");
  if (eps_grid.empty()) throw ConfigError("tail_experiment: empty eps grid");
  for (double e : eps_grid)
    if (!(e > 0.0 && e <= 1.0)) throw ConfigError("tail_experiment: eps must lie in (0, 1]");
  if (!(opts.mode_factor > 0.0)) throw ConfigError("tail_experiment: mode_factor must be positive");

  TailReport rep;
  rep.nu = nu;
  rep.gamma = gamma;
  rep.alpha = alpha;
  rep.reps = reps;
  rep.quantiles = opts.quantiles;
  rep.eps = eps_grid;
  for (double e : eps_grid) rep.max_modes.push_back(static_cast<int>(std::ceil(opts.mode_factor / (e * e))));

  const std::size_t ne = eps_grid.size();
  std::vector<double> phi_norm(ne * reps), tilde_norm(ne * reps);
  parallel_for(ne * reps, opts.threads, [&](std::size_t idx) {
    const std::size_t ie = idx / reps;
    const auto r = static_cast<std::uint64_t>(idx % reps);
    const double e = eps_grid[ie];
    const int n = rep.max_modes[ie];
    const NoiseStream s = stream.for_replica(r);
    SpectralField v = averaging_test_function(n, alpha, nu);
    if (opts.gaussian_v) v = sample_stationary({OperatorSpec(nu, e)}, 1, n, s).field(0);
    const ModeEnsemble w = sample_w(nu, e, n, s, StreamPurpose::kEnsembleW);
    const ModeEnsemble wt = sample_w(nu, e, n, s, StreamPurpose::kEnsembleWTilde);
    phi_norm[idx] = e * sobolev_norm(compute_phi(v, w), -gamma, nu);
    tilde_norm[idx] = e * sobolev_norm(compute_phi_tilde(v, w, wt), -gamma, nu);
  });

  for (std::size_t ie = 0; ie < ne; ++ie) {
    std::vector<double> a(phi_norm.begin() + ie * reps, phi_norm.begin() + (ie + 1) * reps);
    std::vector<double> b(tilde_norm.begin() + ie * reps, tilde_norm.begin() + (ie + 1) * reps);
    std::vector<double> qa, qb;
    for (double q : opts.quantiles) {
      qa.push_back(quantile(a, q));
      qb.push_back(quantile(b, q));
    }
    rep.phi.push_back(std::move(qa));
    rep.phi_tilde.push_back(std::move(qb));
  }
  if (ne >= 3) {
    for (std::size_t q = 0; q < opts.quantiles.size(); ++q) {
      std::vector<double> ya, yb;
      for (std::size_t ie = 0; ie < ne; ++ie) {
        ya.push_back(rep.phi[ie][q]);
        yb.push_back(rep.phi_tilde[ie][q]);
      }
      rep.phi_fit.push_back(regress_loglog(eps_grid, ya));
      rep.phi_tilde_fit.push_back(regress_loglog(eps_grid, yb));
    }
  }
  return rep;
}

}  // namespace spde

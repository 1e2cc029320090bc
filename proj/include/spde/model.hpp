#pragma once

// Nonlinearities of the perturbed heat equation
//
//   d_t u = nu d_x^2 u - eps^2 d_x^4 u + f(u) + eps g(u) d_x^2 u
//           + eps h(u)(d_x u (x) d_x u) + sqrt(2) xi,
//
// their pseudospectral evaluation, and the effective drift
// fbar = f + c Tr(h - D_s g) with c = 1/(2 sqrt(nu)) for white noise.
//
// The stepper works with the shifted operator nu d_x^2 - 1 (so that the zero
// mode of psi is stationary); the drift therefore carries a compensating
// identity term u, i.e. F_eps(u) = u + f(u) + eps g(u) u_xx + eps h(u)(u_x, u_x).

#include <cmath>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spde/constants.hpp"
#include "spde/polynomial.hpp"
#include "spde/spectral.hpp"

namespace spde {

/// Pointwise map R^n -> R^d writing into `out`.
using PointMap = std::function<void(std::span<const double> u, std::span<double> out)>;

/// f: R^n -> R^n; g: R^n -> R^{n x n} (row-major g_ij); dg: (Dg)_{ijk} = d_k g_ij
/// stored at (i n + j) n + k; h: h_{ijl} stored at (i n + j) n + l.
/// An empty callback means the term is identically zero.
struct ModelSpec {
  int n = 1;
  double nu = 1.0;
  PointMap f;
  PointMap g;
  PointMap dg;
  PointMap h;

  bool has_f() const { return static_cast<bool>(f); }
  bool has_g() const { return static_cast<bool>(g); }
  bool has_h() const { return static_cast<bool>(h); }

  void validate() const {
    if (n < 1) throw ConfigError("ModelSpec: n must be positive");
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("ModelSpec: nu must be positive");
    if (has_g() && !dg) throw ConfigError("ModelSpec: g given without its derivative Dg");
  }
};

/// Options for pseudospectral evaluation.
struct EvalOptions {
  int oversample = 2;
  double dealias = 2.0 / 3.0;
};

/// Which terms enter a drift evaluation:
///   identity * u + f(u) + correction * Tr(h - D_s g)(u)
///   + g_scale * g(u) u_xx + h_scale * h(u)(u_x (x) u_x).
struct DriftTerms {
  bool identity = true;
  double correction = 0.0;
  double g_scale = 0.0;
  double h_scale = 0.0;
};

namespace detail {

inline std::string describe_point(double x, std::span<const double> u) {
  std::ostringstream os;
  os.precision(17);
  os << "x=" << x << ", u=(";
  for (std::size_t i = 0; i < u.size(); ++i) os << (i ? "," : "") << u[i];
  os << ")";
  return os.str();
}

}  // namespace detail

/// Pseudospectral evaluation of a drift. Optionally reports the largest |u|
/// seen on the evaluation grid.
inline SpectralField evaluate_drift(const ModelSpec& spec, const DriftTerms& terms,
                                    const SpectralField& u, const EvalOptions& opts = {},
                                    double* max_abs_u = nullptr) {
  const int n = spec.n;
  if (u.components() != n) throw ConfigError("evaluate_drift: component count mismatch");
  const bool need_ux = terms.h_scale != 0.0 && spec.has_h();
  const bool need_uxx = terms.g_scale != 0.0 && spec.has_g();
  const bool need_trace = terms.correction != 0.0 && (spec.has_h() || spec.has_g());

  const GridField ug = to_grid(u, opts.oversample);
  GridField uxg, uxxg;
  if (need_ux) uxg = to_grid(derivative(u, 1), opts.oversample);
  if (need_uxx) uxxg = to_grid(derivative(u, 2), opts.oversample);

  const int m = ug.size;
  GridField out(n, m);
  std::vector<double> pt(n), ux(n), uxx(n), fo(n), go(n * n), to(n * n * n);
  double umax = 0.0;

  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      pt[i] = ug(i, j);
      umax = std::max(umax, std::abs(pt[i]));
      if (need_ux) ux[i] = uxg(i, j);
      if (need_uxx) uxx[i] = uxxg(i, j);
    }
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(pt[i]))
        throw NumericalError("non-finite field value at " + detail::describe_point(GridField::point(j, m), pt));
    }
    try {
      for (int i = 0; i < n; ++i) out(i, j) = terms.identity ? pt[i] : 0.0;
      if (spec.has_f()) {
        spec.f(pt, fo);
        for (int i = 0; i < n; ++i) out(i, j) += fo[i];
      }
      if (need_uxx) {
        spec.g(pt, go);
        for (int i = 0; i < n; ++i) {
          double s = 0.0;
          for (int q = 0; q < n; ++q) s += go[i * n + q] * uxx[q];
          out(i, j) += terms.g_scale * s;
        }
      }
      if (need_ux) {
        spec.h(pt, to);
        for (int i = 0; i < n; ++i) {
          double s = 0.0;
          for (int q = 0; q < n; ++q)
            for (int l = 0; l < n; ++l) s += to[(i * n + q) * n + l] * ux[q] * ux[l];
          out(i, j) += terms.h_scale * s;
        }
      }
      if (need_trace) {
        if (spec.has_h()) {
          spec.h(pt, to);
          for (int i = 0; i < n; ++i)
            for (int q = 0; q < n; ++q) out(i, j) += terms.correction * to[(i * n + q) * n + q];
        }
        if (spec.has_g()) {
          spec.dg(pt, to);
          for (int i = 0; i < n; ++i)
            for (int q = 0; q < n; ++q) out(i, j) -= terms.correction * to[(i * n + q) * n + q];
        }
      }
    } catch (const NumericalError&) {
      throw;
    } catch (const std::exception& e) {
      throw NumericalError(std::string("model callback failed at ") +
                           detail::describe_point(GridField::point(j, m), pt) + ": " + e.what());
    }
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(out(i, j)))
        throw NumericalError("model callback returned a non-finite value at " +
                             detail::describe_point(GridField::point(j, m), pt));
    }
  }
  if (max_abs_u) *max_abs_u = umax;
  return dealias(from_grid(out, u.max_mode()), opts.dealias);
}

/// Perturbed drift u + f(u) + eps g(u) u_xx + eps h(u)(u_x (x) u_x).
inline SpectralField eval_F_eps(const ModelSpec& spec, double eps, const SpectralField& u,
                                const EvalOptions& opts = {}) {
  return evaluate_drift(spec, {.identity = true, .correction = 0.0, .g_scale = eps, .h_scale = eps}, u, opts);
}

/// u + fbar(u) with fbar = f + correction * Tr(h - D_s g).
inline SpectralField eval_F_bar(const ModelSpec& spec, const SpectralField& u, double correction,
                                const EvalOptions& opts = {}) {
  return evaluate_drift(spec, {.identity = true, .correction = correction}, u, opts);
}

inline SpectralField eval_F_bar(const ModelSpec& spec, const SpectralField& u,
                                const EvalOptions& opts = {}) {
  return eval_F_bar(spec, u, white_noise_constant(spec.nu), opts);
}

/// fbar(u) = f(u) + correction * sum_j (h_ijj(u) - d_j g_ij(u)) as a pointwise map.
inline PointMap effective_drift(const ModelSpec& spec, double correction) {
  spec.validate();
  return [spec, correction](std::span<const double> u, std::span<double> out) {
    const int n = spec.n;
    for (int i = 0; i < n; ++i) out[i] = 0.0;
    std::vector<double> scratch(static_cast<std::size_t>(n) * n * n);
    if (spec.has_f()) spec.f(u, out);
    if (spec.has_h()) {
      spec.h(u, scratch);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[i] += correction * scratch[(i * n + j) * n + j];
    }
    if (spec.has_g()) {
      spec.dg(u, scratch);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[i] -= correction * scratch[(i * n + j) * n + j];
    }
  };
}

inline PointMap effective_drift(const ModelSpec& spec) {
  return effective_drift(spec, white_noise_constant(spec.nu));
}

/// G(u) = f(u) + h(u)(u_x (x) u_x); requires g = 0.
inline SpectralField eval_G(const ModelSpec& spec, const SpectralField& u, const EvalOptions& opts = {}) {
  if (spec.has_g()) throw ConfigError("eval_G: the g-term is not admissible in this variant");
  return evaluate_drift(spec, {.identity = false, .correction = 0.0, .g_scale = 0.0, .h_scale = 1.0}, u, opts);
}

/// Gbar(u) = f(u) + correction * Tr h(u) + h(u)(u_x (x) u_x); requires g = 0.
inline SpectralField eval_G_bar(const ModelSpec& spec, const SpectralField& u, double correction,
                                const EvalOptions& opts = {}) {
  if (spec.has_g()) throw ConfigError("eval_G_bar: the g-term is not admissible in this variant");
  return evaluate_drift(spec, {.identity = false, .correction = correction, .g_scale = 0.0, .h_scale = 1.0}, u,
                        opts);
}

inline SpectralField eval_G_bar(const ModelSpec& spec, const SpectralField& u, const EvalOptions& opts = {}) {
  return eval_G_bar(spec, u, white_noise_constant(spec.nu), opts);
}

/// Largest deviation between central finite differences of g and the supplied
/// Dg over the probe points.
inline double check_dg_consistency(const ModelSpec& spec, std::span<const std::vector<double>> probes,
                                   double delta = 1e-5) {
  if (!spec.has_g()) return 0.0;
  const int n = spec.n;
  double worst = 0.0;
  std::vector<double> gp(n * n), gm(n * n), d(n * n * n);
  for (const auto& p : probes) {
    spec.dg(p, d);
    for (int k = 0; k < n; ++k) {
      std::vector<double> up = p, um = p;
      up[k] += delta;
      um[k] -= delta;
      spec.g(up, gp);
      spec.g(um, gm);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double fd = (gp[i * n + j] - gm[i * n + j]) / (2.0 * delta);
          worst = std::max(worst, std::abs(fd - d[(i * n + j) * n + k]));
        }
    }
  }
  return worst;
}

/// Potential V with temperature T and mass m for the path-sampling models.
struct PotentialSpec {
  int n = 1;
  double temperature = 1.0;
  double mass = 0.0;
  std::function<double(std::span<const double>)> V;
  PointMap DV;   // n
  PointMap D2V;  // n x n
  PointMap D3V;  // n x n x n
};

/// Potential with symbolically differentiated derivative callbacks.
inline PotentialSpec potential_from_polynomial(const Polynomial& v, double temperature, double mass) {
  const int n = v.variables();
  std::vector<Polynomial> d1;
  std::vector<Polynomial> d2;
  std::vector<Polynomial> d3;
  for (int i = 0; i < n; ++i) d1.push_back(v.derivative(i));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d2.push_back(d1[i].derivative(j));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) d3.push_back(d2[i * n + j].derivative(l));
  PotentialSpec p;
  p.n = n;
  p.temperature = temperature;
  p.mass = mass;
  p.V = [v](std::span<const double> u) { return v(u); };
  auto fill = [](std::vector<Polynomial> polys) {
    return [polys = std::move(polys)](std::span<const double> u, std::span<double> out) {
      for (std::size_t q = 0; q < polys.size(); ++q) out[q] = polys[q](u);
    };
  };
  p.DV = fill(d1);
  p.D2V = fill(d2);
  p.D3V = fill(d3);
  return p;
}

/// Maps a potential onto the model family:
///   eps = m / sqrt(2T), nu = 1/(2T), f_i = -d_ij V d_j V / (2T),
///   g_ij = -2 d_ij V / sqrt(2T), h_ijl = -d_ijl V / sqrt(2T).
inline std::pair<ModelSpec, double> from_potential(const PotentialSpec& p) {
  if (!(p.temperature > 0.0)) throw ConfigError("from_potential: temperature must be positive");
  if (!(p.mass >= 0.0)) throw ConfigError("from_potential: mass must be non-negative");
  const int n = p.n;
  const double two_t = 2.0 * p.temperature;
  const double root = std::sqrt(two_t);
  ModelSpec spec;
  spec.n = n;
  spec.nu = 1.0 / two_t;
  spec.f = [p, n, two_t](std::span<const double> u, std::span<double> out) {
    std::vector<double> dv(n), d2v(n * n);
    p.DV(u, dv);
    p.D2V(u, d2v);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += d2v[i * n + j] * dv[j];
      out[i] = -s / two_t;
    }
  };
  spec.g = [p, n, root](std::span<const double> u, std::span<double> out) {
    p.D2V(u, out.first(n * n));
    for (int q = 0; q < n * n; ++q) out[q] *= -2.0 / root;
  };
  spec.dg = [p, n, root](std::span<const double> u, std::span<double> out) {
    p.D3V(u, out.first(n * n * n));
    for (int q = 0; q < n * n * n; ++q) out[q] *= -2.0 / root;
  };
  spec.h = [p, n, root](std::span<const double> u, std::span<double> out) {
    p.D3V(u, out.first(n * n * n));
    for (int q = 0; q < n * n * n; ++q) out[q] *= -1.0 / root;
  };
  return {std::move(spec), p.mass / root};
}

/// max over probes and components of
/// |fbar_i(u) - (-(1/2T) d_ij V d_j V + (1/2) d_ijj V)|.
inline double check_effective_drift_identity(const PotentialSpec& p,
                                             std::span<const std::vector<double>> probes) {
  const auto [spec, eps] = from_potential(p);
  (void)eps;
  const PointMap fbar = effective_drift(spec);
  const int n = p.n;
  std::vector<double> lhs(n), dv(n), d2v(n * n), d3v(n * n * n);
  double worst = 0.0;
  for (const auto& u : probes) {
    fbar(u, lhs);
    p.DV(u, dv);
    p.D2V(u, d2v);
    p.D3V(u, d3v);
    for (int i = 0; i < n; ++i) {
      double s = 0.0, tr = 0.0;
      for (int j = 0; j < n; ++j) s += d2v[i * n + j] * dv[j];
      for (int j = 0; j < n; ++j) tr += d3v[(i * n + j) * n + j];
      const double rhs = -s / (2.0 * p.temperature) + 0.5 * tr;
      worst = std::max(worst, std::abs(lhs[i] - rhs));
    }
  }
  return worst;
}

}  // namespace spde

#pragma once

// Correction constants multiplying Tr(h - D_s g) in the effective drift, and
// the lattice-sum diagnostics behind them.

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "spde/spectral_field.hpp"

namespace spde {

enum class TailStrategy {
  kInversion,   // [1, inf) mapped onto (0, 1] via x -> 1/x
  kTruncation,  // integrate [1, X], add the leading algebraic tail terms
};

struct QuadratureConfig {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  std::size_t max_refinements = 15;
  TailStrategy tail = TailStrategy::kInversion;
  double truncation_point = 1e3;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw ConfigError("QuadratureConfig: tolerances must be positive");
    if (!(truncation_point > 1.0)) throw ConfigError("QuadratureConfig: truncation point must exceed 1");
  }
};

namespace detail {

/// Integral over [a, b] with an error check against the configured tolerances.
template <typename F>
double integrate(F&& f, double a, double b, const QuadratureConfig& quad) {
  boost::math::quadrature::tanh_sinh<double> integrator(quad.max_refinements);
  double err = 0.0;
  double l1 = 0.0;
  const double value = integrator.integrate(f, a, b, quad.rel_tol, &err, &l1);
  if (!std::isfinite(value) || err > std::max(quad.abs_tol, 10.0 * quad.rel_tol * std::abs(value)))
    throw NumericalError("quadrature did not reach the requested tolerance");
  return value;
}

}  // namespace detail

/// 1 / (2 sqrt(nu)).
inline double white_noise_constant(double nu) {
  if (!(nu > 0.0)) throw ConfigError("white_noise_constant: nu must be positive");
  return 0.5 / std::sqrt(nu);
}

/// (1 / (pi nu^{alpha + 1/2})) int_0^inf dx / (x^{2 alpha} (1 + x^2)),
/// for noise with covariance (-d_x^2)^{-alpha}, alpha in (0, 1/2).
inline double alpha_constant(double nu, double alpha, const QuadratureConfig& quad = {}) {
  if (!(nu > 0.0)) throw ConfigError("alpha_constant: nu must be positive");
  if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("alpha_constant: alpha must lie in (0, 1/2)");
  quad.validate();
  const double p = 1.0 - 2.0 * alpha;
  // [0, 1]: substitute y = x^{1 - 2 alpha}, which removes the endpoint singularity.
  const double head = detail::integrate(
      [p](double y) {
        const double x = std::pow(y, 1.0 / p);
        return 1.0 / (p * (1.0 + x * x));
      },
      0.0, 1.0, quad);
  double tail = 0.0;
  if (quad.tail == TailStrategy::kInversion) {
    tail = detail::integrate([alpha](double t) { return std::pow(t, 2.0 * alpha) / (1.0 + t * t); }, 0.0, 1.0, quad);
  } else {
    const double xmax = quad.truncation_point;
    tail = detail::integrate([alpha](double x) { return std::pow(x, -2.0 * alpha) / (1.0 + x * x); }, 1.0, xmax, quad);
    tail += std::pow(xmax, -2.0 * alpha - 1.0) / (2.0 * alpha + 1.0) -
            std::pow(xmax, -2.0 * alpha - 3.0) / (2.0 * alpha + 3.0);
  }
  return (head + tail) / (kPi * std::pow(nu, alpha + 0.5));
}

/// Checks Q(0) = 1, positive leading coefficient, degree >= 1 and Q > 0 on
/// [0, inf) (sampled up to the Cauchy root bound, beyond which Q > 0).
inline void validate_symbol_polynomial(const std::vector<double>& q) {
  if (q.size() < 2 || q.back() == 0.0) throw ConfigError("Q must have degree >= 1");
  if (q.front() != 1.0) throw ConfigError("Q(0) must equal 1");
  if (!(q.back() > 0.0)) throw ConfigError("Q must have a positive leading coefficient");
  double bound = 0.0;
  for (std::size_t i = 0; i + 1 < q.size(); ++i) bound = std::max(bound, std::abs(q[i] / q.back()));
  bound += 1.0;
  constexpr int kSamples = 8192;
  for (int s = 0; s <= kSamples; ++s) {
    const double y = bound * s / kSamples;
    double acc = 0.0;
    for (auto it = q.rbegin(); it != q.rend(); ++it) acc = acc * y + *it;
    if (!(acc > 0.0)) throw ConfigError("Q takes a non-positive value on [0, inf)");
  }
}

/// (1 / (pi nu)) int_0^inf dx / Q(x^2) for the operator nu Q(-eps^2 d_x^2) d_x^2.
inline double poly_constant(double nu, const std::vector<double>& q, const QuadratureConfig& quad = {}) {
  if (!(nu > 0.0)) throw ConfigError("poly_constant: nu must be positive");
  validate_symbol_polynomial(q);
  quad.validate();
  const auto d = static_cast<int>(q.size()) - 1;
  auto q_of = [&q](double y) {
    double acc = 0.0;
    for (auto it = q.rbegin(); it != q.rend(); ++it) acc = acc * y + *it;
    return acc;
  };
  const double head = detail::integrate([&](double x) { return 1.0 / q_of(x * x); }, 0.0, 1.0, quad);
  double tail = 0.0;
  if (quad.tail == TailStrategy::kInversion) {
    // x = 1/t: dx / Q(x^2) = t^{2d-2} / R(t^2) dt with R the reversed polynomial.
    tail = detail::integrate(
        [&](double t) {
          const double s = t * t;
          double r = 0.0;
          for (double c : q) r = r * s + c;
          return std::pow(t, 2 * d - 2) / r;
        },
        0.0, 1.0, quad);
  } else {
    const double xmax = quad.truncation_point;
    tail = detail::integrate([&](double x) { return 1.0 / q_of(x * x); }, 1.0, xmax, quad);
    const double lead = q[d];
    const double next = q[d - 1];
    tail += std::pow(xmax, 1.0 - 2.0 * d) / (lead * (2.0 * d - 1.0)) -
            next / (lead * lead) * std::pow(xmax, -1.0 - 2.0 * d) / (2.0 * d + 1.0);
  }
  return (head + tail) / (kPi * nu);
}

/// (eps / 2pi) sum_{0 < |k| <= N} k^2 / (1 + nu k^2 + eps^2 k^4): the mean of
/// eps (d_x psi^eps)^2 when psi^eps is truncated at mode N. Tends to
/// 1/(2 sqrt(nu)) as eps -> 0 with eps N -> inf.
inline double truncation_matched_constant(double nu, double eps, int max_mode) {
  if (!(nu > 0.0)) throw ConfigError("truncation_matched_constant: nu must be positive");
  if (max_mode < 1) throw ConfigError("truncation_matched_constant: N must be >= 1");
  double sum = 0.0;
  for (int k = max_mode; k >= 1; --k) {
    const double k2 = static_cast<double>(k) * k;
    sum += k2 / (1.0 + nu * k2 + eps * eps * k2 * k2);
  }
  return eps * sum / kPi;
}

/// sum_{k in Z} s(k) for an even function s, summing |k| < K directly and
/// closing the tail with Euler-Maclaurin (integral, half endpoint, first
/// derivative correction). `tail` is the integrand of int_K^inf s after the
/// substitution x = K/t, i.e. s(K/t) K / t^2 on (0, 1], written so that it
/// stays finite as t -> 0.
inline double lattice_sum(const std::function<double(double)>& s, const std::function<double(double)>& ds,
                          const std::function<double(double)>& tail, long cutoff,
                          const QuadratureConfig& quad = {}) {
  double direct = 0.0;
  for (long k = cutoff - 1; k >= 1; --k) direct += s(static_cast<double>(k));
  const double kk = static_cast<double>(cutoff);
  const double integral = detail::integrate(tail, 0.0, 1.0, quad);
  const double rest = integral + 0.5 * s(kk) - ds(kk) / 12.0;
  return s(0.0) + 2.0 * (direct + rest);
}

/// |T_nu - sum_{k in Z} eps sigma_k| with T_nu = pi / sqrt(nu) and
/// sigma_k = k^2 / (1 + nu k^2 + eps^2 k^4).
inline double riemann_gap(double nu, double eps, const QuadratureConfig& quad = {}) {
  if (!(nu > 0.0)) throw ConfigError("riemann_gap: nu must be positive");
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("riemann_gap: eps must lie in (0, 1]");
  auto sigma = [nu, eps](double x) {
    const double x2 = x * x;
    return eps * x2 / (1.0 + nu * x2 + eps * eps * x2 * x2);
  };
  auto dsigma = [nu, eps](double x) {
    const double x2 = x * x;
    const double den = 1.0 + nu * x2 + eps * eps * x2 * x2;
    const double dden = 2.0 * nu * x + 4.0 * eps * eps * x2 * x;
    return eps * (2.0 * x * den - x2 * dden) / (den * den);
  };
  // Euler-Maclaurin remainder after the first-derivative term is about
  // 1 / (30 eps K^5); the cutoff keeps it far below 1e-12.
  const long cutoff = static_cast<long>(std::ceil(std::max(1000.0, 64.0 / eps)));
  const double kk = static_cast<double>(cutoff);
  auto tail = [nu, eps, kk](double t) {
    const double t2 = t * t;
    return eps * kk * kk * kk / (t2 * t2 + nu * kk * kk * t2 + eps * eps * kk * kk * kk * kk);
  };
  const double total = lattice_sum(sigma, dsigma, tail, cutoff, quad);
  return std::abs(kPi / std::sqrt(nu) - total);
}

}  // namespace spde

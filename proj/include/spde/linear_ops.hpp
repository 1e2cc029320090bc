#pragma once

#include <cmath>
#include <vector>

#include "spde/spectral_field.hpp"

namespace spde {

/// Fourier multiplier nu Q(-eps^2 d_x^2) d_x^2 - 1 with Q(0) = 1 and positive
/// leading coefficient. The canonical choice Q(y) = 1 + y/nu gives
/// nu d_x^2 - 1 - eps^2 d_x^4.
class OperatorSpec {
 public:
  OperatorSpec() : OperatorSpec(1.0, 0.0) {}

  OperatorSpec(double nu, double eps) : OperatorSpec(nu, eps, {1.0, 1.0 / nu}) {}

  OperatorSpec(double nu, double eps, std::vector<double> poly_q)
      : nu_(nu), eps_(eps), q_(std::move(poly_q)) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("OperatorSpec: nu must be positive");
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw ConfigError("OperatorSpec: eps must be non-negative");
    while (q_.size() > 1 && q_.back() == 0.0) q_.pop_back();
    if (q_.empty() || q_.front() != 1.0) throw ConfigError("OperatorSpec: Q(0) must equal 1");
    if (!(q_.back() > 0.0)) throw ConfigError("OperatorSpec: Q needs a positive leading coefficient");
  }

  double nu() const { return nu_; }
  double eps() const { return eps_; }
  const std::vector<double>& poly_q() const { return q_; }

  bool is_canonical() const {
    return q_.size() == 2 && std::abs(q_[1] - 1.0 / nu_) <= 1e-14 / nu_;
  }

  double q_at(double y) const {
    double acc = 0.0;
    for (auto it = q_.rbegin(); it != q_.rend(); ++it) acc = acc * y + *it;
    return acc;
  }

  /// lambda_k = -(1 + nu k^2 Q(eps^2 k^2)).
  double symbol(long k) const {
    const double k2 = static_cast<double>(k) * static_cast<double>(k);
    if (k == 0) return -1.0;
    return -(1.0 + nu_ * k2 * q_at(eps_ * eps_ * k2));
  }

  bool operator==(const OperatorSpec& o) const {
    return nu_ == o.nu_ && eps_ == o.eps_ && q_ == o.q_;
  }

 private:
  double nu_;
  double eps_;
  std::vector<double> q_;
};

inline double symbol(const OperatorSpec& op, long k) { return op.symbol(k); }

/// Diagonal semigroup action: mode k multiplied by exp(lambda_k t).
inline SpectralField apply_semigroup(const OperatorSpec& op, const SpectralField& field, double t) {
  if (!(t >= 0.0)) throw ConfigError("apply_semigroup: t must be non-negative");
  SpectralField out = field;
  for (int k = 0; k <= field.max_mode(); ++k) {
    const double factor = std::exp(op.symbol(k) * t);
    for (int i = 0; i < field.components(); ++i) out(i, k) *= factor;
  }
  return out;
}

/// (exp(lambda h) - 1) / lambda, the exact integral of exp(lambda (h - s))
/// over [0, h].
inline double etd_weight(double lambda, double h) {
  if (!(h > 0.0)) throw ConfigError("etd_weight: h must be positive");
  const double x = lambda * h;
  if (std::abs(x) < 1e-5) return h * (1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0);
  return std::expm1(x) / lambda;
}

/// |exp(lambda^eps_k t) - exp(lambda^0_k t)| for the canonical operator,
/// written as s_k(t) (1 - exp(-eps^2 k^4 t)).
inline double semigroup_gap(const OperatorSpec& op_eps, long k, double t) {
  if (!op_eps.is_canonical())
    throw ConfigError("semigroup_gap: defined only for the canonical fourth-order operator");
  if (!(t > 0.0)) throw ConfigError("semigroup_gap: t must be positive");
  const double k2 = static_cast<double>(k) * static_cast<double>(k);
  const double base = std::exp(-(1.0 + op_eps.nu() * k2) * t);
  const double e2 = op_eps.eps() * op_eps.eps();
  return base * -std::expm1(-e2 * k2 * k2 * t);
}

}  // namespace spde

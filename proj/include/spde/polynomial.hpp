#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "spde/spectral_field.hpp"

namespace spde {

/// Sparse real polynomial in n variables with exact symbolic derivatives.
class Polynomial {
 public:
  using Exponents = std::vector<int>;

  explicit Polynomial(int n_vars = 1) : n_(n_vars) {
    if (n_vars < 1) throw ConfigError("Polynomial: need at least one variable");
  }

  /// Univariate polynomial from coefficients c0 + c1 x + c2 x^2 + ...
  static Polynomial univariate(std::span<const double> coeffs) {
    Polynomial p(1);
    for (std::size_t d = 0; d < coeffs.size(); ++d) p.add_term({static_cast<int>(d)}, coeffs[d]);
    return p;
  }

  int variables() const { return n_; }

  void add_term(Exponents exps, double coeff) {
    if (static_cast<int>(exps.size()) != n_) throw ConfigError("Polynomial: exponent arity mismatch");
    if (std::any_of(exps.begin(), exps.end(), [](int e) { return e < 0; }))
      throw ConfigError("Polynomial: negative exponent");
    if (coeff == 0.0) return;
    terms_[exps] += coeff;
  }

  const std::map<Exponents, double>& terms() const { return terms_; }

  int degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) {
      int s = 0;
      for (int x : e) s += x;
      d = std::max(d, s);
    }
    return d;
  }

  double operator()(std::span<const double> x) const {
    double acc = 0.0;
    for (const auto& [e, c] : terms_) {
      double t = c;
      for (int v = 0; v < n_; ++v)
        for (int p = 0; p < e[v]; ++p) t *= x[v];
      acc += t;
    }
    return acc;
  }

  Polynomial derivative(int var) const {
    Polynomial d(n_);
    for (const auto& [e, c] : terms_) {
      if (e[var] == 0) continue;
      Exponents lowered = e;
      --lowered[var];
      d.add_term(std::move(lowered), c * e[var]);
    }
    return d;
  }

 private:
  int n_;
  std::map<Exponents, double> terms_;
};

}  // namespace spde

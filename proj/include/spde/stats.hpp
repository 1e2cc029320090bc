#pragma once

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "spde/spectral_field.hpp"

namespace spde {

/// Pairwise summation; the result depends only on the order of `xs`.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return std::nan("");
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

/// Standard error of the mean (sample standard deviation / sqrt(n)).
inline double standard_error(std::span<const double> xs) {
  if (xs.size() < 2) return std::nan("");
  const double m = mean(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - m) * (xs[i] - m);
  const double var = pairwise_sum(sq) / static_cast<double>(xs.size() - 1);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

/// Linear-interpolation quantile (type 7).
inline double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) return std::nan("");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("quantile: level must lie in [0, 1]");
  std::sort(xs.begin(), xs.end());
  const double pos = p * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t points = 0;
};

/// Least squares of log y on log x with optional weights; 95% CI for the
/// slope from the t distribution with n - 2 degrees of freedom.
inline LogLogFit regress_loglog(std::span<const double> x, std::span<const double> y,
                                std::span<const double> weights = {}) {
  const std::size_t n = x.size();
  if (y.size() != n) throw ConfigError("regress_loglog: x and y differ in length");
  if (!weights.empty() && weights.size() != n) throw ConfigError("regress_loglog: weight count mismatch");
  if (n < 3) throw ConfigError("regress_loglog: need at least 3 points");
  std::vector<double> lx(n), ly(n), w(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ConfigError("regress_loglog: x and y must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    if (!weights.empty()) {
      if (!(weights[i] > 0.0)) throw ConfigError("regress_loglog: weights must be positive");
      w[i] = weights[i];
    }
  }
  double sw = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    mx += w[i] * lx[i];
    my += w[i] * ly[i];
  }
  mx /= sw;
  my /= sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (lx[i] - mx) * (lx[i] - mx);
    sxy += w[i] * (lx[i] - mx) * (ly[i] - my);
    syy += w[i] * (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 1e-300)) throw ConfigError("regress_loglog: degenerate x values");
  LogLogFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    sse += w[i] * r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  // Weights are treated as relative precisions: the residual variance is
  // estimated from the weighted residuals.
  const double dof = static_cast<double>(n - 2);
  const double se = std::sqrt(sse / dof / sxx);
  const boost::math::students_t dist(dof);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  fit.ci_low = fit.slope - t * se;
  fit.ci_high = fit.slope + t * se;
  return fit;
}

}  // namespace spde

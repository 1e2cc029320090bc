#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

#include "spde/fft.hpp"
#include "spde/spectral_field.hpp"

namespace spde {

/// Grid size used for a field with maximal mode N:
/// oversample * 2^ceil(log2(2N + 2)).
inline int grid_size_for(int max_mode, int oversample) {
  if (oversample < 1) throw ConfigError("oversample must be >= 1");
  return oversample * static_cast<int>(std::bit_ceil(static_cast<unsigned>(2 * max_mode + 2)));
}

/// Evaluates the trigonometric polynomial on a uniform grid.
inline GridField to_grid(const SpectralField& field, int oversample = 1) {
  const int m = grid_size_for(field.max_mode(), oversample);
  GridField grid(field.components(), m);
  std::vector<cplx> half(m / 2 + 1);
  const double scale = 1.0 / kSqrtTwoPi;
  for (int i = 0; i < field.components(); ++i) {
    std::fill(half.begin(), half.end(), cplx{});
    for (int k = 0; k <= field.max_mode(); ++k) half[k] = field(i, k) * scale;
    half[0].imag(0.0);
    fft::inverse_real(half, grid.component(i));
  }
  return grid;
}

/// Coefficients of the trigonometric interpolant of grid values, restricted
/// to |k| <= max_mode.
inline SpectralField from_grid(const GridField& grid, int max_mode) {
  if (max_mode < 0 || max_mode > grid.size / 2 - 1)
    throw ConfigError("from_grid: max_mode must be <= grid_size/2 - 1");
  SpectralField field(grid.components, max_mode);
  std::vector<cplx> half(grid.size / 2 + 1);
  const double scale = kSqrtTwoPi / grid.size;
  for (int i = 0; i < grid.components; ++i) {
    fft::forward_real(grid.component(i), half);
    for (int k = 0; k <= max_mode; ++k) field(i, k) = half[k] * scale;
  }
  field.enforce_real_mean();
  return field;
}

/// Multiplies mode k by (ik)^order.
inline SpectralField derivative(const SpectralField& field, int order) {
  if (order < 0) throw ConfigError("derivative: order must be non-negative");
  SpectralField out = field;
  if (order == 0) return out;
  for (int k = 0; k <= field.max_mode(); ++k) {
    // (ik)^order, built from the cycle 1, i, -1, -i.
    const double mag = std::pow(static_cast<double>(k), order);
    cplx factor;
    switch (order % 4) {
      case 0: factor = {mag, 0.0}; break;
      case 1: factor = {0.0, mag}; break;
      case 2: factor = {-mag, 0.0}; break;
      default: factor = {0.0, -mag}; break;
    }
    for (int i = 0; i < field.components(); ++i) out(i, k) *= factor;
  }
  return out;
}

/// sqrt( sum_i sum_{|k|<=N} (1 + nu k^2)^alpha |u_{i,k}|^2 ), negative modes
/// counted through Hermitian symmetry.
inline double sobolev_norm(const SpectralField& field, double alpha, double nu) {
  double total = 0.0;
  for (int i = 0; i < field.components(); ++i) {
    total += std::norm(field(i, 0));
    for (int k = 1; k <= field.max_mode(); ++k) {
      const double w = std::pow(1.0 + nu * k * static_cast<double>(k), alpha);
      total += 2.0 * w * std::norm(field(i, k));
    }
  }
  return std::sqrt(total);
}

/// Maximum of |u_i(x_j)| over components and a 4x oversampled grid.
inline double sup_norm(const SpectralField& field) {
  const GridField grid = to_grid(field, 4);
  double m = 0.0;
  for (double v : grid.values) m = std::max(m, std::abs(v));
  return m;
}

/// Zeroes every mode with |k| > floor(cutoff_fraction * N).
inline SpectralField dealias(const SpectralField& field, double cutoff_fraction = 2.0 / 3.0) {
  if (!(cutoff_fraction > 0.0 && cutoff_fraction <= 1.0))
    throw ConfigError("dealias: cutoff_fraction must lie in (0, 1]");
  SpectralField out = field;
  const int keep = static_cast<int>(std::floor(cutoff_fraction * field.max_mode() + 1e-12));
  for (int i = 0; i < field.components(); ++i)
    for (int k = keep + 1; k <= field.max_mode(); ++k) out(i, k) = {};
  return out;
}

}  // namespace spde

#pragma once

// Exact sampling of the stationary stochastic convolutions psi^eps, one
// Ornstein-Uhlenbeck process per Fourier mode and component, jointly over
// several operator levels driven by a single cylindrical Wiener process.
//
// For levels with rates a_i = |lambda_i| at a fixed mode the stationary
// cross-covariance is E psi_i conj(psi_j) = 2 / (a_i + a_j), and an exact
// step of length h adds an increment with covariance
// 2 (1 - exp(-(a_i + a_j) h)) / (a_i + a_j). For k != 0 the variance is split
// evenly between real and imaginary parts; k = 0 is real.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "spde/linear_ops.hpp"
#include "spde/random.hpp"
#include "spde/spectral_field.hpp"

namespace spde {

namespace detail {

/// Lower Cholesky factor of the Cauchy matrix C_ij = 2 / (a_i + a_j), in
/// closed form (Gram matrix of exp(-a_i s / 2) on [0, inf), orthogonalised
/// by the Takenaka-Malmquist basis). Free of cancellation for close a_i.
inline std::vector<double> cauchy_cholesky(const std::vector<double>& a) {
  const std::size_t m = a.size();
  std::vector<double> l(m * m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double diag_sign = 1.0;
    {
      double prod = 1.0;
      for (std::size_t q = 0; q < j; ++q) prod *= (a[j] - a[q]) / (a[j] + a[q]);
      diag_sign = prod < 0.0 ? -1.0 : 1.0;
    }
    for (std::size_t i = j; i < m; ++i) {
      double prod = 1.0;
      for (std::size_t q = 0; q < j; ++q) prod *= (a[i] - a[q]) / (a[i] + a[q]);
      l[i * m + j] = diag_sign * std::sqrt(a[j]) * 2.0 / (a[i] + a[j]) * prod;
    }
  }
  return l;
}

/// In-place lower Cholesky factorisation of a symmetric positive
/// semi-definite matrix. Pivots that round to <= 0 are treated as exact
/// degeneracy (column set to zero).
inline void cholesky_psd(std::vector<double>& c, std::size_t m) {
  for (std::size_t j = 0; j < m; ++j) {
    double d = c[j * m + j];
    for (std::size_t q = 0; q < j; ++q) d -= c[j * m + q] * c[j * m + q];
    const double scale = std::abs(c[j * m + j]);
    if (!(d > 1e-14 * scale)) {
      for (std::size_t i = j; i < m; ++i) c[i * m + j] = 0.0;
      continue;
    }
    const double ljj = std::sqrt(d);
    c[j * m + j] = ljj;
    for (std::size_t i = j + 1; i < m; ++i) {
      double s = c[i * m + j];
      for (std::size_t q = 0; q < j; ++q) s -= c[i * m + q] * c[j * m + q];
      c[i * m + j] = s / ljj;
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) c[i * m + j] = 0.0;
}

}  // namespace detail

/// Joint state of psi at every level, all modes 0..N and all components.
/// Duplicate levels share one underlying process and are bitwise identical.
class CoupledOUState {
 public:
  CoupledOUState(std::vector<OperatorSpec> levels, int n_components, int max_mode,
                 NoiseStream stream)
      : levels_(std::move(levels)), n_(n_components), max_mode_(max_mode), stream_(stream) {
    if (levels_.empty()) throw ConfigError("CoupledOUState: at least one level required");
    if (n_components < 1 || max_mode < 0) throw ConfigError("CoupledOUState: bad shape");
    for (const auto& op : levels_) {
      if (op.nu() != levels_.front().nu()) throw ConfigError("CoupledOUState: levels must share nu");
      auto it = std::find(unique_.begin(), unique_.end(), op);
      if (it == unique_.end()) {
        unique_of_level_.push_back(static_cast<int>(unique_.size()));
        unique_.push_back(op);
      } else {
        unique_of_level_.push_back(static_cast<int>(it - unique_.begin()));
      }
    }
    psi_.assign(unique_.size() * n_ * (max_mode_ + 1), cplx{});
  }

  const std::vector<OperatorSpec>& levels() const { return levels_; }
  int level_count() const { return static_cast<int>(levels_.size()); }
  int components() const { return n_; }
  int max_mode() const { return max_mode_; }
  double time() const { return time_; }
  std::uint64_t step_count() const { return step_; }
  const NoiseStream& stream() const { return stream_; }

  cplx psi(int level, int i, int k) const { return psi_[index(unique_of_level_.at(level), i, k)]; }

  /// psi at one level as a SpectralField.
  SpectralField field(int level) const {
    SpectralField f(n_, max_mode_);
    const int u = unique_of_level_.at(level);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k <= max_mode_; ++k) f(i, k) = psi_[index(u, i, k)];
    return f;
  }

  /// scale * psi(level) added to the target (same shape).
  void add_to(SpectralField& target, int level, double scale = 1.0) const {
    const int u = unique_of_level_.at(level);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k <= max_mode_; ++k) target(i, k) += scale * psi_[index(u, i, k)];
  }

  /// Index of the first level with the given eps and canonical symbol, or -1.
  int find_level(double eps) const {
    for (int l = 0; l < level_count(); ++l)
      if (levels_[l].eps() == eps && levels_[l].is_canonical()) return l;
    return -1;
  }

  /// Draws every mode from the joint stationary law.
  void resample_stationary() {
    const std::size_t m = unique_.size();
    std::vector<double> a(m);
    for (int k = 0; k <= max_mode_; ++k) {
      for (std::size_t u = 0; u < m; ++u) a[u] = -unique_[u].symbol(k);
      const auto l = detail::cauchy_cholesky(a);
      apply_factor(l, k, StreamPurpose::kStationary, 0, /*accumulate=*/false);
    }
  }

  /// Exact transition over a step of length h.
  void advance(double h) {
    if (!(h > 0.0)) throw ConfigError("step_coupled: h must be positive");
    if (h != cached_h_) build_transition(h);
    const std::size_t m = unique_.size();
    for (int k = 0; k <= max_mode_; ++k) {
      for (std::size_t u = 0; u < m; ++u) {
        const double d = decay_[k * m + u];
        for (int i = 0; i < n_; ++i) psi_[index(static_cast<int>(u), i, k)] *= d;
      }
      const std::span<const double> l(chol_.data() + static_cast<std::size_t>(k) * m * m, m * m);
      apply_factor(l, k, StreamPurpose::kIncrement, step_ + 1, /*accumulate=*/true);
    }
    ++step_;
    time_ += h;
  }

 private:
  std::size_t index(int u, int i, int k) const {
    return (static_cast<std::size_t>(u) * n_ + i) * (max_mode_ + 1) + k;
  }

  void build_transition(double h) {
    const std::size_t m = unique_.size();
    decay_.assign((max_mode_ + 1) * m, 0.0);
    chol_.assign((max_mode_ + 1) * m * m, 0.0);
    std::vector<double> a(m), c(m * m);
    for (int k = 0; k <= max_mode_; ++k) {
      for (std::size_t u = 0; u < m; ++u) {
        a[u] = -unique_[u].symbol(k);
        decay_[k * m + u] = std::exp(-a[u] * h);
      }
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          const double s = a[i] + a[j];
          c[i * m + j] = -2.0 * std::expm1(-s * h) / s;
        }
      detail::cholesky_psd(c, m);
      std::copy(c.begin(), c.end(), chol_.begin() + static_cast<std::ptrdiff_t>(k * m * m));
    }
    cached_h_ = h;
  }

  template <typename Factor>
  void apply_factor(const Factor& l, int k, StreamPurpose purpose, std::uint64_t step,
                    bool accumulate) {
    const std::size_t m = unique_.size();
    thread_local std::vector<cplx> z;
    z.resize(m);
    for (int i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (k == 0) {
          const auto pair = stream_.normal_pair(purpose, step, 0, static_cast<std::uint32_t>(i),
                                                static_cast<std::uint32_t>(j));
          z[j] = {pair[0], 0.0};
        } else {
          z[j] = stream_.complex_normal(purpose, step, static_cast<std::uint32_t>(k),
                                        static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        }
      }
      for (std::size_t r = 0; r < m; ++r) {
        cplx s{};
        for (std::size_t j = 0; j <= r; ++j) s += l[r * m + j] * z[j];
        auto& slot = psi_[index(static_cast<int>(r), i, k)];
        slot = accumulate ? slot + s : s;
      }
    }
  }

  std::vector<OperatorSpec> levels_;
  std::vector<OperatorSpec> unique_;
  std::vector<int> unique_of_level_;
  int n_;
  int max_mode_;
  NoiseStream stream_;
  double time_ = 0.0;
  std::uint64_t step_ = 0;
  std::vector<cplx> psi_;

  double cached_h_ = -1.0;
  std::vector<double> decay_;
  std::vector<double> chol_;
};

/// Joint stationary draw at every level.
inline CoupledOUState sample_stationary(std::vector<OperatorSpec> levels, int n_components,
                                        int max_mode, const NoiseStream& stream) {
  CoupledOUState state(std::move(levels), n_components, max_mode, stream);
  state.resample_stationary();
  return state;
}

/// Exact coupled transition over h; the input state is left untouched.
inline CoupledOUState step_coupled(CoupledOUState state, double h) {
  state.advance(h);
  return state;
}

/// E|psi^eps_k - psi^0_k|^2 = 1/a_eps + 1/a_0 - 4/(a_eps + a_0), evaluated
/// as (a_eps - a_0)^2 / (a_eps a_0 (a_eps + a_0)).
inline double psi_diff_moment(double nu, double eps, long k) {
  const double k2 = static_cast<double>(k) * static_cast<double>(k);
  const double a0 = 1.0 + nu * k2;
  const double diff = eps * eps * k2 * k2;
  const double ae = a0 + diff;
  return diff * diff / (ae * a0 * (ae + a0));
}

}  // namespace spde

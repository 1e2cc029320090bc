#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spde {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline const double kSqrtTwoPi = std::sqrt(kTwoPi);

/// Raised for malformed configuration or violated preconditions.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation produces non-finite values or otherwise fails
/// numerically.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// R^n-valued 2pi-periodic field stored as Fourier coefficients in the basis
/// e_k(x) = exp(ikx)/sqrt(2pi). Only modes k = 0..N are stored; the
/// coefficient of mode -k is the complex conjugate of mode k.
class SpectralField {
 public:
  SpectralField() = default;

  SpectralField(int n_components, int max_mode)
      : n_(n_components), max_mode_(max_mode),
        coeffs_(static_cast<std::size_t>(n_components) * (max_mode + 1)) {
    if (n_components < 1) throw ConfigError("SpectralField: n_components must be positive");
    if (max_mode < 0) throw ConfigError("SpectralField: max_mode must be non-negative");
  }

  int components() const { return n_; }
  int max_mode() const { return max_mode_; }
  int modes() const { return max_mode_ + 1; }

  cplx& operator()(int i, int k) { return coeffs_[index(i, k)]; }
  const cplx& operator()(int i, int k) const { return coeffs_[index(i, k)]; }

  /// Coefficient at any signed mode, using Hermitian symmetry for k < 0.
  cplx at(int i, int k) const {
    if (std::abs(k) > max_mode_) return {};
    return k >= 0 ? (*this)(i, k) : std::conj((*this)(i, -k));
  }

  std::span<cplx> component(int i) {
    return {coeffs_.data() + index(i, 0), static_cast<std::size_t>(modes())};
  }
  std::span<const cplx> component(int i) const {
    return {coeffs_.data() + index(i, 0), static_cast<std::size_t>(modes())};
  }

  std::span<cplx> data() { return coeffs_; }
  std::span<const cplx> data() const { return coeffs_; }

  bool all_finite() const {
    for (const auto& c : coeffs_)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
  }

  /// Drops any imaginary part of the k = 0 coefficients.
  void enforce_real_mean() {
    for (int i = 0; i < n_; ++i) (*this)(i, 0).imag(0.0);
  }

  bool same_shape(const SpectralField& o) const {
    return n_ == o.n_ && max_mode_ == o.max_mode_;
  }

  SpectralField& operator+=(const SpectralField& o) {
    check_shape(o);
    for (std::size_t j = 0; j < coeffs_.size(); ++j) coeffs_[j] += o.coeffs_[j];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    check_shape(o);
    for (std::size_t j = 0; j < coeffs_.size(); ++j) coeffs_[j] -= o.coeffs_[j];
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

  bool operator==(const SpectralField&) const = default;

  /// Field identically equal to value[i] in component i.
  static SpectralField constant(int max_mode, std::span<const double> values) {
    SpectralField f(static_cast<int>(values.size()), max_mode);
    for (int i = 0; i < f.components(); ++i) f(i, 0) = values[i] * kSqrtTwoPi;
    return f;
  }

  /// Copy truncated or zero-extended to a new maximal mode.
  SpectralField with_max_mode(int max_mode) const {
    SpectralField out(n_, max_mode);
    const int m = std::min(max_mode, max_mode_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k <= m; ++k) out(i, k) = (*this)(i, k);
    return out;
  }

 private:
  std::size_t index(int i, int k) const {
    return static_cast<std::size_t>(i) * (max_mode_ + 1) + k;
  }
  void check_shape(const SpectralField& o) const {
    if (!same_shape(o)) throw ConfigError("SpectralField: shape mismatch");
  }

  int n_ = 0;
  int max_mode_ = 0;
  std::vector<cplx> coeffs_;
};

/// Real values of an R^n-valued field on the uniform grid x_j = 2 pi j / M.
struct GridField {
  int components = 0;
  int size = 0;
  std::vector<double> values;

  GridField() = default;
  GridField(int n, int m)
      : components(n), size(m), values(static_cast<std::size_t>(n) * m) {}

  double& operator()(int i, int j) { return values[static_cast<std::size_t>(i) * size + j]; }
  double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * size + j]; }

  std::span<double> component(int i) {
    return {values.data() + static_cast<std::size_t>(i) * size, static_cast<std::size_t>(size)};
  }
  std::span<const double> component(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * size, static_cast<std::size_t>(size)};
  }

  static double point(int j, int m) { return kTwoPi * j / m; }
};

}  // namespace spde

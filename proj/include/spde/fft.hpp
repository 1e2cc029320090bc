#pragma once

// Thin wrapper around FFTW's real-to-complex transforms.
//
// Plans are created once per size with FFTW_ESTIMATE (deterministic algorithm
// selection) under a global lock, then executed through the new-array
// interface on per-thread, fftw_malloc-aligned buffers. Execution is
// thread-safe and bitwise reproducible regardless of which thread runs it.

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <span>

namespace spde::fft {

namespace detail {

struct Plans {
  fftw_plan forward = nullptr;   // r2c
  fftw_plan backward = nullptr;  // c2r
};

struct AlignedBuffers {
  explicit AlignedBuffers(int m)
      : real(fftw_alloc_real(static_cast<std::size_t>(m))),
        spec(fftw_alloc_complex(static_cast<std::size_t>(m / 2 + 1))) {}
  ~AlignedBuffers() {
    fftw_free(real);
    fftw_free(spec);
  }
  AlignedBuffers(const AlignedBuffers&) = delete;
  AlignedBuffers& operator=(const AlignedBuffers&) = delete;

  double* real;
  fftw_complex* spec;
};

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

inline const Plans& plans_for(int m) {
  static std::map<int, Plans> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  AlignedBuffers scratch(m);
  Plans p;
  p.forward = fftw_plan_dft_r2c_1d(m, scratch.real, scratch.spec, FFTW_ESTIMATE);
  p.backward = fftw_plan_dft_c2r_1d(m, scratch.spec, scratch.real, FFTW_ESTIMATE);
  return cache.emplace(m, p).first->second;
}

inline AlignedBuffers& workspace(int m) {
  thread_local std::map<int, std::unique_ptr<AlignedBuffers>> buffers;
  auto& slot = buffers[m];
  if (!slot) slot = std::make_unique<AlignedBuffers>(m);
  return *slot;
}

}  // namespace detail

/// out[j] = sum_{k=0}^{m-1} X_k exp(2 pi i j k / m) for the Hermitian
/// extension of the half spectrum X_0..X_{m/2}.
inline void inverse_real(std::span<const std::complex<double>> half, std::span<double> out) {
  const int m = static_cast<int>(out.size());
  const auto& plans = detail::plans_for(m);
  auto& ws = detail::workspace(m);
  std::memcpy(ws.spec, half.data(), sizeof(fftw_complex) * (m / 2 + 1));
  fftw_execute_dft_c2r(plans.backward, ws.spec, ws.real);
  std::memcpy(out.data(), ws.real, sizeof(double) * m);
}

/// half[k] = sum_j in[j] exp(-2 pi i j k / m), k = 0..m/2.
inline void forward_real(std::span<const double> in, std::span<std::complex<double>> half) {
  const int m = static_cast<int>(in.size());
  const auto& plans = detail::plans_for(m);
  auto& ws = detail::workspace(m);
  std::memcpy(ws.real, in.data(), sizeof(double) * m);
  fftw_execute_dft_r2c(plans.forward, ws.real, ws.spec);
  std::memcpy(static_cast<void*>(half.data()), ws.spec, sizeof(fftw_complex) * (m / 2 + 1));
}

}  // namespace spde::fft

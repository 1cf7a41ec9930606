#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

namespace oectmc {

/// Thin wrapper over FFTW real transforms. Plans are created once per size
/// under a lock (FFTW planning is not thread-safe) and executed with the
/// new-array interface, which is.
class RealFft {
public:
  static RealFft& instance() {
    static RealFft fft;
    return fft;
  }

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  /// Unnormalized inverse: out[n] = sum_k X_k exp(+2 pi i k n / N) over the
  /// Hermitian extension of `spectrum` (length N/2 + 1). `spectrum` is
  /// clobbered.
  void inverse(std::span<std::complex<double>> spectrum, std::span<double> out) {
    const std::size_t n = out.size();
    if (spectrum.size() != n / 2 + 1) throw std::invalid_argument("RealFft::inverse: size mismatch");
    fftw_execute_dft_c2r(plan(n, Direction::Inverse), reinterpret_cast<fftw_complex*>(spectrum.data()),
                         out.data());
  }

  /// Unnormalized forward: X_k = sum_n x_n exp(-2 pi i k n / N), k = 0..N/2.
  void forward(std::span<const double> in, std::span<std::complex<double>> spectrum) {
    const std::size_t n = in.size();
    if (spectrum.size() != n / 2 + 1) throw std::invalid_argument("RealFft::forward: size mismatch");
    std::vector<double> scratch(in.begin(), in.end());
    fftw_execute_dft_r2c(plan(n, Direction::Forward), scratch.data(),
                         reinterpret_cast<fftw_complex*>(spectrum.data()));
  }

  ~RealFft() {
    for (auto& [key, p] : plans_) fftw_destroy_plan(p);
  }

private:
  enum class Direction { Forward, Inverse };

  RealFft() = default;

  fftw_plan plan(std::size_t n, Direction dir) {
    if (n == 0) throw std::invalid_argument("RealFft: empty transform");
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(n, dir);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<double> real(n);
    std::vector<std::complex<double>> cplx(n / 2 + 1);
    const int size = static_cast<int>(n);
    auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = dir == Direction::Inverse ? fftw_plan_dft_c2r_1d(size, c, real.data(), flags)
                                            : fftw_plan_dft_r2c_1d(size, real.data(), c, flags);
    if (!p) throw std::runtime_error("RealFft: planning failed");
    plans_.emplace(key, p);
    return p;
  }

  std::mutex mutex_;
  std::map<std::pair<std::size_t, Direction>, fftw_plan> plans_;
};

} // namespace oectmc

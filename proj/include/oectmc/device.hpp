#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "oectmc/config.hpp"
#include "oectmc/constants.hpp"
#include "oectmc/fft.hpp"
#include "oectmc/sampling.hpp"

namespace oectmc {

/// g_m q_eff e / C_tot: drain-current change per bound site (A).
inline double current_per_site(const Device& device, double q_eff) {
  return device.g_m * q_eff * constants::elementary_charge / device.C_tot;
}

inline double drain_current_signal(double N_b, const Device& device, double q_eff) {
  return current_per_site(device, q_eff) * N_b;
}

/// Which noise processes are active.
struct NoiseComponents {
  bool thermal = true;
  bool flicker = true;
  bool drift = true;
};

inline NoiseComponents components_of(const NoiseSettings& s) { return {s.thermal, s.flicker, s.drift}; }

/// Single-sided current PSDs (A^2/Hz).
struct NoisePsd {
  double thermal = 0.0;
  double flicker = 0.0;
  double drift = 0.0;
  double total() const { return thermal + flicker + drift; }
};

inline double thermal_psd(const Device& device, double temperature) {
  return 4.0 * constants::boltzmann * temperature / device.R_ch;
}

inline NoisePsd noise_psd(double f, const Device& device, double temperature) {
  if (!(f > 0.0)) throw std::invalid_argument("noise_psd: f must be > 0");
  const double i2 = device.I_DC * device.I_DC;
  return {thermal_psd(device, temperature), device.K_f() * i2 / f, device.K_drift * i2 / (f * f)};
}

struct NoiseBand {
  double f_min = 0.0;
  double f_max = 0.0;
};

/// Shaping band for a record of the given duration: [1/max(duration, dt),
/// min(B_det, 1/(2 dt))], widened by a relative 1e-9 if it collapses.
inline NoiseBand noise_band(double duration, double dt, const Device& device) {
  NoiseBand band;
  band.f_min = 1.0 / std::max(duration, dt);
  band.f_max = std::min(device.B_det, 1.0 / (2.0 * dt));
  if (band.f_max <= band.f_min) band.f_max = band.f_min * (1.0 + 1e-9);
  return band;
}

/// Closed-form window-charge variances (C^2) used to normalize statistics.
struct SurrogateVariances {
  double th = 0.0;
  double flicker = 0.0;
  double drift = 0.0;
  double lf = 0.0;
  double single = 0.0;
  double referenced = 0.0;
};

inline SurrogateVariances surrogate_variances(double W, double dt, const Device& device, double temperature,
                                              double rho, NoiseComponents on = {}) {
  if (!(W > 0.0) || !(dt > 0.0)) throw std::invalid_argument("surrogate_variances: W and dt must be > 0");
  const NoiseBand band = noise_band(W, dt, device);
  const double i2 = device.I_DC * device.I_DC;
  SurrogateVariances v;
  v.th = on.thermal ? thermal_psd(device, temperature) * W : 0.0;
  v.flicker = on.flicker ? device.K_f() * i2 * std::log(band.f_max / band.f_min) * W : 0.0;
  v.drift = on.drift ? device.K_drift * i2 * (1.0 / band.f_min - 1.0 / band.f_max) * W : 0.0;
  v.lf = v.flicker + v.drift;
  v.single = v.th + v.lf;
  v.referenced = 2.0 * v.th + 2.0 * (1.0 - rho) * v.lf;
  return v;
}

/// rho at which control subtraction breaks even: 0.5 (1 + th/lf).
inline double control_benefit_crossover(double W, double dt, const Device& device, double temperature) {
  const auto v = surrogate_variances(W, dt, device, temperature, 0.0);
  if (!(v.lf > 0.0)) throw std::domain_error("control_benefit_crossover: low-frequency variance is zero");
  return 0.5 * (1.0 + v.th / v.lf);
}

/// Window-charge variance per component from the PSD and the rectangular
/// window transfer |sin(pi f W)/(pi f)|^2, one-sided.
struct ChargeVariances {
  double thermal = 0.0;
  double flicker = 0.0;
  double drift = 0.0;
};

/// Thermal integrates over (0, f_max] and tends to S_th W / 2 as f_max grows.
/// Flicker and drift diverge at f -> 0 and are integrated over [1/W, f_max].
/// f_max defaults to min(B_det, 1/(2 dt)).
inline ChargeVariances charge_variance_psd(double W, double dt, const Device& device, double temperature,
                                           double f_max = 0.0) {
  if (!(W > 0.0)) throw std::invalid_argument("charge_variance_psd: W must be > 0");
  if (!(f_max > 0.0)) f_max = std::min(device.B_det, 1.0 / (2.0 * dt));
  using boost::math::quadrature::gauss_kronrod;
  using constants::pi;
  auto transfer = [W](double f) {
    if (f * W < 1e-6) return W * W;
    const double s = std::sin(pi * f * W) / (pi * f);
    return s * s;
  };
  // Integrate lobe by lobe between zeros of the transfer function.
  auto integrate = [&](auto&& psd, double lo, double hi) {
    double acc = 0.0;
    double a = lo;
    while (a < hi) {
      const double b = std::min(hi, (std::floor(a * W + 1e-9) + 1.0) / W);
      acc += gauss_kronrod<double, 31>::integrate([&](double f) { return psd(f) * transfer(f); }, a, b, 8, 1e-12);
      a = b;
    }
    return acc;
  };
  const double i2 = device.I_DC * device.I_DC;
  const double s_th = thermal_psd(device, temperature);
  const double f_lo = std::min(1.0 / W, f_max);
  ChargeVariances out;
  out.thermal = integrate([&](double) { return s_th; }, 0.0, f_max);
  out.flicker = integrate([&](double f) { return device.K_f() * i2 / f; }, f_lo, f_max);
  out.drift = integrate([&](double f) { return device.K_drift * i2 / (f * f); }, f_lo, f_max);
  return out;
}

/// Covariance of the window charges (DA, 5HT, CTRL) produced by the noise
/// model: th + lf on the diagonal, rho lf between every pair.
using ChargeCovariance = std::array<std::array<double, 3>, 3>;

inline ChargeCovariance noise_charge_covariance(const SurrogateVariances& v, double rho) {
  ChargeCovariance c{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) c[i][j] = i == j ? v.th + v.lf : rho * v.lf;
  return c;
}

/// Variance of the linear statistic w . q under covariance c.
inline double quadratic_form(const std::array<double, 3>& w, const ChargeCovariance& c) {
  double acc = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) acc += w[i] * c[i][j] * w[j];
  return acc;
}

/// Window noise charges drawn directly from their joint Gaussian law, which
/// is the law of integrating a synthesized triplet over the window.
inline std::array<double, 3> draw_noise_charges(const SurrogateVariances& v, double rho, Sampler& rng) {
  const double s_th = std::sqrt(v.th);
  const double s_lf = std::sqrt(v.lf);
  const double w_shared = std::sqrt(rho);
  const double w_own = std::sqrt(1.0 - rho);
  const double shared = rng.normal();
  std::array<double, 3> q{};
  for (auto& x : q) {
    const double th = rng.normal();
    const double own = rng.normal();
    x = s_th * th + s_lf * (w_shared * shared + w_own * own);
  }
  return q;
}

/// Correlated noise currents (A) for the three channels, ordered DA, 5HT, CTRL.
struct NoiseTriplet {
  std::array<std::vector<double>, 3> total;
  std::array<std::vector<double>, 3> low_frequency;
  NoiseBand band;
  double dt = 0.0;
};

namespace device_detail {

/// One low-frequency trace: in-band FFT-shaped flicker and drift (zero DC)
/// plus a constant offset carrying the sub-band power, so the record
/// integral has the closed-form low-frequency variance.
inline std::vector<double> low_frequency_trace(std::size_t n, double dt, const Device& device, NoiseBand band,
                                               double offset_sd, NoiseComponents on, Sampler& rng) {
  std::vector<double> out(n, 0.0);
  if (!on.flicker && !on.drift) return out;
  const double duration = static_cast<double>(n) * dt;
  const double df = 1.0 / duration;
  const double i2 = device.I_DC * device.I_DC;
  std::vector<std::complex<double>> spec(n / 2 + 1);
  for (std::size_t k = 1; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * df;
    if (f < band.f_min * (1.0 - 1e-12) || f > band.f_max * (1.0 + 1e-12)) continue;
    double s = 0.0;
    if (on.flicker) s += device.K_f() * i2 / f;
    if (on.drift) s += device.K_drift * i2 / (f * f);
    const bool nyquist = n % 2 == 0 && k == n / 2;
    if (nyquist) {
      spec[k] = {std::sqrt(0.5 * s * df) * rng.normal(), 0.0};
    } else {
      const double a = 0.5 * std::sqrt(s * df);
      const double re = rng.normal();
      const double im = rng.normal();
      spec[k] = {a * re, a * im};
    }
  }
  RealFft::instance().inverse(spec, out);
  const double offset = offset_sd * rng.normal();
  for (auto& x : out) x += offset;
  return out;
}

} // namespace device_detail

/// Synthesizes a correlated noise triplet over `duration` on the dt grid.
///
/// Thermal samples are white with variance S_th/dt so a window sum times dt
/// has variance S_th W. Each low-frequency trace is sqrt(rho) shared +
/// sqrt(1 - rho) own, with one shared trace for all three channels.
inline NoiseTriplet synthesize_noise_triplet(double duration, double dt, const Device& device, double temperature,
                                             double rho, Sampler& rng, NoiseComponents on = {}) {
  if (!(dt > 0.0) || !(duration >= dt * (1.0 - 1e-9)))
    throw std::invalid_argument("synthesize_noise_triplet: duration shorter than one step");
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("synthesize_noise_triplet: rho outside [0, 1]");
  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  const double record = static_cast<double>(n) * dt;

  NoiseTriplet trip;
  trip.dt = dt;
  trip.band = noise_band(record, dt, device);
  const auto sv = surrogate_variances(record, dt, device, temperature, rho, on);
  const double offset_sd = std::sqrt(sv.lf) / record;

  const auto shared = device_detail::low_frequency_trace(n, dt, device, trip.band, offset_sd, on, rng);
  const double w_shared = std::sqrt(rho);
  const double w_own = std::sqrt(1.0 - rho);
  const double th_sd = on.thermal ? std::sqrt(thermal_psd(device, temperature) / dt) : 0.0;
  for (std::size_t ch = 0; ch < 3; ++ch) {
    const auto own = device_detail::low_frequency_trace(n, dt, device, trip.band, offset_sd, on, rng);
    auto& lf = trip.low_frequency[ch];
    auto& tot = trip.total[ch];
    lf.resize(n);
    tot.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      lf[i] = w_shared * shared[i] + w_own * own[i];
      tot[i] = lf[i] + (on.thermal ? th_sd * rng.normal() : 0.0);
    }
  }
  return trip;
}

/// One-sided periodogram 2 |X_k|^2 dt / N at f_k = k/(N dt), k = 1..N/2 - 1.
struct Periodogram {
  std::vector<double> frequency;
  std::vector<double> power;
};

inline Periodogram periodogram(std::span<const double> trace, double dt) {
  const std::size_t n = trace.size();
  if (n < 4) throw std::invalid_argument("periodogram: need at least 4 samples");
  std::vector<std::complex<double>> spec(n / 2 + 1);
  RealFft::instance().forward(trace, spec);
  Periodogram p;
  const double scale = 2.0 * dt / static_cast<double>(n);
  for (std::size_t k = 1; k < (n + 1) / 2; ++k) {
    p.frequency.push_back(static_cast<double>(k) / (static_cast<double>(n) * dt));
    p.power.push_back(scale * std::norm(spec[k]));
  }
  return p;
}

} // namespace oectmc

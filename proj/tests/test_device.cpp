#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "oectmc/config.hpp"
#include "oectmc/constants.hpp"
#include "oectmc/device.hpp"
#include "oectmc/rng.hpp"

using namespace oectmc;

namespace {

const Device kDevice{};
constexpr double kT = 310.0;
constexpr double kW = 21.9;
constexpr double kDt = 0.01;

Sampler sampler(std::uint64_t seed) { return Sampler(make_engine(seed, 1, 0, StreamRole::Noise)); }

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

} // namespace

TEST(Transduction, SignalPerSite) {
  EXPECT_EQ(drain_current_signal(0.0, kDevice, -0.35), 0.0);
  EXPECT_NEAR(std::abs(drain_current_signal(1.0, kDevice, 0.35)), 5.607618219e-15, 1e-24);
  EXPECT_EQ(drain_current_signal(10.0, kDevice, -0.35), -drain_current_signal(10.0, kDevice, 0.35));
}

TEST(Transduction, LinearInOccupancy) {
  for (double n : {1.0, 17.0, 3.2e6})
    EXPECT_NEAR(drain_current_signal(n, kDevice, 0.35), n * drain_current_signal(1.0, kDevice, 0.35),
                1e-12 * std::abs(n * drain_current_signal(1.0, kDevice, 0.35)));
}

TEST(Psd, ComponentValues) {
  const auto p = noise_psd(1.0, kDevice, kT);
  EXPECT_NEAR(p.thermal, 3.42400952e-23, 1e-32);
  EXPECT_NEAR(p.flicker, 2.2222222222e-23, 1e-32);
  EXPECT_NEAR(p.drift, 1e-24, 1e-36);
  EXPECT_DOUBLE_EQ(p.total(), p.thermal + p.flicker + p.drift);
  EXPECT_NEAR(noise_psd(4.0, kDevice, kT).flicker, p.flicker / 4.0, 1e-36);
  EXPECT_NEAR(noise_psd(4.0, kDevice, kT).drift, p.drift / 16.0, 1e-38);
  EXPECT_THROW(noise_psd(0.0, kDevice, kT), std::invalid_argument);
}

TEST(Surrogate, BaselineValues) {
  const auto v = surrogate_variances(kW, kDt, kDevice, kT, 0.9);
  EXPECT_NEAR(v.th / 7.4985808488e-22, 1.0, 1e-9);
  EXPECT_NEAR(v.flicker / 3.40594135922863e-21, 1.0, 1e-9);
  EXPECT_NEAR(v.drift / 4.79172e-22, 1.0, 1e-9);
  EXPECT_DOUBLE_EQ(v.lf, v.flicker + v.drift);
  EXPECT_DOUBLE_EQ(v.single, v.th + v.lf);
  EXPECT_DOUBLE_EQ(v.referenced, 2 * v.th + 2 * (1 - 0.9) * v.lf);
}

TEST(Surrogate, ReferencedLimits) {
  const auto one = surrogate_variances(kW, kDt, kDevice, kT, 1.0);
  EXPECT_EQ(one.referenced, 2.0 * one.th);
  const auto half = surrogate_variances(kW, kDt, kDevice, kT, 0.5);
  EXPECT_DOUBLE_EQ(half.referenced, 2.0 * half.th + half.lf);
}

TEST(Surrogate, CollapsedBandSafeguard) {
  Device d = kDevice;
  d.B_det = 0.01; // below 1/W
  const auto band = noise_band(kW, kDt, d);
  EXPECT_DOUBLE_EQ(band.f_max, band.f_min * (1.0 + 1e-9));
  const auto v = surrogate_variances(kW, kDt, d, kT, 0.9);
  EXPECT_GE(v.flicker, 0.0);
  EXPECT_TRUE(std::isfinite(v.drift));
}

TEST(Surrogate, DisabledComponentsAreZero) {
  const auto v = surrogate_variances(kW, kDt, kDevice, kT, 0.9, {false, true, false});
  EXPECT_EQ(v.th, 0.0);
  EXPECT_EQ(v.drift, 0.0);
  EXPECT_GT(v.flicker, 0.0);
}

TEST(Crossover, Baseline) { EXPECT_NEAR(control_benefit_crossover(kW, kDt, kDevice, kT), 0.596504016, 1e-8); }

TEST(Crossover, Limits) {
  Device quiet = kDevice;
  quiet.R_ch = 1e12; // thermal negligible
  EXPECT_NEAR(control_benefit_crossover(kW, kDt, quiet, kT), 0.5, 1e-6);
  const auto v = surrogate_variances(kW, kDt, kDevice, kT, 0.0);
  Device balanced = kDevice;
  balanced.R_ch = 4.0 * constants::boltzmann * kT * kW / v.lf;
  EXPECT_NEAR(control_benefit_crossover(kW, kDt, balanced, kT), 1.0, 1e-12);
  Device silent = kDevice;
  silent.alpha_H = 0.0;
  silent.K_drift = 0.0;
  EXPECT_THROW(control_benefit_crossover(kW, kDt, silent, kT), std::domain_error);
}

TEST(ChargeVariancePsd, ThermalIsHalfOneSidedWindowProduct) {
  const auto cv = charge_variance_psd(kW, kDt, kDevice, kT);
  const double s_th = noise_psd(1.0, kDevice, kT).thermal;
  EXPECT_NEAR(cv.thermal / (s_th * kW / 2.0), 1.0, 1e-2);
  EXPECT_NEAR(cv.thermal / 3.74894352483907e-22, 1.0, 1e-8);
}

TEST(ChargeVariancePsd, LowFrequencyReferenceValues) {
  const auto cv = charge_variance_psd(kW, kDt, kDevice, kT);
  EXPECT_NEAR(cv.flicker / 2.40451309098958e-22, 1.0, 1e-8);
  EXPECT_NEAR(cv.drift / 1.43213772449348e-22, 1.0, 1e-8);
  // Band-limited to f >= 1/W, so well below the surrogate that also
  // carries sub-band power.
  const auto v = surrogate_variances(kW, kDt, kDevice, kT, 0.0);
  EXPECT_LT(cv.flicker, v.flicker);
}

TEST(ChargeVariancePsd, VanishingWindow) {
  const double w = 1e-6;
  const auto cv = charge_variance_psd(w, kDt, kDevice, kT);
  EXPECT_NEAR(cv.thermal / (noise_psd(1.0, kDevice, kT).thermal * w * w * 50.0), 1.0, 1e-3);
}

TEST(Synthesis, ShapesAndBand) {
  auto rng = sampler(1);
  const auto trip = synthesize_noise_triplet(kW, kDt, kDevice, kT, 0.9, rng);
  for (const auto& t : trip.total) EXPECT_EQ(t.size(), 2190u);
  EXPECT_NEAR(trip.band.f_min, 1.0 / kW, 1e-12);
  EXPECT_EQ(trip.band.f_max, 50.0);
  for (double x : trip.total[2]) ASSERT_TRUE(std::isfinite(x));
  EXPECT_THROW(synthesize_noise_triplet(0.001, kDt, kDevice, kT, 0.9, rng), std::invalid_argument);
}

TEST(Synthesis, FullCorrelationGivesIdenticalLowFrequencyTraces) {
  auto rng = sampler(2);
  const auto trip = synthesize_noise_triplet(kW, kDt, kDevice, kT, 1.0, rng);
  EXPECT_EQ(trip.low_frequency[0], trip.low_frequency[1]);
  EXPECT_EQ(trip.low_frequency[0], trip.low_frequency[2]);
}

TEST(Synthesis, ZeroCorrelationAcrossChannels) {
  auto rng = sampler(3);
  std::vector<double> a, b;
  for (int w = 0; w < 200; ++w) {
    const auto trip = synthesize_noise_triplet(kW, kDt, kDevice, kT, 0.0, rng);
    a.push_back(trip.low_frequency[0][100]);
    b.push_back(trip.low_frequency[2][100]);
  }
  EXPECT_NEAR(correlation(a, b), 0.0, 0.2);
}

TEST(Synthesis, AveragedPeriodogramFollowsFlickerPsd) {
  auto rng = sampler(4);
  const NoiseComponents flicker_only{false, true, false};
  std::vector<double> avg;
  std::vector<double> freq;
  const int reps = 200;
  for (int i = 0; i < reps; ++i) {
    const auto trip = synthesize_noise_triplet(kW, kDt, kDevice, kT, 0.0, rng, flicker_only);
    const auto pg = periodogram(trip.low_frequency[0], kDt);
    if (avg.empty()) {
      avg.assign(pg.power.size(), 0.0);
      freq = pg.frequency;
    }
    for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += pg.power[k] / reps;
  }
  double ratio = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < avg.size(); ++k) {
    if (freq[k] < 0.1 || freq[k] > 5.0) continue;
    ratio += avg[k] / noise_psd(freq[k], kDevice, kT).flicker;
    ++n;
  }
  EXPECT_NEAR(ratio / n, 1.0, 0.05);
}

TEST(Synthesis, ThermalSampleVariance) {
  auto rng = sampler(5);
  const NoiseComponents thermal_only{true, false, false};
  double s2 = 0.0;
  std::size_t n = 0;
  for (int i = 0; i < 20; ++i) {
    const auto trip = synthesize_noise_triplet(kW, kDt, kDevice, kT, 0.5, rng, thermal_only);
    for (double x : trip.total[1]) {
      s2 += x * x;
      ++n;
    }
  }
  const double target = noise_psd(1.0, kDevice, kT).thermal / kDt;
  EXPECT_NEAR(s2 / static_cast<double>(n) / target, 1.0, 0.02);
}

TEST(Periodogram, MatchesDirectDft) {
  std::mt19937_64 g(1);
  std::normal_distribution<double> nd;
  std::vector<double> x(257);
  for (auto& v : x) v = nd(g);
  const double dt = 0.02;
  const auto pg = periodogram(x, dt);
  const std::size_t n = x.size();
  ASSERT_EQ(pg.power.size(), (n + 1) / 2 - 1);
  for (std::size_t k = 1; k < (n + 1) / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += x[i] * std::polar(1.0, -2.0 * constants::pi * static_cast<double>(k * i) / static_cast<double>(n));
    const double direct = 2.0 * dt / static_cast<double>(n) * std::norm(acc);
    EXPECT_NEAR(pg.power[k - 1], direct, 1e-9 * (1.0 + direct));
    EXPECT_NEAR(pg.frequency[k - 1], static_cast<double>(k) / (static_cast<double>(n) * dt), 1e-12);
  }
}

TEST(ChargeDraws, CovarianceMatchesModel) {
  const auto v = surrogate_variances(kW, kDt, kDevice, kT, 0.9);
  const auto cov = noise_charge_covariance(v, 0.9);
  auto rng = sampler(6);
  const int n = 200000;
  double c00 = 0, c02 = 0, c01 = 0;
  for (int i = 0; i < n; ++i) {
    const auto q = draw_noise_charges(v, 0.9, rng);
    c00 += q[0] * q[0];
    c02 += q[0] * q[2];
    c01 += q[0] * q[1];
  }
  EXPECT_NEAR(c00 / n / cov[0][0], 1.0, 0.02);
  EXPECT_NEAR(c02 / n / cov[0][2], 1.0, 0.03);
  EXPECT_NEAR(c01 / n / cov[0][1], 1.0, 0.03);
}

TEST(ChargeDraws, WaveformIntegralHasSameVariance) {
  const double rho = 0.5;
  const auto v = surrogate_variances(kW, kDt, kDevice, kT, rho);
  auto rng = sampler(7);
  const int n = 1500;
  double single = 0.0;
  double diff = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto trip = synthesize_noise_triplet(kW, kDt, kDevice, kT, rho, rng);
    double q0 = 0.0, q2 = 0.0;
    for (std::size_t k = 0; k < trip.total[0].size(); ++k) {
      q0 += trip.total[0][k] * kDt;
      q2 += trip.total[2][k] * kDt;
    }
    single += q0 * q0;
    diff += (q0 - q2) * (q0 - q2);
  }
  EXPECT_NEAR(single / n / v.single, 1.0, 0.12);
  EXPECT_NEAR(diff / n / v.referenced, 1.0, 0.12);
}

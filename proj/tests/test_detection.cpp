#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oectmc/calibration.hpp"
#include "oectmc/detection.hpp"
#include "oectmc/link.hpp"

using namespace oectmc;

namespace {

DetectorCalibration unit_calibration(Scheme scheme, bool ctrl) {
  DetectorCalibration cal;
  cal.scheme = scheme;
  cal.ctrl_enabled = ctrl;
  cal.sigma_delta = 2.0;
  cal.sigma_t = 4.0;
  cal.sigma_o = 4.0;
  cal.rho_cc = 0.5;
  return cal;
}

Scenario quick_scenario() {
  Scenario sc;
  sc.montecarlo.n_cal = 120;
  sc.montecarlo.master_seed = 21;
  return sc;
}

} // namespace

TEST(Integrate, ConstantTrace) {
  const std::vector<double> x(3650, 2e-9);
  EXPECT_NEAR(integrate_charge(x, 36.5, 21.9, 0.01), 2e-9 * 21.9, 1e-20);
}

TEST(Integrate, ZeroTrace) {
  const std::vector<double> x(500, 0.0);
  EXPECT_EQ(integrate_charge(x, 5.0, 3.0, 0.01), 0.0);
}

TEST(Integrate, RampIsLeftRiemann) {
  std::vector<double> x(500);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) * 0.01;
  // Samples 200..499 at t = i dt.
  double expected = 0.0;
  for (int i = 200; i < 500; ++i) expected += i * 0.01 * 0.01;
  EXPECT_NEAR(integrate_charge(x, 5.0, 3.0, 0.01), expected, 1e-12);
  EXPECT_THROW(integrate_charge(std::vector<double>(10, 0.0), 5.0, 3.0, 0.01), std::invalid_argument);
}

TEST(Statistic, MoskExample) {
  const auto cal = unit_calibration(Scheme::MoSK, true);
  // (-1)(-6) - (+1)(2) = 4, over 2.
  EXPECT_DOUBLE_EQ(mosk_statistic({-6.0, 2.0, 100.0}, cal), 2.0);
}

TEST(Statistic, CskExample) {
  auto cal = unit_calibration(Scheme::CSK4, true);
  const ChargeTriple t{-10.0, 6.0, 2.0};
  // (-10 - 2)/4 - 0.5 (6 - 2)/4 = -3.5
  EXPECT_DOUBLE_EQ(csk_statistic(t, cal), -3.5);
  cal.ctrl_enabled = false;
  EXPECT_DOUBLE_EQ(csk_statistic(t, cal), -10.0 / 4.0 - 0.5 * 6.0 / 4.0);
  cal.csk_axis = Species::FHT;
  EXPECT_DOUBLE_EQ(csk_statistic(t, cal), 6.0 / 4.0 - 0.5 * -10.0 / 4.0);
}

TEST(Statistic, HybridExample) {
  const auto cal = unit_calibration(Scheme::Hybrid, true);
  const ChargeTriple t{-10.0, 6.0, 2.0};
  EXPECT_DOUBLE_EQ(hybrid_statistic(t, Species::DA, cal), -3.0);
  EXPECT_DOUBLE_EQ(hybrid_statistic(t, Species::FHT, cal), 1.0);
  EXPECT_THROW(hybrid_statistic(t, Species::CTRL, cal), std::invalid_argument);
}

TEST(Statistic, CommonModeCancelsWithControl) {
  auto cal = unit_calibration(Scheme::Hybrid, true);
  const ChargeTriple a{-10.0, 6.0, 2.0};
  const ChargeTriple b{-10.0 + 7.5, 6.0 + 7.5, 2.0 + 7.5};
  EXPECT_DOUBLE_EQ(hybrid_statistic(a, Species::DA, cal), hybrid_statistic(b, Species::DA, cal));
  cal.scheme = Scheme::CSK4;
  EXPECT_DOUBLE_EQ(csk_statistic(a, cal), csk_statistic(b, cal));
}

TEST(MlThreshold, EqualSpreadsGiveMidpoint) {
  EXPECT_NEAR(ml_threshold(0.0, 1.0, 4.0, 1.0), 2.0, 1e-12);
  EXPECT_NEAR(ml_threshold(10.0, 3.0, -2.0, 3.0), 4.0, 1e-12);
}

TEST(MlThreshold, UnequalSpreadsReference) {
  EXPECT_NEAR(ml_threshold(0.0, 1.0, 4.0, 2.0), 1.65990965590164, 1e-10);
}

TEST(MlThreshold, StaysBetweenMeans) {
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> s(0.01, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const double m0 = u(g);
    const double m1 = m0 + 0.1 + std::abs(u(g));
    const double x = ml_threshold(m0, s(g), m1, s(g));
    EXPECT_GT(x, m0);
    EXPECT_LT(x, m1);
  }
}

TEST(MlThreshold, FallbackWhenNoRootBetweenMeans) {
  // Widely different spreads push both roots outside [mu0, mu1].
  const double x = ml_threshold(0.0, 0.01, 0.001, 100.0);
  EXPECT_GE(x, 0.0);
  EXPECT_LE(x, 0.001);
  EXPECT_THROW(ml_threshold(0.0, 0.0, 1.0, 1.0), std::invalid_argument);
}

TEST(Detect, MoskExamples) {
  auto cal = unit_calibration(Scheme::MoSK, true);
  EXPECT_EQ(detect(Scheme::MoSK, {-6.0, 2.0, 0.0}, cal), 0);
  EXPECT_EQ(detect(Scheme::MoSK, {-1.0, 5.0, 0.0}, cal), 1);
}

TEST(Detect, CskExamples) {
  auto cal = unit_calibration(Scheme::CSK4, false);
  cal.rho_cc = 0.0;
  cal.csk_thresholds = {1.0, 2.0, 3.0};
  // sign-oriented: -q_DA / 4
  EXPECT_EQ(detect(Scheme::CSK4, {-2.0, 0.0, 0.0}, cal), 0);
  EXPECT_EQ(detect(Scheme::CSK4, {-6.0, 0.0, 0.0}, cal), 1);
  EXPECT_EQ(detect(Scheme::CSK4, {-10.0, 0.0, 0.0}, cal), 2);
  EXPECT_EQ(detect(Scheme::CSK4, {-20.0, 0.0, 0.0}, cal), 3);
}

TEST(Detect, HybridExamples) {
  auto cal = unit_calibration(Scheme::Hybrid, false);
  cal.hybrid_thresholds = {2.0, 1.0};
  EXPECT_EQ(detect(Scheme::Hybrid, {-4.0, 0.0, 0.0}, cal), 0);
  EXPECT_EQ(detect(Scheme::Hybrid, {-12.0, 0.0, 0.0}, cal), 1);
  EXPECT_EQ(detect(Scheme::Hybrid, {0.0, 2.0, 0.0}, cal), 2);
  EXPECT_EQ(detect(Scheme::Hybrid, {0.0, 8.0, 0.0}, cal), 3);
}

TEST(Detect, CskMonotoneInTargetCharge) {
  auto cal = unit_calibration(Scheme::CSK4, true);
  cal.csk_thresholds = {-1.0, 0.5, 4.0};
  int prev = 0;
  for (double q = 0.0; q > -100.0; q -= 0.25) {
    const int d = detect(Scheme::CSK4, {q, 1.0, 0.3}, cal);
    EXPECT_GE(d, prev);
    prev = d;
  }
  EXPECT_EQ(prev, 3);
}

TEST(Detect, ScaleInvariantWithScaledNormalizers) {
  std::mt19937_64 g(4);
  std::normal_distribution<double> nd(0.0, 5.0);
  for (Scheme scheme : {Scheme::MoSK, Scheme::CSK4, Scheme::Hybrid}) {
    auto cal = unit_calibration(scheme, true);
    cal.csk_thresholds = {-1.0, 0.5, 2.0};
    cal.hybrid_thresholds = {0.7, 1.3};
    cal.mosk_threshold = 0.2;
    auto scaled = cal;
    const double k = 3.7e-12;
    scaled.sigma_delta *= k;
    scaled.sigma_t *= k;
    scaled.sigma_o *= k;
    for (int i = 0; i < 500; ++i) {
      const ChargeTriple t{nd(g), nd(g), nd(g)};
      const ChargeTriple tk{k * t.q_DA, k * t.q_FHT, k * t.q_CTRL};
      EXPECT_EQ(detect(scheme, t, cal), detect(scheme, tk, scaled));
    }
  }
}

TEST(Calibrate, Deterministic) {
  const auto sc = quick_scenario();
  const OperatingPoint op{Scheme::Hybrid, 14000, 45e-6, true, false, std::nullopt};
  const LinkModel m(sc, op);
  EXPECT_EQ(calibrate(m, 21, 99), calibrate(m, 21, 99));
  EXPECT_NE(calibrate(m, 21, 99), calibrate(m, 22, 99));
}

TEST(Calibrate, ThresholdsOrdered) {
  const auto sc = quick_scenario();
  const LinkModel m(sc, {Scheme::CSK4, 14000, 45e-6, true, false, std::nullopt});
  const auto cal = calibrate(m, 3, 4);
  ASSERT_EQ(cal.csk_thresholds.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_GT(cal.csk_thresholds[i], cal.class_means[i]);
    EXPECT_LT(cal.csk_thresholds[i], cal.class_means[i + 1]);
  }
}

TEST(Calibrate, SymmetricMoskThresholdNearZero) {
  auto sc = quick_scenario();
  sc.montecarlo.n_cal = 400;
  auto& fht = sc.species[1];
  const auto& da = sc.species[0];
  fht.D = da.D;
  fht.k_on = da.k_on;
  fht.k_off = da.k_off;
  fht.Da = da.Da;
  fht.N_apt = da.N_apt;
  fht.q_eff = -da.q_eff;
  const LinkModel m(sc, {Scheme::MoSK, 14000, 45e-6, true, false, std::nullopt});
  const auto cal = calibrate(m, 5, 6);
  const double spread = cal.class_stds[0] / std::sqrt(400.0);
  EXPECT_NEAR(cal.class_means[0], -cal.class_means[1], 6.0 * spread);
  // Sampling differences in the two spreads move the ML root, so only
  // require it to sit near the centre relative to the class separation.
  const double half_gap = 0.5 * (cal.class_means[0] - cal.class_means[1]);
  EXPECT_LT(std::abs(cal.mosk_threshold), 0.1 * half_gap);
}

TEST(Calibrate, DegenerateClassThrowsWhenStochastic) {
  auto sc = quick_scenario();
  sc.noise.thermal = sc.noise.flicker = sc.noise.drift = false;
  const LinkModel m(sc, {Scheme::MoSK, 0.0, 45e-6, true, false, std::nullopt});
  EXPECT_THROW(calibrate(m, 1, 2), CalibrationError);
  sc.montecarlo.shot_noise = false;
  const LinkModel quiet(sc, {Scheme::MoSK, 0.0, 45e-6, true, false, std::nullopt});
  EXPECT_NO_THROW(calibrate(quiet, 1, 2));
}

TEST(Calibrate, RequiresIsiOff) {
  const auto sc = quick_scenario();
  const LinkModel m(sc, {Scheme::MoSK, 14000, 45e-6, true, true, std::nullopt});
  EXPECT_THROW(calibrate(m, 1, 2), std::invalid_argument);
}

TEST(Normalizers, MatchCovarianceAlgebra) {
  const Scenario sc;
  const LinkModel m(sc, {Scheme::Hybrid, 14000, 45e-6, true, false, std::nullopt});
  const auto& v = m.variances();
  const double rho = sc.noise.rho;
  EXPECT_NEAR(m.sigma_delta() * m.sigma_delta() / (2 * v.th + 2 * (1 + rho) * v.lf), 1.0, 1e-12);
  EXPECT_NEAR(m.sigma_axis(true) * m.sigma_axis(true) / v.referenced, 1.0, 1e-12);
  EXPECT_NEAR(m.sigma_axis(false) * m.sigma_axis(false) / v.single, 1.0, 1e-12);
}

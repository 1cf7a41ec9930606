#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "oectmc/config.hpp"
#include "oectmc/framing.hpp"

namespace oectmc {

/// Window-integrated charges (C) of the three channels.
struct ChargeTriple {
  double q_DA = 0.0;
  double q_FHT = 0.0;
  double q_CTRL = 0.0;

  double operator[](Species s) const {
    switch (s) {
    case Species::DA: return q_DA;
    case Species::FHT: return q_FHT;
    case Species::CTRL: return q_CTRL;
    }
    return 0.0;
  }
  bool operator==(const ChargeTriple&) const = default;
};

struct DetectorCalibration {
  Scheme scheme = Scheme::MoSK;
  bool ctrl_enabled = true;
  Species csk_axis = Species::DA;

  double sigma_delta = 1.0; // MoSK difference normalizer (C)
  double sigma_t = 1.0;     // target-axis normalizer (C)
  double sigma_o = 1.0;     // other-axis normalizer (C)
  double rho_cc = 0.0;
  std::array<int, 2> signs{-1, +1}; // comparator directions for DA, 5HT

  /// MoSK decision boundary, also the Hybrid identity stage.
  double mosk_threshold = 0.0;
  /// CSK boundaries on the sign-oriented statistic, increasing.
  std::vector<double> csk_thresholds;
  /// Hybrid amplitude boundaries on the sign-oriented statistic, per species.
  std::array<double, 2> hybrid_thresholds{0.0, 0.0};

  /// Per-class Gaussian fits behind the boundaries, in class-index order.
  std::vector<double> class_means;
  std::vector<double> class_stds;

  int sign(Species s) const { return signs[s == Species::FHT ? 1 : 0]; }
  bool operator==(const DetectorCalibration&) const = default;
};

inline Species other_axis(Species s) { return s == Species::DA ? Species::FHT : Species::DA; }

inline int sign_of(double x) { return x < 0.0 ? -1 : +1; }

/// Left-Riemann sum of the samples in [T_s - W, T_s), times dt.
inline double integrate_charge(std::span<const double> trace, double T_s, double W, double dt) {
  const auto end = grid_steps(T_s, dt);
  const auto start = end - grid_steps(W, dt);
  if (static_cast<std::int64_t>(trace.size()) < end) throw std::invalid_argument("integrate_charge: trace shorter than T_s");
  if (start < 0) throw std::invalid_argument("integrate_charge: window longer than the symbol");
  double acc = 0.0;
  for (auto i = start; i < end; ++i) acc += trace[static_cast<std::size_t>(i)];
  return acc * dt;
}

inline double control_reference(double q, double q_ctrl) { return q - q_ctrl; }

/// Charge on a selective axis, control-referenced when CTRL is enabled.
inline double axis_charge(const ChargeTriple& t, Species axis, bool ctrl_enabled) {
  return ctrl_enabled ? control_reference(t[axis], t.q_CTRL) : t[axis];
}

/// (s_DA q_DA - s_5HT q_5HT) / sigma_delta. Positive on the DA side.
inline double mosk_statistic(const ChargeTriple& t, const DetectorCalibration& cal) {
  return (cal.signs[0] * t.q_DA - cal.signs[1] * t.q_FHT) / cal.sigma_delta;
}

inline double csk_statistic(const ChargeTriple& t, const DetectorCalibration& cal) {
  const Species axis = cal.csk_axis;
  return axis_charge(t, axis, cal.ctrl_enabled) / cal.sigma_t -
         cal.rho_cc * axis_charge(t, other_axis(axis), cal.ctrl_enabled) / cal.sigma_o;
}

inline double hybrid_statistic(const ChargeTriple& t, Species species_hat, const DetectorCalibration& cal) {
  if (species_hat == Species::CTRL) throw std::invalid_argument("hybrid_statistic: species must be DA or 5HT");
  return axis_charge(t, species_hat, cal.ctrl_enabled) / cal.sigma_t;
}

/// Equal-likelihood boundary between N(mu0, sd0) and N(mu1, sd1).
///
/// Solves the log-likelihood quadratic and keeps the root strictly between
/// the means; falls back to (mu0 sd1 + mu1 sd0) / (sd0 + sd1).
inline double ml_threshold(double mu0, double sd0, double mu1, double sd1) {
  if (!(sd0 > 0.0) || !(sd1 > 0.0)) throw std::invalid_argument("ml_threshold: standard deviations must be > 0");
  const double lo = std::min(mu0, mu1);
  const double hi = std::max(mu0, mu1);
  const double fallback = (mu0 * sd1 + mu1 * sd0) / (sd0 + sd1);
  const double v0 = sd0 * sd0;
  const double v1 = sd1 * sd1;
  const double a = 1.0 / v0 - 1.0 / v1;
  const double b = -2.0 * (mu0 / v0 - mu1 / v1);
  const double c = mu0 * mu0 / v0 - mu1 * mu1 / v1 + 2.0 * std::log(sd0 / sd1);
  if (std::abs(a) <= 1e-12 * (1.0 / v0 + 1.0 / v1)) {
    if (b == 0.0) return fallback;
    const double x = -c / b;
    return (x > lo && x < hi) ? x : fallback;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return fallback;
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  const std::array<double, 2> roots{q / a, q != 0.0 ? c / q : q / a};
  for (double x : roots)
    if (x > lo && x < hi) return x;
  return fallback;
}

/// Symbol decision. Amplitude comparisons use the statistic multiplied by the
/// axis sign, so "larger" always means "more molecules".
inline int detect(Scheme scheme, const ChargeTriple& t, const DetectorCalibration& cal) {
  switch (scheme) {
  case Scheme::MoSK:
    return mosk_statistic(t, cal) > cal.mosk_threshold ? 0 : 1;
  case Scheme::CSK4: {
    const double z = cal.sign(cal.csk_axis) * csk_statistic(t, cal);
    const auto it = std::upper_bound(cal.csk_thresholds.begin(), cal.csk_thresholds.end(), z);
    return static_cast<int>(it - cal.csk_thresholds.begin());
  }
  case Scheme::Hybrid: {
    const bool da = mosk_statistic(t, cal) > cal.mosk_threshold;
    const Species sp = da ? Species::DA : Species::FHT;
    const double z = cal.sign(sp) * hybrid_statistic(t, sp, cal);
    const int lsb = z > cal.hybrid_thresholds[da ? 0 : 1] ? 1 : 0;
    return (da ? 0 : 2) + lsb;
  }
  }
  throw std::invalid_argument("detect: unknown scheme");
}

} // namespace oectmc

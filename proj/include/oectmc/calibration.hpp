#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "oectmc/detection.hpp"
#include "oectmc/link.hpp"
#include "oectmc/parallel.hpp"

namespace oectmc {

class CalibrationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct GaussianFit {
  double mean = 0.0;
  double sd = 0.0;
};

inline GaussianFit fit_gaussian(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("fit_gaussian: need at least two samples");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

/// Normalizers and comparator directions for an operating point, without
/// thresholds.
inline DetectorCalibration detector_skeleton(const LinkModel& model) {
  const auto& sc = model.scenario();
  const auto& op = model.point();
  DetectorCalibration cal;
  cal.scheme = op.scheme;
  cal.ctrl_enabled = op.ctrl;
  cal.csk_axis = sc.modulation.csk_axis;
  cal.signs = model.signs();
  cal.rho_cc = sc.noise.rho_cc;
  cal.sigma_delta = model.sigma_delta();
  cal.sigma_t = model.sigma_axis(op.ctrl);
  cal.sigma_o = cal.sigma_t;
  return cal;
}

namespace calibration_detail {

/// Statistic used to place boundaries for a class of the given scheme.
/// Amplitude statistics are sign-oriented so higher levels sit higher.
inline double class_statistic(const ChargeTriple& t, int index, const DetectorCalibration& cal) {
  switch (cal.scheme) {
  case Scheme::MoSK: return mosk_statistic(t, cal);
  case Scheme::CSK4: return cal.sign(cal.csk_axis) * csk_statistic(t, cal);
  case Scheme::Hybrid: {
    const Species sp = identity_bit(index) == 0 ? Species::DA : Species::FHT;
    return cal.sign(sp) * hybrid_statistic(t, sp, cal);
  }
  }
  return 0.0;
}

inline double boundary(const GaussianFit& a, const GaussianFit& b) { return ml_threshold(a.mean, a.sd, b.mean, b.sd); }

} // namespace calibration_detail

/// Fits a Gaussian per symbol class from n_cal single-symbol runs with ISI
/// disabled and places maximum-likelihood boundaries between adjacent
/// classes. The model must have ISI disabled.
inline DetectorCalibration calibrate(const LinkModel& model, std::uint64_t master, std::uint64_t point_key) {
  if (model.point().isi) throw std::invalid_argument("calibrate: the model must have ISI disabled");
  const auto& sc = model.scenario();
  DetectorCalibration cal = detector_skeleton(model);
  const int M = model.alphabet();
  const int n_cal = sc.montecarlo.n_cal;
  const auto on = model.noise_components();
  const bool stochastic = sc.montecarlo.shot_noise || on.thermal || on.flicker || on.drift;

  struct ClassSamples {
    std::vector<double> stat;
    std::vector<double> mosk;
  };
  const auto samples = parallel_map(static_cast<std::size_t>(M), [&](std::size_t c) {
    auto session = model.session(make_calibration_streams(master, point_key, static_cast<int>(c)));
    ClassSamples s;
    s.stat.reserve(static_cast<std::size_t>(n_cal));
    s.mosk.reserve(static_cast<std::size_t>(n_cal));
    for (int i = 0; i < n_cal; ++i) {
      const auto t = session.transmit(static_cast<int>(c));
      s.stat.push_back(calibration_detail::class_statistic(t, static_cast<int>(c), cal));
      s.mosk.push_back(mosk_statistic(t, cal));
    }
    return s;
  });

  auto fit = [&](const std::vector<double>& xs, int c) {
    GaussianFit g = fit_gaussian(xs);
    if (!(g.sd > 0.0)) {
      if (stochastic)
        throw CalibrationError("degenerate calibration class " + std::to_string(c) + " (zero variance)");
      g.sd = 1e-12 * (1.0 + std::abs(g.mean));
    }
    return g;
  };

  std::vector<GaussianFit> fits;
  for (int c = 0; c < M; ++c) fits.push_back(fit(samples[static_cast<std::size_t>(c)].stat, c));
  for (const auto& g : fits) {
    cal.class_means.push_back(g.mean);
    cal.class_stds.push_back(g.sd);
  }

  using calibration_detail::boundary;
  switch (cal.scheme) {
  case Scheme::MoSK:
    cal.mosk_threshold = boundary(fits[0], fits[1]);
    break;
  case Scheme::CSK4:
    cal.csk_thresholds.clear();
    for (int c = 0; c + 1 < M; ++c) cal.csk_thresholds.push_back(boundary(fits[c], fits[c + 1]));
    std::sort(cal.csk_thresholds.begin(), cal.csk_thresholds.end());
    break;
  case Scheme::Hybrid:
    // Identity boundary between the two low-amplitude classes, the closest
    // pair across species.
    cal.mosk_threshold = boundary(fit(samples[0].mosk, 0), fit(samples[2].mosk, 2));
    cal.hybrid_thresholds = {boundary(fits[0], fits[1]), boundary(fits[2], fits[3])};
    break;
  }
  return cal;
}

} // namespace oectmc

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "oectmc/rng.hpp"

namespace oectmc {

/// Random stream with the distributions the simulator needs.
///
/// Each stream owns its engine and its cached-normal state, so one stream
/// must stay confined to one thread.
class Sampler {
public:
  explicit Sampler(Engine engine) : engine_(std::move(engine)) {}

  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  double normal() { return normal_(engine_); }

  /// Poisson draw. Exact inversion below mean 30, rounded normal
  /// approximation (clamped at 0) above.
  std::int64_t poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    if (mean < kPoissonExactLimit) {
      double u = uniform();
      double p = std::exp(-mean);
      double cdf = p;
      std::int64_t k = 0;
      while (u > cdf) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
        if (p < 1e-300 && cdf >= 1.0 - 1e-15) break;
      }
      return k;
    }
    const double x = std::round(mean + std::sqrt(mean) * normal());
    return x < 0.0 ? 0 : static_cast<std::int64_t>(x);
  }

  /// Binomial draw. Exact below 1e5 trials. Above, the Poisson limit is used
  /// while the expected count is small and a matched-moment rounded normal
  /// once it is not.
  std::int64_t binomial(std::int64_t trials, double p) {
    if (trials <= 0 || !(p > 0.0)) return 0;
    if (p >= 1.0) return trials;
    if (trials < kBinomialExactLimit) {
      std::binomial_distribution<std::int64_t> dist(trials, p);
      return dist(engine_);
    }
    if (p > 0.5) return trials - binomial(trials, 1.0 - p);
    const double n = static_cast<double>(trials);
    const double mean = n * p;
    if (mean < kPoissonExactLimit) return std::min(poisson(mean), trials);
    const double sd = std::sqrt(mean * (1.0 - p));
    const double x = std::round(mean + sd * normal());
    return static_cast<std::int64_t>(std::clamp(x, 0.0, n));
  }

  Engine& engine() { return engine_; }

  static constexpr double kPoissonExactLimit = 30.0;
  static constexpr std::int64_t kBinomialExactLimit = 100000;

private:
  Engine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace oectmc

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "oectmc/config.hpp"
#include "oectmc/sampling.hpp"

namespace oectmc {

/// k_on / (1 + Da).
inline double effective_on_rate(double k_on, double Da) {
  if (!(Da >= 0.0)) throw std::invalid_argument("effective_on_rate: Da must be >= 0");
  return k_on / (1.0 + Da);
}

/// Langmuir dissociation constant k_off / k_on_eff (M). Infinite for a
/// channel that never binds.
inline double dissociation_constant(const SpeciesChannel& ch) {
  const double kon = effective_on_rate(ch.k_on, ch.Da);
  return kon > 0.0 ? ch.k_off / kon : INFINITY;
}

/// Langmuir fixed point under constant concentration c.
inline double equilibrium_occupancy(const SpeciesChannel& ch, double c) {
  const double kon = effective_on_rate(ch.k_on, ch.Da);
  const double on = kon * c;
  const double total = on + ch.k_off;
  return total > 0.0 ? static_cast<double>(ch.N_apt) * on / total : 0.0;
}

/// One explicit Euler step of dN_b/dt = k_on_eff c (N_apt - N_b) - k_off N_b,
/// clamped to [0, N_apt].
inline double mean_occupancy_step(double N_b, double c, double dt, const SpeciesChannel& ch) {
  const double n_apt = static_cast<double>(ch.N_apt);
  const double kon = effective_on_rate(ch.k_on, ch.Da);
  const double next = N_b + dt * (kon * c * (n_apt - N_b) - ch.k_off * N_b);
  return std::clamp(next, 0.0, n_apt);
}

struct OccupancyState {
  std::int64_t N_b = 0;
  const SpeciesChannel* channel = nullptr;
};

/// Birth-death occupancy update with exponential per-step event
/// probabilities. Precomputes everything that does not depend on c so the
/// per-step cost is two binomial draws.
class OccupancyStepper {
public:
  OccupancyStepper(const SpeciesChannel& ch, double dt)
      : n_apt_(ch.N_apt),
        on_rate_dt_(effective_on_rate(ch.k_on, ch.Da) * dt),
        p_off_(-std::expm1(-ch.k_off * dt)),
        inert_(ch.k_on == 0.0 && ch.k_off == 0.0) {}

  std::int64_t step(std::int64_t N_b, double c, Sampler& rng) const {
    if (inert_ || n_apt_ == 0) return 0;
    const double p_on = -std::expm1(-on_rate_dt_ * std::max(c, 0.0));
    const std::int64_t births = rng.binomial(n_apt_ - N_b, p_on);
    const std::int64_t deaths = rng.binomial(N_b, p_off_);
    return std::clamp<std::int64_t>(N_b + births - deaths, 0, n_apt_);
  }

  bool inert() const { return inert_ || n_apt_ == 0; }

private:
  std::int64_t n_apt_;
  double on_rate_dt_;
  double p_off_;
  bool inert_;
};

inline OccupancyState stochastic_occupancy_step(const OccupancyState& state, double c, double dt, Sampler& rng) {
  if (!state.channel) throw std::invalid_argument("stochastic_occupancy_step: state has no channel");
  const OccupancyStepper stepper(*state.channel, dt);
  return {stepper.step(state.N_b, c, rng), state.channel};
}

} // namespace oectmc

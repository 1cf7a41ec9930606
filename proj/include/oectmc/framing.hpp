#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "oectmc/config.hpp"
#include "oectmc/sampling.hpp"

namespace oectmc {

namespace framing_detail {
// Absorbs floating-point noise before rounding up to the step grid.
inline double grid_ceil(double x) { return std::ceil(x - 1e-9); }
} // namespace framing_detail

/// Symbol period on the dt grid.
///
/// t_char = c_t r^2 / D_eff_slow; BindingAware raises it to kappa / mean_k_off.
/// T_s = max(T_min, ceil((1 + guard) t_char / dt) dt), T_min itself rounded up
/// to the grid.
inline double symbol_period(double r, const Timing& timing, double D_eff_slow, double mean_k_off) {
  if (!(r > 0.0)) throw std::invalid_argument("symbol_period: r must be > 0");
  double t_char = timing.c_t * r * r / D_eff_slow;
  if (timing.policy == TimingPolicy::BindingAware && mean_k_off > 0.0)
    t_char = std::max(t_char, timing.kappa / mean_k_off);
  const double steps = std::max(framing_detail::grid_ceil(timing.T_min / timing.dt),
                                framing_detail::grid_ceil((1.0 + timing.guard) * t_char / timing.dt));
  return steps * timing.dt;
}

/// Scenario form: the slower of the two selective species sets the diffusion
/// timescale.
inline double symbol_period(const Scenario& sc, double r) {
  const double d_slow = std::min(effective_diffusivity(sc, Species::DA), effective_diffusivity(sc, Species::FHT));
  const double k_off = 0.5 * (sc.channel(Species::DA).k_off + sc.channel(Species::FHT).k_off);
  return symbol_period(r, sc.timing, d_slow, k_off);
}

/// W = round(eta T_s / dt) dt, at least dt and at most T_s.
inline double decision_window(double T_s, double eta, double dt) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("decision_window: eta outside (0, 1]");
  const double steps = std::max(1.0, std::round(eta * T_s / dt));
  return std::min(steps * dt, T_s);
}

inline std::int64_t grid_steps(double duration, double dt) {
  return static_cast<std::int64_t>(std::llround(duration / dt));
}

struct SymbolFrame {
  int index = 0;
  Species species = Species::DA;
  double mean_count = 0.0;
  std::int64_t realized_count = 0;
  double T_s = 0.0;
  double W = 0.0;
};

inline EmissionLevel encode(int index, Scheme scheme, double N_m, Species csk_axis = Species::DA) {
  const auto levels = alphabet_levels(scheme, N_m, csk_axis);
  if (index < 0 || index >= static_cast<int>(levels.size()))
    throw std::out_of_range("encode: symbol index out of range");
  return levels[static_cast<std::size_t>(index)];
}

/// Inverse of encode; throws if the level is not in the alphabet.
inline int decode(const EmissionLevel& level, Scheme scheme, double N_m, Species csk_axis = Species::DA) {
  const auto levels = alphabet_levels(scheme, N_m, csk_axis);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& l = levels[i];
    if (l.species == level.species &&
        std::abs(l.mean_count - level.mean_count) <= 1e-9 * std::max(1.0, std::abs(l.mean_count)))
      return static_cast<int>(i);
  }
  throw std::invalid_argument("decode: level not in alphabet");
}

/// Hybrid symbol bits: MSB selects the species, LSB the amplitude.
constexpr int identity_bit(int index) { return (index >> 1) & 1; }
constexpr int amplitude_bit(int index) { return index & 1; }

inline std::int64_t draw_emission(double mean_count, Sampler& rng) {
  if (!(mean_count >= 0.0)) throw std::invalid_argument("draw_emission: mean must be >= 0");
  return rng.poisson(mean_count);
}

} // namespace oectmc

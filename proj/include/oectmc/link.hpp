#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "oectmc/binding.hpp"
#include "oectmc/config.hpp"
#include "oectmc/detection.hpp"
#include "oectmc/device.hpp"
#include "oectmc/framing.hpp"
#include "oectmc/rng.hpp"
#include "oectmc/sampling.hpp"
#include "oectmc/transport.hpp"

namespace oectmc {

/// One simulated configuration: what is sent, how far, and how it is read.
struct OperatingPoint {
  Scheme scheme = Scheme::Hybrid;
  double N_m = 14000.0;
  double r = 45e-6;
  bool ctrl = true;
  bool isi = false;
  std::optional<double> T_s; // overrides the timing policy when set
};

inline OperatingPoint operating_point(const Scenario& sc) {
  return {sc.modulation.scheme, sc.modulation.N_m, sc.modulation.r, sc.modulation.ctrl, sc.montecarlo.isi,
          std::nullopt};
}

/// Independent random streams used while simulating symbols.
struct StreamSet {
  Sampler symbols;
  Sampler emission;
  std::array<Sampler, 2> binding; // DA, 5HT
  Sampler noise;
};

inline StreamSet make_streams(std::uint64_t master, std::uint64_t point_key, std::uint64_t seed_index) {
  return {Sampler(make_engine(master, point_key, seed_index, StreamRole::Symbols)),
          Sampler(make_engine(master, point_key, seed_index, StreamRole::Emission)),
          {Sampler(make_engine(master, point_key, seed_index, StreamRole::BindingDA)),
           Sampler(make_engine(master, point_key, seed_index, StreamRole::BindingFHT))},
          Sampler(make_engine(master, point_key, seed_index, StreamRole::Noise))};
}

/// Streams for calibrating one symbol class, kept apart from every
/// Monte Carlo seed.
inline StreamSet make_calibration_streams(std::uint64_t master, std::uint64_t point_key, int class_index) {
  const auto sub = derive_seed(master, point_key, static_cast<std::uint64_t>(class_index), StreamRole::Calibration);
  return make_streams(sub, point_key, 0);
}

/// Everything about an operating point that does not change from symbol to
/// symbol: timing, transport profiles, noise variances, normalizers.
class LinkModel {
public:
  LinkModel(const Scenario& sc, const OperatingPoint& op) : sc_(sc), op_(op) {
    const double dt = sc.timing.dt;
    T_s_ = op.T_s ? framing_detail::grid_ceil(*op.T_s / dt) * dt : symbol_period(sc, op.r);
    W_ = decision_window(T_s_, sc.timing.eta, dt);
    steps_ = grid_steps(T_s_, dt);
    window_start_ = steps_ - grid_steps(W_, dt);
    levels_ = alphabet_levels(op.scheme, op.N_m, sc.modulation.csk_axis);

    for (Species s : {Species::DA, Species::FHT}) {
      auto& ax = axes_[axis_index(s)];
      const auto& ch = sc.channel(s);
      ax.channel = ch;
      ax.current_per_site = current_per_site(sc.device, ch.q_eff);
      const double r = ch.r.value_or(op.r);
      const double d_eff = effective_diffusivity(sc, s);
      ax.depth = 1;
      if (op.isi) {
        ax.depth = isi_memory_depth(r, T_s_, W_, sc.medium, d_eff, sc.montecarlo.K_max, sc.montecarlo.isi_epsilon);
      }
      ax.profile = unit_concentration_profile(r, dt, static_cast<std::size_t>(steps_ * ax.depth), sc.timing.T_rel,
                                              sc.medium, d_eff);
    }

    noise_on_ = components_of(sc.noise);
    variances_ = surrogate_variances(W_, dt, sc.device, sc.medium.temperature, sc.noise.rho, noise_on_);
    covariance_ = noise_charge_covariance(variances_, sc.noise.rho);
    signs_ = {sign_of(sc.channel(Species::DA).q_eff), sign_of(sc.channel(Species::FHT).q_eff)};
  }

  const Scenario& scenario() const { return sc_; }
  const OperatingPoint& point() const { return op_; }
  double T_s() const { return T_s_; }
  double W() const { return W_; }
  std::int64_t steps() const { return steps_; }
  std::int64_t window_start() const { return window_start_; }
  int memory_depth(Species s) const { return axes_[axis_index(s)].depth; }
  const std::vector<EmissionLevel>& levels() const { return levels_; }
  int alphabet() const { return static_cast<int>(levels_.size()); }
  const SurrogateVariances& variances() const { return variances_; }
  const ChargeCovariance& covariance() const { return covariance_; }
  std::array<int, 2> signs() const { return signs_; }
  NoiseComponents noise_components() const { return noise_on_; }

  /// Normalizers: sigma of the MoSK difference and of a single axis charge,
  /// taken from the noise covariance. Zero-noise axes get unit scale.
  double sigma_delta() const {
    return positive_sqrt(quadratic_form({double(signs_[0]), -double(signs_[1]), 0.0}, covariance_));
  }
  double sigma_axis(bool ctrl) const {
    return positive_sqrt(ctrl ? variances_.referenced : variances_.single);
  }

  /// Noise-free, mean-emission window charges of one symbol (no ISI).
  ChargeTriple mean_charges(int index) const {
    const auto& lvl = levels_.at(static_cast<std::size_t>(index));
    ChargeTriple t;
    const auto& ax = axes_[axis_index(lvl.species)];
    std::vector<double> conc(static_cast<std::size_t>(steps_));
    for (std::size_t n = 0; n < conc.size(); ++n) conc[n] = lvl.mean_count * ax.profile[n];
    double n_b = 0.0;
    double sum = 0.0;
    for (std::int64_t n = 0; n < steps_; ++n) {
      if (n >= window_start_) sum += n_b;
      n_b = mean_occupancy_step(n_b, conc[static_cast<std::size_t>(n)], sc_.timing.dt, ax.channel);
    }
    const double q = ax.current_per_site * sum * sc_.timing.dt;
    (lvl.species == Species::DA ? t.q_DA : t.q_FHT) = q;
    return t;
  }

  /// Per-seed mutable state: occupancy, emission history and RNG streams.
  class Session {
  public:
    Session(const LinkModel& model, StreamSet streams) : m_(model), rng_(std::move(streams)) {
      const bool stochastic = m_.sc_.montecarlo.shot_noise;
      for (std::size_t a = 0; a < 2; ++a) {
        stepper_[a].emplace(m_.axes_[a].channel, m_.sc_.timing.dt);
        history_[a].assign(static_cast<std::size_t>(m_.axes_[a].depth), 0.0);
      }
      stochastic_ = stochastic;
      conc_.resize(static_cast<std::size_t>(m_.steps_));
    }

    int draw_symbol() {
      const int M = m_.alphabet();
      const int idx = static_cast<int>(rng_.symbols.uniform() * M);
      return std::min(idx, M - 1);
    }

    /// Sends one symbol and returns the window charges on all channels.
    ChargeTriple transmit(int index) {
      const auto& lvl = m_.levels_.at(static_cast<std::size_t>(index));
      const double count =
          stochastic_ ? static_cast<double>(draw_emission(lvl.mean_count, rng_.emission)) : lvl.mean_count;

      std::array<double, 2> q{0.0, 0.0};
      const bool waveform = m_.sc_.montecarlo.noise_path == NoisePath::Waveform;
      for (std::size_t a = 0; a < 2; ++a) {
        auto& hist = history_[a];
        if (!m_.op_.isi) {
          std::fill(hist.begin(), hist.end(), 0.0);
          occupancy_[a] = 0.0;
        } else {
          std::rotate(hist.rbegin(), hist.rbegin() + 1, hist.rend());
        }
        hist[0] = (a == axis_index(lvl.species)) ? count : 0.0;
        q[a] = signal_charge(a, waveform ? &traces_[a] : nullptr);
      }

      ChargeTriple t;
      if (!waveform) {
        const auto noise = draw_noise_charges(m_.variances_, m_.sc_.noise.rho, rng_.noise);
        t.q_DA = q[0] + noise[0];
        t.q_FHT = q[1] + noise[1];
        t.q_CTRL = noise[2];
        return t;
      }
      const double dt = m_.sc_.timing.dt;
      const auto trip = synthesize_noise_triplet(m_.W_, dt, m_.sc_.device, m_.sc_.medium.temperature,
                                                 m_.sc_.noise.rho, rng_.noise, m_.noise_on_);
      std::array<double, 3> out{};
      for (std::size_t ch = 0; ch < 3; ++ch) {
        std::vector<double> trace(static_cast<std::size_t>(m_.steps_), 0.0);
        if (ch < 2) trace = traces_[ch];
        const auto& nz = trip.total[ch];
        for (std::size_t i = 0; i < nz.size(); ++i) trace[static_cast<std::size_t>(m_.window_start_) + i] += nz[i];
        out[ch] = integrate_charge(trace, m_.T_s_, m_.W_, dt);
      }
      t.q_DA = out[0];
      t.q_FHT = out[1];
      t.q_CTRL = out[2];
      return t;
    }

  private:
    /// Binds over one symbol period and returns the signal charge in the
    /// window. Current sample n uses the occupancy at the start of step n.
    double signal_charge(std::size_t a, std::vector<double>* trace) {
      const auto& ax = m_.axes_[a];
      const auto& hist = history_[a];
      const auto S = static_cast<std::size_t>(m_.steps_);
      bool any = false;
      std::fill(conc_.begin(), conc_.end(), 0.0);
      for (std::size_t k = 0; k < hist.size(); ++k) {
        if (hist[k] == 0.0) continue;
        any = true;
        const double* p = ax.profile.data() + k * S;
        for (std::size_t n = 0; n < S; ++n) conc_[n] += hist[k] * p[n];
      }
      if (trace) trace->assign(S, 0.0);
      if (!any && occupancy_[a] == 0.0) return 0.0;
      if (stepper_[a]->inert()) return 0.0;

      const double dt = m_.sc_.timing.dt;
      const auto start = static_cast<std::size_t>(m_.window_start_);
      double n_b = occupancy_[a];
      double sum = 0.0;
      if (stochastic_) {
        auto nb = static_cast<std::int64_t>(n_b);
        auto& rng = rng_.binding[a];
        for (std::size_t n = 0; n < S; ++n) {
          if (n >= start) sum += static_cast<double>(nb);
          if (trace) (*trace)[n] = ax.current_per_site * static_cast<double>(nb);
          nb = stepper_[a]->step(nb, conc_[n], rng);
        }
        n_b = static_cast<double>(nb);
      } else {
        for (std::size_t n = 0; n < S; ++n) {
          if (n >= start) sum += n_b;
          if (trace) (*trace)[n] = ax.current_per_site * n_b;
          n_b = mean_occupancy_step(n_b, conc_[n], dt, ax.channel);
        }
      }
      occupancy_[a] = n_b;
      return ax.current_per_site * sum * dt;
    }

    const LinkModel& m_;
    StreamSet rng_;
    bool stochastic_ = true;
    std::array<std::optional<OccupancyStepper>, 2> stepper_;
    std::array<std::vector<double>, 2> history_; // newest first
    std::array<double, 2> occupancy_{0.0, 0.0};
    std::array<std::vector<double>, 2> traces_;
    std::vector<double> conc_;
  };

  Session session(StreamSet streams) const { return Session(*this, std::move(streams)); }

private:
  struct Axis {
    SpeciesChannel channel;
    double current_per_site = 0.0;
    int depth = 1;
    std::vector<double> profile; // per-molecule concentration, depth * steps samples
  };

  static std::size_t axis_index(Species s) { return s == Species::FHT ? 1 : 0; }
  static double positive_sqrt(double v) { return v > 0.0 ? std::sqrt(v) : 1.0; }

  Scenario sc_;
  OperatingPoint op_;
  double T_s_ = 0.0;
  double W_ = 0.0;
  std::int64_t steps_ = 0;
  std::int64_t window_start_ = 0;
  std::vector<EmissionLevel> levels_;
  std::array<Axis, 2> axes_;
  NoiseComponents noise_on_;
  SurrogateVariances variances_;
  ChargeCovariance covariance_{};
  std::array<int, 2> signs_{-1, 1};
};

} // namespace oectmc

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "oectmc/calibration.hpp"
#include "oectmc/detection.hpp"
#include "oectmc/link.hpp"
#include "oectmc/parallel.hpp"
#include "oectmc/scenario_io.hpp"

namespace oectmc {

/// Error counts of one simulated symbol sequence.
struct SeedOutcome {
  std::int64_t errors = 0;
  std::int64_t symbols = 0;
  std::int64_t identity_errors = 0;  // wrong species decided
  std::int64_t amplitude_errors = 0; // right species, wrong level
};

struct SerEstimate {
  std::int64_t errors = 0;
  std::int64_t symbols = 0;
  double ser = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  int seeds_used = 0;
  std::int64_t identity_errors = 0;
  std::int64_t amplitude_errors = 0;

  double halfwidth() const { return 0.5 * (wilson_hi - wilson_lo); }
};

/// Wilson score interval for k successes in n trials.
inline std::pair<double, double> wilson_interval(std::int64_t k, std::int64_t n, double z = 1.96) {
  if (n <= 0) throw std::invalid_argument("wilson_interval: n must be > 0");
  if (k < 0 || k > n) throw std::invalid_argument("wilson_interval: k outside [0, n]");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  const double lo = k == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = k == n ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

struct SeedSchedule {
  int symbols_per_seed = 2000;
  int min_seeds = 8;
  int max_seeds = 50;
  double halfwidth_target = 4e-3;
  double z = 1.96;
};

inline SeedSchedule seed_schedule(const MonteCarlo& mc) {
  return {mc.symbols_per_seed, mc.min_seeds, mc.max_seeds, mc.halfwidth_target, mc.z};
}

/// Pools seeds until the Wilson half-width reaches the target (after at
/// least min_seeds) or max_seeds is hit. Seeds run in parallel batches but
/// the stop rule is applied in seed order, so the result does not depend on
/// the worker count.
template <class SeedFn>
SerEstimate estimate_ser(SeedFn&& run_seed, const SeedSchedule& sched, unsigned workers = worker_count()) {
  SerEstimate est;
  int next = 0;
  bool done = false;
  while (!done) {
    const int batch = next == 0 ? sched.min_seeds : static_cast<int>(std::max(1u, workers));
    const int count = std::min(batch, sched.max_seeds - next);
    const auto outcomes = parallel_map(
        static_cast<std::size_t>(count), [&](std::size_t i) { return run_seed(next + static_cast<int>(i)); },
        workers);
    for (const auto& o : outcomes) {
      est.errors += o.errors;
      est.symbols += o.symbols;
      est.identity_errors += o.identity_errors;
      est.amplitude_errors += o.amplitude_errors;
      ++est.seeds_used;
      const auto [lo, hi] = wilson_interval(est.errors, est.symbols, sched.z);
      est.wilson_lo = lo;
      est.wilson_hi = hi;
      if (est.seeds_used >= sched.min_seeds &&
          (est.halfwidth() <= sched.halfwidth_target || est.seeds_used >= sched.max_seeds)) {
        done = true;
        break;
      }
    }
    next += count;
    if (next >= sched.max_seeds) done = true;
  }
  est.ser = static_cast<double>(est.errors) / static_cast<double>(est.symbols);
  return est;
}

/// Simulates n_symbols i.i.d. uniform symbols and counts decision errors.
inline SeedOutcome simulate_sequence(const LinkModel& model, const DetectorCalibration& cal, int n_symbols,
                                     StreamSet streams) {
  auto session = model.session(std::move(streams));
  const Scheme scheme = model.point().scheme;
  SeedOutcome out;
  for (int i = 0; i < n_symbols; ++i) {
    const int sent = session.draw_symbol();
    const int got = detect(scheme, session.transmit(sent), cal);
    ++out.symbols;
    if (got == sent) continue;
    ++out.errors;
    const bool identity = scheme == Scheme::MoSK || (scheme == Scheme::Hybrid && identity_bit(got) != identity_bit(sent));
    ++(identity ? out.identity_errors : out.amplitude_errors);
  }
  return out;
}

/// Stream key of an operating point. N_m and the CTRL flag are left out so
/// that CTRL on/off and LoD probes reuse the same random numbers.
inline std::uint64_t point_key(const Scenario& sc, const OperatingPoint& op) {
  Scenario s = sc;
  s.modulation.N_m = 0.0;
  s.modulation.ctrl = true;
  s.modulation.scheme = op.scheme;
  s.modulation.r = op.r;
  s.montecarlo.isi = op.isi;
  s.montecarlo.master_seed = 0;
  const std::string ts = op.T_s ? scenario_detail::format_double(*op.T_s) : std::string("auto");
  return fnv1a64(serialize_scenario(s) + "|T_s=" + ts);
}

struct PointResult {
  OperatingPoint op;
  double T_s = 0.0;
  double W = 0.0;
  SerEstimate estimate;
  DetectorCalibration calibration;
  double runtime_s = 0.0;
};

/// Calibrates at the operating point (ISI off) and estimates its SER.
inline PointResult evaluate_point(const Scenario& sc, const OperatingPoint& op, unsigned workers = worker_count()) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t master = sc.montecarlo.master_seed;
  const std::uint64_t key = point_key(sc, op);
  OperatingPoint cal_op = op;
  cal_op.isi = false;
  const LinkModel cal_model(sc, cal_op);
  const DetectorCalibration cal = calibrate(cal_model, master, key);
  std::optional<LinkModel> isi_model;
  if (op.isi) isi_model.emplace(sc, op);
  const LinkModel& model = isi_model ? *isi_model : cal_model;

  PointResult res;
  res.op = op;
  res.T_s = model.T_s();
  res.W = model.W();
  res.calibration = cal;
  const int n = sc.montecarlo.symbols_per_seed;
  res.estimate = estimate_ser(
      [&](int seed) { return simulate_sequence(model, cal, n, make_streams(master, key, static_cast<std::uint64_t>(seed))); },
      seed_schedule(sc.montecarlo), workers);
  res.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

/// 0.5 erfc(|mu1 - mu0| / (2 sqrt(2) sigma)).
inline double gaussian_ser(double mu0, double mu1, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_ser: sigma must be > 0");
  return 0.5 * std::erfc(std::abs(mu1 - mu0) / (2.0 * std::sqrt(2.0) * sigma));
}

namespace experiments_detail {

/// Upper Gaussian tail P(Z > x / sd), with the sd = 0 limit.
inline double tail(double x, double sd) {
  if (sd > 0.0) return 0.5 * std::erfc(x / (sd * std::sqrt(2.0)));
  return x > 0.0 ? 0.0 : (x < 0.0 ? 1.0 : 0.5);
}

using Weights = std::array<double, 3>;

inline Weights unit(Species s) {
  Weights w{};
  w[static_cast<std::size_t>(s)] = 1.0;
  return w;
}

inline Weights axis_weights(Species s, bool ctrl) {
  Weights w = unit(s);
  if (ctrl) w[2] -= 1.0;
  return w;
}

inline Weights scaled_sum(double a, const Weights& x, double b, const Weights& y) {
  return {a * x[0] + b * y[0], a * x[1] + b * y[1], a * x[2] + b * y[2]};
}

inline double dot(const Weights& w, const ChargeTriple& t) { return w[0] * t.q_DA + w[1] * t.q_FHT + w[2] * t.q_CTRL; }

} // namespace experiments_detail

/// Equal-variance Gaussian SER prediction from noise-free class means and the
/// exact electrical-noise variance of each linear statistic, with midpoint
/// boundaries. Emission and binding randomness is ignored.
inline double predicted_ser(const LinkModel& model) {
  using namespace experiments_detail;
  const auto cal = detector_skeleton(model);
  const auto& cov = model.covariance();
  const int M = model.alphabet();
  std::vector<ChargeTriple> means;
  for (int i = 0; i < M; ++i) means.push_back(model.mean_charges(i));

  const Weights mosk_w{cal.signs[0] / cal.sigma_delta, -cal.signs[1] / cal.sigma_delta, 0.0};
  const double mosk_sd = std::sqrt(quadratic_form(mosk_w, cov));
  double total = 0.0;
  switch (cal.scheme) {
  case Scheme::MoSK: {
    const double z0 = dot(mosk_w, means[0]);
    const double z1 = dot(mosk_w, means[1]);
    const double tau = 0.5 * (z0 + z1);
    total = tail(z0 - tau, mosk_sd) + tail(tau - z1, mosk_sd);
    break;
  }
  case Scheme::CSK4: {
    const Species t = cal.csk_axis;
    const Weights w = scaled_sum(cal.sign(t) / cal.sigma_t, axis_weights(t, cal.ctrl_enabled),
                                 -cal.sign(t) * cal.rho_cc / cal.sigma_o, axis_weights(other_axis(t), cal.ctrl_enabled));
    const double sd = std::sqrt(quadratic_form(w, cov));
    std::vector<double> s;
    for (const auto& m : means) s.push_back(dot(w, m));
    for (int i = 0; i < M; ++i) {
      double p = 0.0;
      if (i > 0) p += tail(s[i] - 0.5 * (s[i - 1] + s[i]), sd);
      if (i + 1 < M) p += tail(0.5 * (s[i] + s[i + 1]) - s[i], sd);
      total += std::min(1.0, p);
    }
    break;
  }
  case Scheme::Hybrid: {
    std::vector<double> z;
    for (const auto& m : means) z.push_back(dot(mosk_w, m));
    const double tau_id = 0.5 * (z[0] + z[2]);
    std::array<Weights, 2> amp_w{};
    std::array<double, 2> amp_sd{};
    for (int b = 0; b < 2; ++b) {
      const Species sp = b == 0 ? Species::DA : Species::FHT;
      amp_w[b] = scaled_sum(cal.sign(sp) / cal.sigma_t, axis_weights(sp, cal.ctrl_enabled), 0.0, Weights{});
      amp_sd[b] = std::sqrt(quadratic_form(amp_w[b], cov));
    }
    for (int i = 0; i < M; ++i) {
      const int b = identity_bit(i);
      const double p_id = b == 0 ? tail(z[i] - tau_id, mosk_sd) : tail(tau_id - z[i], mosk_sd);
      const double lo = dot(amp_w[b], means[2 * b]);
      const double hi = dot(amp_w[b], means[2 * b + 1]);
      const double a = dot(amp_w[b], means[i]);
      const double tau = 0.5 * (lo + hi);
      const double p_amp = amplitude_bit(i) == 1 ? tail(a - tau, amp_sd[b]) : tail(tau - a, amp_sd[b]);
      total += 1.0 - (1.0 - p_id) * (1.0 - p_amp);
    }
    break;
  }
  }
  return total / M;
}

class LodError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Smallest doubling bracket [N_lo, 2 N_lo] in [1, 1e9] whose predicted SER
/// straddles the LoD target.
inline std::pair<double, double> gaussian_bracket_lod(const Scenario& sc, OperatingPoint op) {
  op.isi = false;
  const double target = sc.montecarlo.lod_target;
  auto predict = [&](double n) {
    op.N_m = n;
    return predicted_ser(LinkModel(sc, op));
  };
  double n = 1e4;
  if (predict(n) > target) {
    while (predict(n) > target) {
      n *= 2.0;
      if (n > 1e9) throw LodError("LoD not bracketable within [1, 1e9] molecules");
    }
    return {n / 2.0, n};
  }
  while (predict(n) <= target) {
    n /= 2.0;
    if (n < 1.0) throw LodError("LoD not bracketable within [1, 1e9] molecules");
  }
  return {n, 2.0 * n};
}

struct LodCriteria {
  double target = 0.01;
  double upper_bound = 0.0104;
  double halfwidth = 4e-3;
  double ratio = 1.02;
  int max_probes = 30;
};

inline LodCriteria lod_criteria(const MonteCarlo& mc) {
  return {mc.lod_target, mc.lod_upper_bound, mc.halfwidth_target, mc.lod_ratio, mc.lod_max_probes};
}

struct LodProbe {
  double N_m = 0.0;
  SerEstimate estimate;
  bool pass = false;
};

struct LodResult {
  double r = 0.0;
  Scheme scheme = Scheme::Hybrid;
  bool ctrl = true;
  std::int64_t lod = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::vector<LodProbe> trace;
  std::optional<SerEstimate> at_lod() const {
    for (const auto& p : trace)
      if (p.N_m == static_cast<double>(lod)) return p.estimate;
    return std::nullopt;
  }
};

/// A probe passes if the Wilson upper bound is within the acceptance bound,
/// or the point estimate meets the target at the required precision.
inline bool lod_passes(const SerEstimate& e, const LodCriteria& c) {
  return e.wilson_hi <= c.upper_bound || (e.ser <= c.target && e.halfwidth() <= c.halfwidth);
}

/// Log-bisection for the smallest integer N_m that passes, starting from a
/// bracket. The bracket is widened by doubling or halving when the probes
/// contradict it.
template <class Probe>
LodResult search_lod(Probe&& probe, double bracket_lo, double bracket_hi, const LodCriteria& crit) {
  LodResult res;
  res.bracket_lo = bracket_lo;
  res.bracket_hi = bracket_hi;
  std::map<std::int64_t, bool> seen;
  auto run = [&](std::int64_t n) {
    if (auto it = seen.find(n); it != seen.end()) return it->second;
    if (static_cast<int>(res.trace.size()) >= crit.max_probes)
      throw LodError("LoD search did not converge within " + std::to_string(crit.max_probes) + " probes");
    LodProbe p;
    p.N_m = static_cast<double>(n);
    p.estimate = probe(p.N_m);
    p.pass = lod_passes(p.estimate, crit);
    res.trace.push_back(p);
    seen.emplace(n, p.pass);
    return p.pass;
  };

  auto hi = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(bracket_hi)));
  auto lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(bracket_lo)));
  if (lo >= hi) lo = std::max<std::int64_t>(1, hi / 2);
  while (!run(hi)) {
    lo = hi;
    hi *= 2;
  }
  while (lo < hi && run(lo)) {
    hi = lo;
    if (lo == 1) {
      res.lod = 1;
      return res;
    }
    lo = std::max<std::int64_t>(1, lo / 2);
  }
  while (hi - lo > 1 && static_cast<double>(hi) / static_cast<double>(lo) > crit.ratio) {
    auto mid = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(lo) * static_cast<double>(hi))));
    mid = std::clamp<std::int64_t>(mid, lo + 1, hi - 1);
    (run(mid) ? hi : lo) = mid;
  }
  res.lod = hi;
  return res;
}

/// Monte Carlo LoD at one distance: Gaussian bracket, then validated search.
inline LodResult find_lod(const Scenario& sc, OperatingPoint op, unsigned workers = worker_count()) {
  const auto [lo, hi] = gaussian_bracket_lod(sc, op);
  auto probe = [&](double n) {
    OperatingPoint p = op;
    p.N_m = n;
    return evaluate_point(sc, p, workers).estimate;
  };
  LodResult res = search_lod(probe, lo, hi, lod_criteria(sc.montecarlo));
  res.r = op.r;
  res.scheme = op.scheme;
  res.ctrl = op.ctrl;
  return res;
}

} // namespace oectmc

#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "oectmc/config.hpp"
#include "oectmc/experiments.hpp"
#include "oectmc/framing.hpp"
#include "oectmc/results.hpp"

namespace oectmc {

enum class SweepAxis { NumMolecules, Distance, SymbolPeriod, Device, Rho, DiffusionScale, Temperature };

constexpr std::string_view to_string(SweepAxis a) {
  switch (a) {
  case SweepAxis::NumMolecules: return "nm";
  case SweepAxis::Distance: return "distance";
  case SweepAxis::SymbolPeriod: return "ts";
  case SweepAxis::Device: return "device";
  case SweepAxis::Rho: return "rho";
  case SweepAxis::DiffusionScale: return "diffusion_scale";
  case SweepAxis::Temperature: return "temperature";
  }
  return "?";
}

class SweepError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline SweepAxis parse_axis(std::string_view s) {
  if (s == "nm" || s == "N_m") return SweepAxis::NumMolecules;
  if (s == "distance" || s == "r") return SweepAxis::Distance;
  if (s == "ts" || s == "T_s") return SweepAxis::SymbolPeriod;
  if (s == "device" || s == "gm_ctot") return SweepAxis::Device;
  if (s == "rho") return SweepAxis::Rho;
  if (s == "diffusion_scale" || s == "diffusion") return SweepAxis::DiffusionScale;
  if (s == "temperature" || s == "T") return SweepAxis::Temperature;
  throw SweepError("unknown sweep axis '" + std::string(s) + "'");
}

struct SweepSpec {
  SweepAxis axis = SweepAxis::Distance;
  std::vector<double> values;
  std::vector<double> values2; // C_tot grid for the device axis
  std::vector<Scheme> schemes{Scheme::Hybrid};
  std::vector<bool> ctrl_modes{true};
  std::vector<bool> isi_modes{false};
  std::optional<double> N_m; // overrides the scenario budget
  bool lod = false;          // find the LoD per point instead of the SER at N_m
};

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  return v;
}

/// Default grids per axis.
inline SweepSpec default_sweep(SweepAxis axis) {
  SweepSpec s;
  s.axis = axis;
  switch (axis) {
  case SweepAxis::NumMolecules:
    s.values = {1e3, 2e3, 5e3, 1e4, 1.4e4, 2e4, 5e4, 1e5};
    break;
  case SweepAxis::Distance:
    s.values = {25e-6, 30e-6, 35e-6, 40e-6, 45e-6, 60e-6, 75e-6, 90e-6, 110e-6, 130e-6};
    break;
  case SweepAxis::SymbolPeriod:
    s.values = {36.5, 73.0, 109.5, 146.0, 219.0};
    s.isi_modes = {true, false};
    s.N_m = 2e4;
    break;
  case SweepAxis::Device:
    s.values = linspace(1e-3, 10e-3, 10);
    s.values2 = linspace(10e-9, 100e-9, 10);
    break;
  case SweepAxis::Rho:
    s.values = linspace(0.0, 1.0, 11);
    break;
  case SweepAxis::DiffusionScale:
    s.values = {0.5, 0.75, 1.0, 1.25, 1.5};
    break;
  case SweepAxis::Temperature:
    s.values = {285.0, 295.0, 310.0, 320.0, 330.0};
    break;
  }
  return s;
}

/// One grid point: the modified scenario and the operating-point overrides.
struct SweepPoint {
  double value = 0.0;
  std::optional<double> value2;
  Scenario scenario;
  double r = 0.0;
  std::optional<double> T_s;
};

inline std::vector<SweepPoint> expand_points(const Scenario& base, const SweepSpec& spec) {
  std::vector<SweepPoint> pts;
  auto add = [&](double v, std::optional<double> v2, Scenario sc, double r, std::optional<double> ts) {
    validate(sc);
    pts.push_back({v, v2, std::move(sc), r, ts});
  };
  const double r0 = base.modulation.r;
  for (double v : spec.values) {
    Scenario sc = base;
    switch (spec.axis) {
    case SweepAxis::NumMolecules:
      sc.modulation.N_m = v;
      add(v, std::nullopt, sc, r0, std::nullopt);
      break;
    case SweepAxis::Distance:
      add(v, std::nullopt, sc, v, std::nullopt);
      break;
    case SweepAxis::SymbolPeriod:
      add(v, std::nullopt, sc, r0, v);
      break;
    case SweepAxis::Device:
      if (spec.values2.empty()) throw SweepError("device sweep needs a C_tot grid");
      for (double c : spec.values2) {
        Scenario d = base;
        d.device.g_m = v;
        d.device.C_tot = c;
        add(v, c, d, r0, std::nullopt);
      }
      break;
    case SweepAxis::Rho:
      sc.noise.rho = v;
      add(v, std::nullopt, sc, r0, std::nullopt);
      break;
    case SweepAxis::DiffusionScale: {
      // The symbol period stays at the unscaled value so only transport changes.
      const double ts = symbol_period(base, r0);
      for (auto& ch : sc.species) ch.D *= v;
      add(v, std::nullopt, sc, r0, ts);
      break;
    }
    case SweepAxis::Temperature:
      sc.medium.temperature = v;
      add(v, std::nullopt, sc, r0, std::nullopt);
      break;
    }
  }
  if (spec.N_m)
    for (auto& p : pts) p.scenario.modulation.N_m = *spec.N_m;
  return pts;
}

inline ResultRow make_row(std::string_view axis, std::optional<double> v, std::optional<double> v2,
                          const OperatingPoint& op, double T_s, double W, const SerEstimate& e, double runtime_s,
                          std::uint64_t master_seed) {
  ResultRow row;
  row.axis = std::string(axis);
  row.axis_value = v;
  row.axis_value2 = v2;
  row.scheme = std::string(to_string(op.scheme));
  row.ctrl = op.ctrl;
  row.nm = op.N_m;
  row.r = op.r;
  row.ts = T_s;
  row.w = W;
  row.errors = e.errors;
  row.symbols = e.symbols;
  row.ser = e.ser;
  row.wilson_lo = e.wilson_lo;
  row.wilson_hi = e.wilson_hi;
  row.seeds_used = e.seeds_used;
  row.runtime_s = runtime_s;
  row.master_seed = master_seed;
  row.isi = op.isi;
  row.identity_errors = e.identity_errors;
  row.amplitude_errors = e.amplitude_errors;
  return row;
}

/// Evaluates every (point, scheme, ctrl, isi) combination in grid order.
/// `sink` sees each row as soon as it is complete.
inline std::vector<ResultRow> run_sweep(const Scenario& base, const SweepSpec& spec,
                                        const std::function<void(const ResultRow&)>& sink = {}) {
  if (spec.values.empty()) throw SweepError("sweep has no grid values");
  const auto points = expand_points(base, spec);
  std::vector<ResultRow> rows;
  for (const auto& pt : points) {
    for (Scheme scheme : spec.schemes) {
      for (bool isi : spec.isi_modes) {
        for (bool ctrl : spec.ctrl_modes) {
          const auto& sc = pt.scenario;
          OperatingPoint op{scheme, sc.modulation.N_m, pt.r, ctrl, isi, pt.T_s};
          ResultRow row;
          if (spec.lod) {
            const auto t0 = std::chrono::steady_clock::now();
            const LodResult lod = find_lod(sc, op);
            op.N_m = static_cast<double>(lod.lod);
            const LinkModel m(sc, op);
            const auto at = lod.at_lod().value_or(SerEstimate{});
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            row = make_row(to_string(spec.axis), pt.value, pt.value2, op, m.T_s(), m.W(), at, secs,
                           sc.montecarlo.master_seed);
            row.lod = lod.lod;
          } else {
            const auto res = evaluate_point(sc, op);
            row = make_row(to_string(spec.axis), pt.value, pt.value2, op, res.T_s, res.W, res.estimate,
                           res.runtime_s, sc.montecarlo.master_seed);
          }
          if (sink) sink(row);
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

} // namespace oectmc

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace oectmc {

enum class Species { DA = 0, FHT = 1, CTRL = 2 };
enum class Scheme { MoSK, CSK4, Hybrid };
enum class TimingPolicy { DiffusionOnly, BindingAware };
enum class NoisePath { Charge, Waveform };

inline constexpr std::array<Species, 3> kAllSpecies{Species::DA, Species::FHT, Species::CTRL};

constexpr std::string_view to_string(Species s) {
  switch (s) {
  case Species::DA: return "DA";
  case Species::FHT: return "5HT";
  case Species::CTRL: return "CTRL";
  }
  return "?";
}

constexpr std::string_view to_string(Scheme s) {
  switch (s) {
  case Scheme::MoSK: return "mosk";
  case Scheme::CSK4: return "csk4";
  case Scheme::Hybrid: return "hybrid";
  }
  return "?";
}

constexpr std::string_view to_string(TimingPolicy p) {
  return p == TimingPolicy::DiffusionOnly ? "diffusion" : "binding";
}

constexpr std::string_view to_string(NoisePath p) {
  return p == NoisePath::Charge ? "charge" : "waveform";
}

/// Error raised for malformed or out-of-range scenarios. `kind` tells the CLI
/// whether the file could not be read/parsed or parsed but failed validation.
class ScenarioError : public std::runtime_error {
public:
  enum class Kind { Parse, Validation };
  ScenarioError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

inline Scheme parse_scheme(std::string_view s) {
  if (s == "mosk" || s == "MoSK") return Scheme::MoSK;
  if (s == "csk4" || s == "csk" || s == "CSK4") return Scheme::CSK4;
  if (s == "hybrid" || s == "Hybrid") return Scheme::Hybrid;
  throw ScenarioError(ScenarioError::Kind::Validation, "unknown scheme '" + std::string(s) + "'");
}

inline Species parse_species(std::string_view s) {
  if (s == "DA") return Species::DA;
  if (s == "5HT" || s == "FHT" || s == "5-HT") return Species::FHT;
  if (s == "CTRL") return Species::CTRL;
  throw ScenarioError(ScenarioError::Kind::Validation, "unknown species '" + std::string(s) + "'");
}

struct Medium {
  double alpha = 0.20;       // volume fraction
  double lambda = 1.6;       // tortuosity
  double k_clear = 0.01;     // 1/s
  double temperature = 310.0; // K
  bool operator==(const Medium&) const = default;
};

struct SpeciesChannel {
  Species name = Species::DA;
  double D = 4.9e-10;   // m^2/s, aqueous
  double k_on = 1e5;    // 1/(M s)
  double k_off = 0.015; // 1/s
  double Da = 0.0;      // Damkohler number
  std::int64_t N_apt = 200'000'000;
  double q_eff = -0.35; // units of e
  std::optional<double> r; // per-channel separation override (m)
  bool operator==(const SpeciesChannel&) const = default;
};

struct Device {
  double g_m = 5e-3;      // S
  double C_tot = 50e-9;   // F
  double R_ch = 500.0;    // Ohm
  double I_DC = 100e-6;   // A
  double alpha_H = 1e-3;
  double N_c = 4.5e11;
  double K_drift = 1e-16; // Hz
  double B_det = 100.0;   // Hz
  double V_g = -0.2;      // V, metadata only

  double K_f() const { return alpha_H / N_c; }
  bool operator==(const Device&) const = default;
};

struct NoiseSettings {
  double rho = 0.9;
  double rho_cc = 0.5;
  bool thermal = true;
  bool flicker = true;
  bool drift = true;
  bool operator==(const NoiseSettings&) const = default;
};

struct Timing {
  double dt = 0.01;
  double eta = 0.6;
  double guard = 0.15;
  double T_min = 5.0;
  double c_t = 3.0;
  double kappa = 5.0;
  TimingPolicy policy = TimingPolicy::DiffusionOnly;
  double T_rel = 0.01;
  bool operator==(const Timing&) const = default;
};

struct Modulation {
  Scheme scheme = Scheme::Hybrid;
  double N_m = 14000.0;
  double r = 45e-6; // common separation for all three channels (m)
  Species csk_axis = Species::DA;
  bool ctrl = true;
  bool operator==(const Modulation&) const = default;
};

struct MonteCarlo {
  int symbols_per_seed = 2000;
  int min_seeds = 8;
  int max_seeds = 50;
  double halfwidth_target = 4e-3;
  double z = 1.96;
  int n_cal = 400;
  bool isi = false;
  int K_max = 60;
  double isi_epsilon = 1e-3;
  double lod_target = 0.01;
  double lod_upper_bound = 0.0104;
  double lod_ratio = 1.02;
  int lod_max_probes = 30;
  std::uint64_t master_seed = 1;
  bool shot_noise = true;
  NoisePath noise_path = NoisePath::Charge;
  bool operator==(const MonteCarlo&) const = default;
};

/// Complete, validated parameter bundle. Immutable after validation.
struct Scenario {
  Medium medium;
  std::array<SpeciesChannel, 3> species{
      SpeciesChannel{Species::DA, 4.9e-10, 1e5, 0.015, 0.0, 200'000'000, -0.35, std::nullopt},
      SpeciesChannel{Species::FHT, 5.3e-10, 1e5, 0.003, 0.0, 200'000'000, +0.35, std::nullopt},
      SpeciesChannel{Species::CTRL, 4.9e-10, 0.0, 0.0, 0.0, 0, 0.0, std::nullopt}};
  Device device;
  NoiseSettings noise;
  Timing timing;
  Modulation modulation;
  MonteCarlo montecarlo;

  const SpeciesChannel& channel(Species s) const { return species[static_cast<int>(s)]; }
  SpeciesChannel& channel(Species s) { return species[static_cast<int>(s)]; }

  /// Separation for a channel: per-channel override or the common r.
  double separation(Species s) const { return channel(s).r.value_or(modulation.r); }

  bool operator==(const Scenario&) const = default;
};

/// D_eff = D / lambda^2.
inline double effective_diffusivity(double D, double lambda) { return D / (lambda * lambda); }

inline double effective_diffusivity(const Scenario& sc, Species s) {
  return effective_diffusivity(sc.channel(s).D, sc.medium.lambda);
}

struct EmissionLevel {
  Species species;
  double mean_count;
  bool operator==(const EmissionLevel&) const = default;
};

inline int alphabet_size(Scheme scheme) { return scheme == Scheme::MoSK ? 2 : 4; }

/// Peak count N_pk such that equally likely symbols average to N_m.
inline double peak_count(Scheme scheme, double N_m) {
  switch (scheme) {
  case Scheme::MoSK: return N_m;
  case Scheme::CSK4: return N_m / 0.625;       // mean of {1,2,3,4}/4
  case Scheme::Hybrid: return N_m / 0.75;      // mean of {0.5, 1}
  }
  return N_m;
}

/// Emission level per symbol index.
///
/// MoSK: 0 -> DA, 1 -> 5HT at N_m. CSK4: index k -> (k+1)/4 N_pk on the CSK
/// axis. Hybrid: MSB selects species (0 DA, 1 5HT), LSB selects the level
/// (0 low = N_pk/2, 1 high = N_pk).
inline std::vector<EmissionLevel> alphabet_levels(Scheme scheme, double N_m,
                                                  Species csk_axis = Species::DA) {
  if (!(N_m >= 0.0))
    throw std::invalid_argument("alphabet_levels: N_m must be non-negative");
  const double pk = peak_count(scheme, N_m);
  switch (scheme) {
  case Scheme::MoSK:
    return {{Species::DA, N_m}, {Species::FHT, N_m}};
  case Scheme::CSK4:
    return {{csk_axis, 0.25 * pk}, {csk_axis, 0.5 * pk}, {csk_axis, 0.75 * pk}, {csk_axis, pk}};
  case Scheme::Hybrid:
    return {{Species::DA, 0.5 * pk}, {Species::DA, pk}, {Species::FHT, 0.5 * pk}, {Species::FHT, pk}};
  }
  throw std::invalid_argument("alphabet_levels: unknown scheme");
}

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw ScenarioError(ScenarioError::Kind::Validation, what);
}
} // namespace detail

/// Checks every documented invariant; throws ScenarioError naming the first
/// violation.
inline void validate(const Scenario& sc) {
  using detail::require;
  const auto& m = sc.medium;
  require(m.alpha > 0.0 && m.alpha <= 1.0, "alpha out of range (0, 1]");
  require(m.lambda >= 1.0, "lambda out of range (must be >= 1)");
  require(m.k_clear >= 0.0, "k_clear out of range (must be >= 0)");
  require(m.temperature > 0.0, "temperature out of range (must be > 0)");

  for (const auto& ch : sc.species) {
    const std::string n(to_string(ch.name));
    require(ch.D > 0.0, "species." + n + ".D out of range (must be > 0)");
    require(ch.N_apt >= 0, "species." + n + ".N_apt out of range (must be >= 0)");
    require(ch.Da >= 0.0, "species." + n + ".Da out of range (must be >= 0)");
    require(ch.k_on >= 0.0 && ch.k_off >= 0.0, "species." + n + " rates must be >= 0");
    if (ch.r) require(*ch.r > 0.0, "species." + n + ".r out of range (must be > 0)");
  }
  const auto& ctrl = sc.channel(Species::CTRL);
  require(ctrl.k_on == 0.0 && ctrl.k_off == 0.0, "species.CTRL must have k_on = k_off = 0");

  const auto& d = sc.device;
  require(d.g_m > 0.0, "g_m out of range (must be > 0)");
  require(d.C_tot > 0.0, "C_tot out of range (must be > 0)");
  require(d.R_ch > 0.0, "R_ch out of range (must be > 0)");
  require(d.I_DC > 0.0, "I_DC out of range (must be > 0)");
  require(d.alpha_H > 0.0, "alpha_H out of range (must be > 0)");
  require(d.N_c > 0.0, "N_c out of range (must be > 0)");
  require(d.K_drift > 0.0, "K_drift out of range (must be > 0)");
  require(d.B_det > 0.0, "B_det out of range (must be > 0)");

  require(sc.noise.rho >= 0.0 && sc.noise.rho <= 1.0, "rho out of range [0, 1]");
  require(std::abs(sc.noise.rho_cc) < 1.0, "rho_cc out of range (|rho_cc| < 1)");

  const auto& t = sc.timing;
  require(t.dt > 0.0, "dt out of range (must be > 0)");
  require(t.eta > 0.0 && t.eta <= 1.0, "eta out of range (0, 1]");
  require(t.guard >= 0.0, "guard out of range (must be >= 0)");
  require(t.T_min > 0.0, "T_min out of range (must be > 0)");
  require(t.c_t > 0.0, "c_t out of range (must be > 0)");
  require(t.kappa > 0.0, "kappa out of range (must be > 0)");
  require(t.T_rel > 0.0 && t.T_rel < t.T_min, "T_rel out of range (0 < T_rel < T_min)");
  require(t.eta * t.T_min >= t.dt, "eta * T_min must be >= dt");

  require(sc.modulation.N_m >= 0.0, "N_m out of range (must be >= 0)");
  require(sc.modulation.r > 0.0, "r out of range (must be > 0)");
  require(sc.modulation.csk_axis != Species::CTRL, "csk_axis must be DA or 5HT");

  const auto& mc = sc.montecarlo;
  require(mc.symbols_per_seed > 0, "symbols_per_seed out of range (must be > 0)");
  require(mc.min_seeds >= 1 && mc.max_seeds >= mc.min_seeds, "seed bounds out of range");
  require(mc.halfwidth_target > 0.0, "halfwidth_target out of range (must be > 0)");
  require(mc.z > 0.0, "z out of range (must be > 0)");
  require(mc.n_cal >= 2, "n_cal out of range (must be >= 2)");
  require(mc.K_max >= 2, "K_max out of range (must be >= 2)");
  require(mc.isi_epsilon > 0.0, "isi_epsilon out of range (must be > 0)");
  require(mc.lod_target > 0.0 && mc.lod_target < 1.0, "lod_target out of range (0, 1)");
  require(mc.lod_ratio > 1.0, "lod_ratio out of range (must be > 1)");
  require(mc.lod_max_probes >= 1, "lod_max_probes out of range (must be >= 1)");
}

} // namespace oectmc

#pragma once

// Scenario files: INI-style sections mirroring the scenario types, SI units,
// unknown sections/keys rejected. Omitted keys keep their baseline defaults.
//
//   [medium]        alpha lambda k_clear temperature
//   [species.DA]    D k_on k_off Da N_apt q_eff r
//   [species.5HT]   (same keys)
//   [species.CTRL]  (same keys; k_on = k_off = 0 enforced)
//   [device]        g_m C_tot R_ch I_DC alpha_H N_c K_drift B_det V_g
//   [noise]         rho rho_cc thermal flicker drift
//   [timing]        dt eta guard T_min c_t kappa policy T_rel
//   [modulation]    scheme N_m r csk_axis ctrl
//   [montecarlo]    symbols_per_seed min_seeds max_seeds halfwidth_target z n_cal
//                   isi K_max isi_epsilon lod_target lod_upper_bound lod_ratio
//                   lod_max_probes master_seed shot_noise noise_path

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <type_traits>

#include "oectmc/config.hpp"
#include "oectmc/rng.hpp"

namespace oectmc {

namespace scenario_detail {

[[noreturn]] inline void parse_fail(const std::string& where, const std::string& msg) {
  throw ScenarioError(ScenarioError::Kind::Parse, where + ": " + msg);
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& where, const std::string& raw) {
  const std::string v = trim(raw);
  double out = 0.0;
  const auto* first = v.data();
  const auto* last = v.data() + v.size();
  if (!v.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) parse_fail(where, "expected a number, got '" + v + "'");
  return out;
}

inline std::int64_t to_int(const std::string& where, const std::string& raw) {
  const double d = to_double(where, raw);
  if (d != std::floor(d) || std::abs(d) > 9.0e18) parse_fail(where, "expected an integer, got '" + trim(raw) + "'");
  return static_cast<std::int64_t>(d);
}

inline bool to_bool(const std::string& where, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  parse_fail(where, "expected a boolean, got '" + v + "'");
}

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

using Setter = std::function<void(Scenario&, const std::string& where, const std::string& value)>;
using Getter = std::function<std::string(const Scenario&)>;

struct Field {
  Setter set;
  Getter get;
  bool optional_field = false; // omitted from output when unset
};

template <class Ref>
Field num(Ref ref) {
  return {[ref](Scenario& s, const std::string& w, const std::string& v) { ref(s) = to_double(w, v); },
          [ref](const Scenario& s) { return format_double(ref(const_cast<Scenario&>(s))); }};
}

template <class Ref>
Field integer(Ref ref) {
  return {[ref](Scenario& s, const std::string& w, const std::string& v) {
            ref(s) = static_cast<std::remove_reference_t<decltype(ref(s))>>(to_int(w, v));
          },
          [ref](const Scenario& s) { return std::to_string(ref(const_cast<Scenario&>(s))); }};
}

template <class Ref>
Field boolean(Ref ref) {
  return {[ref](Scenario& s, const std::string& w, const std::string& v) { ref(s) = to_bool(w, v); },
          [ref](const Scenario& s) { return std::string(ref(const_cast<Scenario&>(s)) ? "true" : "false"); }};
}

inline std::map<std::string, Field> species_fields(Species sp) {
  const int i = static_cast<int>(sp);
  std::map<std::string, Field> f;
  f["D"] = num([i](Scenario& s) -> double& { return s.species[i].D; });
  f["k_on"] = num([i](Scenario& s) -> double& { return s.species[i].k_on; });
  f["k_off"] = num([i](Scenario& s) -> double& { return s.species[i].k_off; });
  f["Da"] = num([i](Scenario& s) -> double& { return s.species[i].Da; });
  f["N_apt"] = integer([i](Scenario& s) -> std::int64_t& { return s.species[i].N_apt; });
  f["q_eff"] = num([i](Scenario& s) -> double& { return s.species[i].q_eff; });
  f["r"] = Field{[i](Scenario& s, const std::string& w, const std::string& v) { s.species[i].r = to_double(w, v); },
                 [i](const Scenario& s) { return s.species[i].r ? format_double(*s.species[i].r) : std::string(); },
                 true};
  return f;
}

/// Ordered schema: section name -> key -> field accessors.
inline const std::vector<std::pair<std::string, std::map<std::string, Field>>>& schema() {
  static const auto table = [] {
    std::vector<std::pair<std::string, std::map<std::string, Field>>> t;
    std::map<std::string, Field> medium;
    medium["alpha"] = num([](Scenario& s) -> double& { return s.medium.alpha; });
    medium["lambda"] = num([](Scenario& s) -> double& { return s.medium.lambda; });
    medium["k_clear"] = num([](Scenario& s) -> double& { return s.medium.k_clear; });
    medium["temperature"] = num([](Scenario& s) -> double& { return s.medium.temperature; });
    t.emplace_back("medium", std::move(medium));

    t.emplace_back("species.DA", species_fields(Species::DA));
    t.emplace_back("species.5HT", species_fields(Species::FHT));
    t.emplace_back("species.CTRL", species_fields(Species::CTRL));

    std::map<std::string, Field> dev;
    dev["g_m"] = num([](Scenario& s) -> double& { return s.device.g_m; });
    dev["C_tot"] = num([](Scenario& s) -> double& { return s.device.C_tot; });
    dev["R_ch"] = num([](Scenario& s) -> double& { return s.device.R_ch; });
    dev["I_DC"] = num([](Scenario& s) -> double& { return s.device.I_DC; });
    dev["alpha_H"] = num([](Scenario& s) -> double& { return s.device.alpha_H; });
    dev["N_c"] = num([](Scenario& s) -> double& { return s.device.N_c; });
    dev["K_drift"] = num([](Scenario& s) -> double& { return s.device.K_drift; });
    dev["B_det"] = num([](Scenario& s) -> double& { return s.device.B_det; });
    dev["V_g"] = num([](Scenario& s) -> double& { return s.device.V_g; });
    t.emplace_back("device", std::move(dev));

    std::map<std::string, Field> noise;
    noise["rho"] = num([](Scenario& s) -> double& { return s.noise.rho; });
    noise["rho_cc"] = num([](Scenario& s) -> double& { return s.noise.rho_cc; });
    noise["thermal"] = boolean([](Scenario& s) -> bool& { return s.noise.thermal; });
    noise["flicker"] = boolean([](Scenario& s) -> bool& { return s.noise.flicker; });
    noise["drift"] = boolean([](Scenario& s) -> bool& { return s.noise.drift; });
    t.emplace_back("noise", std::move(noise));

    std::map<std::string, Field> tim;
    tim["dt"] = num([](Scenario& s) -> double& { return s.timing.dt; });
    tim["eta"] = num([](Scenario& s) -> double& { return s.timing.eta; });
    tim["guard"] = num([](Scenario& s) -> double& { return s.timing.guard; });
    tim["T_min"] = num([](Scenario& s) -> double& { return s.timing.T_min; });
    tim["c_t"] = num([](Scenario& s) -> double& { return s.timing.c_t; });
    tim["kappa"] = num([](Scenario& s) -> double& { return s.timing.kappa; });
    tim["T_rel"] = num([](Scenario& s) -> double& { return s.timing.T_rel; });
    tim["policy"] = Field{[](Scenario& s, const std::string& w, const std::string& raw) {
                            const auto v = trim(raw);
                            if (v == "diffusion") s.timing.policy = TimingPolicy::DiffusionOnly;
                            else if (v == "binding") s.timing.policy = TimingPolicy::BindingAware;
                            else parse_fail(w, "expected 'diffusion' or 'binding', got '" + v + "'");
                          },
                          [](const Scenario& s) { return std::string(to_string(s.timing.policy)); }};
    t.emplace_back("timing", std::move(tim));

    std::map<std::string, Field> mod;
    mod["scheme"] = Field{[](Scenario& s, const std::string& w, const std::string& raw) {
                            try {
                              s.modulation.scheme = parse_scheme(trim(raw));
                            } catch (const ScenarioError& e) {
                              parse_fail(w, e.what());
                            }
                          },
                          [](const Scenario& s) { return std::string(to_string(s.modulation.scheme)); }};
    mod["N_m"] = num([](Scenario& s) -> double& { return s.modulation.N_m; });
    mod["r"] = num([](Scenario& s) -> double& { return s.modulation.r; });
    mod["csk_axis"] = Field{[](Scenario& s, const std::string& w, const std::string& raw) {
                              try {
                                s.modulation.csk_axis = parse_species(trim(raw));
                              } catch (const ScenarioError& e) {
                                parse_fail(w, e.what());
                              }
                            },
                            [](const Scenario& s) { return std::string(to_string(s.modulation.csk_axis)); }};
    mod["ctrl"] = boolean([](Scenario& s) -> bool& { return s.modulation.ctrl; });
    t.emplace_back("modulation", std::move(mod));

    std::map<std::string, Field> mc;
    mc["symbols_per_seed"] = integer([](Scenario& s) -> int& { return s.montecarlo.symbols_per_seed; });
    mc["min_seeds"] = integer([](Scenario& s) -> int& { return s.montecarlo.min_seeds; });
    mc["max_seeds"] = integer([](Scenario& s) -> int& { return s.montecarlo.max_seeds; });
    mc["halfwidth_target"] = num([](Scenario& s) -> double& { return s.montecarlo.halfwidth_target; });
    mc["z"] = num([](Scenario& s) -> double& { return s.montecarlo.z; });
    mc["n_cal"] = integer([](Scenario& s) -> int& { return s.montecarlo.n_cal; });
    mc["isi"] = boolean([](Scenario& s) -> bool& { return s.montecarlo.isi; });
    mc["K_max"] = integer([](Scenario& s) -> int& { return s.montecarlo.K_max; });
    mc["isi_epsilon"] = num([](Scenario& s) -> double& { return s.montecarlo.isi_epsilon; });
    mc["lod_target"] = num([](Scenario& s) -> double& { return s.montecarlo.lod_target; });
    mc["lod_upper_bound"] = num([](Scenario& s) -> double& { return s.montecarlo.lod_upper_bound; });
    mc["lod_ratio"] = num([](Scenario& s) -> double& { return s.montecarlo.lod_ratio; });
    mc["lod_max_probes"] = integer([](Scenario& s) -> int& { return s.montecarlo.lod_max_probes; });
    mc["master_seed"] = Field{[](Scenario& s, const std::string& w, const std::string& raw) {
                                const auto v = trim(raw);
                                std::uint64_t out = 0;
                                auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
                                if (ec != std::errc{} || ptr != v.data() + v.size())
                                  parse_fail(w, "expected an unsigned integer, got '" + v + "'");
                                s.montecarlo.master_seed = out;
                              },
                              [](const Scenario& s) { return std::to_string(s.montecarlo.master_seed); }};
    mc["shot_noise"] = boolean([](Scenario& s) -> bool& { return s.montecarlo.shot_noise; });
    mc["noise_path"] = Field{[](Scenario& s, const std::string& w, const std::string& raw) {
                               const auto v = trim(raw);
                               if (v == "charge") s.montecarlo.noise_path = NoisePath::Charge;
                               else if (v == "waveform") s.montecarlo.noise_path = NoisePath::Waveform;
                               else parse_fail(w, "expected 'charge' or 'waveform', got '" + v + "'");
                             },
                             [](const Scenario& s) { return std::string(to_string(s.montecarlo.noise_path)); }};
    t.emplace_back("montecarlo", std::move(mc));
    return t;
  }();
  return table;
}

} // namespace scenario_detail

/// Parses scenario text. Returns a validated Scenario; omitted keys keep the
/// baseline defaults.
inline Scenario parse_scenario(const std::string& text, const std::string& source = "<string>") {
  namespace pt = boost::property_tree;
  using namespace scenario_detail;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    parse_fail(source + ":" + std::to_string(e.line()), e.message());
  }

  Scenario sc;
  const auto& sch = schema();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      parse_fail(source, "key '" + section + "' outside of any section");
    auto it = std::find_if(sch.begin(), sch.end(), [&](const auto& s) { return s.first == section; });
    if (it == sch.end()) parse_fail(source, "unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      auto f = it->second.find(key);
      if (f == it->second.end()) parse_fail(source + " [" + section + "]", "unknown key '" + key + "'");
      f->second.set(sc, source + " [" + section + "] " + key, value.data());
    }
  }
  validate(sc);
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(ScenarioError::Kind::Parse, "cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

/// Writes every field in schema order. parse_scenario(serialize_scenario(s)) == s.
inline std::string serialize_scenario(const Scenario& sc) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, fields] : scenario_detail::schema()) {
    if (!first) out << '\n';
    first = false;
    out << '[' << section << "]\n";
    for (const auto& [key, field] : fields) {
      const std::string v = field.get(sc);
      if (field.optional_field && v.empty()) continue;
      out << key << " = " << v << '\n';
    }
  }
  return out.str();
}

/// Stable 64-bit hash of the canonical serialization, as 16 hex digits.
inline std::string scenario_hash(const Scenario& sc) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(serialize_scenario(sc))));
  return buf;
}

} // namespace oectmc

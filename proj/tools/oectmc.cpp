// oectmc: command-line front end for the link simulator.
//
// Exit codes: 0 success, 1 invalid input (flags, scenario, sweep spec),
// 2 runtime failure. Progress goes to stderr; stdout carries results only.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "oectmc/oectmc.hpp"

namespace {

using namespace oectmc;

/// Invalid command-line input detected after parsing.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct Options {
  std::string scenario = "baseline";
  std::string scheme;
  std::string ctrl;
  std::string isi;
  std::optional<double> nm;
  std::optional<double> r;
  std::optional<double> ts;
  std::optional<std::uint64_t> seed;
  std::optional<int> symbols;
  std::optional<int> min_seeds;
  std::optional<int> max_seeds;
  std::optional<int> n_cal;
  std::string noise_path;
  std::string axis;
  std::vector<double> values;
  std::vector<double> values2;
  bool lod = false;
  std::string out;
};

Scenario resolve_scenario(const std::string& name) {
  if (name == "baseline") return Scenario{};
  namespace fs = std::filesystem;
  for (const std::string& p : {name, name + ".ini"})
    if (fs::exists(p)) return load_scenario(p);
  return load_scenario(name); // reports the unreadable path
}

std::vector<Scheme> schemes_of(const std::string& s, Scheme fallback) {
  if (s.empty()) return {fallback};
  if (s == "all") return {Scheme::MoSK, Scheme::CSK4, Scheme::Hybrid};
  try {
    return {parse_scheme(s)};
  } catch (const ScenarioError&) {
    throw UsageError("unknown scheme '" + s + "' (mosk, csk4, hybrid, all)");
  }
}

std::vector<bool> modes_of(const std::string& s, bool fallback, const char* flag) {
  if (s.empty()) return {fallback};
  if (s == "on") return {true};
  if (s == "off") return {false};
  if (s == "both") return {true, false};
  throw UsageError(std::string("--") + flag + " must be on, off or both");
}

/// Scenario with the command-line overrides applied and revalidated.
Scenario build_scenario(const Options& o) {
  Scenario sc = resolve_scenario(o.scenario);
  if (o.nm) sc.modulation.N_m = *o.nm;
  if (o.r) sc.modulation.r = *o.r;
  if (o.seed) sc.montecarlo.master_seed = *o.seed;
  if (o.symbols) sc.montecarlo.symbols_per_seed = *o.symbols;
  if (o.min_seeds) {
    sc.montecarlo.min_seeds = *o.min_seeds;
    if (!o.max_seeds && sc.montecarlo.max_seeds < *o.min_seeds) sc.montecarlo.max_seeds = *o.min_seeds;
  }
  if (o.max_seeds) sc.montecarlo.max_seeds = *o.max_seeds;
  if (o.n_cal) sc.montecarlo.n_cal = *o.n_cal;
  if (o.noise_path == "waveform") sc.montecarlo.noise_path = NoisePath::Waveform;
  else if (o.noise_path == "charge") sc.montecarlo.noise_path = NoisePath::Charge;
  else if (!o.noise_path.empty()) throw UsageError("--noise-path must be charge or waveform");
  validate(sc);
  return sc;
}

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

/// Writes <prefix>.csv and <prefix>.json (when a prefix is given) and the CSV
/// to stdout.
void emit(const std::vector<ResultRow>& rows, const Options& o, const ResultsMetadata& meta, bool to_stdout = true) {
  if (!o.out.empty()) {
    write_results(rows, o.out + ".csv", ResultsFormat::Csv, meta);
    write_results(rows, o.out + ".json", ResultsFormat::Json, meta);
  }
  if (to_stdout) std::cout << to_csv(rows) << std::flush;
}

void progress(const ResultRow& r) {
  std::fprintf(stderr, "[%s] %s ctrl=%s isi=%s N_m=%g r=%g: ser=%.4g (%lld/%lld, %d seeds)%s %.1fs\n", r.axis.c_str(),
               r.scheme.c_str(), r.ctrl ? "on" : "off", r.isi ? "on" : "off", r.nm, r.r, r.ser,
               static_cast<long long>(r.errors), static_cast<long long>(r.symbols), r.seeds_used,
               r.lod ? (" lod=" + std::to_string(*r.lod)).c_str() : "", r.runtime_s);
}

int run_ser(const Options& o, const ResultsMetadata& base_meta) {
  const Scenario sc = build_scenario(o);
  ResultsMetadata meta = base_meta;
  meta.scenario_hash = scenario_hash(sc);
  meta.master_seed = sc.montecarlo.master_seed;
  std::vector<ResultRow> rows;
  for (Scheme scheme : schemes_of(o.scheme, sc.modulation.scheme))
    for (bool isi : modes_of(o.isi, sc.montecarlo.isi, "isi"))
      for (bool ctrl : modes_of(o.ctrl, sc.modulation.ctrl, "ctrl")) {
        const OperatingPoint op{scheme, sc.modulation.N_m, sc.modulation.r, ctrl, isi, o.ts};
        const auto res = evaluate_point(sc, op);
        auto row = make_row("none", std::nullopt, std::nullopt, op, res.T_s, res.W, res.estimate, res.runtime_s,
                            sc.montecarlo.master_seed);
        progress(row);
        rows.push_back(std::move(row));
      }
  emit(rows, o, meta);
  return 0;
}

int run_lod(const Options& o, const ResultsMetadata& base_meta) {
  const Scenario sc = build_scenario(o);
  ResultsMetadata meta = base_meta;
  meta.scenario_hash = scenario_hash(sc);
  meta.master_seed = sc.montecarlo.master_seed;
  std::vector<ResultRow> rows;
  for (Scheme scheme : schemes_of(o.scheme, sc.modulation.scheme))
    for (bool ctrl : modes_of(o.ctrl, sc.modulation.ctrl, "ctrl")) {
      const auto t0 = std::chrono::steady_clock::now();
      OperatingPoint op{scheme, sc.modulation.N_m, sc.modulation.r, ctrl, false, o.ts};
      const auto lod = find_lod(sc, op);
      for (const auto& p : lod.trace)
        std::fprintf(stderr, "  probe N_m=%.0f ser=%.4g hi=%.4g %s\n", p.N_m, p.estimate.ser, p.estimate.wilson_hi,
                     p.pass ? "pass" : "fail");
      op.N_m = static_cast<double>(lod.lod);
      const LinkModel m(sc, op);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      auto row = make_row("none", std::nullopt, std::nullopt, op, m.T_s(), m.W(), lod.at_lod().value_or(SerEstimate{}),
                          secs, sc.montecarlo.master_seed);
      row.lod = lod.lod;
      progress(row);
      rows.push_back(std::move(row));
    }
  emit(rows, o, meta);
  return 0;
}

int run_sweep_cmd(const Options& o, const ResultsMetadata& base_meta) {
  if (o.axis.empty()) throw UsageError("sweep needs --axis");
  const Scenario sc = build_scenario(o);
  SweepSpec spec;
  try {
    spec = default_sweep(parse_axis(o.axis));
  } catch (const SweepError& e) {
    throw UsageError(e.what());
  }
  if (!o.values.empty()) spec.values = o.values;
  if (!o.values2.empty()) spec.values2 = o.values2;
  spec.schemes = schemes_of(o.scheme, sc.modulation.scheme);
  spec.ctrl_modes = modes_of(o.ctrl, sc.modulation.ctrl, "ctrl");
  if (!o.isi.empty()) spec.isi_modes = modes_of(o.isi, false, "isi");
  else if (spec.axis != SweepAxis::SymbolPeriod) spec.isi_modes = {sc.montecarlo.isi};
  if (o.nm) spec.N_m = *o.nm;
  spec.lod = o.lod;

  ResultsMetadata meta = base_meta;
  meta.scenario_hash = scenario_hash(sc);
  meta.master_seed = sc.montecarlo.master_seed;
  std::vector<ResultRow> done;
  // Rewrites both files after every point so an interrupted sweep keeps its rows.
  auto sink = [&](const ResultRow& row) {
    progress(row);
    done.push_back(row);
    emit(done, o, meta, false);
  };
  const auto rows = run_sweep(sc, spec, sink);
  emit(rows, o, meta);
  return 0;
}

int run_calibrate(const Options& o) {
  const Scenario sc = build_scenario(o);
  nlohmann::ordered_json doc;
  doc["scenario_hash"] = scenario_hash(sc);
  doc["master_seed"] = sc.montecarlo.master_seed;
  doc["calibrations"] = nlohmann::ordered_json::array();
  for (Scheme scheme : schemes_of(o.scheme, sc.modulation.scheme))
    for (bool ctrl : modes_of(o.ctrl, sc.modulation.ctrl, "ctrl")) {
      const OperatingPoint op{scheme, sc.modulation.N_m, sc.modulation.r, ctrl, false, o.ts};
      const LinkModel model(sc, op);
      const auto cal = calibrate(model, sc.montecarlo.master_seed, point_key(sc, op));
      auto j = calibration_to_json(cal);
      j["nm"] = op.N_m;
      j["r"] = op.r;
      j["ts"] = model.T_s();
      j["w"] = model.W();
      doc["calibrations"].push_back(std::move(j));
      std::fprintf(stderr, "calibrated %s ctrl=%s\n", std::string(to_string(scheme)).c_str(), ctrl ? "on" : "off");
    }
  const std::string text = doc.dump(2) + "\n";
  if (!o.out.empty()) {
    std::ofstream f(o.out + ".json", std::ios::binary | std::ios::trunc);
    if (!(f << text)) throw std::runtime_error("cannot write " + o.out + ".json");
  }
  std::cout << text;
  return 0;
}

int run_validate(const Options& o) {
  const Scenario sc = resolve_scenario(o.scenario);
  std::cout << "ok " << scenario_hash(sc) << "\n";
  return 0;
}

void add_run_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--scheme", o.scheme, "mosk | csk4 | hybrid | all");
  cmd->add_option("--nm", o.nm, "molecule budget per symbol");
  cmd->add_option("--r", o.r, "separation (m)");
  cmd->add_option("--ts", o.ts, "symbol period override (s)");
  cmd->add_option("--ctrl", o.ctrl, "on | off | both");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--symbols", o.symbols, "symbols per seed");
  cmd->add_option("--min-seeds", o.min_seeds, "minimum seeds per point");
  cmd->add_option("--max-seeds", o.max_seeds, "maximum seeds per point");
  cmd->add_option("--n-cal", o.n_cal, "calibration symbols per class");
  cmd->add_option("--noise-path", o.noise_path, "charge | waveform");
  cmd->add_option("--out", o.out, "output prefix; writes <prefix>.csv and <prefix>.json");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo simulator for a control-referenced tri-channel OECT receiver"};
  app.require_subcommand(1);
  Options o;

  auto* ser = app.add_subcommand("ser", "estimate the symbol error rate at one operating point");
  auto* lod = app.add_subcommand("lod", "find the limit of detection at one distance");
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  auto* cal = app.add_subcommand("calibrate", "print the detector calibration at one operating point");
  auto* val = app.add_subcommand("validate-scenario", "parse and validate a scenario file");
  for (auto* cmd : {ser, lod, sweep, cal, val}) cmd->add_option("--scenario", o.scenario, "scenario file or 'baseline'");
  for (auto* cmd : {ser, lod, sweep, cal}) add_run_flags(cmd, o);
  for (auto* cmd : {ser, sweep}) cmd->add_option("--isi", o.isi, "on | off | both");
  sweep->add_option("--axis", o.axis, "nm | distance | ts | device | rho | diffusion_scale | temperature");
  sweep->add_option("--values", o.values, "grid values (default: built-in grid)")->delimiter(',');
  sweep->add_option("--values2", o.values2, "second grid for the device axis (C_tot)")->delimiter(',');
  sweep->add_flag("--lod", o.lod, "find the LoD at every point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  ResultsMetadata meta;
  meta.command = command_line(argc, argv);
  try {
    if (ser->parsed()) return run_ser(o, meta);
    if (lod->parsed()) return run_lod(o, meta);
    if (sweep->parsed()) return run_sweep_cmd(o, meta);
    if (cal->parsed()) return run_calibrate(o);
    if (val->parsed()) return run_validate(o);
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SweepError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

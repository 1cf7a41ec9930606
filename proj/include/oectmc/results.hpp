#pragma once

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oectmc/config.hpp"
#include "oectmc/detection.hpp"

namespace oectmc {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kResultsSchemaVersion = 1;

/// One evaluated (point, scheme, ctrl) combination.
struct ResultRow {
  std::string axis = "none";
  std::optional<double> axis_value;
  std::optional<double> axis_value2;
  std::string scheme;
  bool ctrl = true;
  double nm = 0.0;
  double r = 0.0;
  double ts = 0.0;
  double w = 0.0;
  std::int64_t errors = 0;
  std::int64_t symbols = 0;
  double ser = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  int seeds_used = 0;
  std::optional<std::int64_t> lod;
  double runtime_s = 0.0;
  std::uint64_t master_seed = 0;
  bool isi = false;
  std::int64_t identity_errors = 0;
  std::int64_t amplitude_errors = 0;

  bool operator==(const ResultRow&) const = default;
};

struct ResultsMetadata {
  int schema_version = kResultsSchemaVersion;
  std::string tool_version = kToolVersion;
  std::string scenario_hash;
  std::uint64_t master_seed = 0;
  std::string command;

  bool operator==(const ResultsMetadata&) const = default;
};

inline const std::vector<std::string>& csv_header() {
  static const std::vector<std::string> h{
      "axis",      "axis_value", "axis_value2", "scheme",     "ctrl",        "nm",
      "r",         "ts",         "w",           "errors",     "symbols",     "ser",
      "wilson_lo", "wilson_hi",  "seeds_used",  "lod",        "runtime_s",   "master_seed",
      "isi",       "identity_errors", "amplitude_errors"};
  return h;
}

/// At most 9 significant digits, shortest form.
inline std::string format_csv_number(double x) {
  char buf[64];
  auto [p9, ec9] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 9);
  std::string capped(buf, p9);
  auto [ps, ecs] = std::to_chars(buf, buf + sizeof buf, x);
  std::string shortest(buf, ps);
  return shortest.size() < capped.size() ? shortest : capped;
}

inline std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  const auto& h = csv_header();
  for (std::size_t i = 0; i < h.size(); ++i) out << (i ? "," : "") << h[i];
  out << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_csv_number(*v) : std::string(); };
  for (const auto& r : rows) {
    out << r.axis << ',' << opt(r.axis_value) << ',' << opt(r.axis_value2) << ',' << r.scheme << ','
        << (r.ctrl ? "on" : "off") << ',' << format_csv_number(r.nm) << ',' << format_csv_number(r.r) << ','
        << format_csv_number(r.ts) << ',' << format_csv_number(r.w) << ',' << r.errors << ',' << r.symbols << ','
        << format_csv_number(r.ser) << ',' << format_csv_number(r.wilson_lo) << ','
        << format_csv_number(r.wilson_hi) << ',' << r.seeds_used << ','
        << (r.lod ? std::to_string(*r.lod) : std::string()) << ',' << format_csv_number(r.runtime_s) << ','
        << r.master_seed << ',' << (r.isi ? "on" : "off") << ',' << r.identity_errors << ','
        << r.amplitude_errors << '\n';
  }
  return out.str();
}

inline nlohmann::ordered_json row_to_json(const ResultRow& r) {
  nlohmann::ordered_json j;
  auto opt = [](const auto& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); };
  j["axis"] = r.axis;
  j["axis_value"] = opt(r.axis_value);
  j["axis_value2"] = opt(r.axis_value2);
  j["scheme"] = r.scheme;
  j["ctrl"] = r.ctrl;
  j["nm"] = r.nm;
  j["r"] = r.r;
  j["ts"] = r.ts;
  j["w"] = r.w;
  j["errors"] = r.errors;
  j["symbols"] = r.symbols;
  j["ser"] = r.ser;
  j["wilson_lo"] = r.wilson_lo;
  j["wilson_hi"] = r.wilson_hi;
  j["seeds_used"] = r.seeds_used;
  j["lod"] = opt(r.lod);
  j["runtime_s"] = r.runtime_s;
  j["master_seed"] = r.master_seed;
  j["isi"] = r.isi;
  j["identity_errors"] = r.identity_errors;
  j["amplitude_errors"] = r.amplitude_errors;
  return j;
}

inline ResultRow row_from_json(const nlohmann::json& j) {
  ResultRow r;
  auto opt_d = [&](const char* k) {
    return j.at(k).is_null() ? std::optional<double>() : std::optional<double>(j.at(k).get<double>());
  };
  r.axis = j.at("axis").get<std::string>();
  r.axis_value = opt_d("axis_value");
  r.axis_value2 = opt_d("axis_value2");
  r.scheme = j.at("scheme").get<std::string>();
  r.ctrl = j.at("ctrl").get<bool>();
  r.nm = j.at("nm").get<double>();
  r.r = j.at("r").get<double>();
  r.ts = j.at("ts").get<double>();
  r.w = j.at("w").get<double>();
  r.errors = j.at("errors").get<std::int64_t>();
  r.symbols = j.at("symbols").get<std::int64_t>();
  r.ser = j.at("ser").get<double>();
  r.wilson_lo = j.at("wilson_lo").get<double>();
  r.wilson_hi = j.at("wilson_hi").get<double>();
  r.seeds_used = j.at("seeds_used").get<int>();
  if (!j.at("lod").is_null()) r.lod = j.at("lod").get<std::int64_t>();
  r.runtime_s = j.at("runtime_s").get<double>();
  r.master_seed = j.at("master_seed").get<std::uint64_t>();
  r.isi = j.at("isi").get<bool>();
  r.identity_errors = j.at("identity_errors").get<std::int64_t>();
  r.amplitude_errors = j.at("amplitude_errors").get<std::int64_t>();
  return r;
}

inline std::string to_json_text(const std::vector<ResultRow>& rows, const ResultsMetadata& meta) {
  nlohmann::ordered_json doc;
  doc["metadata"] = {{"schema_version", meta.schema_version},
                     {"tool_version", meta.tool_version},
                     {"scenario_hash", meta.scenario_hash},
                     {"master_seed", meta.master_seed},
                     {"command", meta.command}};
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) doc["rows"].push_back(row_to_json(r));
  return doc.dump(2) + "\n";
}

struct ResultsDocument {
  ResultsMetadata metadata;
  std::vector<ResultRow> rows;
};

inline ResultsDocument parse_results_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  ResultsDocument out;
  const auto& m = doc.at("metadata");
  out.metadata.schema_version = m.at("schema_version").get<int>();
  out.metadata.tool_version = m.at("tool_version").get<std::string>();
  out.metadata.scenario_hash = m.at("scenario_hash").get<std::string>();
  out.metadata.master_seed = m.at("master_seed").get<std::uint64_t>();
  out.metadata.command = m.at("command").get<std::string>();
  for (const auto& r : doc.at("rows")) out.rows.push_back(row_from_json(r));
  return out;
}

inline ResultsDocument read_results_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_results_json(ss.str());
}

enum class ResultsFormat { Csv, Json };

/// Writes rows to `path`. Refuses empty input without touching the file.
inline void write_results(const std::vector<ResultRow>& rows, const std::string& path, ResultsFormat format,
                          const ResultsMetadata& meta = {}) {
  if (rows.empty()) throw std::invalid_argument("write_results: no rows to write");
  const std::string text = format == ResultsFormat::Csv ? to_csv(rows) : to_json_text(rows, meta);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline nlohmann::ordered_json calibration_to_json(const DetectorCalibration& c) {
  nlohmann::ordered_json j;
  j["scheme"] = std::string(to_string(c.scheme));
  j["ctrl"] = c.ctrl_enabled;
  j["csk_axis"] = std::string(to_string(c.csk_axis));
  j["sigma_delta"] = c.sigma_delta;
  j["sigma_t"] = c.sigma_t;
  j["sigma_o"] = c.sigma_o;
  j["rho_cc"] = c.rho_cc;
  j["signs"] = {c.signs[0], c.signs[1]};
  j["mosk_threshold"] = c.mosk_threshold;
  j["csk_thresholds"] = c.csk_thresholds;
  j["hybrid_thresholds"] = {c.hybrid_thresholds[0], c.hybrid_thresholds[1]};
  j["class_means"] = c.class_means;
  j["class_stds"] = c.class_stds;
  return j;
}

inline DetectorCalibration calibration_from_json(const nlohmann::json& j) {
  DetectorCalibration c;
  c.scheme = parse_scheme(j.at("scheme").get<std::string>());
  c.ctrl_enabled = j.at("ctrl").get<bool>();
  c.csk_axis = parse_species(j.at("csk_axis").get<std::string>());
  c.sigma_delta = j.at("sigma_delta").get<double>();
  c.sigma_t = j.at("sigma_t").get<double>();
  c.sigma_o = j.at("sigma_o").get<double>();
  c.rho_cc = j.at("rho_cc").get<double>();
  c.signs = {j.at("signs").at(0).get<int>(), j.at("signs").at(1).get<int>()};
  c.mosk_threshold = j.at("mosk_threshold").get<double>();
  c.csk_thresholds = j.at("csk_thresholds").get<std::vector<double>>();
  c.hybrid_thresholds = {j.at("hybrid_thresholds").at(0).get<double>(), j.at("hybrid_thresholds").at(1).get<double>()};
  c.class_means = j.at("class_means").get<std::vector<double>>();
  c.class_stds = j.at("class_stds").get<std::vector<double>>();
  return c;
}

} // namespace oectmc

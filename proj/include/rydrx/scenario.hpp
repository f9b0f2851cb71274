#pragma once

// Scenario files: one JSON document describing a species, a driven ladder,
// the vapor, and the requested computation blocks. Every dimensioned field
// name carries its unit suffix (_hz cyclic frequencies, _s seconds, _rad
// radians, _m meters, _v_per_m field amplitudes, _ea0 dipole moments);
// unknown keys are rejected with their path. Parsed values are kept in
// config units so an echo-back serialization is stable; builders convert to
// internal angular units on demand.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rydrx/atomic_data.hpp"
#include "rydrx/constants.hpp"
#include "rydrx/demod.hpp"
#include "rydrx/doppler.hpp"
#include "rydrx/errors.hpp"
#include "rydrx/ladder.hpp"
#include "rydrx/phase_retrieval.hpp"
#include "rydrx/pulse.hpp"
#include "rydrx/spectroscopy.hpp"

namespace rydrx {

using ojson = nlohmann::ordered_json;

struct LevelSpec {
  std::string label;
  double dephasing_hz = 0.0;
};

struct DecaySpec {
  std::string from;
  std::string to;
  double rate_hz = 0.0;
};

struct EnvelopeSpec {
  enum class Kind { Constant, Nodes, Rectangle };
  Kind kind = Kind::Constant;
  std::vector<std::pair<double, double>> nodes;  // (t_s, value)
  double t_on_s = 0.0;
  double t_off_s = 0.0;
};

struct DriveSpec {
  std::string label;
  std::string role;  // probe | coupler | rf
  std::string lower;
  std::string upper;
  double rabi_hz = 0.0;
  double detuning_hz = 0.0;
  double phase_rad = 0.0;
  EnvelopeSpec envelope;
};

struct VaporSpec {
  bool present = false;
  double temperature_k = 294.0;
  int velocity_classes = 1;
  double span_sigmas = 4.2;
  std::string quadrature = "uniform";
  bool counter_propagating = true;
};

struct ScanSpec {
  double start_hz = 0.0;
  double stop_hz = 0.0;
  int points = 0;
};

struct PulseSpec {
  double time_start_s = 0.0;
  double time_stop_s = 0.0;
  int time_points = 0;
  std::optional<ScanSpec> detunings;  // absent: single trace at the coupler detuning
  std::string scale = "absolute";
  double detector_bandwidth_hz = 0.0;  // 0: no photodetector filter
};

struct PhaseGridSpec {
  double start_rad = 0.0;
  double stop_rad = 0.0;
  int points = 0;
};

struct TranslationSpec {
  double start_m = 0.0;
  double stop_m = 0.0;
  int points = 0;
};

struct PhaseNoiseSpec {
  double multiplicative_sigma = 0.0;
  double floor = 0.0;
};

struct PhaseSpec {
  double rf_frequency_hz = 0.0;
  double detuning_a_hz = 0.0;
  double detuning_b_hz = 0.0;
  double optical_rabi_a_hz = 0.0;
  double optical_rabi_b_hz = 0.0;
  double dipole_a_ea0 = 0.0;
  double dipole_b_ea0 = 0.0;
  double e_field_v_per_m = 0.0;
  double rf_phase_rad = 0.0;
  std::optional<PhaseGridSpec> scan;             // direct optical-phase sweep
  std::optional<TranslationSpec> translations;   // delay-line sweep
  std::optional<PhaseNoiseSpec> noise;
};

struct SineSpec {
  double baseband_hz = 0.0;
  int periods = 0;
  int samples_per_period = 0;
};

struct DemodSpec {
  double carrier_rabi_hz = 0.0;
  double depth = 0.0;
  std::optional<SineSpec> sine;
  std::string baseband_csv;       // alternative source: one sample per line
  double sample_rate_hz = 0.0;    // required with baseband_csv
  std::optional<double> operating_detuning_hz;
  std::optional<ScanSpec> scan;   // locate the operating point when not given
  std::string mode = "quasi-static";
  int curve_points = 129;
  double eit_linewidth_hz = 0.0;
  double baseband_bandwidth_hz = 0.0;
};

struct EstimateSpec {
  double dipole_ea0 = 0.0;
  std::optional<double> splitting_hz;  // absent: measure from the scan block
  double linewidth_hz = 0.0;
};

struct OutputSpec {
  std::string csv;
  std::string json;
};

struct Scenario {
  int schema_version = 1;
  std::string species;       // built-in name; overridden by species_file
  std::string species_file;  // JSON table mirroring the built-in layout
  std::vector<LevelSpec> levels;
  std::vector<DecaySpec> decays;
  std::vector<DriveSpec> drives;
  VaporSpec vapor;
  double optical_depth = 0.0;
  std::uint64_t seed = 1;
  std::optional<ScanSpec> scan;
  std::optional<PulseSpec> pulse;
  std::optional<PhaseSpec> phase;
  std::optional<DemodSpec> demod;
  std::optional<EstimateSpec> estimate;
  OutputSpec output;
};

namespace detail {

[[noreturn]] inline void schema_fail(const std::string& path,
                                     const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

inline void check_object(const ojson& j, const std::string& path) {
  if (!j.is_object()) schema_fail(path, "expected an object");
}

// Strict schema: every present key must be in the allowed set, and the error
// names the offender and the legal spellings (which carry the unit suffixes).
inline void check_keys(const ojson& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  check_object(j, path);
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) { known = true; break; }
    if (!known) {
      std::string legal;
      for (const char* k : allowed) {
        if (!legal.empty()) legal += ", ";
        legal += k;
      }
      schema_fail(path, "unknown key '" + item.key() + "' (allowed: " + legal + ")");
    }
  }
}

inline const ojson& member(const ojson& j, const char* key,
                           const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) schema_fail(path, "missing required key '" + std::string(key) + "'");
  return *it;
}

inline double number(const ojson& j, const char* key, const std::string& path) {
  const ojson& v = member(j, key, path);
  if (!v.is_number()) schema_fail(path + "." + key, "expected a number");
  return v.get<double>();
}

inline double number_or(const ojson& j, const char* key,
                        const std::string& path, double fallback) {
  if (j.find(key) == j.end()) return fallback;
  return number(j, key, path);
}

inline int integer(const ojson& j, const char* key, const std::string& path) {
  const ojson& v = member(j, key, path);
  if (!v.is_number_integer()) schema_fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

inline int integer_or(const ojson& j, const char* key, const std::string& path,
                      int fallback) {
  if (j.find(key) == j.end()) return fallback;
  return integer(j, key, path);
}

inline std::string string_at(const ojson& j, const char* key,
                             const std::string& path) {
  const ojson& v = member(j, key, path);
  if (!v.is_string()) schema_fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

inline std::string string_or(const ojson& j, const char* key,
                             const std::string& path,
                             const std::string& fallback) {
  if (j.find(key) == j.end()) return fallback;
  return string_at(j, key, path);
}

inline bool flag_or(const ojson& j, const char* key, const std::string& path,
                    bool fallback) {
  if (j.find(key) == j.end()) return fallback;
  const ojson& v = j.at(key);
  if (!v.is_boolean()) schema_fail(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

inline const ojson& array_at(const ojson& j, const char* key,
                             const std::string& path) {
  const ojson& v = member(j, key, path);
  if (!v.is_array()) schema_fail(path + "." + key, "expected an array");
  return v;
}

inline ScanSpec parse_scan(const ojson& j, const std::string& path) {
  check_keys(j, path, {"start_hz", "stop_hz", "points"});
  ScanSpec s;
  s.start_hz = number(j, "start_hz", path);
  s.stop_hz = number(j, "stop_hz", path);
  s.points = integer(j, "points", path);
  if (s.points < 2) schema_fail(path + ".points", "need at least 2 points");
  if (!(s.stop_hz > s.start_hz))
    schema_fail(path, "stop_hz must exceed start_hz");
  return s;
}

inline EnvelopeSpec parse_envelope(const ojson& j, const std::string& path) {
  check_keys(j, path, {"nodes", "rectangle"});
  EnvelopeSpec e;
  bool has_nodes = j.find("nodes") != j.end();
  bool has_rect = j.find("rectangle") != j.end();
  if (has_nodes == has_rect)
    schema_fail(path, "expected exactly one of 'nodes' or 'rectangle'");
  if (has_nodes) {
    e.kind = EnvelopeSpec::Kind::Nodes;
    const ojson& arr = array_at(j, "nodes", path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string np = path + ".nodes[" + std::to_string(i) + "]";
      check_keys(arr[i], np, {"t_s", "value"});
      e.nodes.emplace_back(number(arr[i], "t_s", np),
                           number(arr[i], "value", np));
    }
  } else {
    e.kind = EnvelopeSpec::Kind::Rectangle;
    const ojson& r = member(j, "rectangle", path);
    std::string rp = path + ".rectangle";
    check_keys(r, rp, {"t_on_s", "t_off_s"});
    e.t_on_s = number(r, "t_on_s", rp);
    e.t_off_s = number(r, "t_off_s", rp);
  }
  return e;
}

inline PulseSpec parse_pulse(const ojson& j, const std::string& path) {
  check_keys(j, path,
             {"time_start_s", "time_stop_s", "time_points", "detunings",
              "scale", "detector_bandwidth_hz"});
  PulseSpec p;
  p.time_start_s = number(j, "time_start_s", path);
  p.time_stop_s = number(j, "time_stop_s", path);
  p.time_points = integer(j, "time_points", path);
  if (p.time_points < 2)
    schema_fail(path + ".time_points", "need at least 2 points");
  if (!(p.time_stop_s > p.time_start_s))
    schema_fail(path, "time_stop_s must exceed time_start_s");
  if (j.find("detunings") != j.end())
    p.detunings = parse_scan(j.at("detunings"), path + ".detunings");
  p.scale = string_or(j, "scale", path, "absolute");
  if (p.scale != "absolute" && p.scale != "relative")
    schema_fail(path + ".scale", "expected 'absolute' or 'relative'");
  p.detector_bandwidth_hz = number_or(j, "detector_bandwidth_hz", path, 0.0);
  return p;
}

inline PhaseSpec parse_phase(const ojson& j, const std::string& path) {
  check_keys(j, path,
             {"rf_frequency_hz", "detuning_a_hz", "detuning_b_hz",
              "optical_rabi_a_hz", "optical_rabi_b_hz", "dipole_a_ea0",
              "dipole_b_ea0", "e_field_v_per_m", "rf_phase_rad", "scan",
              "translations", "noise"});
  PhaseSpec p;
  p.rf_frequency_hz = number(j, "rf_frequency_hz", path);
  p.detuning_a_hz = number(j, "detuning_a_hz", path);
  p.detuning_b_hz = number(j, "detuning_b_hz", path);
  p.optical_rabi_a_hz = number(j, "optical_rabi_a_hz", path);
  p.optical_rabi_b_hz = number(j, "optical_rabi_b_hz", path);
  p.dipole_a_ea0 = number(j, "dipole_a_ea0", path);
  p.dipole_b_ea0 = number(j, "dipole_b_ea0", path);
  p.e_field_v_per_m = number(j, "e_field_v_per_m", path);
  p.rf_phase_rad = number(j, "rf_phase_rad", path);

  bool has_scan = j.find("scan") != j.end();
  bool has_tr = j.find("translations") != j.end();
  if (has_scan == has_tr)
    schema_fail(path, "expected exactly one of 'scan' or 'translations'");
  if (has_scan) {
    const ojson& s = j.at("scan");
    std::string sp = path + ".scan";
    check_keys(s, sp, {"start_rad", "stop_rad", "points"});
    PhaseGridSpec g;
    g.start_rad = number(s, "start_rad", sp);
    g.stop_rad = number(s, "stop_rad", sp);
    g.points = integer(s, "points", sp);
    p.scan = g;
  } else {
    const ojson& t = j.at("translations");
    std::string tp = path + ".translations";
    check_keys(t, tp, {"start_m", "stop_m", "points"});
    TranslationSpec tr;
    tr.start_m = number(t, "start_m", tp);
    tr.stop_m = number(t, "stop_m", tp);
    tr.points = integer(t, "points", tp);
    p.translations = tr;
  }
  if (j.find("noise") != j.end()) {
    const ojson& n = j.at("noise");
    std::string np = path + ".noise";
    check_keys(n, np, {"multiplicative_sigma", "floor"});
    PhaseNoiseSpec ns;
    ns.multiplicative_sigma = number_or(n, "multiplicative_sigma", np, 0.0);
    ns.floor = number_or(n, "floor", np, 0.0);
    p.noise = ns;
  }
  return p;
}

inline DemodSpec parse_demod(const ojson& j, const std::string& path) {
  check_keys(j, path,
             {"carrier_rabi_hz", "depth", "sine", "baseband_csv",
              "sample_rate_hz", "operating_detuning_hz", "scan", "mode",
              "curve_points", "eit_linewidth_hz", "baseband_bandwidth_hz"});
  DemodSpec d;
  d.carrier_rabi_hz = number(j, "carrier_rabi_hz", path);
  d.depth = number(j, "depth", path);

  bool has_sine = j.find("sine") != j.end();
  bool has_csv = j.find("baseband_csv") != j.end();
  if (has_sine == has_csv)
    schema_fail(path, "expected exactly one of 'sine' or 'baseband_csv'");
  if (has_sine) {
    const ojson& s = j.at("sine");
    std::string sp = path + ".sine";
    check_keys(s, sp, {"baseband_hz", "periods", "samples_per_period"});
    SineSpec sine;
    sine.baseband_hz = number(s, "baseband_hz", sp);
    sine.periods = integer(s, "periods", sp);
    sine.samples_per_period = integer(s, "samples_per_period", sp);
    d.sine = sine;
  } else {
    d.baseband_csv = string_at(j, "baseband_csv", path);
    d.sample_rate_hz = number(j, "sample_rate_hz", path);
  }
  if (j.find("operating_detuning_hz") != j.end())
    d.operating_detuning_hz = number(j, "operating_detuning_hz", path);
  if (j.find("scan") != j.end())
    d.scan = parse_scan(j.at("scan"), path + ".scan");
  d.mode = string_or(j, "mode", path, "quasi-static");
  if (d.mode != "quasi-static" && d.mode != "full")
    schema_fail(path + ".mode", "expected 'quasi-static' or 'full'");
  d.curve_points = integer_or(j, "curve_points", path, 129);
  d.eit_linewidth_hz = number_or(j, "eit_linewidth_hz", path, 0.0);
  d.baseband_bandwidth_hz = number_or(j, "baseband_bandwidth_hz", path, 0.0);
  return d;
}

inline EstimateSpec parse_estimate(const ojson& j, const std::string& path) {
  check_keys(j, path, {"dipole_ea0", "splitting_hz", "linewidth_hz"});
  EstimateSpec e;
  e.dipole_ea0 = number(j, "dipole_ea0", path);
  if (j.find("splitting_hz") != j.end())
    e.splitting_hz = number(j, "splitting_hz", path);
  e.linewidth_hz = number_or(j, "linewidth_hz", path, 0.0);
  return e;
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  const std::string root = "scenario";
  detail::check_keys(j, root,
                     {"schema_version", "species", "species_file", "levels",
                      "decays", "drives", "vapor", "optical_depth", "seed",
                      "scan", "pulse", "phase", "demod", "estimate", "output"});

  Scenario s;
  s.schema_version = detail::integer(j, "schema_version", root);
  if (s.schema_version != 1)
    detail::schema_fail(root + ".schema_version",
                        "unsupported version " + std::to_string(s.schema_version));
  s.species = detail::string_or(j, "species", root, "");
  s.species_file = detail::string_or(j, "species_file", root, "");
  if (s.species.empty() && s.species_file.empty())
    detail::schema_fail(root, "expected 'species' or 'species_file'");

  const ojson& levels = detail::array_at(j, "levels", root);
  if (levels.size() < 2)
    detail::schema_fail(root + ".levels", "need at least 2 levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    std::string lp = root + ".levels[" + std::to_string(i) + "]";
    detail::check_keys(levels[i], lp, {"label", "dephasing_hz"});
    LevelSpec lv;
    lv.label = detail::string_at(levels[i], "label", lp);
    lv.dephasing_hz = detail::number_or(levels[i], "dephasing_hz", lp, 0.0);
    for (const LevelSpec& prev : s.levels)
      if (prev.label == lv.label)
        detail::schema_fail(lp + ".label", "duplicate level label '" + lv.label + "'");
    s.levels.push_back(lv);
  }
  auto level_index = [&s](const std::string& label, const std::string& at) {
    for (std::size_t i = 0; i < s.levels.size(); ++i)
      if (s.levels[i].label == label) return static_cast<int>(i);
    detail::schema_fail(at, "unknown level label '" + label + "'");
  };

  if (j.find("decays") != j.end()) {
    const ojson& decays = detail::array_at(j, "decays", root);
    for (std::size_t i = 0; i < decays.size(); ++i) {
      std::string dp = root + ".decays[" + std::to_string(i) + "]";
      detail::check_keys(decays[i], dp, {"from", "to", "rate_hz"});
      DecaySpec dc;
      dc.from = detail::string_at(decays[i], "from", dp);
      dc.to = detail::string_at(decays[i], "to", dp);
      dc.rate_hz = detail::number(decays[i], "rate_hz", dp);
      level_index(dc.from, dp + ".from");
      level_index(dc.to, dp + ".to");
      s.decays.push_back(dc);
    }
  }

  const ojson& drives = detail::array_at(j, "drives", root);
  if (drives.empty()) detail::schema_fail(root + ".drives", "need at least one drive");
  for (std::size_t i = 0; i < drives.size(); ++i) {
    std::string dp = root + ".drives[" + std::to_string(i) + "]";
    detail::check_keys(drives[i], dp,
                       {"label", "role", "lower", "upper", "rabi_hz",
                        "detuning_hz", "phase_rad", "envelope"});
    DriveSpec dr;
    dr.label = detail::string_at(drives[i], "label", dp);
    dr.role = detail::string_at(drives[i], "role", dp);
    if (dr.role != "probe" && dr.role != "coupler" && dr.role != "rf")
      detail::schema_fail(dp + ".role", "got '" + dr.role +
                                            "', expected 'probe', 'coupler' "
                                            "or 'rf'");
    dr.lower = detail::string_at(drives[i], "lower", dp);
    dr.upper = detail::string_at(drives[i], "upper", dp);
    level_index(dr.lower, dp + ".lower");
    level_index(dr.upper, dp + ".upper");
    dr.rabi_hz = detail::number(drives[i], "rabi_hz", dp);
    dr.detuning_hz = detail::number_or(drives[i], "detuning_hz", dp, 0.0);
    dr.phase_rad = detail::number_or(drives[i], "phase_rad", dp, 0.0);
    if (drives[i].find("envelope") != drives[i].end())
      dr.envelope = detail::parse_envelope(drives[i].at("envelope"), dp + ".envelope");
    s.drives.push_back(dr);
  }

  if (j.find("vapor") != j.end()) {
    const ojson& v = j.at("vapor");
    std::string vp = root + ".vapor";
    detail::check_keys(v, vp,
                       {"temperature_k", "velocity_classes", "span_sigmas",
                        "quadrature", "counter_propagating"});
    s.vapor.present = true;
    s.vapor.temperature_k = detail::number_or(v, "temperature_k", vp, 294.0);
    s.vapor.velocity_classes = detail::integer_or(v, "velocity_classes", vp, 1);
    s.vapor.span_sigmas = detail::number_or(v, "span_sigmas", vp, 4.2);
    s.vapor.quadrature = detail::string_or(v, "quadrature", vp, "uniform");
    if (s.vapor.quadrature != "uniform" && s.vapor.quadrature != "gauss-hermite")
      detail::schema_fail(vp + ".quadrature",
                          "expected 'uniform' or 'gauss-hermite'");
    s.vapor.counter_propagating =
        detail::flag_or(v, "counter_propagating", vp, true);
  }

  s.optical_depth = detail::number(j, "optical_depth", root);
  if (j.find("seed") != j.end()) {
    const ojson& v = j.at("seed");
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      detail::schema_fail(root + ".seed", "expected a non-negative integer");
    s.seed = v.get<std::uint64_t>();
  }

  if (j.find("scan") != j.end())
    s.scan = detail::parse_scan(j.at("scan"), root + ".scan");
  if (j.find("pulse") != j.end())
    s.pulse = detail::parse_pulse(j.at("pulse"), root + ".pulse");
  if (j.find("phase") != j.end())
    s.phase = detail::parse_phase(j.at("phase"), root + ".phase");
  if (j.find("demod") != j.end())
    s.demod = detail::parse_demod(j.at("demod"), root + ".demod");
  if (j.find("estimate") != j.end())
    s.estimate = detail::parse_estimate(j.at("estimate"), root + ".estimate");

  if (j.find("output") != j.end()) {
    const ojson& o = j.at("output");
    std::string op = root + ".output";
    detail::check_keys(o, op, {"csv", "json"});
    s.output.csv = detail::string_or(o, "csv", op, "");
    s.output.json = detail::string_or(o, "json", op, "");
  }
  return s;
}

namespace detail {

inline ojson scan_to_json(const ScanSpec& s) {
  ojson j;
  j["start_hz"] = s.start_hz;
  j["stop_hz"] = s.stop_hz;
  j["points"] = s.points;
  return j;
}

}  // namespace detail

// Canonical echo-back: defaults are materialized, key order is fixed, and the
// result re-parses to the same document (serialize . parse is idempotent).
inline std::string serialize_scenario(const Scenario& s) {
  ojson j;
  j["schema_version"] = s.schema_version;
  if (!s.species.empty()) j["species"] = s.species;
  if (!s.species_file.empty()) j["species_file"] = s.species_file;

  j["levels"] = ojson::array();
  for (const LevelSpec& lv : s.levels) {
    ojson l;
    l["label"] = lv.label;
    l["dephasing_hz"] = lv.dephasing_hz;
    j["levels"].push_back(l);
  }
  j["decays"] = ojson::array();
  for (const DecaySpec& dc : s.decays) {
    ojson d;
    d["from"] = dc.from;
    d["to"] = dc.to;
    d["rate_hz"] = dc.rate_hz;
    j["decays"].push_back(d);
  }
  j["drives"] = ojson::array();
  for (const DriveSpec& dr : s.drives) {
    ojson d;
    d["label"] = dr.label;
    d["role"] = dr.role;
    d["lower"] = dr.lower;
    d["upper"] = dr.upper;
    d["rabi_hz"] = dr.rabi_hz;
    d["detuning_hz"] = dr.detuning_hz;
    d["phase_rad"] = dr.phase_rad;
    if (dr.envelope.kind == EnvelopeSpec::Kind::Nodes) {
      ojson nodes = ojson::array();
      for (const auto& [t, value] : dr.envelope.nodes) {
        ojson n;
        n["t_s"] = t;
        n["value"] = value;
        nodes.push_back(n);
      }
      d["envelope"] = ojson{{"nodes", nodes}};
    } else if (dr.envelope.kind == EnvelopeSpec::Kind::Rectangle) {
      ojson r;
      r["t_on_s"] = dr.envelope.t_on_s;
      r["t_off_s"] = dr.envelope.t_off_s;
      d["envelope"] = ojson{{"rectangle", r}};
    }
    j["drives"].push_back(d);
  }

  if (s.vapor.present) {
    ojson v;
    v["temperature_k"] = s.vapor.temperature_k;
    v["velocity_classes"] = s.vapor.velocity_classes;
    v["span_sigmas"] = s.vapor.span_sigmas;
    v["quadrature"] = s.vapor.quadrature;
    v["counter_propagating"] = s.vapor.counter_propagating;
    j["vapor"] = v;
  }
  j["optical_depth"] = s.optical_depth;
  j["seed"] = s.seed;

  if (s.scan) j["scan"] = detail::scan_to_json(*s.scan);
  if (s.pulse) {
    ojson p;
    p["time_start_s"] = s.pulse->time_start_s;
    p["time_stop_s"] = s.pulse->time_stop_s;
    p["time_points"] = s.pulse->time_points;
    if (s.pulse->detunings)
      p["detunings"] = detail::scan_to_json(*s.pulse->detunings);
    p["scale"] = s.pulse->scale;
    p["detector_bandwidth_hz"] = s.pulse->detector_bandwidth_hz;
    j["pulse"] = p;
  }
  if (s.phase) {
    ojson p;
    p["rf_frequency_hz"] = s.phase->rf_frequency_hz;
    p["detuning_a_hz"] = s.phase->detuning_a_hz;
    p["detuning_b_hz"] = s.phase->detuning_b_hz;
    p["optical_rabi_a_hz"] = s.phase->optical_rabi_a_hz;
    p["optical_rabi_b_hz"] = s.phase->optical_rabi_b_hz;
    p["dipole_a_ea0"] = s.phase->dipole_a_ea0;
    p["dipole_b_ea0"] = s.phase->dipole_b_ea0;
    p["e_field_v_per_m"] = s.phase->e_field_v_per_m;
    p["rf_phase_rad"] = s.phase->rf_phase_rad;
    if (s.phase->scan) {
      ojson g;
      g["start_rad"] = s.phase->scan->start_rad;
      g["stop_rad"] = s.phase->scan->stop_rad;
      g["points"] = s.phase->scan->points;
      p["scan"] = g;
    }
    if (s.phase->translations) {
      ojson t;
      t["start_m"] = s.phase->translations->start_m;
      t["stop_m"] = s.phase->translations->stop_m;
      t["points"] = s.phase->translations->points;
      p["translations"] = t;
    }
    if (s.phase->noise) {
      ojson n;
      n["multiplicative_sigma"] = s.phase->noise->multiplicative_sigma;
      n["floor"] = s.phase->noise->floor;
      p["noise"] = n;
    }
    j["phase"] = p;
  }
  if (s.demod) {
    ojson d;
    d["carrier_rabi_hz"] = s.demod->carrier_rabi_hz;
    d["depth"] = s.demod->depth;
    if (s.demod->sine) {
      ojson sn;
      sn["baseband_hz"] = s.demod->sine->baseband_hz;
      sn["periods"] = s.demod->sine->periods;
      sn["samples_per_period"] = s.demod->sine->samples_per_period;
      d["sine"] = sn;
    } else {
      d["baseband_csv"] = s.demod->baseband_csv;
      d["sample_rate_hz"] = s.demod->sample_rate_hz;
    }
    if (s.demod->operating_detuning_hz)
      d["operating_detuning_hz"] = *s.demod->operating_detuning_hz;
    if (s.demod->scan) d["scan"] = detail::scan_to_json(*s.demod->scan);
    d["mode"] = s.demod->mode;
    d["curve_points"] = s.demod->curve_points;
    d["eit_linewidth_hz"] = s.demod->eit_linewidth_hz;
    d["baseband_bandwidth_hz"] = s.demod->baseband_bandwidth_hz;
    j["demod"] = d;
  }
  if (s.estimate) {
    ojson e;
    e["dipole_ea0"] = s.estimate->dipole_ea0;
    if (s.estimate->splitting_hz) e["splitting_hz"] = *s.estimate->splitting_hz;
    e["linewidth_hz"] = s.estimate->linewidth_hz;
    j["estimate"] = e;
  }
  if (!s.output.csv.empty() || !s.output.json.empty()) {
    ojson o;
    if (!s.output.csv.empty()) o["csv"] = s.output.csv;
    if (!s.output.json.empty()) o["json"] = s.output.json;
    j["output"] = o;
  }
  return j.dump(2) + "\n";
}

// Species table in the same shape as the built-in data; data/species/ ships
// one file per built-in entry.
inline Species parse_species_table(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("species table is not valid JSON: ") + e.what());
  }
  const std::string root = "species-table";
  detail::check_keys(j, root,
                     {"schema_version", "name", "mass_amu", "ground_state",
                      "intermediate_state", "probe_wavelength_m",
                      "coupler_wavelength_m", "intermediate_decay_hz",
                      "quantum_defects", "dipoles"});
  int version = detail::integer(j, "schema_version", root);
  if (version != 1)
    detail::schema_fail(root + ".schema_version",
                        "unsupported version " + std::to_string(version));
  Species s;
  s.name = detail::string_at(j, "name", root);
  s.mass = detail::number(j, "mass_amu", root) * constants::atomic_mass_unit;
  s.ground_state = detail::string_at(j, "ground_state", root);
  s.intermediate_state = detail::string_at(j, "intermediate_state", root);
  s.probe_wavelength = detail::number(j, "probe_wavelength_m", root);
  s.coupler_wavelength = detail::number(j, "coupler_wavelength_m", root);
  s.intermediate_decay_rate =
      constants::two_pi * detail::number(j, "intermediate_decay_hz", root);

  const ojson& qd = detail::member(j, "quantum_defects", root);
  detail::check_object(qd, root + ".quantum_defects");
  for (const auto& item : qd.items()) {
    std::string qp = root + ".quantum_defects." + item.key();
    Series series = parse_series(item.key());
    detail::check_keys(item.value(), qp, {"delta0", "delta2"});
    QuantumDefect defect;
    defect.delta0 = detail::number(item.value(), "delta0", qp);
    defect.delta2 = detail::number(item.value(), "delta2", qp);
    s.quantum_defects[series] = defect;
  }

  if (j.find("dipoles") != j.end()) {
    const ojson& dipoles = detail::array_at(j, "dipoles", root);
    for (std::size_t i = 0; i < dipoles.size(); ++i) {
      std::string dp = root + ".dipoles[" + std::to_string(i) + "]";
      detail::check_keys(dipoles[i], dp, {"lower", "upper", "d_ea0"});
      auto parse_level = [&](const char* key) {
        const ojson& l = detail::member(dipoles[i], key, dp);
        std::string lp = dp + "." + key;
        detail::check_keys(l, lp, {"n", "series"});
        return make_level(s, detail::integer(l, "n", lp),
                          parse_series(detail::string_at(l, "series", lp)));
      };
      TransitionDipole td;
      td.lower = parse_level("lower");
      td.upper = parse_level("upper");
      td.d_ea0 = detail::number(dipoles[i], "d_ea0", dp);
      s.dipoles.push_back(td);
    }
  }
  return s;
}

// ---- Builders: config units -> internal angular units ----

inline std::vector<double> build_detuning_grid(const ScanSpec& s) {
  return linear_grid(constants::two_pi * s.start_hz,
                     constants::two_pi * s.stop_hz, s.points);
}

inline LadderSystem build_system(const Scenario& s) {
  LadderSystem sys;
  for (const LevelSpec& lv : s.levels)
    sys.levels.push_back({lv.label, constants::two_pi * lv.dephasing_hz});
  auto index_of = [&s](const std::string& label) {
    for (std::size_t i = 0; i < s.levels.size(); ++i)
      if (s.levels[i].label == label) return static_cast<int>(i);
    throw ConfigError("unknown level label '" + label + "'");
  };
  for (const DecaySpec& dc : s.decays)
    sys.decays.push_back(
        {index_of(dc.from), index_of(dc.to), constants::two_pi * dc.rate_hz});
  for (const DriveSpec& dr : s.drives) {
    DriveField d;
    d.label = dr.label;
    d.lower = index_of(dr.lower);
    d.upper = index_of(dr.upper);
    d.rabi = constants::two_pi * dr.rabi_hz;
    d.detuning = constants::two_pi * dr.detuning_hz;
    d.phase = dr.phase_rad;
    d.role = dr.role == "probe"   ? DriveRole::Probe
             : dr.role == "coupler" ? DriveRole::Coupler
                                    : DriveRole::Rf;
    switch (dr.envelope.kind) {
      case EnvelopeSpec::Kind::Constant:
        break;
      case EnvelopeSpec::Kind::Nodes: {
        std::vector<Envelope::Node> nodes;
        for (const auto& [t, value] : dr.envelope.nodes)
          nodes.push_back({t, value});
        d.envelope = Envelope::from_nodes(std::move(nodes));
        break;
      }
      case EnvelopeSpec::Kind::Rectangle:
        d.envelope = Envelope::rectangle(dr.envelope.t_on_s, dr.envelope.t_off_s);
        break;
    }
    sys.drives.push_back(std::move(d));
  }
  sys.validate();
  return sys;
}

inline Species load_species(const Scenario& s,
                            const std::string& file_text = "") {
  if (!s.species_file.empty()) {
    if (file_text.empty())
      throw ConfigError("species_file '" + s.species_file +
                        "' was not loaded; pass its content");
    return parse_species_table(file_text);
  }
  return species_by_name(s.species);
}

inline VaporConfig build_vapor(const Scenario& s, const Species& species) {
  const VaporSpec& v = s.vapor;
  if (!v.present)
    return make_vapor(species, 294.0, 1, VelocityQuadrature::Uniform);
  VaporConfig cfg = make_vapor(
      species, v.temperature_k, v.velocity_classes,
      v.quadrature == "uniform" ? VelocityQuadrature::Uniform
                                : VelocityQuadrature::GaussHermite,
      v.counter_propagating);
  cfg.span_sigmas = v.span_sigmas;
  cfg.validate();
  return cfg;
}

inline PhaseScheme build_phase_scheme(const PhaseSpec& p) {
  PhaseScheme scheme;
  scheme.omega_rf = constants::two_pi * p.rf_frequency_hz;
  scheme.detuning_a = constants::two_pi * p.detuning_a_hz;
  scheme.detuning_b = constants::two_pi * p.detuning_b_hz;
  scheme.optical_rabi_a = constants::two_pi * p.optical_rabi_a_hz;
  scheme.optical_rabi_b = constants::two_pi * p.optical_rabi_b_hz;
  scheme.dipole_a = p.dipole_a_ea0 * constants::e_a0;
  scheme.dipole_b = p.dipole_b_ea0 * constants::e_a0;
  scheme.rf_rabi_a = rf_rabi_from_field(p.e_field_v_per_m, scheme.dipole_a);
  scheme.rf_rabi_b = rf_rabi_from_field(p.e_field_v_per_m, scheme.dipole_b);
  scheme.rf_phase = p.rf_phase_rad;
  return scheme;
}

inline ModulatedCarrier build_carrier(const DemodSpec& d,
                                      std::vector<double> csv_samples = {}) {
  if (d.sine)
    return am_sine_carrier(constants::two_pi * d.carrier_rabi_hz, d.depth,
                           d.sine->baseband_hz, d.sine->periods,
                           d.sine->samples_per_period);
  ModulatedCarrier c;
  c.carrier_rabi = constants::two_pi * d.carrier_rabi_hz;
  c.depth = d.depth;
  c.baseband = std::move(csv_samples);
  c.sample_rate = d.sample_rate_hz;
  c.validate();
  return c;
}

inline DemodOptions build_demod_options(const DemodSpec& d, int threads = 0) {
  DemodOptions o;
  if (d.operating_detuning_hz)
    o.operating_detuning = constants::two_pi * *d.operating_detuning_hz;
  if (d.scan) o.scan_detunings = build_detuning_grid(*d.scan);
  o.mode = d.mode == "full" ? DemodMode::Full : DemodMode::QuasiStatic;
  o.curve_points = d.curve_points;
  o.eit_linewidth = constants::two_pi * d.eit_linewidth_hz;
  o.baseband_bandwidth = d.baseband_bandwidth_hz;
  o.threads = threads;
  return o;
}

}  // namespace rydrx

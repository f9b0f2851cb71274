// rydrx command-line front end: scenario files in, CSV/JSON artifacts out.
// Subcommands pick one computation block out of the scenario; exit codes are
// 0 success, 2 configuration/model error, 3 numeric/measurement failure, and
// every failure puts one JSON object on stderr.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <rydrx/field_estimation.hpp>
#include <rydrx/io.hpp>
#include <rydrx/scenario.hpp>

namespace {

using namespace rydrx;

struct RunFlags {
  std::string scenario_path;
  std::string out_csv;
  std::string out_json;
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

// species_file and baseband_csv resolve against the scenario's directory, so
// bundles stay relocatable.
std::string resolve_near(const std::string& scenario_path,
                         const std::string& ref) {
  std::filesystem::path p(ref);
  if (p.is_absolute()) return ref;
  return (std::filesystem::path(scenario_path).parent_path() / p).string();
}

struct LoadedScenario {
  Scenario scenario;
  Species species;
  std::uint64_t seed = 1;
};

LoadedScenario load(const RunFlags& flags) {
  LoadedScenario ls;
  ls.scenario = parse_scenario(read_text_file(flags.scenario_path));
  if (!ls.scenario.species_file.empty()) {
    ls.species = parse_species_table(read_text_file(
        resolve_near(flags.scenario_path, ls.scenario.species_file)));
  } else {
    ls.species = species_by_name(ls.scenario.species);
  }
  ls.seed = flags.seed ? *flags.seed : ls.scenario.seed;
  return ls;
}

void deliver(const RunFlags& flags, const Scenario& s, const ojson& summary,
             const std::vector<std::string>& csv_header,
             const std::vector<std::vector<double>>& csv_columns) {
  std::string csv_path = !flags.out_csv.empty() ? flags.out_csv : s.output.csv;
  std::string json_path =
      !flags.out_json.empty() ? flags.out_json : s.output.json;
  if (!csv_path.empty() && !csv_columns.empty())
    write_csv(csv_path, csv_header, csv_columns);
  std::string text = summary.dump(2) + "\n";
  if (!json_path.empty())
    write_text_file(json_path, text);
  else
    std::cout << text;
}

ojson summary_head(const char* command, const LoadedScenario& ls) {
  ojson j;
  j["schema_version"] = 1;
  j["command"] = command;
  j["species"] = ls.species.name;
  j["seed"] = ls.seed;
  return j;
}

std::vector<double> to_cyclic(const std::vector<double>& angular) {
  std::vector<double> out(angular.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = angular[i] / constants::two_pi;
  return out;
}

int run_spectrum(const RunFlags& flags) {
  LoadedScenario ls = load(flags);
  const Scenario& s = ls.scenario;
  if (!s.scan) throw ConfigError("scenario has no 'scan' block");

  LadderSystem sys = build_system(s);
  VaporConfig vapor = build_vapor(s, ls.species);
  SpectrumScan scan = scan_spectrum(sys, vapor, build_detuning_grid(*s.scan),
                                    s.optical_depth, flags.threads);

  ojson j = summary_head("spectrum", ls);
  j["points"] = scan.detuning.size();
  j["optical_depth"] = scan.optical_depth;
  j["reference_absorption"] = scan.reference_absorption;
  try {
    SpectralFeatures f = extract_features(scan);
    ojson feat;
    feat["peak_positions_hz"] = to_cyclic(f.peak_positions);
    feat["peak_heights"] = f.peak_heights;
    feat["at_splitting_hz"] =
        f.at_splitting ? ojson(*f.at_splitting / constants::two_pi) : ojson();
    feat["fwhm_hz"] = f.fwhm ? ojson(*f.fwhm / constants::two_pi) : ojson();
    feat["contrast"] = f.contrast;
    j["features"] = feat;
  } catch (const FeatureError& e) {
    j["features"] = ojson();
    j["feature_error"] = e.what();
  }
  deliver(flags, s, j, {"detuning_hz", "transmission"},
          {to_cyclic(scan.detuning), scan.transmission});
  return 0;
}

int run_pulse(const RunFlags& flags) {
  LoadedScenario ls = load(flags);
  const Scenario& s = ls.scenario;
  if (!s.pulse) throw ConfigError("scenario has no 'pulse' block");
  const PulseSpec& p = *s.pulse;

  LadderSystem sys = build_system(s);
  VaporConfig vapor = build_vapor(s, ls.species);
  std::vector<double> times =
      linear_grid(p.time_start_s, p.time_stop_s, p.time_points);
  TransmissionScale scale = p.scale == "relative" ? TransmissionScale::Relative
                                                  : TransmissionScale::Absolute;

  PulseTrace trace =
      p.detunings
          ? simulate_rf_pulse(sys, vapor, build_detuning_grid(*p.detunings),
                              times, s.optical_depth, scale, flags.threads)
          : simulate_coupler_pulse(sys, vapor, times, s.optical_depth, scale,
                                   flags.threads);
  if (p.detector_bandwidth_hz > 0.0)
    trace = photodetector_filter(trace, p.detector_bandwidth_hz);

  std::vector<std::string> header{"time_s"};
  std::vector<std::vector<double>> columns{trace.time};
  for (std::size_t c = 0; c < trace.detuning.size(); ++c) {
    header.push_back(format_g17(trace.detuning[c] / constants::two_pi));
    columns.push_back(trace.transmission[c]);
  }

  ojson j = summary_head("pulse", ls);
  j["time_points"] = trace.time.size();
  j["detunings_hz"] = to_cyclic(trace.detuning);
  j["scale"] = p.scale;
  j["optical_depth"] = trace.optical_depth;
  j["reference_absorption"] = trace.reference_absorption;
  j["detector_bandwidth_hz"] = p.detector_bandwidth_hz;
  if (p.detector_bandwidth_hz > 0.0)
    j["detector_rise_time_s"] = detector_rise_time(p.detector_bandwidth_hz);
  deliver(flags, s, j, header, columns);
  return 0;
}

int run_phase_scan(const RunFlags& flags) {
  LoadedScenario ls = load(flags);
  const Scenario& s = ls.scenario;
  if (!s.phase) throw ConfigError("scenario has no 'phase' block");
  const PhaseSpec& p = *s.phase;

  PhaseScheme scheme = build_phase_scheme(p);
  PhaseNoise noise;
  if (p.noise) {
    noise.multiplicative_sigma = p.noise->multiplicative_sigma;
    noise.floor = p.noise->floor;
  }
  noise.seed = ls.seed;

  PhaseScan scan =
      p.scan ? simulate_phase_scan(
                   scheme,
                   linear_grid(p.scan->start_rad, p.scan->stop_rad,
                               p.scan->points),
                   noise)
             : simulate_delay_scan(
                   scheme,
                   linear_grid(p.translations->start_m, p.translations->stop_m,
                               p.translations->points),
                   noise);
  PhaseFit fit = fit_phase_and_amplitude(scan);

  ojson j = summary_head("phase-scan", ls);
  j["points"] = scan.phi_opt.size();
  j["true_rf_phase_rad"] = p.rf_phase_rad;
  ojson f;
  f["rf_phase_rad"] = fit.rf_phase;
  f["contrast"] = fit.contrast;
  f["offset"] = fit.offset;
  f["omega_c0_rad_per_s"] = fit.omega_c0;
  f["e_field_v_per_m"] = fit.e_field;
  f["residual_rms"] = fit.residual_rms;
  double peak = *std::max_element(scan.line_strength.begin(),
                                  scan.line_strength.end());
  f["residual_rel"] = peak > 0.0 ? fit.residual_rms / peak : fit.residual_rms;
  f["visibility"] = fit.visibility();
  j["fit"] = f;
  deliver(flags, s, j, {"phi_opt_rad", "line_strength"},
          {scan.phi_opt, scan.line_strength});
  return 0;
}

int run_demod(const RunFlags& flags) {
  LoadedScenario ls = load(flags);
  const Scenario& s = ls.scenario;
  if (!s.demod) throw ConfigError("scenario has no 'demod' block");
  const DemodSpec& d = *s.demod;

  LadderSystem sys = build_system(s);
  VaporConfig vapor = build_vapor(s, ls.species);
  std::vector<double> samples;
  if (!d.baseband_csv.empty())
    samples = read_sample_column(
        read_text_file(resolve_near(flags.scenario_path, d.baseband_csv)));
  ModulatedCarrier carrier = build_carrier(d, std::move(samples));
  DemodResult r = demodulate(sys, vapor, s.optical_depth, carrier,
                             build_demod_options(d, flags.threads));

  ojson j = summary_head("demod", ls);
  j["samples"] = r.recovered.size();
  j["depth"] = d.depth;
  j["operating_detuning_hz"] = r.operating_detuning / constants::two_pi;
  j["gain"] = r.gain;
  j["correlation"] = r.correlation;  // NaN serializes as null
  j["distortion"] = r.distortion;
  j["clipping"] = r.clipping;
  j["clipped_fraction"] = r.clipped_fraction;
  j["degenerate"] = r.degenerate;
  deliver(flags, s, j, {"t_s", "rx"}, {r.time, r.recovered});
  return 0;
}

int run_estimate(const RunFlags& flags) {
  LoadedScenario ls = load(flags);
  const Scenario& s = ls.scenario;
  if (!s.estimate) throw ConfigError("scenario has no 'estimate' block");
  const EstimateSpec& e = *s.estimate;
  double dipole = e.dipole_ea0 * constants::e_a0;

  FieldEstimate est;
  if (e.splitting_hz) {
    est = field_from_splitting(constants::two_pi * *e.splitting_hz, dipole,
                               constants::two_pi * e.linewidth_hz);
  } else {
    if (!s.scan)
      throw ConfigError(
          "estimate without 'splitting_hz' needs a 'scan' block to measure");
    EstimateOptions opts;
    opts.linewidth = constants::two_pi * e.linewidth_hz;
    opts.threads = flags.threads;
    est = end_to_end_estimate(build_system(s), build_vapor(s, ls.species),
                              build_detuning_grid(*s.scan), s.optical_depth,
                              dipole, opts);
  }

  ojson j = summary_head("estimate", ls);
  j["dipole_ea0"] = e.dipole_ea0;
  j["e_field_v_per_m"] = est.field;
  j["uncertainty_v_per_m"] = est.uncertainty;
  j["method"] = est.method;
  j["weak_field"] = est.weak_field;
  j["splitting_resolved"] = est.splitting_resolved;
  deliver(flags, s, j, {}, {});
  return 0;
}

void emit_error(const std::string& kind, const std::string& message) {
  ojson j;
  j["error"] = ojson{{"kind", kind}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

int exit_code_for(const Error& e) {
  return (e.kind() == "config" || e.kind() == "model") ? 2 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rydberg-EIT RF receiver simulation toolkit"};
  app.require_subcommand(1);

  RunFlags flags;
  int (*runner)(const RunFlags&) = nullptr;
  auto add = [&](const char* name, const char* blurb,
                 int (*fn)(const RunFlags&)) {
    CLI::App* sub = app.add_subcommand(name, blurb);
    sub->add_option("scenario", flags.scenario_path, "scenario JSON file")
        ->required();
    sub->add_option("--out-csv", flags.out_csv,
                    "override the scenario's CSV output path");
    sub->add_option("--out-json", flags.out_json,
                    "override the scenario's JSON output path");
    sub->add_option("--threads", flags.threads,
                    "cap worker threads (0 = hardware)");
    sub->add_option("--seed", flags.seed, "override the scenario's seed");
    sub->callback([&runner, fn]() { runner = fn; });
    return sub;
  };
  add("spectrum", "steady-state transmission spectrum + features", run_spectrum);
  add("pulse", "time-resolved transmission through drive envelopes", run_pulse);
  add("phase-scan", "RF phase retrieval from an optical-phase sweep",
      run_phase_scan);
  add("demod", "baseband recovery through the atomic response", run_demod);
  add("estimate", "RF field amplitude from the Autler-Townes splitting",
      run_estimate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // help requested
    app.exit(e);
    emit_error("usage", e.what());
    return 2;
  }

  try {
    return runner(flags);
  } catch (const Error& e) {
    emit_error(e.kind(), e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 3;
  }
}

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rydrx/doppler.hpp"
#include "rydrx/errors.hpp"
#include "rydrx/ladder.hpp"
#include "rydrx/lindblad.hpp"
#include "rydrx/parallel.hpp"
#include "rydrx/spectroscopy.hpp"

namespace rydrx {

// Absolute: Beer-Lambert transmission of the medium, background exp(-OD).
// Relative: divided by the coupler-free background, background 1.
enum class TransmissionScale { Absolute, Relative };

struct PulseTrace {
  std::vector<double> time;                       // s, strictly increasing
  std::vector<double> detuning;                   // rad/s, one per column
  std::vector<std::vector<double>> transmission;  // [column][time index]
  double optical_depth = 0.0;
  double reference_absorption = 0.0;
  TransmissionScale scale = TransmissionScale::Absolute;

  // Transmission across all columns at one time index (a spectrum slice).
  std::vector<double> row(std::size_t time_index) const {
    std::vector<double> r(transmission.size());
    for (std::size_t c = 0; c < transmission.size(); ++c)
      r[c] = transmission[c].at(time_index);
    return r;
  }
};

namespace detail {

inline void check_pulse_grid(const LadderSystem& sys,
                             const std::vector<double>& times) {
  if (times.size() < 2)
    throw ConfigError("pulse simulation needs at least two time points");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw ConfigError("pulse time grid must be strictly increasing");
  for (const DriveField& d : sys.drives) {
    if (d.envelope.nodes().size() < 2) continue;  // constant drive
    for (double bp : d.envelope.breakpoints()) {
      if (bp < times.front() || bp > times.back())
        throw ConfigError("envelope breakpoint of drive '" + d.label +
                          "' at t = " + std::to_string(bp) +
                          " s lies outside the simulated span");
    }
  }
}

}  // namespace detail

// Shared engine for 1-D and 2-D pulse simulations. Columns are coupler
// detunings (an empty list means a single column at the system's current
// coupler detuning). Per column and velocity class the system starts in the
// steady state of its t = t0 configuration and is integrated through the
// envelope schedule; the probe coherence is averaged class-by-class.
inline PulseTrace simulate_pulse_map(const LadderSystem& sys,
                                     const VaporConfig& vapor,
                                     std::vector<double> detunings,
                                     const std::vector<double>& times,
                                     double optical_depth,
                                     TransmissionScale scale = TransmissionScale::Absolute,
                                     int threads = 0,
                                     const EvolveOptions& opts = {}) {
  sys.validate();
  require_chain(sys);
  detail::check_pulse_grid(sys, times);

  int coupler = find_single_drive(sys, DriveRole::Coupler);
  int probe = find_single_drive(sys, DriveRole::Probe);
  int lo = sys.drives[static_cast<std::size_t>(probe)].lower;
  int up = sys.drives[static_cast<std::size_t>(probe)].upper;

  bool explicit_columns = !detunings.empty();
  if (!explicit_columns)
    detunings.push_back(sys.drives[static_cast<std::size_t>(coupler)].detuning);
  for (std::size_t i = 1; i < detunings.size(); ++i)
    if (!(detunings[i] > detunings[i - 1]))
      throw ConfigError("detuning columns must be strictly increasing");

  PulseTrace trace;
  trace.time = times;
  trace.detuning = detunings;
  trace.transmission.assign(detunings.size(),
                            std::vector<double>(times.size(), 0.0));
  trace.optical_depth = optical_depth;
  trace.scale = scale;
  trace.reference_absorption = reference_absorption(sys, vapor);

  std::vector<VelocityClass> grid = velocity_grid(vapor);
  std::vector<std::string> failures(detunings.size());

  parallel_for(
      detunings.size(),
      [&](std::size_t col) {
        try {
          LadderSystem column = sys;
          if (explicit_columns)
            column.drives[static_cast<std::size_t>(coupler)].detuning =
                detunings[col];
          std::vector<double> acc(times.size(), 0.0);
          for (const VelocityClass& vc : grid) {
            std::vector<double> offsets =
                doppler_offsets(vc.velocity, vapor, column);
            DensityMatrix rho0 = steady_state(column, offsets, times.front());
            std::vector<double> im = evolve_observable(
                column, offsets, rho0, times,
                [lo, up](const DensityMatrix& rho) {
                  return rho(lo, up).imag();
                },
                opts);
            for (std::size_t k = 0; k < times.size(); ++k)
              acc[k] += vc.weight * im[k];
          }
          double norm = (scale == TransmissionScale::Relative)
                            ? std::exp(-optical_depth)
                            : 1.0;
          for (std::size_t k = 0; k < times.size(); ++k) {
            double im = std::max(acc[k], 0.0);
            trace.transmission[col][k] =
                probe_transmission(im, optical_depth,
                                   trace.reference_absorption) /
                norm;
          }
        } catch (const Error& e) {
          failures[col] = e.what();
        }
      },
      threads);

  for (std::size_t col = 0; col < detunings.size(); ++col) {
    if (!failures[col].empty())
      throw NumericError("pulse simulation failed at coupler detuning " +
                         std::to_string(detunings[col]) + " rad/s: " +
                         failures[col]);
  }
  return trace;
}

// 2-D time x coupler-detuning map of a pulsed-RF scenario (RF drive carries
// the pulse envelope; the coupler may be CW or pulsed).
inline PulseTrace simulate_rf_pulse(const LadderSystem& sys,
                                    const VaporConfig& vapor,
                                    const std::vector<double>& detunings,
                                    const std::vector<double>& times,
                                    double optical_depth,
                                    TransmissionScale scale = TransmissionScale::Absolute,
                                    int threads = 0,
                                    const EvolveOptions& opts = {}) {
  if (detunings.size() < 2)
    throw ConfigError("an RF pulse map needs at least two detuning columns");
  return simulate_pulse_map(sys, vapor, detunings, times, optical_depth, scale,
                            threads, opts);
}

// Single-column transient of a pulsed-coupler scenario at the system's own
// coupler detuning.
inline PulseTrace simulate_coupler_pulse(const LadderSystem& sys,
                                         const VaporConfig& vapor,
                                         const std::vector<double>& times,
                                         double optical_depth,
                                         TransmissionScale scale = TransmissionScale::Absolute,
                                         int threads = 0,
                                         const EvolveOptions& opts = {}) {
  return simulate_pulse_map(sys, vapor, {}, times, optical_depth, scale,
                            threads, opts);
}

// Causal single-pole low-pass, applied per column:
//   y[k] = y[k-1] + (1 - exp(-2 pi BW dt_k)) (x[k] - y[k-1]),
// seeded at the first sample. 10-90% step response is ln(9)/(2 pi BW)
// (about 0.35/BW).
inline PulseTrace photodetector_filter(const PulseTrace& in, double bandwidth) {
  if (!(bandwidth > 0.0))
    throw ConfigError("photodetector bandwidth must be > 0");
  PulseTrace out = in;
  for (std::vector<double>& col : out.transmission) {
    for (std::size_t k = 1; k < col.size(); ++k) {
      double dt = in.time[k] - in.time[k - 1];
      double alpha = 1.0 - std::exp(-constants::two_pi * bandwidth * dt);
      col[k] = col[k - 1] + alpha * (col[k] - col[k - 1]);
    }
  }
  return out;
}

// 10-90% rise time of the single-pole detector model.
inline double detector_rise_time(double bandwidth) {
  return std::log(9.0) / (constants::two_pi * bandwidth);
}

}  // namespace rydrx

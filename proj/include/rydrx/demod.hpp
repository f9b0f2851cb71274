#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rydrx/constants.hpp"
#include "rydrx/doppler.hpp"
#include "rydrx/errors.hpp"
#include "rydrx/ladder.hpp"
#include "rydrx/parallel.hpp"
#include "rydrx/pulse.hpp"
#include "rydrx/spectroscopy.hpp"

namespace rydrx {

enum class ModulationType { Am };

// Baseband-modulated RF carrier. The field is E(t) = E0 (1 + depth b(t)) with
// b the baseband samples, so the RF Rabi frequency follows the same factor.
struct ModulatedCarrier {
  double carrier_rabi = 0.0;     // rad/s, carrier (unmodulated) RF Rabi
  ModulationType type = ModulationType::Am;
  std::vector<double> baseband;  // samples in [-1, 1]
  double depth = 0.0;            // delta E / E, in [0, 1)
  double sample_rate = 0.0;      // Hz

  void validate() const {
    if (!(carrier_rabi >= 0.0) || !std::isfinite(carrier_rabi))
      throw ConfigError("carrier Rabi frequency must be finite and >= 0");
    if (!(depth >= 0.0) || !(depth < 1.0))
      throw ConfigError("modulation depth must lie in [0, 1)");
    if (depth > 0.0 && carrier_rabi == 0.0)
      throw ConfigError("modulating a zero carrier is meaningless");
    if (baseband.empty()) throw ConfigError("baseband has no samples");
    if (!(sample_rate > 0.0)) throw ConfigError("sample rate must be > 0");
    for (double b : baseband)
      if (!std::isfinite(b) || b < -1.0 || b > 1.0)
        throw ConfigError("baseband samples must lie in [-1, 1]");
  }
};

// Unit-amplitude sine baseband sampled over an integer number of periods.
inline ModulatedCarrier am_sine_carrier(double carrier_rabi, double depth,
                                        double baseband_hz, int periods,
                                        int samples_per_period) {
  if (periods < 1 || samples_per_period < 4)
    throw ConfigError("sine baseband needs >= 1 period and >= 4 samples each");
  if (!(baseband_hz > 0.0)) throw ConfigError("baseband frequency must be > 0");
  ModulatedCarrier c;
  c.carrier_rabi = carrier_rabi;
  c.depth = depth;
  c.sample_rate = baseband_hz * samples_per_period;
  int n = periods * samples_per_period;
  c.baseband.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    c.baseband[static_cast<std::size_t>(k)] =
        std::sin(constants::two_pi * k / samples_per_period);
  c.validate();
  return c;
}

// Smallest practically receivable AM depth, h * linewidth / (E d) with the
// linewidth in Hz.
inline double min_detectable_depth(double e_field, double dipole,
                                   double linewidth_hz) {
  if (!(e_field > 0.0)) throw ConfigError("field must be > 0");
  if (!(dipole > 0.0)) throw ConfigError("dipole moment must be > 0");
  if (!(linewidth_hz > 0.0)) throw ConfigError("linewidth must be > 0");
  return constants::h_planck * linewidth_hz / (e_field * dipole);
}

// Coupler detuning of steepest transmission slope: the receiver's operating
// point sits on an inflection point of the spectral line. Ties resolve toward
// lower detuning; the discrete slope maximum is refined with a parabola when
// it has interior neighbors.
inline double operating_point(const SpectrumScan& scan) {
  const std::vector<double>& x = scan.detuning;
  const std::vector<double>& y = scan.transmission;
  if (x.size() < 3)
    throw ConfigError("operating point needs at least three scan points");

  std::vector<double> mag(x.size(), 0.0);  // |dT/ddetuning|, interior points
  for (std::size_t i = 1; i + 1 < x.size(); ++i)
    mag[i] = std::abs((y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]));

  std::size_t best = 1;
  for (std::size_t i = 2; i + 1 < x.size(); ++i)
    if (mag[i] > mag[best]) best = i;
  if (!(mag[best] > 0.0))
    throw FeatureError("spectrum is flat: no operating point");

  if (best >= 2 && best + 2 < x.size()) {
    double xv, yv;
    detail::parabola_vertex(x[best - 1], mag[best - 1], x[best], mag[best],
                            x[best + 1], mag[best + 1], xv, yv);
    return xv;
  }
  return x[best];
}

enum class DemodMode {
  QuasiStatic,  // map samples through the static T(RF Rabi) curve
  Full,         // integrate the master equation through the envelope
};

struct DemodOptions {
  // Operating coupler detuning. NaN derives it from a spectrum scanned over
  // `scan_detunings` with the carrier applied.
  double operating_detuning = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> scan_detunings;
  DemodMode mode = DemodMode::QuasiStatic;
  int curve_points = 129;          // resolution of the static response curve
  double eit_linewidth = 0.0;      // rad/s; > 0 arms the quasi-static guard
  double quasi_static_limit = 0.1; // max baseband bandwidth, in linewidths
  double baseband_bandwidth = 0.0; // Hz; 0 falls back to sample_rate / 2
  int threads = 0;
  EvolveOptions evolve;
};

struct DemodResult {
  std::vector<double> time;       // s
  // Transmission time series, mean removed, polarity normalized so a field
  // increase maps to a positive excursion.
  std::vector<double> recovered;
  double operating_detuning = 0.0;  // rad/s
  double gain = 0.0;                // dT per unit delta E / E, signed
  double distortion = 0.0;          // residual after the best linear fit
  double correlation = 0.0;         // Pearson, recovered vs baseband
  double clipped_fraction = 0.0;    // samples beyond the monotonic flank
  bool clipping = false;
  bool degenerate = false;          // no modulation to correlate against
};

namespace detail {

// Doppler-averaged static transmission with the RF drive pinned at `rf_rabi`.
inline double static_transmission(const LadderSystem& sys,
                                  const VaporConfig& vapor,
                                  const std::vector<VelocityClass>& grid,
                                  int rf, double rf_rabi, double optical_depth,
                                  double reference_im) {
  LadderSystem point = sys;
  point.drives[static_cast<std::size_t>(rf)].rabi = rf_rabi;
  double im = std::max(averaged_absorption(point, vapor, grid), 0.0);
  return probe_transmission(im, optical_depth, reference_im);
}

}  // namespace detail

// Receive a baseband-modulated RF carrier through the atomic transfer
// function at a fixed coupler operating point and recover the baseband from
// the probe transmission.
inline DemodResult demodulate(const LadderSystem& sys, const VaporConfig& vapor,
                              double optical_depth,
                              const ModulatedCarrier& carrier,
                              const DemodOptions& opts = {}) {
  carrier.validate();
  sys.validate();
  require_chain(sys);
  int rf = find_single_drive(sys, DriveRole::Rf);
  int coupler = find_single_drive(sys, DriveRole::Coupler);

  DemodResult out;

  // Operating point: explicit, or located on the carrier-on spectrum.
  if (std::isfinite(opts.operating_detuning)) {
    out.operating_detuning = opts.operating_detuning;
  } else if (!opts.scan_detunings.empty()) {
    LadderSystem probe_sys = sys;
    probe_sys.drives[static_cast<std::size_t>(rf)].rabi = carrier.carrier_rabi;
    probe_sys.drives[static_cast<std::size_t>(rf)].envelope =
        Envelope::constant(1.0);
    SpectrumScan scan = scan_spectrum(probe_sys, vapor, opts.scan_detunings,
                                      optical_depth, opts.threads);
    out.operating_detuning = operating_point(scan);
  } else {
    throw ConfigError(
        "no operating point: set operating_detuning or provide scan_detunings");
  }

  if (opts.mode == DemodMode::QuasiStatic && opts.eit_linewidth > 0.0) {
    double bw_hz = opts.baseband_bandwidth > 0.0 ? opts.baseband_bandwidth
                                                 : carrier.sample_rate / 2.0;
    if (constants::two_pi * bw_hz > opts.quasi_static_limit * opts.eit_linewidth)
      throw ConfigError(
          "baseband bandwidth exceeds the quasi-static limit; use the full "
          "time-dependent mode");
  }

  LadderSystem column = sys;
  column.drives[static_cast<std::size_t>(coupler)].detuning =
      out.operating_detuning;
  column.drives[static_cast<std::size_t>(rf)].envelope =
      Envelope::constant(1.0);

  std::vector<VelocityClass> grid = velocity_grid(vapor);
  double reference_im = reference_absorption(column, vapor);

  const double omega0 = carrier.carrier_rabi;
  const double m = carrier.depth;
  const std::size_t n = carrier.baseband.size();

  out.time.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    out.time[k] = static_cast<double>(k) / carrier.sample_rate;

  // Small-signal gain dT/d(delta E / E) from a narrow central difference.
  const double eps = 1e-3;
  {
    double hi = detail::static_transmission(column, vapor, grid, rf,
                                            omega0 * (1.0 + eps),
                                            optical_depth, reference_im);
    double lo = detail::static_transmission(column, vapor, grid, rf,
                                            omega0 * (1.0 - eps),
                                            optical_depth, reference_im);
    out.gain = (hi - lo) / (2.0 * eps);
  }
  double polarity = out.gain < 0.0 ? -1.0 : 1.0;

  // Static response curve over the swept Rabi range; used for the
  // quasi-static sample map and for the clipping diagnosis.
  std::vector<double> curve_rabi, curve_t;
  if (m > 0.0) {
    int pts = std::max(opts.curve_points, 3);
    curve_rabi.resize(static_cast<std::size_t>(pts));
    curve_t.resize(static_cast<std::size_t>(pts));
    for (int j = 0; j < pts; ++j) {
      double f = static_cast<double>(j) / (pts - 1);
      curve_rabi[static_cast<std::size_t>(j)] =
          omega0 * (1.0 - m + 2.0 * m * f);
    }
    std::vector<std::string> failures(curve_rabi.size());
    parallel_for(
        curve_rabi.size(),
        [&](std::size_t j) {
          try {
            curve_t[j] = detail::static_transmission(
                column, vapor, grid, rf, curve_rabi[j], optical_depth,
                reference_im);
          } catch (const Error& e) {
            failures[j] = e.what();
          }
        },
        opts.threads);
    for (std::size_t j = 0; j < failures.size(); ++j)
      if (!failures[j].empty())
        throw NumericError("response curve failed at RF Rabi " +
                           std::to_string(curve_rabi[j]) + " rad/s: " +
                           failures[j]);

    // Monotonic flank around the carrier point: walk outward while the curve
    // keeps moving in the gain direction.
    std::size_t center = 0;
    for (std::size_t j = 1; j < curve_rabi.size(); ++j)
      if (std::abs(curve_rabi[j] - omega0) <
          std::abs(curve_rabi[center] - omega0))
        center = j;
    std::size_t flank_lo = center, flank_hi = center;
    while (flank_hi + 1 < curve_t.size() &&
           polarity * (curve_t[flank_hi + 1] - curve_t[flank_hi]) >= 0.0)
      ++flank_hi;
    while (flank_lo > 0 &&
           polarity * (curve_t[flank_lo] - curve_t[flank_lo - 1]) >= 0.0)
      --flank_lo;
    std::size_t clipped = 0;
    for (double b : carrier.baseband) {
      double w = omega0 * (1.0 + m * b);
      if (w < curve_rabi[flank_lo] || w > curve_rabi[flank_hi]) ++clipped;
    }
    out.clipped_fraction = static_cast<double>(clipped) / static_cast<double>(n);
    out.clipping = clipped > 0;
  }

  // Transmission time series.
  std::vector<double> t_series(n);
  if (m == 0.0) {
    double t0 = detail::static_transmission(column, vapor, grid, rf, omega0,
                                            optical_depth, reference_im);
    std::fill(t_series.begin(), t_series.end(), t0);
  } else if (opts.mode == DemodMode::QuasiStatic) {
    double lo = curve_rabi.front();
    double step = curve_rabi[1] - curve_rabi[0];
    for (std::size_t k = 0; k < n; ++k) {
      double w = omega0 * (1.0 + m * carrier.baseband[k]);
      double pos = (w - lo) / step;
      std::size_t j = static_cast<std::size_t>(std::clamp(
          pos, 0.0, static_cast<double>(curve_rabi.size() - 2)));
      double f = std::clamp(pos - static_cast<double>(j), 0.0, 1.0);
      t_series[k] = curve_t[j] + f * (curve_t[j + 1] - curve_t[j]);
    }
  } else {
    // Full dynamics: the modulation rides on the RF drive envelope, scaled so
    // the envelope peak is 1 at the deepest upward excursion.
    LadderSystem dyn = column;
    dyn.drives[static_cast<std::size_t>(rf)].rabi = omega0 * (1.0 + m);
    std::vector<Envelope::Node> nodes(n);
    for (std::size_t k = 0; k < n; ++k)
      nodes[k] = {out.time[k],
                  (1.0 + m * carrier.baseband[k]) / (1.0 + m)};
    dyn.drives[static_cast<std::size_t>(rf)].envelope =
        Envelope::from_nodes(std::move(nodes));
    PulseTrace trace =
        simulate_pulse_map(dyn, vapor, {out.operating_detuning}, out.time,
                           optical_depth, TransmissionScale::Absolute,
                           opts.threads, opts.evolve);
    t_series = trace.transmission.front();
  }

  // Recovered waveform: mean-removed, polarity-normalized transmission.
  double mean = 0.0;
  for (double t : t_series) mean += t;
  mean /= static_cast<double>(n);
  out.recovered.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    out.recovered[k] = polarity * (t_series[k] - mean);

  // Correlation and distortion against the transmitted baseband.
  double b_mean = 0.0;
  for (double b : carrier.baseband) b_mean += b;
  b_mean /= static_cast<double>(n);
  double rr = 0.0, bb = 0.0, rb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double b = carrier.baseband[k] - b_mean;
    rr += out.recovered[k] * out.recovered[k];
    bb += b * b;
    rb += out.recovered[k] * b;
  }
  if (m == 0.0 || rr == 0.0 || bb == 0.0) {
    out.degenerate = true;
    out.correlation = std::numeric_limits<double>::quiet_NaN();
    out.distortion = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.correlation = rb / std::sqrt(rr * bb);

  double alpha = rb / bb;  // least-squares projection onto the baseband
  double res = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double b = carrier.baseband[k] - b_mean;
    double r = out.recovered[k] - alpha * b;
    res += r * r;
  }
  double sig = alpha * alpha * bb;
  out.distortion = sig > 0.0 ? std::sqrt(res / sig)
                             : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace rydrx

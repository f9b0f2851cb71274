#pragma once

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "rydrx/atomic_data.hpp"
#include "rydrx/constants.hpp"
#include "rydrx/errors.hpp"
#include "rydrx/spectroscopy.hpp"

namespace rydrx {

// Splitting band (in units of the RF-free EIT linewidth) inside which the
// linear splitting-to-field readout is trusted.
struct WeakFieldBand {
  double min_linewidths = 1.0;
  double max_linewidths = 10.0;
};

struct FieldEstimate {
  double field = 0.0;        // V/m
  double uncertainty = 0.0;  // V/m
  std::string method;        // "AT-splitting" or "phase-scan-peak"
  bool weak_field = false;   // splitting sits inside the trusted band
  bool splitting_resolved = false;
};

// Inverts a measured splitting into a field amplitude: E = hbar*Omega/d.
// `linewidth` (rad/s) is the RF-free EIT linewidth used for the weak-field
// check; pass 0 when unknown (the flag is then left false).
inline FieldEstimate field_from_splitting(double splitting, double dipole,
                                          double linewidth = 0.0,
                                          double splitting_uncertainty = 0.0,
                                          const WeakFieldBand& band = {}) {
  if (!(dipole > 0.0))
    throw ConfigError("dipole moment must be > 0, got " +
                      std::to_string(dipole) + " C*m");
  if (!(splitting >= 0.0))
    throw ConfigError("splitting must be >= 0, got " +
                      std::to_string(splitting) + " rad/s");
  if (!(splitting_uncertainty >= 0.0))
    throw ConfigError("splitting uncertainty must be >= 0");
  if (!(band.min_linewidths > 0.0 && band.max_linewidths > band.min_linewidths))
    throw ConfigError("weak-field band must satisfy 0 < min < max");

  FieldEstimate est;
  est.field = constants::hbar * splitting / dipole;
  est.uncertainty = constants::hbar * splitting_uncertainty / dipole;
  est.method = "AT-splitting";
  est.splitting_resolved = splitting > 0.0;
  est.weak_field = linewidth > 0.0 &&
                   splitting > band.min_linewidths * linewidth &&
                   splitting < band.max_linewidths * linewidth;
  return est;
}

struct EstimateOptions {
  double dominance = 0.3;   // relative height floor for peak acceptance
  WeakFieldBand band{};
  double linewidth = 0.0;   // rad/s; 0 = measure from an RF-off scan
  int threads = 0;
};

namespace detail {

// Half-width of the local grid cell around a refined peak position; the
// parabola refinement cannot be trusted beyond this.
inline double interpolation_half_width(const std::vector<double>& grid,
                                       double position) {
  std::size_t best = 0;
  double dist = std::abs(grid[0] - position);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    double d = std::abs(grid[i] - position);
    if (d < dist) { dist = d; best = i; }
  }
  std::size_t a = best > 0 ? best - 1 : best;
  std::size_t b = best + 1 < grid.size() ? best + 1 : best;
  return 0.5 * (grid[b] - grid[a]) / static_cast<double>(b - a);
}

}  // namespace detail

// Closed-loop estimate: scan the coupler over `detunings` with the RF drive
// active, extract the Autler-Townes splitting, and invert it through
// E = hbar*Omega/d. The RF-free EIT linewidth for the weak-field check is
// measured from a second scan with the RF switched off unless the caller
// supplies one. Throws FeatureError when the spectrum does not resolve two
// dominant peaks.
inline FieldEstimate end_to_end_estimate(const LadderSystem& sys,
                                         const VaporConfig& vapor,
                                         const std::vector<double>& detunings,
                                         double optical_depth, double dipole,
                                         const EstimateOptions& opts = {}) {
  int rf = find_single_drive(sys, DriveRole::Rf);

  SpectrumScan scan =
      scan_spectrum(sys, vapor, detunings, optical_depth, opts.threads);
  SpectralFeatures features = extract_features(scan, opts.dominance);
  if (!features.at_splitting.has_value())
    throw FeatureError(
        "spectrum shows a single transmission peak; the splitting is below "
        "the feature-detection floor and no field estimate is possible");

  double linewidth = opts.linewidth;
  if (linewidth == 0.0) {
    LadderSystem rf_off = sys;
    rf_off.drives[static_cast<std::size_t>(rf)].rabi = 0.0;
    rf_off.drives[static_cast<std::size_t>(rf)].envelope = Envelope();
    SpectrumScan flat =
        scan_spectrum(rf_off, vapor, detunings, optical_depth, opts.threads);
    SpectralFeatures single = extract_features(flat, opts.dominance);
    if (single.fwhm.has_value()) linewidth = *single.fwhm;
  }

  double h0 = detail::interpolation_half_width(scan.detuning,
                                               features.peak_positions[0]);
  double h1 = detail::interpolation_half_width(scan.detuning,
                                               features.peak_positions[1]);
  double splitting_uncertainty = std::hypot(h0, h1);

  return field_from_splitting(*features.at_splitting, dipole, linewidth,
                              splitting_uncertainty, opts.band);
}

}  // namespace rydrx

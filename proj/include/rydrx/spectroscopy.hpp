#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rydrx/doppler.hpp"
#include "rydrx/errors.hpp"
#include "rydrx/ladder.hpp"
#include "rydrx/lindblad.hpp"
#include "rydrx/parallel.hpp"

namespace rydrx {

// Scan over coupler detuning produced failed solves or extraction found an
// ambiguous feature set (no clear peak, or more than two).
class FeatureError : public Error {
 public:
  explicit FeatureError(const std::string& what)
      : Error("feature-ambiguity", what) {}
};

struct SpectrumScan {
  std::vector<double> detuning;      // coupler detuning grid, rad/s, increasing
  std::vector<double> transmission;  // in [0, 1]
  double optical_depth = 0.0;
  double reference_absorption = 0.0;  // coupler-off resonant Im(rho_ge), averaged
  VaporConfig vapor;
  LadderSystem system;
};

struct SpectralFeatures {
  std::vector<double> peak_positions;   // refined, rad/s
  std::vector<double> peak_heights;     // transmission at the refined peaks
  std::optional<double> at_splitting;   // rad/s; exactly two dominant peaks
  std::optional<double> fwhm;           // rad/s; single dominant peak
  double contrast = 0.0;                // max - min transmission
};

// Beer-Lambert transmission with the absorption axis normalized to the
// coupler-off resonant probe response, so that response maps to exp(-OD).
inline double probe_transmission(double im_coherence, double optical_depth,
                                 double reference_im) {
  if (!(optical_depth >= 0.0))
    throw ConfigError("optical depth must be >= 0");
  if (!(reference_im > 0.0))
    throw ConfigError("reference absorption must be > 0");
  return std::exp(-optical_depth * im_coherence / reference_im);
}

inline int find_single_drive(const LadderSystem& sys, DriveRole role) {
  int found = -1;
  for (std::size_t d = 0; d < sys.drives.size(); ++d) {
    if (sys.drives[d].role == role) {
      if (found >= 0)
        throw ModelError("system has more than one " + to_string(role) +
                         " drive");
      found = static_cast<int>(d);
    }
  }
  if (found < 0)
    throw ModelError("system has no " + to_string(role) + " drive");
  return found;
}

// Doppler-averaged steady-state probe absorption Im(rho_ge) of `sys` as it
// stands. The probe coherence is taken between the probe drive's level pair.
inline double averaged_absorption(const LadderSystem& sys,
                                  const VaporConfig& vapor,
                                  const std::vector<VelocityClass>& grid) {
  int probe = find_single_drive(sys, DriveRole::Probe);
  int lo = sys.drives[static_cast<std::size_t>(probe)].lower;
  int up = sys.drives[static_cast<std::size_t>(probe)].upper;
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    DensityMatrix rho =
        steady_state(sys, doppler_offsets(grid[i].velocity, vapor, sys));
    values[i] = rho(lo, up).imag();
  }
  return averaged_observable(values, grid);
}

// Coupler-off resonant-probe absorption that anchors the transmission scale.
inline double reference_absorption(const LadderSystem& sys,
                                   const VaporConfig& vapor) {
  LadderSystem ref = sys;
  int probe = find_single_drive(ref, DriveRole::Probe);
  for (std::size_t d = 0; d < ref.drives.size(); ++d) {
    ref.drives[d].envelope = Envelope::constant(1.0);
    if (static_cast<int>(d) == probe) {
      ref.drives[d].detuning = 0.0;
    } else {
      ref.drives[d].rabi = 0.0;
    }
  }
  return averaged_absorption(ref, vapor, velocity_grid(vapor));
}

// Steady-state transmission spectrum against coupler detuning. Scan points are
// independent and evaluated through a deterministic parallel map.
inline SpectrumScan scan_spectrum(const LadderSystem& sys,
                                  const VaporConfig& vapor,
                                  const std::vector<double>& detunings,
                                  double optical_depth, int threads = 0) {
  sys.validate();
  require_chain(sys);
  if (detunings.size() < 2)
    throw ConfigError("scan needs at least two detuning points");
  for (std::size_t i = 1; i < detunings.size(); ++i)
    if (!(detunings[i] > detunings[i - 1]))
      throw ConfigError("scan grid must be strictly increasing");

  SpectrumScan scan;
  scan.detuning = detunings;
  scan.transmission.assign(detunings.size(), 0.0);
  scan.optical_depth = optical_depth;
  scan.vapor = vapor;
  scan.system = sys;
  scan.reference_absorption = reference_absorption(sys, vapor);

  int coupler = find_single_drive(sys, DriveRole::Coupler);
  std::vector<VelocityClass> grid = velocity_grid(vapor);

  std::vector<std::string> failures(detunings.size());
  parallel_for(
      detunings.size(),
      [&](std::size_t i) {
        LadderSystem point = sys;
        point.drives[static_cast<std::size_t>(coupler)].detuning = detunings[i];
        try {
          double im = averaged_absorption(point, vapor, grid);
          if (im < 0.0) {
            // Roundoff-level negative absorption snaps to zero; anything
            // larger would mean gain and a modeling problem.
            if (im > -1e-12 * scan.reference_absorption)
              im = 0.0;
            else
              throw NumericError("negative probe absorption " +
                                 std::to_string(im) + " at this detuning");
          }
          scan.transmission[i] =
              probe_transmission(im, optical_depth, scan.reference_absorption);
        } catch (const Error& e) {
          failures[i] = e.what();
        }
      },
      threads);
  for (std::size_t i = 0; i < detunings.size(); ++i) {
    if (!failures[i].empty())
      throw NumericError("scan failed at coupler detuning " +
                         std::to_string(detunings[i]) + " rad/s: " +
                         failures[i]);
  }
  return scan;
}

namespace detail {

// Vertex of the parabola through three (x, y) samples; falls back to the
// middle point for degenerate (collinear) input.
inline void parabola_vertex(double x0, double y0, double x1, double y1,
                            double x2, double y2, double& xv, double& yv) {
  double d0 = (x0 - x1) * (x0 - x2);
  double d1 = (x1 - x0) * (x1 - x2);
  double d2 = (x2 - x0) * (x2 - x1);
  double a = y0 / d0 + y1 / d1 + y2 / d2;
  double b = -(y0 * (x1 + x2) / d0 + y1 * (x0 + x2) / d1 + y2 * (x0 + x1) / d2);
  if (a == 0.0) {
    xv = x1;
    yv = y1;
    return;
  }
  xv = -b / (2.0 * a);
  yv = y0 * (xv - x1) * (xv - x2) / d0 + y1 * (xv - x0) * (xv - x2) / d1 +
       y2 * (xv - x0) * (xv - x1) / d2;
  // A refined vertex escaping its bracket means the parabola fit is not
  // trustworthy there; keep the grid point.
  if (xv < x0 || xv > x2) {
    xv = x1;
    yv = y1;
  }
}

struct Peak {
  double position = 0.0;
  double height = 0.0;  // transmission at the refined position
};

}  // namespace detail

// Local-maximum peak extraction with three-point quadratic refinement.
// Dominant peaks rise at least `dominance` of the tallest peak above the scan
// baseline (the scan minimum). Exactly two dominant peaks yield an AT
// splitting, one yields a FWHM; zero or more than two is ambiguous.
inline SpectralFeatures extract_features(const SpectrumScan& scan,
                                         double dominance = 0.3) {
  const std::vector<double>& x = scan.detuning;
  const std::vector<double>& y = scan.transmission;
  if (x.size() < 16)
    throw ConfigError("feature extraction needs at least 16 scan points");

  double baseline = *std::min_element(y.begin(), y.end());

  std::vector<detail::Peak> peaks;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] >= y[i - 1] && y[i] > y[i + 1]) {
      detail::Peak p;
      detail::parabola_vertex(x[i - 1], y[i - 1], x[i], y[i], x[i + 1],
                              y[i + 1], p.position, p.height);
      peaks.push_back(p);
      }
  }

  SpectralFeatures out;
  out.contrast = *std::max_element(y.begin(), y.end()) - baseline;
  if (peaks.empty())
    throw FeatureError("no peak found: spectrum is flat or monotonic");

  double tallest = 0.0;
  for (const detail::Peak& p : peaks)
    tallest = std::max(tallest, p.height - baseline);
  std::vector<detail::Peak> dominant;
  for (const detail::Peak& p : peaks)
    if (p.height - baseline >= dominance * tallest) dominant.push_back(p);

  // Tallest first; equal heights resolve toward lower detuning.
  std::sort(dominant.begin(), dominant.end(),
            [](const detail::Peak& a, const detail::Peak& b) {
              if (a.height != b.height) return a.height > b.height;
              return a.position < b.position;
            });
  for (const detail::Peak& p : dominant) {
    out.peak_positions.push_back(p.position);
    out.peak_heights.push_back(p.height);
  }

  if (dominant.size() == 2) {
    out.at_splitting = std::abs(dominant[1].position - dominant[0].position);
  } else if (dominant.size() == 1) {
    // Interpolated half-maximum crossings around the single peak.
    double half = baseline + 0.5 * (dominant[0].height - baseline);
    std::size_t ipk = 0;
    for (std::size_t i = 1; i < x.size(); ++i)
      if (std::abs(x[i] - dominant[0].position) <
          std::abs(x[ipk] - dominant[0].position))
        ipk = i;
    std::size_t il = ipk, ir = ipk;
    while (il > 0 && y[il] > half) --il;
    while (ir + 1 < y.size() && y[ir] > half) ++ir;
    if (y[il] > half || y[ir] > half)
      throw FeatureError("half-maximum crossing leaves the scan window");
    double xl = x[il] + (half - y[il]) * (x[il + 1] - x[il]) /
                            (y[il + 1] - y[il]);
    double xr = x[ir - 1] + (half - y[ir - 1]) * (x[ir] - x[ir - 1]) /
                                (y[ir] - y[ir - 1]);
    out.fwhm = xr - xl;
  } else {
    throw FeatureError(std::to_string(dominant.size()) +
                       " dominant peaks found; cannot attribute features");
  }
  return out;
}

// Uniformly spaced detuning grid, endpoints included.
inline std::vector<double> linear_grid(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) throw ConfigError("grid needs hi > lo and n >= 2");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return g;
}

}  // namespace rydrx

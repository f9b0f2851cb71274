#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "rydrx/constants.hpp"
#include "rydrx/errors.hpp"
#include "rydrx/ladder.hpp"
#include "rydrx/lindblad.hpp"
#include "rydrx/random.hpp"
#include "rydrx/spectroscopy.hpp"

namespace rydrx {

// Fit cannot distinguish the modulation from noise.
class PhaseError : public Error {
 public:
  explicit PhaseError(const std::string& msg) : Error("unresolved-phase", msg) {}
};

// Sideband-dressed two-photon coupling scheme. Channel B runs through the
// lower Rydberg S level by absorbing an RF photon; channel A runs through the
// upper S level by stimulated emission of an RF photon. The two channels
// interfere on the shared P level, which makes the net coupling sensitive to
// the RF phase.
struct PhaseScheme {
  double omega_rf = 0.0;        // rad/s, RF carrier = modulation frequency
  double detuning_a = 0.0;      // rad/s, RF detuning from the A transition
  double detuning_b = 0.0;      // rad/s, RF detuning from the B transition
  double optical_rabi_a = 0.0;  // rad/s, sideband drive to the upper S level
  double optical_rabi_b = 0.0;  // rad/s, sideband drive to the lower S level
  double rf_rabi_a = 0.0;       // rad/s, RF drive upper S <-> P
  double rf_rabi_b = 0.0;       // rad/s, RF drive lower S <-> P
  double optical_phase_a = 0.0; // rad, sideband phase (A channel)
  double optical_phase_b = 0.0; // rad, sideband phase (B channel)
  double rf_phase = 0.0;        // rad
  double dipole_a = 0.0;        // C*m, upper S <-> P
  double dipole_b = 0.0;        // C*m, lower S <-> P

  // Perturbative validity: both intermediate detunings must dominate every
  // Rabi frequency in the scheme.
  void validate() const {
    if (omega_rf <= 0.0) throw ConfigError("RF frequency must be > 0");
    if (detuning_a == 0.0 || detuning_b == 0.0)
      throw ConfigError("intermediate detunings must be nonzero");
    for (double r : {optical_rabi_a, optical_rabi_b, rf_rabi_a, rf_rabi_b})
      if (!(r >= 0.0)) throw ConfigError("Rabi frequencies must be >= 0");
    double max_rabi = std::max({optical_rabi_a, optical_rabi_b, rf_rabi_a,
                                rf_rabi_b});
    if (max_rabi * 10.0 > std::min(std::abs(detuning_a), std::abs(detuning_b)))
      throw ConfigError(
          "adiabatic elimination requires |detuning| >= 10x every Rabi "
          "frequency");
    if (!(dipole_a > 0.0 && dipole_b > 0.0))
      throw ConfigError("RF transition dipole moments must be > 0");
  }
};

// Two-photon Rabi frequency of the stimulated-emission channel (A): the RF
// phase enters with a minus sign, the mirror of channel B.
inline std::complex<double> two_photon_rabi_a(const PhaseScheme& s) {
  s.validate();
  return s.optical_rabi_a * s.rf_rabi_a / (2.0 * s.detuning_a) *
         std::exp(std::complex<double>(0.0, s.optical_phase_a - s.rf_phase));
}

// Two-photon Rabi frequency of the absorption channel (B).
inline std::complex<double> two_photon_rabi_b(const PhaseScheme& s) {
  s.validate();
  return s.optical_rabi_b * s.rf_rabi_b / (2.0 * s.detuning_b) *
         std::exp(std::complex<double>(0.0, s.optical_phase_b + s.rf_phase));
}

// Coherent sum of both channels, no symmetry assumptions.
inline std::complex<double> net_coupling(const PhaseScheme& s) {
  return two_photon_rabi_a(s) + two_photon_rabi_b(s);
}

// Closed form under the symmetric simplification (equal magnitudes,
// detuning_b = -detuning_a): the channel difference collapses to a single
// prefactor times a phase-difference factor.
inline std::complex<double> net_coupling_symmetric(const PhaseScheme& s) {
  s.validate();
  using cd = std::complex<double>;
  double m = s.optical_rabi_b * s.rf_rabi_b / (2.0 * s.detuning_b);
  return m * (std::exp(cd(0.0, s.optical_phase_a - s.rf_phase)) -
              std::exp(cd(0.0, s.optical_phase_b + s.rf_phase)));
}

// Optical phase imparted by translating the delay-line retroreflector by L:
// the modulated beam travels 2L extra in each direction.
inline double delay_to_phase(double translation, double omega_rf) {
  return 4.0 * translation / constants::speed_of_light * omega_rf;
}

// Delay-line convention: the retroreflector advances one sideband and
// retards the other by the same amount, and the phase-modulation sidebands
// carry opposite signs (a pi offset split symmetrically). With this
// convention the net coupling is exactly cos(rf_phase + phi_opt) times a
// fixed prefactor.
inline PhaseScheme with_optical_phase(PhaseScheme s, double phi_opt) {
  s.optical_phase_b = phi_opt + constants::two_pi / 4.0;
  s.optical_phase_a = -(phi_opt + constants::two_pi / 4.0);
  return s;
}

// --- Full five-level dynamics -------------------------------------------

// Diamond system: ground, intermediate, and three Rydberg levels {S, S', P}
// where S and S' straddle the two-photon resonance by -+ the channel
// detunings, and both sidebands plus both RF drives form a closed
// interference loop onto P. The direct intermediate -> P optical transition
// is electric-dipole forbidden, so a carrier drive on that edge is rejected.
struct DiamondParams {
  PhaseScheme scheme;
  double probe_rabi = 0.0;
  double probe_detuning = 0.0;
  double coupler_detuning = 0.0;      // two-photon scan detuning
  double intermediate_decay = 0.0;
  double rydberg_decay = 0.0;         // each Rydberg level back to ground
  double intermediate_dephasing = 0.0;
  double rydberg_dephasing = 0.0;
  double carrier_rabi = 0.0;          // must remain zero
};

inline LadderSystem diamond_system(const DiamondParams& p) {
  p.scheme.validate();
  if (p.carrier_rabi != 0.0)
    throw ModelError(
        "the intermediate -> P transition is electric-dipole forbidden; the "
        "modulation carrier cannot drive it");

  const PhaseScheme& s = p.scheme;
  LadderSystem sys;
  sys.levels = {{"g", 0.0},
                {"e", p.intermediate_dephasing},
                {"S", p.rydberg_dephasing},
                {"S'", p.rydberg_dephasing},
                {"P", p.rydberg_dephasing}};
  sys.decays = {{1, 0, p.intermediate_decay},
                {2, 0, p.rydberg_decay},
                {3, 0, p.rydberg_decay},
                {4, 0, p.rydberg_decay}};
  sys.drives = {
      {"probe", 0, 1, p.probe_rabi, p.probe_detuning, 0.0, DriveRole::Probe,
       Envelope()},
      {"sideband-b", 1, 2, s.optical_rabi_b,
       p.coupler_detuning - s.detuning_b, s.optical_phase_b,
       DriveRole::Coupler, Envelope()},
      {"sideband-a", 1, 3, s.optical_rabi_a,
       p.coupler_detuning - s.detuning_a, s.optical_phase_a,
       DriveRole::Coupler, Envelope()},
      {"rf-b", 2, 4, s.rf_rabi_b, s.detuning_b, s.rf_phase, DriveRole::Rf,
       Envelope()},
      // The A leg runs against the RF field direction, so its drive carries
      // the conjugate RF phase; its detuning closes the loop back to the
      // two-photon scan detuning.
      {"rf-a", 3, 4, s.rf_rabi_a, s.detuning_a, -s.rf_phase, DriveRole::Rf,
       Envelope()},
  };
  sys.validate();
  return sys;
}

// EIT line strength from the full diamond steady state: the deepest relative
// transparency over a two-photon detuning scan. The reference at each scan
// point is the same system with only the RF drives switched off — the carrier
// transition is forbidden, so without RF there is no path into P and the
// reference carries the full sideband dressing of the intermediate level.
// Referencing to it isolates the interference line from that pedestal.
inline double eit_line_strength(const DiamondParams& params,
                                double scan_half_span, int scan_points = 41) {
  if (!(scan_half_span > 0.0) || scan_points < 3)
    throw ConfigError("line-strength scan needs span > 0 and >= 3 points");

  double best = 0.0;
  for (int k = 0; k < scan_points; ++k) {
    DiamondParams p = params;
    p.coupler_detuning =
        -scan_half_span +
        2.0 * scan_half_span * static_cast<double>(k) /
            static_cast<double>(scan_points - 1);
    LadderSystem sys = diamond_system(p);
    LadderSystem ref = sys;
    for (DriveField& d : ref.drives)
      if (d.role == DriveRole::Rf) d.rabi = 0.0;
    double im_ref = steady_state(ref)(0, 1).imag();
    if (!(im_ref > 0.0))
      throw NumericError("probe reference absorption vanished");
    double im = steady_state(sys)(0, 1).imag();
    best = std::max(best, (im_ref - im) / im_ref);
  }
  return best;
}

// --- Phase scans ---------------------------------------------------------

enum class PhaseScanMode {
  Algebraic,     // |net_coupling|^2 from the two-photon expressions
  FullDynamics,  // EIT line strength of the five-level diamond
};

struct PhaseNoise {
  double multiplicative_sigma = 0.0;  // Gaussian, relative
  double floor = 0.0;                 // additive constant offset
  std::uint64_t seed = 1;
};

struct PhaseScan {
  std::vector<double> phi_opt;        // rad
  std::vector<double> line_strength;  // >= 0, arbitrary units
  PhaseScheme scheme;                 // rf_phase etc. as simulated
  PhaseScanMode mode = PhaseScanMode::Algebraic;
};

namespace detail {

inline void check_phase_grid(const std::vector<double>& phi_opt) {
  if (phi_opt.size() < 16)
    throw ConfigError("phase scan needs at least 16 points");
  auto [lo, hi] = std::minmax_element(phi_opt.begin(), phi_opt.end());
  if (*hi - *lo < constants::two_pi - 1e-9)
    throw ConfigError("phase scan must span at least 2 pi of optical phase");
}

}  // namespace detail

struct FullDynamicsConfig {
  DiamondParams base;            // scheme field is overridden per point
  double scan_half_span = 0.0;   // rad/s
  int scan_points = 41;
};

inline PhaseScan simulate_phase_scan(const PhaseScheme& scheme,
                                     const std::vector<double>& phi_opt,
                                     const PhaseNoise& noise = {},
                                     PhaseScanMode mode = PhaseScanMode::Algebraic,
                                     const FullDynamicsConfig* dynamics = nullptr) {
  scheme.validate();
  detail::check_phase_grid(phi_opt);
  if (mode == PhaseScanMode::FullDynamics &&
      (dynamics == nullptr || !(dynamics->scan_half_span > 0.0)))
    throw ConfigError("full-dynamics phase scan needs a scan configuration");

  PhaseScan scan;
  scan.phi_opt = phi_opt;
  scan.scheme = scheme;
  scan.mode = mode;
  scan.line_strength.resize(phi_opt.size());

  for (std::size_t k = 0; k < phi_opt.size(); ++k) {
    PhaseScheme point = with_optical_phase(scheme, phi_opt[k]);
    if (mode == PhaseScanMode::Algebraic) {
      scan.line_strength[k] = std::norm(net_coupling(point));
    } else {
      DiamondParams p = dynamics->base;
      p.scheme = point;
      scan.line_strength[k] =
          eit_line_strength(p, dynamics->scan_half_span, dynamics->scan_points);
    }
  }

  if (noise.multiplicative_sigma > 0.0) {
    NormalSampler normal(noise.seed);
    for (double& v : scan.line_strength)
      v *= std::max(0.0, 1.0 + noise.multiplicative_sigma * normal());
  }
  if (noise.floor != 0.0)
    for (double& v : scan.line_strength) v = std::max(0.0, v + noise.floor);
  return scan;
}

// Scan driven by delay-line translation instead of phase directly.
inline PhaseScan simulate_delay_scan(const PhaseScheme& scheme,
                                     const std::vector<double>& translations,
                                     const PhaseNoise& noise = {}) {
  std::vector<double> phi(translations.size());
  for (std::size_t k = 0; k < translations.size(); ++k)
    phi[k] = delay_to_phase(translations[k], scheme.omega_rf);
  return simulate_phase_scan(scheme, phi, noise);
}

// Fit a*cos^2(phi + b) + c. The model linearizes exactly:
//   a cos^2(x+b) + c = p cos 2x + q sin 2x + r
// with p = (a/2)cos 2b, q = -(a/2)sin 2b, r = c + a/2, so the least-squares
// optimum is found globally by a 3x3 linear solve -- no starting guess, no
// local minima.
struct PhaseFit {
  double rf_phase = 0.0;      // rad, in [0, pi)
  double contrast = 0.0;      // fitted a, line-strength units
  double offset = 0.0;        // fitted c
  double omega_c0 = 0.0;      // rad/s, peak net coupling
  double e_field = 0.0;       // V/m, from the B-channel dipole
  double residual_rms = 0.0;  // line-strength units

  // Fringe visibility (max-min)/(max+min) of the fitted model.
  double visibility() const {
    double base = std::max(offset, 0.0);
    return contrast / (contrast + 2.0 * base);
  }
};

inline PhaseFit fit_phase_and_amplitude(const PhaseScan& scan) {
  detail::check_phase_grid(scan.phi_opt);
  std::size_t n = scan.phi_opt.size();

  // Normal equations for (p, q, r) against cos 2x, sin 2x, 1.
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double rhs[3] = {0, 0, 0};
  for (std::size_t k = 0; k < n; ++k) {
    double basis[3] = {std::cos(2.0 * scan.phi_opt[k]),
                       std::sin(2.0 * scan.phi_opt[k]), 1.0};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m[i][j] += basis[i] * basis[j];
      rhs[i] += basis[i] * scan.line_strength[k];
    }
  }
  // Gaussian elimination with partial pivoting on the 3x3 system.
  int perm[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 3; ++row)
      if (std::abs(m[perm[row]][col]) > std::abs(m[perm[pivot]][col]))
        pivot = row;
    std::swap(perm[col], perm[pivot]);
    double diag = m[perm[col]][col];
    if (std::abs(diag) < 1e-300)
      throw NumericError("phase-fit normal equations are singular");
    for (int row = col + 1; row < 3; ++row) {
      double f = m[perm[row]][col] / diag;
      for (int j = col; j < 3; ++j) m[perm[row]][j] -= f * m[perm[col]][j];
      rhs[perm[row]] -= f * rhs[perm[col]];
    }
  }
  double sol[3];
  for (int col = 2; col >= 0; --col) {
    double acc = rhs[perm[col]];
    for (int j = col + 1; j < 3; ++j) acc -= m[perm[col]][j] * sol[j];
    sol[col] = acc / m[perm[col]][col];
  }
  double p = sol[0], q = sol[1], r = sol[2];

  PhaseFit fit;
  fit.contrast = 2.0 * std::hypot(p, q);
  fit.offset = r - fit.contrast / 2.0;
  double b = 0.5 * std::atan2(-q, p);
  double pi = constants::two_pi / 2.0;
  fit.rf_phase = std::fmod(std::fmod(b, pi) + pi, pi);

  double ss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double model = p * std::cos(2.0 * scan.phi_opt[k]) +
                   q * std::sin(2.0 * scan.phi_opt[k]) + r;
    double d = scan.line_strength[k] - model;
    ss += d * d;
  }
  fit.residual_rms = std::sqrt(ss / static_cast<double>(n));

  if (fit.contrast <= 3.0 * fit.residual_rms || fit.contrast <= 0.0)
    throw PhaseError(
        "modulation contrast is below the noise floor; the RF phase cannot "
        "be resolved from this scan");

  // Peak coupling and field, meaningful for algebraic-scale line strengths
  // where S = |net coupling|^2.
  fit.omega_c0 = std::sqrt(fit.contrast);
  const PhaseScheme& s = scan.scheme;
  if (s.optical_rabi_b > 0.0 && s.dipole_b > 0.0)
    fit.e_field = fit.omega_c0 * std::abs(s.detuning_b) * constants::hbar /
                  (s.optical_rabi_b * s.dipole_b);
  return fit;
}

}  // namespace rydrx

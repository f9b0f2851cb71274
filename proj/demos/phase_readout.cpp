// Recovers an RF phase from optical-phase scans of the two-channel Rydberg
// interference scheme, with multiplicative detection noise, and reports the
// error statistics over repeated trials.
//
//   ./phase_readout [noise_sigma] [trials]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include <rydrx/phase_retrieval.hpp>

using namespace rydrx;

int main(int argc, char** argv) {
  double sigma = argc > 1 ? std::atof(argv[1]) : 0.05;
  int trials = argc > 2 ? std::atoi(argv[2]) : 200;

  PhaseScheme scheme;
  scheme.omega_rf = constants::two_pi * 10e9;
  scheme.detuning_a = -constants::two_pi * 200e6;
  scheme.detuning_b = constants::two_pi * 200e6;
  scheme.optical_rabi_a = constants::two_pi * 5e6;
  scheme.optical_rabi_b = constants::two_pi * 5e6;
  scheme.dipole_a = 100.0 * constants::e_a0;
  scheme.dipole_b = 100.0 * constants::e_a0;
  scheme.rf_rabi_a = rf_rabi_from_field(1.0, scheme.dipole_a);
  scheme.rf_rabi_b = rf_rabi_from_field(1.0, scheme.dipole_b);
  scheme.rf_phase = 0.7;

  std::vector<double> grid =
      linear_grid(0.0, constants::two_pi, 64);

  std::vector<double> errors;
  for (int k = 0; k < trials; ++k) {
    PhaseNoise noise;
    noise.multiplicative_sigma = sigma;
    noise.seed = 1000 + static_cast<std::uint64_t>(k);
    PhaseFit fit = fit_phase_and_amplitude(
        simulate_phase_scan(scheme, grid, noise));
    double err = std::abs(std::remainder(fit.rf_phase - scheme.rf_phase,
                                         constants::two_pi));
    errors.push_back(err);
  }
  std::sort(errors.begin(), errors.end());

  double deg = 180.0 / 3.14159265358979323846;
  std::printf("noise sigma %.3f, %d trials of 64-point scans\n", sigma, trials);
  std::printf("phase error: median %.3f deg, p95 %.3f deg, max %.3f deg\n",
              errors[errors.size() / 2] * deg,
              errors[static_cast<std::size_t>(0.95 * (errors.size() - 1))] * deg,
              errors.back() * deg);
  return 0;
}

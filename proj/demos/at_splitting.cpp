// Scans a driven Rb87 ladder with the RF field off and on, prints the line
// features, and inverts the measured splitting back into a field amplitude.
//
//   ./at_splitting [e_field_v_per_m]

#include <cstdio>
#include <cstdlib>
#include <vector>

#include <rydrx/field_estimation.hpp>

using namespace rydrx;

int main(int argc, char** argv) {
  double e_field = argc > 1 ? std::atof(argv[1]) : 5.0;
  double dipole = 745.0 * constants::e_a0;  // 47S1/2 -> 47P1/2

  ThreeLevelParams base;
  base.probe_rabi = constants::two_pi * 0.5e6;
  base.coupler_rabi = constants::two_pi * 5e6;
  base.intermediate_decay = rb87().intermediate_decay_rate;
  base.rydberg_decay = constants::two_pi * 3e3;
  base.intermediate_dephasing = constants::two_pi * 1e6;
  base.rydberg_dephasing = constants::two_pi * 50e3;

  FourLevelParams p;
  p.base = base;
  p.rf_rabi = rf_rabi_from_field(e_field, dipole);
  p.second_rydberg_decay = base.rydberg_decay;
  p.second_rydberg_dephasing = base.rydberg_dephasing;
  LadderSystem sys = four_level(p);

  VaporConfig vapor = make_vapor(rb87(), 294.0, 1, VelocityQuadrature::Uniform);
  std::vector<double> detunings =
      linear_grid(-constants::two_pi * 60e6, constants::two_pi * 60e6, 241);
  double od = 1.443923473956527;

  LadderSystem rf_off = sys;
  rf_off.drives[2].rabi = 0.0;
  SpectralFeatures off = extract_features(scan_spectrum(rf_off, vapor, detunings, od));
  std::printf("RF off:  single line at %+.3f MHz, FWHM %.3f MHz, contrast %.3f\n",
              off.peak_positions[0] / constants::two_pi / 1e6,
              off.fwhm ? *off.fwhm / constants::two_pi / 1e6 : 0.0, off.contrast);

  SpectralFeatures on = extract_features(scan_spectrum(sys, vapor, detunings, od));
  if (!on.at_splitting) {
    std::printf("RF on:   no resolved pair at %.3f V/m\n", e_field);
    return 1;
  }
  std::printf("RF on:   pair at %+.3f / %+.3f MHz, splitting %.3f MHz\n",
              on.peak_positions[0] / constants::two_pi / 1e6,
              on.peak_positions[1] / constants::two_pi / 1e6,
              *on.at_splitting / constants::two_pi / 1e6);

  FieldEstimate est = field_from_splitting(*on.at_splitting, dipole,
                                           off.fwhm ? *off.fwhm : 0.0);
  std::printf("inverted field: %.4f V/m (applied %.4f), method %s%s\n",
              est.field, e_field, est.method.c_str(),
              est.weak_field ? ", weak-field band" : "");
  return 0;
}

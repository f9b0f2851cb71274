#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include <rydrx/field_estimation.hpp>

#include "support/systems.hpp"

using namespace rydrx;
using testsys::kOd;
using Catch::Approx;

namespace {

constexpr double kDipole47 = 745.0;  // e*a0, 47S1/2 -> 47P1/2

LadderSystem narrow_rf_system(double e_field) {
  double d = kDipole47 * constants::e_a0;
  return testsys::rb_eit4(0.5e6, 5e6, rf_rabi_from_field(e_field, d));
}

}  // namespace

TEST_CASE("splitting inverts to the known field amplitude", "[field]") {
  double d = kDipole47 * constants::e_a0;
  FieldEstimate est = field_from_splitting(constants::two_pi * 47.7e6, d);
  CHECK(est.field == Approx(5.0).epsilon(0.01));
  CHECK(est.field == Approx(5.003869141850165).epsilon(1e-12));
  CHECK(est.method == "AT-splitting");
  CHECK(est.splitting_resolved);
  CHECK_FALSE(est.weak_field);  // no linewidth supplied
  CHECK(est.uncertainty == 0.0);
}

TEST_CASE("field inversion round-trips with the Rabi formula", "[field]") {
  double d = kDipole47 * constants::e_a0;
  for (double omega : {1e6, 2e8, 7.3e9}) {
    double e = field_from_splitting(omega, d).field;
    CHECK(rf_rabi_from_field(e, d) == Approx(omega).epsilon(1e-12));
  }
}

TEST_CASE("zero splitting gives zero field and no flags", "[field]") {
  FieldEstimate est = field_from_splitting(0.0, 1e-29, constants::two_pi * 5e6);
  CHECK(est.field == 0.0);
  CHECK_FALSE(est.splitting_resolved);
  CHECK_FALSE(est.weak_field);
}

TEST_CASE("weak-field flag brackets the configured band", "[field]") {
  double d = 1e-29;
  double lw = constants::two_pi * 5e6;
  CHECK_FALSE(field_from_splitting(0.5 * lw, d, lw).weak_field);
  CHECK(field_from_splitting(4.0 * lw, d, lw).weak_field);
  CHECK_FALSE(field_from_splitting(12.0 * lw, d, lw).weak_field);

  WeakFieldBand wide{1.0, 20.0};
  CHECK(field_from_splitting(12.0 * lw, d, lw, 0.0, wide).weak_field);
}

TEST_CASE("splitting uncertainty propagates linearly", "[field]") {
  double d = kDipole47 * constants::e_a0;
  FieldEstimate est =
      field_from_splitting(constants::two_pi * 47.7e6, d, 0.0,
                           constants::two_pi * 1e6);
  CHECK(est.uncertainty ==
        Approx(constants::hbar * constants::two_pi * 1e6 / d).epsilon(1e-12));
  CHECK(est.uncertainty / est.field == Approx(1.0 / 47.7).epsilon(1e-10));
}

TEST_CASE("field inversion input validation", "[field]") {
  CHECK_THROWS_AS(field_from_splitting(1e6, 0.0), ConfigError);
  CHECK_THROWS_AS(field_from_splitting(1e6, -1e-29), ConfigError);
  CHECK_THROWS_AS(field_from_splitting(-1e6, 1e-29), ConfigError);
  CHECK_THROWS_AS(field_from_splitting(1e6, 1e-29, 0.0, -1.0), ConfigError);
  CHECK_THROWS_AS(
      field_from_splitting(1e6, 1e-29, 0.0, 0.0, WeakFieldBand{5.0, 2.0}),
      ConfigError);
}

TEST_CASE("closed-loop estimate recovers the true field", "[field]") {
  double d = kDipole47 * constants::e_a0;
  LadderSystem sys = narrow_rf_system(5.0);
  VaporConfig vapor = testsys::doppler_free();
  std::vector<double> detunings =
      linear_grid(-constants::two_pi * 60e6, constants::two_pi * 60e6, 241);

  FieldEstimate est = end_to_end_estimate(sys, vapor, detunings, kOd, d);
  CHECK(est.splitting_resolved);
  CHECK(est.field == Approx(5.0).epsilon(0.05));
  CHECK(est.uncertainty > 0.0);
  CHECK(est.uncertainty < 0.1 * est.field);
}

TEST_CASE("weak-field flag agrees with the measured linewidth ratio",
          "[field]") {
  double d = kDipole47 * constants::e_a0;
  VaporConfig vapor = testsys::doppler_free();
  std::vector<double> detunings =
      linear_grid(-constants::two_pi * 60e6, constants::two_pi * 60e6, 241);

  // Measure the RF-free EIT linewidth once.
  LadderSystem rf_off = narrow_rf_system(5.0);
  rf_off.drives[2].rabi = 0.0;
  SpectralFeatures single =
      extract_features(scan_spectrum(rf_off, vapor, detunings, kOd));
  REQUIRE(single.fwhm.has_value());
  double lw = *single.fwhm;

  FieldEstimate est =
      end_to_end_estimate(narrow_rf_system(5.0), vapor, detunings, kOd, d);
  double ratio = rf_rabi_from_field(est.field, d) / lw;
  CHECK(est.weak_field == (ratio > 1.0 && ratio < 10.0));
}

TEST_CASE("field below the splitting resolution raises feature-ambiguity",
          "[field]") {
  // RF Rabi below the two-photon linewidth: the doublet never separates.
  double d = kDipole47 * constants::e_a0;
  LadderSystem sys = narrow_rf_system(0.004);
  VaporConfig vapor = testsys::doppler_free();
  std::vector<double> detunings =
      linear_grid(-constants::two_pi * 30e6, constants::two_pi * 30e6, 201);
  CHECK_THROWS_AS(end_to_end_estimate(sys, vapor, detunings, kOd, d),
                  FeatureError);
}

TEST_CASE("closed-loop estimates are monotonic in the true field", "[field]") {
  double d = kDipole47 * constants::e_a0;
  VaporConfig vapor = testsys::doppler_free();
  std::vector<double> detunings =
      linear_grid(-constants::two_pi * 70e6, constants::two_pi * 70e6, 281);

  double last = 0.0;
  for (double e_true : {2.0, 4.0, 6.0, 8.0, 10.0}) {
    FieldEstimate est = end_to_end_estimate(narrow_rf_system(e_true), vapor,
                                            detunings, kOd, d);
    CHECK(est.field > last);
    CHECK(est.field == Approx(e_true).epsilon(0.05));
    last = est.field;
  }
}

TEST_CASE("estimate is insensitive to optical depth and probe power",
          "[field]") {
  double d = kDipole47 * constants::e_a0;
  VaporConfig vapor = testsys::doppler_free();
  std::vector<double> detunings =
      linear_grid(-constants::two_pi * 60e6, constants::two_pi * 60e6, 241);

  double base =
      end_to_end_estimate(narrow_rf_system(5.0), vapor, detunings, kOd, d)
          .field;

  LadderSystem hot = narrow_rf_system(5.0);
  hot.drives[0].rabi *= 1.5;
  double perturbed =
      end_to_end_estimate(hot, vapor, detunings, 2.0 * kOd, d).field;
  CHECK(std::abs(perturbed - base) / base < 0.02);
}

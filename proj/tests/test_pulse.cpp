#include <algorithm>
#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include <rydrx/field_estimation.hpp>
#include <rydrx/pulse.hpp>
#include <rydrx/spectroscopy.hpp>

#include "support/systems.hpp"

using namespace rydrx;
using testsys::kOd;
using Catch::Approx;

namespace {

std::vector<double> time_grid(double t0, double t1, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k)
    t[k] = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(n - 1);
  return t;
}

double interp_crossing(const std::vector<double>& t,
                       const std::vector<double>& y, double level) {
  for (std::size_t k = 1; k < y.size(); ++k) {
    if ((y[k - 1] < level) && (y[k] >= level)) {
      double f = (level - y[k - 1]) / (y[k] - y[k - 1]);
      return t[k - 1] + f * (t[k] - t[k - 1]);
    }
  }
  return t.back();
}

SpectrumScan slice_scan(const PulseTrace& trace, std::size_t time_index) {
  SpectrumScan scan;
  scan.detuning = trace.detuning;
  scan.transmission = trace.row(time_index);
  scan.optical_depth = trace.optical_depth;
  scan.reference_absorption = trace.reference_absorption;
  return scan;
}

std::size_t nearest_index(const std::vector<double>& t, double value) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < t.size(); ++k)
    if (std::abs(t[k] - value) < std::abs(t[best] - value)) best = k;
  return best;
}

}  // namespace

TEST_CASE("detector filter is identity far above Nyquist", "[pulse]") {
  PulseTrace trace;
  trace.time = time_grid(0.0, 100e-9, 101);
  trace.detuning = {0.0};
  trace.transmission.resize(1);
  for (std::size_t k = 0; k < trace.time.size(); ++k)
    trace.transmission[0].push_back(
        0.5 + 0.4 * std::sin(2e8 * trace.time[k]) * std::cos(7e7 * trace.time[k]));

  double nyquist = 0.5 / 1e-9;
  PulseTrace out = photodetector_filter(trace, 100.0 * nyquist);
  for (std::size_t k = 0; k < trace.time.size(); ++k)
    CHECK(std::abs(out.transmission[0][k] - trace.transmission[0][k]) < 1e-6);
}

TEST_CASE("detector filter passes DC unchanged", "[pulse]") {
  PulseTrace trace;
  trace.time = time_grid(0.0, 1e-6, 64);
  trace.detuning = {0.0};
  trace.transmission = {std::vector<double>(64, 0.37)};
  PulseTrace out = photodetector_filter(trace, 1e6);
  for (double v : out.transmission[0]) CHECK(v == Approx(0.37).margin(1e-15));
}

TEST_CASE("detector filter 10-90 rise time matches 0.35/BW", "[pulse]") {
  double bw = 35e6;
  PulseTrace trace;
  trace.time = time_grid(0.0, 60e-9, 3001);
  trace.detuning = {0.0};
  trace.transmission = {std::vector<double>(3001, 1.0)};
  trace.transmission[0][0] = 0.0;  // step applied after the first sample

  PulseTrace out = photodetector_filter(trace, bw);
  double t10 = interp_crossing(out.time, out.transmission[0], 0.1);
  double t90 = interp_crossing(out.time, out.transmission[0], 0.9);
  double rise = t90 - t10;
  CHECK(rise == Approx(std::log(9.0) / (constants::two_pi * bw)).epsilon(0.05));
  CHECK(rise == Approx(10e-9).epsilon(0.05));
  CHECK(detector_rise_time(bw) == Approx(10e-9).epsilon(0.01));
}

TEST_CASE("detector filter rejects non-positive bandwidth", "[pulse]") {
  PulseTrace trace;
  trace.time = {0.0, 1e-9};
  trace.detuning = {0.0};
  trace.transmission = {{1.0, 1.0}};
  CHECK_THROWS_AS(photodetector_filter(trace, 0.0), ConfigError);
}

TEST_CASE("coupler pulse transient shows dip, recovery, and turn-off gain",
          "[pulse][slow]") {
  // Strong-probe vapor configuration; the dip and gain features are thermal
  // effects and vanish in the Doppler-free limit. Transit-broadened Rydberg
  // decay so the EIT plateau settles within the pulse.
  testsys::RbRates rates;
  rates.rydberg_decay = constants::two_pi * 150e3;
  LadderSystem sys = testsys::rb_eit3(44e6, 10e6, rates);
  double t_on = 2e-6, t_off = 7e-6;
  sys.drives[1].envelope = Envelope::ramped_rectangle(t_on, t_off, 10e-9);

  VaporConfig vapor = testsys::rb_vapor(256);
  std::vector<double> times = time_grid(0.0, 10e-6, 1001);
  PulseTrace trace = simulate_coupler_pulse(sys, vapor, times, kOd);

  REQUIRE(trace.transmission.size() == 1);
  REQUIRE(trace.transmission[0].size() == times.size());
  const std::vector<double>& tr = trace.transmission[0];

  for (double v : tr) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.5);
  }

  double background = std::exp(-kOd);
  for (std::size_t k = 0; k < times.size() && times[k] < t_on; ++k)
    CHECK(std::abs(tr[k] - background) < 1e-8);

  // Steady EIT level of the same system with the coupler held on.
  LadderSystem cw = sys;
  cw.drives[1].envelope = Envelope();
  double t_eit = probe_transmission(
      averaged_absorption(cw, vapor, velocity_grid(vapor)), kOd,
      trace.reference_absorption);
  double contrast = t_eit - background;
  REQUIRE(contrast > 0.01);

  // Turn-on dip: minimum within 100 ns of the switch, below the background.
  std::size_t k_on = nearest_index(times, t_on);
  std::size_t k_dip = k_on;
  for (std::size_t k = k_on; times[k] < t_on + 1e-6; ++k)
    if (tr[k] < tr[k_dip]) k_dip = k;
  CHECK(times[k_dip] - t_on < 100e-9);
  CHECK(tr[k_dip] < background);

  // Settled to the EIT level well before turn-off.
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] >= t_on + 2e-6 && times[k] <= t_off)
      CHECK(std::abs(tr[k] - t_eit) < 0.02 * contrast);
    if (times[k] >= t_off - 1.2e-6 && times[k] <= t_off)
      CHECK(std::abs(tr[k] - t_eit) < 1e-4);
  }

  // Turn-off gain spike within 100 ns exceeds the steady EIT level, then the
  // signal decays back to the coupler-free background.
  std::size_t k_off = nearest_index(times, t_off);
  double spike = 0.0;
  for (std::size_t k = k_off; k < times.size() && times[k] < t_off + 100e-9; ++k)
    spike = std::max(spike, tr[k]);
  CHECK(spike > t_eit);
  CHECK(std::abs(tr.back() - background) < 1e-2);
}

TEST_CASE("coupler pulse relative scale divides out the background", "[pulse]") {
  testsys::RbRates rates;
  rates.rydberg_decay = constants::two_pi * 150e3;
  LadderSystem sys = testsys::rb_eit3(2.5e6, 18e6, rates);
  sys.drives[1].envelope = Envelope::ramped_rectangle(1e-6, 3e-6, 10e-9);

  VaporConfig vapor = testsys::doppler_free();
  std::vector<double> times = time_grid(0.0, 4e-6, 161);
  PulseTrace abs_trace = simulate_coupler_pulse(sys, vapor, times, kOd,
                                                TransmissionScale::Absolute);
  PulseTrace rel_trace = simulate_coupler_pulse(sys, vapor, times, kOd,
                                                TransmissionScale::Relative);
  double background = std::exp(-kOd);
  for (std::size_t k = 0; k < times.size(); ++k)
    CHECK(rel_trace.transmission[0][k] ==
          Approx(abs_trace.transmission[0][k] / background).epsilon(1e-12));
  CHECK(rel_trace.transmission[0][0] == Approx(1.0).margin(1e-8));
}

TEST_CASE("coupler that never switches on gives a flat trace", "[pulse]") {
  LadderSystem sys = testsys::rb_eit3(2.5e6, 18e6);
  sys.drives[1].envelope = Envelope::constant(0.0);
  VaporConfig vapor = testsys::doppler_free();
  std::vector<double> times = time_grid(0.0, 5e-6, 101);
  PulseTrace trace = simulate_coupler_pulse(sys, vapor, times, kOd);
  double background = std::exp(-kOd);
  for (double v : trace.transmission[0])
    CHECK(std::abs(v - background) < 1e-10);
}

TEST_CASE("zero-amplitude RF pulse reproduces the RF-free map", "[pulse]") {
  LadderSystem pulsed = testsys::rb_eit4(2.5e6, 18e6, 0.0);
  pulsed.drives[2].envelope = Envelope::rectangle(1e-6, 2e-6);
  LadderSystem quiet = testsys::rb_eit4(2.5e6, 18e6, 0.0);

  VaporConfig vapor = testsys::doppler_free();
  std::vector<double> detunings =
      linear_grid(-constants::two_pi * 20e6, constants::two_pi * 20e6, 5);
  std::vector<double> times = time_grid(0.0, 3e-6, 61);

  PulseTrace a = simulate_rf_pulse(pulsed, vapor, detunings, times, kOd);
  PulseTrace b = simulate_rf_pulse(quiet, vapor, detunings, times, kOd);
  for (std::size_t c = 0; c < detunings.size(); ++c)
    for (std::size_t k = 0; k < times.size(); ++k)
      CHECK(std::abs(a.transmission[c][k] - b.transmission[c][k]) < 1e-10);
}

TEST_CASE("RF pulse map splits inside the window and not before it",
          "[pulse]") {
  double rf_rabi = rf_rabi_from_field(5.0, 745.0 * constants::e_a0);
  LadderSystem sys = testsys::rb_eit4(2.5e6, 18e6, rf_rabi);
  double t_on = 0.5e-6, t_off = 2.5e-6;
  sys.drives[2].envelope = Envelope::rectangle(t_on, t_off);

  VaporConfig vapor = testsys::doppler_free();
  std::vector<double> detunings =
      linear_grid(-constants::two_pi * 45e6, constants::two_pi * 45e6, 121);
  std::vector<double> times = time_grid(0.0, 3e-6, 121);
  PulseTrace trace = simulate_rf_pulse(sys, vapor, detunings, times, kOd);

  REQUIRE(trace.transmission.size() == detunings.size());
  for (const std::vector<double>& col : trace.transmission) {
    REQUIRE(col.size() == times.size());
    for (double v : col) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.5);
    }
  }

  // Settled row inside the RF window resolves the Autler-Townes pair.
  SpectralFeatures in_window =
      extract_features(slice_scan(trace, nearest_index(times, 2.4e-6)));
  REQUIRE(in_window.at_splitting.has_value());
  CHECK(*in_window.at_splitting == Approx(rf_rabi).epsilon(0.10));

  // Before the pulse the spectrum is a single EIT peak near zero detuning.
  SpectralFeatures before =
      extract_features(slice_scan(trace, nearest_index(times, 0.25e-6)));
  CHECK_FALSE(before.at_splitting.has_value());
  REQUIRE(before.peak_positions.size() == 1);
  CHECK(std::abs(before.peak_positions[0]) < constants::two_pi * 2e6);
}

TEST_CASE("in-window splitting scales linearly with field amplitude",
          "[pulse]") {
  double d = 745.0 * constants::e_a0;
  VaporConfig vapor = testsys::doppler_free();
  std::vector<double> times = time_grid(0.0, 3e-6, 61);
  std::vector<double> detunings =
      linear_grid(-constants::two_pi * 70e6, constants::two_pi * 70e6, 141);

  auto splitting_at = [&](double e_field) {
    LadderSystem sys = testsys::rb_eit4(2.5e6, 18e6,
                                        rf_rabi_from_field(e_field, d));
    sys.drives[2].envelope = Envelope::rectangle(0.5e-6, 2.8e-6);
    PulseTrace trace = simulate_rf_pulse(sys, vapor, detunings, times, kOd);
    SpectralFeatures f =
        extract_features(slice_scan(trace, nearest_index(times, 2.7e-6)));
    REQUIRE(f.at_splitting.has_value());
    return *f.at_splitting;
  };

  double s5 = splitting_at(5.0);
  double s10 = splitting_at(10.0);
  CHECK(s10 / s5 == Approx(2.0).epsilon(0.05));
  CHECK(s5 / 5.0 == Approx(d / constants::hbar).epsilon(0.05));
}

TEST_CASE("post-off transient energy shrinks with extra Rydberg dephasing",
          "[pulse][slow]") {
  // The stored-coherence energy released right after turn-off lives in the
  // first few hundred ns; the microsecond-scale tail is population recycling
  // through the Rydberg decay and is insensitive to dephasing, so the
  // integration window stops before the tail dominates.
  VaporConfig vapor = testsys::rb_vapor(256);
  std::vector<double> times = time_grid(0.0, 6e-6, 481);
  double t_off = 4e-6;
  double background = std::exp(-kOd);

  auto excess = [&](double dephasing_hz) {
    testsys::RbRates rates;
    rates.rydberg_decay = constants::two_pi * 150e3;
    rates.rydberg_dephasing = constants::two_pi * dephasing_hz;
    LadderSystem sys = testsys::rb_eit3(2.5e6, 18e6, rates);
    sys.drives[1].envelope = Envelope::ramped_rectangle(1e-6, t_off, 10e-9);
    PulseTrace trace = simulate_coupler_pulse(sys, vapor, times, kOd);
    double sum = 0.0;
    for (std::size_t k = 1; k < times.size(); ++k) {
      if (times[k] <= t_off || times[k] > t_off + 0.3e-6) continue;
      double dt = times[k] - times[k - 1];
      sum += (trace.transmission[0][k] - background) * dt;
    }
    return sum;
  };

  double e0 = excess(50e3);
  double e1 = excess(400e3);
  double e2 = excess(1200e3);
  CHECK(e0 > 0.0);
  CHECK(e0 > e1);
  CHECK(e1 > e2);
}

TEST_CASE("pulse simulation input validation", "[pulse]") {
  LadderSystem sys = testsys::rb_eit3(2.5e6, 18e6);
  VaporConfig vapor = testsys::doppler_free();

  CHECK_THROWS_AS(simulate_coupler_pulse(sys, vapor, {0.0}, kOd), ConfigError);
  CHECK_THROWS_AS(simulate_coupler_pulse(sys, vapor, {0.0, 0.0}, kOd),
                  ConfigError);

  LadderSystem outside = sys;
  outside.drives[1].envelope = Envelope::rectangle(1e-6, 9e-6);
  CHECK_THROWS_AS(
      simulate_coupler_pulse(outside, vapor, {0.0, 1e-6, 2e-6}, kOd),
      ConfigError);

  LadderSystem rf_sys = testsys::rb_eit4(2.5e6, 18e6, 1e6);
  std::vector<double> times = time_grid(0.0, 1e-6, 11);
  CHECK_THROWS_AS(simulate_rf_pulse(rf_sys, vapor, {0.0}, times, kOd),
                  ConfigError);
  CHECK_THROWS_AS(
      simulate_rf_pulse(rf_sys, vapor, {1e6, 1e6}, times, kOd), ConfigError);
}

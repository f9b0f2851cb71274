#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rydrx/constants.hpp"
#include "rydrx/errors.hpp"

namespace rydrx {

// Angular-momentum series of a Rydberg level. Only the low-L series that carry
// non-negligible quantum defects in the alkalis are enumerated.
enum class Series { S12, P12, P32, D32, D52 };

inline std::string to_string(Series s) {
  switch (s) {
    case Series::S12: return "S1/2";
    case Series::P12: return "P1/2";
    case Series::P32: return "P3/2";
    case Series::D32: return "D3/2";
    case Series::D52: return "D5/2";
  }
  return "?";
}

inline Series parse_series(const std::string& text) {
  if (text == "S1/2") return Series::S12;
  if (text == "P1/2") return Series::P12;
  if (text == "P3/2") return Series::P32;
  if (text == "D3/2") return Series::D32;
  if (text == "D5/2") return Series::D52;
  throw ConfigError("unknown angular-momentum series '" + text +
                    "' (expected one of S1/2, P1/2, P3/2, D3/2, D5/2)");
}

// Rydberg-Ritz coefficients: delta(n) = delta0 + delta2/(n - delta0)^2.
struct QuantumDefect {
  double delta0 = 0.0;
  double delta2 = 0.0;
};

struct RydbergLevel {
  int n = 0;
  Series series = Series::S12;
  double energy = 0.0;  // J, relative to the ionization limit; < 0 for bound states
};

struct TransitionDipole {
  RydbergLevel lower;
  RydbergLevel upper;
  double d_ea0 = 0.0;  // dipole moment in units of e*a0

  double d_si() const { return d_ea0 * constants::e_a0; }  // C*m
};

struct Species {
  std::string name;
  double mass = 0.0;  // kg
  std::string ground_state;
  std::string intermediate_state;
  double probe_wavelength = 0.0;          // m
  double coupler_wavelength = 0.0;        // m
  double intermediate_decay_rate = 0.0;   // rad/s
  std::map<Series, QuantumDefect> quantum_defects;
  std::vector<TransitionDipole> dipoles;  // bundled Rydberg-Rydberg dipole moments

  // Mass-corrected Rydberg constant, 1/m.
  double rydberg_constant() const {
    return constants::rydberg_constant_inf /
           (1.0 + constants::electron_mass / mass);
  }
};

inline double quantum_defect(const Species& species, int n, Series series) {
  auto it = species.quantum_defects.find(series);
  if (it == species.quantum_defects.end()) {
    throw ConfigError("species '" + species.name +
                      "' has no quantum-defect entry for series " +
                      to_string(series));
  }
  const QuantumDefect& qd = it->second;
  double dn = n - qd.delta0;
  return qd.delta0 + qd.delta2 / (dn * dn);
}

// Bound-level energy below the ionization limit: -h*c*R_M / (n - delta(n))^2.
inline double rydberg_energy(const Species& species, int n, Series series) {
  if (n < 5) {
    throw ConfigError("rydberg_energy requires n >= 5, got n = " +
                      std::to_string(n));
  }
  double delta = quantum_defect(species, n, series);
  if (!(delta >= 0.0 && delta < n)) {
    throw ConfigError("quantum defect " + std::to_string(delta) +
                      " out of range [0, n) for n = " + std::to_string(n));
  }
  double n_eff = n - delta;
  double hc_r = constants::h_planck * constants::speed_of_light *
                species.rydberg_constant();
  return -hc_r / (n_eff * n_eff);
}

inline RydbergLevel make_level(const Species& species, int n, Series series) {
  return RydbergLevel{n, series, rydberg_energy(species, n, series)};
}

// |E_A - E_B| / hbar. A zero return marks a degenerate pair; callers that
// cannot drive a zero-frequency transition should test with is_degenerate_pair.
inline double transition_angular_frequency(const RydbergLevel& a,
                                           const RydbergLevel& b) {
  return std::abs(a.energy - b.energy) / constants::hbar;
}

inline bool is_degenerate_pair(const RydbergLevel& a, const RydbergLevel& b) {
  return a.energy == b.energy;
}

// Rabi frequency of an RF field of amplitude e_field (V/m) on a transition
// with dipole moment dipole (C*m): Omega = E*d/hbar.
inline double rf_rabi_from_field(double e_field, double dipole) {
  if (!(dipole > 0.0)) {
    throw ConfigError("dipole moment must be > 0, got " +
                      std::to_string(dipole) + " C*m");
  }
  if (!(e_field >= 0.0)) {
    throw ConfigError("field amplitude must be >= 0, got " +
                      std::to_string(e_field) + " V/m");
  }
  return e_field * dipole / constants::hbar;
}

// Looks up a bundled dipole moment for the (lower, upper) pair in either order.
inline std::optional<TransitionDipole> find_dipole(const Species& species,
                                                   int n_a, Series series_a,
                                                   int n_b, Series series_b) {
  for (const TransitionDipole& td : species.dipoles) {
    bool forward = td.lower.n == n_a && td.lower.series == series_a &&
                   td.upper.n == n_b && td.upper.series == series_b;
    bool reverse = td.lower.n == n_b && td.lower.series == series_b &&
                   td.upper.n == n_a && td.upper.series == series_a;
    if (forward || reverse) return td;
  }
  return std::nullopt;
}

// Built-in species tables. Quantum defects are literature Rydberg-Ritz fits;
// the data files under data/species/ mirror these values and may be edited
// without recompiling.
inline Species rb87() {
  Species s;
  s.name = "Rb87";
  s.mass = 86.909180531 * constants::atomic_mass_unit;
  s.ground_state = "5S1/2";
  s.intermediate_state = "5P3/2";
  s.probe_wavelength = 780.241e-9;
  s.coupler_wavelength = 480.0e-9;
  s.intermediate_decay_rate = constants::two_pi * 6.0666e6;
  s.quantum_defects = {
      {Series::S12, {3.1311804, 0.1784}},
      {Series::P12, {2.6548849, 0.2900}},
      {Series::P32, {2.6416737, 0.2950}},
      {Series::D32, {1.34809171, -0.60286}},
      {Series::D52, {1.34646572, -0.59600}},
  };
  TransitionDipole d47;
  d47.lower = make_level(s, 47, Series::S12);
  d47.upper = make_level(s, 47, Series::P12);
  d47.d_ea0 = 745.0;
  s.dipoles.push_back(d47);
  return s;
}

inline Species cs133() {
  Species s;
  s.name = "Cs133";
  s.mass = 132.905451961 * constants::atomic_mass_unit;
  s.ground_state = "6S1/2";
  s.intermediate_state = "6P3/2";
  s.probe_wavelength = 852.347e-9;
  s.coupler_wavelength = 509.0e-9;
  s.intermediate_decay_rate = constants::two_pi * 5.2227e6;
  s.quantum_defects = {
      {Series::S12, {4.049325, 0.246}},
      {Series::P12, {3.591556, 0.3714}},
      {Series::P32, {3.559058, 0.374}},
      {Series::D32, {2.475365, 0.5554}},
      {Series::D52, {2.466210, 0.067}},
  };
  return s;
}

inline Species species_by_name(const std::string& name) {
  if (name == "Rb87") return rb87();
  if (name == "Cs133") return cs133();
  throw ConfigError("unknown species '" + name +
                    "' (built-in species: Rb87, Cs133)");
}

}  // namespace rydrx

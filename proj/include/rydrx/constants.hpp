#pragma once

// Single source of truth for physical constants. Tests pin these exact values;
// change nothing here without updating the oracle tests.

namespace rydrx::constants {

// Planck constant, J*s. 6-digit value used consistently throughout; hbar derives from it.
inline constexpr double h_planck = 6.62606e-34;
inline constexpr double two_pi = 6.283185307179586476925286766559;
inline constexpr double hbar = h_planck / two_pi;

// SI exact values (2019 redefinition).
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double boltzmann = 1.380649e-23;             // J/K
inline constexpr double speed_of_light = 299792458.0;         // m/s

// CODATA 2018.
inline constexpr double bohr_radius = 5.29177210903e-11;      // m
inline constexpr double rydberg_constant_inf = 10973731.568160;  // 1/m
inline constexpr double electron_mass = 9.1093837015e-31;     // kg
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg

// Atomic dipole unit e*a0, C*m.
inline constexpr double e_a0 = elementary_charge * bohr_radius;

}  // namespace rydrx::constants

#pragma once

#include <string>
#include <vector>

#include "rydrx/envelope.hpp"
#include "rydrx/errors.hpp"

namespace rydrx {

// Role of a drive for Doppler bookkeeping: optical drives pick up velocity
// shifts (probe against the atom's motion, coupler with or against it
// depending on geometry); RF wavelengths dwarf the cell, so RF drives do not.
enum class DriveRole { Probe, Coupler, Rf };

inline std::string to_string(DriveRole r) {
  switch (r) {
    case DriveRole::Probe: return "probe";
    case DriveRole::Coupler: return "coupler";
    case DriveRole::Rf: return "rf";
  }
  return "?";
}

struct Level {
  std::string label;
  double dephasing = 0.0;  // rad/s; collapse operator sqrt(gamma)|i><i|
};

struct DecayChannel {
  int from = 0;  // upper level index
  int to = 0;    // lower level index
  double rate = 0.0;  // rad/s population decay from -> to
};

struct DriveField {
  std::string label;
  int lower = 0;           // level pair in ladder order, lower < upper
  int upper = 0;
  double rabi = 0.0;       // rad/s, peak Rabi frequency, >= 0
  double detuning = 0.0;   // rad/s
  double phase = 0.0;      // rad
  DriveRole role = DriveRole::Rf;
  Envelope envelope = Envelope::constant(1.0);
};

// A driven, dissipative N-level system. Levels are listed in ladder order;
// drives form a graph over level pairs that must admit a consistent rotating
// frame (checked when the Hamiltonian is built).
struct LadderSystem {
  std::vector<Level> levels;
  std::vector<DecayChannel> decays;
  std::vector<DriveField> drives;

  int size() const { return static_cast<int>(levels.size()); }

  int optical_drive_count() const {
    int n = 0;
    for (const DriveField& d : drives)
      if (d.role != DriveRole::Rf) ++n;
    return n;
  }

  bool has_decay() const {
    for (const DecayChannel& c : decays)
      if (c.rate > 0.0) return true;
    return false;
  }

  void validate() const {
    int n = size();
    if (n < 2) throw ModelError("system needs at least two levels");
    for (const Level& lv : levels) {
      if (lv.dephasing < 0.0)
        throw ModelError("negative dephasing on level '" + lv.label + "'");
    }
    for (const DecayChannel& c : decays) {
      if (c.from < 0 || c.from >= n || c.to < 0 || c.to >= n)
        throw ModelError("decay channel level index out of range");
      if (c.from <= c.to)
        throw ModelError("decay must go from an upper to a lower level");
      if (c.rate < 0.0) throw ModelError("negative decay rate");
    }
    for (std::size_t i = 0; i < drives.size(); ++i) {
      const DriveField& d = drives[i];
      if (d.lower < 0 || d.lower >= n || d.upper < 0 || d.upper >= n)
        throw ModelError("drive '" + d.label + "' level index out of range");
      if (d.lower >= d.upper)
        throw ModelError("drive '" + d.label +
                         "' must couple lower < upper in ladder order");
      if (d.rabi < 0.0)
        throw ModelError("drive '" + d.label + "' has negative Rabi frequency");
      for (std::size_t j = 0; j < i; ++j) {
        if (drives[j].lower == d.lower && drives[j].upper == d.upper)
          throw ModelError("level pair (" + std::to_string(d.lower) + ", " +
                           std::to_string(d.upper) +
                           ") carries more than one drive");
      }
    }
  }
};

// Requires every drive to couple nearest neighbours in ladder order, the shape
// all chain builders produce. Spectroscopy and pulse maps only accept chains.
inline void require_chain(const LadderSystem& sys) {
  sys.validate();
  for (const DriveField& d : sys.drives) {
    if (d.upper != d.lower + 1)
      throw ModelError("drive '" + d.label + "' couples non-adjacent levels " +
                       std::to_string(d.lower) + " and " +
                       std::to_string(d.upper) + "; expected a chain");
  }
}

struct ThreeLevelParams {
  double probe_rabi = 0.0;
  double probe_detuning = 0.0;
  double coupler_rabi = 0.0;
  double coupler_detuning = 0.0;
  double intermediate_decay = 0.0;       // e -> g
  double rydberg_decay = 0.0;            // r -> g
  double intermediate_dephasing = 0.0;
  double rydberg_dephasing = 0.0;        // EIT linewidth floor
};

// g -- probe -- e -- coupler -- r ladder.
inline LadderSystem three_level(const ThreeLevelParams& p) {
  LadderSystem sys;
  sys.levels = {{"g", 0.0},
                {"e", p.intermediate_dephasing},
                {"r", p.rydberg_dephasing}};
  sys.decays = {{1, 0, p.intermediate_decay}, {2, 0, p.rydberg_decay}};
  DriveField probe{"probe", 0, 1, p.probe_rabi, p.probe_detuning, 0.0,
                   DriveRole::Probe, Envelope::constant(1.0)};
  DriveField coupler{"coupler", 1, 2, p.coupler_rabi, p.coupler_detuning, 0.0,
                     DriveRole::Coupler, Envelope::constant(1.0)};
  sys.drives = {probe, coupler};
  sys.validate();
  return sys;
}

struct FourLevelParams {
  ThreeLevelParams base;
  double rf_rabi = 0.0;
  double rf_detuning = 0.0;
  double rf_phase = 0.0;
  double second_rydberg_decay = 0.0;      // r' -> g
  double second_rydberg_dephasing = 0.0;
};

// g -- probe -- e -- coupler -- r -- RF -- r' ladder (RF-dressed EIT).
inline LadderSystem four_level(const FourLevelParams& p) {
  LadderSystem sys = three_level(p.base);
  sys.levels.push_back({"r'", p.second_rydberg_dephasing});
  sys.decays.push_back({3, 0, p.second_rydberg_decay});
  DriveField rf{"rf", 2, 3, p.rf_rabi, p.rf_detuning, p.rf_phase,
                DriveRole::Rf, Envelope::constant(1.0)};
  sys.drives.push_back(rf);
  sys.validate();
  return sys;
}

}  // namespace rydrx

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "rydrx/atomic_data.hpp"
#include "rydrx/constants.hpp"
#include "rydrx/errors.hpp"
#include "rydrx/ladder.hpp"

namespace rydrx {

// Velocity-average quadrature. Gauss-Hermite is exact for smooth integrands
// but its nodes thin out near v = 0 (spacing ~66 m/s at room temperature for
// N = 64); narrow EIT velocity features a few m/s wide fall between nodes and
// alias into spurious structure. The uniform midpoint rule with Gaussian
// weights resolves such features at sufficient N and is what vapor scans use.
enum class VelocityQuadrature { GaussHermite, Uniform };

struct VaporConfig {
  double temperature = 294.0;        // K
  double mass = 0.0;                 // kg
  bool counter_propagating = true;   // coupler against the probe
  double k_probe = 0.0;              // rad/m
  double k_coupler = 0.0;            // rad/m
  int n_classes = 64;
  double span_sigmas = 4.2;          // uniform-grid half width, in thermal sigmas
  VelocityQuadrature quadrature = VelocityQuadrature::GaussHermite;

  // 1-D thermal velocity spread sqrt(kB T / m).
  double thermal_sigma() const {
    return std::sqrt(constants::boltzmann * temperature / mass);
  }

  void validate() const {
    if (!(temperature > 0.0)) throw ConfigError("vapor temperature must be > 0");
    if (!(mass > 0.0)) throw ConfigError("vapor species mass must be > 0");
    if (!(k_probe >= 0.0) || !(k_coupler >= 0.0))
      throw ConfigError("wavevectors must be >= 0");
    if (n_classes != 1 && n_classes < 3)
      throw ConfigError("velocity grid needs N = 1 (single class) or N >= 3");
    if (!(span_sigmas > 0.0)) throw ConfigError("grid span must be > 0 sigmas");
  }
};

struct VelocityClass {
  double velocity = 0.0;  // m/s
  double weight = 0.0;    // probability weight; grid weights sum to 1
};

inline VaporConfig make_vapor(const Species& species, double temperature,
                              int n_classes, VelocityQuadrature quadrature,
                              bool counter_propagating = true) {
  VaporConfig cfg;
  cfg.temperature = temperature;
  cfg.mass = species.mass;
  cfg.counter_propagating = counter_propagating;
  cfg.k_probe = constants::two_pi / species.probe_wavelength;
  cfg.k_coupler = constants::two_pi / species.coupler_wavelength;
  cfg.n_classes = n_classes;
  cfg.quadrature = quadrature;
  cfg.validate();
  return cfg;
}

namespace detail {

// Gauss-Hermite nodes/weights for weight exp(-x^2) via the Jacobi matrix
// (Golub-Welsch): eigenvalues are the abscissas, the squared first eigenvector
// components the weights over sqrt(pi).
inline void gauss_hermite(int n, std::vector<double>& x,
                          std::vector<double>& w) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double b = std::sqrt(0.5 * k);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    w[i] = v0 * v0;  // already normalized: sum_i w_i = 1
  }
}

}  // namespace detail

inline std::vector<VelocityClass> velocity_grid(const VaporConfig& cfg) {
  cfg.validate();
  if (cfg.n_classes == 1) return {{0.0, 1.0}};
  double sigma = cfg.thermal_sigma();
  std::vector<VelocityClass> grid(static_cast<std::size_t>(cfg.n_classes));

  if (cfg.quadrature == VelocityQuadrature::GaussHermite) {
    std::vector<double> x, w;
    detail::gauss_hermite(cfg.n_classes, x, w);
    double scale = std::sqrt(2.0) * sigma;
    for (int i = 0; i < cfg.n_classes; ++i)
      grid[static_cast<std::size_t>(i)] = {scale * x[static_cast<std::size_t>(i)],
                                           w[static_cast<std::size_t>(i)]};
  } else {
    double half = cfg.span_sigmas * sigma;
    double dv = 2.0 * half / cfg.n_classes;
    double total = 0.0;
    for (int i = 0; i < cfg.n_classes; ++i) {
      double v = -half + (i + 0.5) * dv;
      double w = std::exp(-0.5 * v * v / (sigma * sigma));
      grid[static_cast<std::size_t>(i)] = {v, w};
      total += w;
    }
    for (VelocityClass& c : grid) c.weight /= total;
  }

  // Guard the normalization regardless of path.
  double sum = 0.0;
  for (const VelocityClass& c : grid) sum += c.weight;
  for (VelocityClass& c : grid) c.weight /= sum;
  return grid;
}

// Detuning offsets for the optical drives of `sys`, ordered like those drives
// appear in sys.drives. The probe runs against the atom's velocity (-k_p v);
// a counter-propagating coupler runs with it (+k_c v), a co-propagating one
// against it. RF drives see no Doppler shift (wavelength >> cell) and receive
// no entry.
inline std::vector<double> doppler_offsets(double velocity,
                                           const VaporConfig& cfg,
                                           const LadderSystem& sys) {
  std::vector<double> offsets;
  offsets.reserve(static_cast<std::size_t>(sys.optical_drive_count()));
  for (const DriveField& d : sys.drives) {
    switch (d.role) {
      case DriveRole::Probe:
        offsets.push_back(-cfg.k_probe * velocity);
        break;
      case DriveRole::Coupler:
        offsets.push_back((cfg.counter_propagating ? 1.0 : -1.0) *
                          cfg.k_coupler * velocity);
        break;
      case DriveRole::Rf:
        break;
    }
  }
  return offsets;
}

// Weighted sum of per-class observable values over the velocity grid,
// accumulated in grid order for reproducibility.
inline double averaged_observable(const std::vector<double>& values,
                                  const std::vector<VelocityClass>& grid) {
  if (values.size() != grid.size())
    throw ConfigError("observable count " + std::to_string(values.size()) +
                      " does not match velocity-class count " +
                      std::to_string(grid.size()));
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    acc += grid[i].weight * values[i];
  return acc;
}

}  // namespace rydrx

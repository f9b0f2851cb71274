#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "rydrx/density_matrix.hpp"
#include "rydrx/errors.hpp"
#include "rydrx/ladder.hpp"

namespace rydrx {

namespace detail {

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a,
                             const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Effective per-drive detunings: drive detuning plus the velocity-class offset
// for optical drives. `optical_offsets` is ordered like the optical drives
// within sys.drives; empty means zero offsets.
inline std::vector<double> effective_detunings(
    const LadderSystem& sys, const std::vector<double>& optical_offsets) {
  if (!optical_offsets.empty() &&
      static_cast<int>(optical_offsets.size()) != sys.optical_drive_count()) {
    throw ConfigError("offsets length " +
                      std::to_string(optical_offsets.size()) +
                      " does not match optical drive count " +
                      std::to_string(sys.optical_drive_count()));
  }
  std::vector<double> eff(sys.drives.size());
  std::size_t next_optical = 0;
  for (std::size_t d = 0; d < sys.drives.size(); ++d) {
    eff[d] = sys.drives[d].detuning;
    if (sys.drives[d].role != DriveRole::Rf && !optical_offsets.empty())
      eff[d] += optical_offsets[next_optical++];
  }
  return eff;
}

}  // namespace detail

// Level frame offsets theta_i for the rotating frame implied by the drive
// graph: walking drive (l, u) adds its effective detuning, theta_u = theta_l +
// delta. Levels the drives cannot reach sit at 0. A drive closing a loop must
// agree with the frame already assigned, i.e. the drive frequencies around
// every loop must be consistent; otherwise no time-independent rotating frame
// exists and the system is rejected.
inline std::vector<double> rotating_frame(
    const LadderSystem& sys, const std::vector<double>& effective_detunings) {
  int n = sys.size();
  std::vector<double> frame(n, 0.0);
  std::vector<bool> seen(n, false);
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (drive idx, other)
  for (std::size_t d = 0; d < sys.drives.size(); ++d) {
    adj[sys.drives[d].lower].push_back({static_cast<int>(d), sys.drives[d].upper});
    adj[sys.drives[d].upper].push_back({static_cast<int>(d), sys.drives[d].lower});
  }
  double scale = 0.0;
  for (double e : effective_detunings) scale = std::max(scale, std::abs(e));
  double tol = std::max(1e-6, 1e-12 * scale);

  for (int root = 0; root < n; ++root) {
    if (seen[root]) continue;
    seen[root] = true;
    frame[root] = 0.0;
    std::vector<int> queue{root};
    while (!queue.empty()) {
      int i = queue.back();
      queue.pop_back();
      for (auto [d, j] : adj[i]) {
        double step = effective_detunings[static_cast<std::size_t>(d)];
        double theta =
            (i == sys.drives[static_cast<std::size_t>(d)].lower)
                ? frame[i] + step
                : frame[i] - step;
        if (!seen[j]) {
          seen[j] = true;
          frame[j] = theta;
          queue.push_back(j);
        } else if (std::abs(frame[j] - theta) > tol) {
          throw ModelError(
              "drive '" + sys.drives[static_cast<std::size_t>(d)].label +
              "' closes a loop whose frequencies are inconsistent by " +
              std::to_string(std::abs(frame[j] - theta)) +
              " rad/s; no rotating frame exists");
        }
      }
    }
  }
  return frame;
}

// Rotating-wave Hamiltonian in rad/s with explicit per-drive envelope values.
inline Eigen::MatrixXcd build_hamiltonian_scaled(
    const LadderSystem& sys, const std::vector<double>& optical_offsets,
    const std::vector<double>& envelope_values) {
  sys.validate();
  if (envelope_values.size() != sys.drives.size())
    throw ConfigError("envelope value count does not match drive count");
  std::vector<double> eff = detail::effective_detunings(sys, optical_offsets);
  std::vector<double> frame = rotating_frame(sys, eff);
  int n = sys.size();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) h(i, i) = -frame[static_cast<std::size_t>(i)];
  for (std::size_t d = 0; d < sys.drives.size(); ++d) {
    const DriveField& dr = sys.drives[d];
    std::complex<double> half =
        0.5 * dr.rabi * envelope_values[d] *
        std::exp(std::complex<double>(0.0, dr.phase));
    h(dr.lower, dr.upper) += half;
    h(dr.upper, dr.lower) += std::conj(half);
  }
  return h;
}

// Hamiltonian with envelopes sampled at time t.
inline Eigen::MatrixXcd build_hamiltonian(
    const LadderSystem& sys, const std::vector<double>& optical_offsets,
    double t = 0.0) {
  std::vector<double> env(sys.drives.size());
  for (std::size_t d = 0; d < sys.drives.size(); ++d)
    env[d] = sys.drives[d].envelope(t);
  return build_hamiltonian_scaled(sys, optical_offsets, env);
}

// Collapse operators: sqrt(Gamma)|to><from| per decay channel and
// sqrt(gamma)|i><i| per dephasing rate.
inline std::vector<Eigen::MatrixXcd> collapse_operators(
    const LadderSystem& sys) {
  int n = sys.size();
  std::vector<Eigen::MatrixXcd> ops;
  for (const DecayChannel& c : sys.decays) {
    if (c.rate <= 0.0) continue;
    Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(n, n);
    op(c.to, c.from) = std::sqrt(c.rate);
    ops.push_back(op);
  }
  for (int i = 0; i < n; ++i) {
    double g = sys.levels[static_cast<std::size_t>(i)].dephasing;
    if (g <= 0.0) continue;
    Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(n, n);
    op(i, i) = std::sqrt(g);
    ops.push_back(op);
  }
  return ops;
}

// Lindblad generator acting on column-stacked vec(rho):
//   L = -i(I (x) H - H^T (x) I) + sum_k [ conj(C) (x) C - (1/2)(I (x) C^dag C + (C^dag C)^T (x) I) ].
inline Eigen::MatrixXcd liouvillian(
    const Eigen::MatrixXcd& h, const std::vector<Eigen::MatrixXcd>& collapse) {
  const Eigen::Index n = h.rows();
  Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
  const std::complex<double> im(0.0, 1.0);
  Eigen::MatrixXcd lv =
      -im * (detail::kron(eye, h) - detail::kron(h.transpose(), eye));
  for (const Eigen::MatrixXcd& c : collapse) {
    Eigen::MatrixXcd cdc = c.adjoint() * c;
    lv += detail::kron(c.conjugate(), c) -
          0.5 * (detail::kron(eye, cdc) + detail::kron(cdc.transpose(), eye));
  }
  return lv;
}

inline Eigen::MatrixXcd liouvillian(const LadderSystem& sys,
                                    const std::vector<double>& optical_offsets,
                                    double t = 0.0) {
  return liouvillian(build_hamiltonian(sys, optical_offsets, t),
                     collapse_operators(sys));
}

// Solves L(rho) = 0 with the trace constraint replacing the first row of the
// vectorized generator. Envelopes are sampled at `t` (defaults to the start of
// time, matching how pulse simulations seed their initial state).
inline DensityMatrix steady_state(const LadderSystem& sys,
                                  const std::vector<double>& optical_offsets = {},
                                  double t = 0.0) {
  sys.validate();
  if (!sys.has_decay())
    throw NumericError(
        "steady state undefined: system has no decay channel, Liouvillian is "
        "degenerate");
  Eigen::MatrixXcd lv = liouvillian(sys, optical_offsets, t);
  const Eigen::Index n = sys.size();
  const Eigen::Index n2 = n * n;
  Eigen::MatrixXcd a = lv;
  a.row(0).setZero();
  for (Eigen::Index j = 0; j < n; ++j) a(0, j * n + j) = 1.0;
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n2);
  b(0) = 1.0;
  Eigen::VectorXcd x = a.partialPivLu().solve(b);

  double residual = (lv * x).norm();
  double bound = 1e-10 * lv.norm();
  if (!std::isfinite(residual) || residual > bound)
    throw NumericError("steady-state solve did not converge: ||L rho|| = " +
                       std::to_string(residual) +
                       " exceeds bound; Liouvillian singular or degenerate");

  Eigen::Map<const DensityMatrix> rho_map(x.data(), n, n);
  DensityMatrix rho = 0.5 * (rho_map + rho_map.adjoint().eval());
  rho /= rho.trace().real();
  return rho;
}

struct EvolveOptions {
  double rtol = 1e-8;
  double atol = 1e-12;
  bool force_adaptive = false;  // skip the matrix-exponential fast path
  long max_steps = 20'000'000;
};

namespace detail {

// Lindblad generator decomposed as L(t) = L_static + sum_d s_d(t) * L_drive[d],
// exact because the Hamiltonian is affine in each envelope value.
struct GeneratorBasis {
  Eigen::MatrixXcd l_static;
  std::vector<Eigen::MatrixXcd> l_drive;

  Eigen::MatrixXcd at(const std::vector<double>& env) const {
    Eigen::MatrixXcd lv = l_static;
    for (std::size_t d = 0; d < l_drive.size(); ++d)
      if (env[d] != 0.0) lv += env[d] * l_drive[d];
    return lv;
  }
};

inline GeneratorBasis make_generator_basis(
    const LadderSystem& sys, const std::vector<double>& optical_offsets) {
  GeneratorBasis basis;
  std::vector<double> zeros(sys.drives.size(), 0.0);
  basis.l_static = liouvillian(
      build_hamiltonian_scaled(sys, optical_offsets, zeros),
      collapse_operators(sys));
  int n = sys.size();
  Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
  const std::complex<double> im(0.0, 1.0);
  for (const DriveField& dr : sys.drives) {
    Eigen::MatrixXcd hd = Eigen::MatrixXcd::Zero(n, n);
    std::complex<double> half =
        0.5 * dr.rabi * std::exp(std::complex<double>(0.0, dr.phase));
    hd(dr.lower, dr.upper) = half;
    hd(dr.upper, dr.lower) = std::conj(half);
    basis.l_drive.push_back(
        -im * (kron(eye, hd) - kron(hd.transpose(), eye)));
  }
  return basis;
}

// One adaptive Dormand-Prince 5(4) sweep of y' = L(t) y across [t0, t1].
inline void dopri5(const std::function<Eigen::MatrixXcd(double)>& gen,
                   Eigen::VectorXcd& y, double t0, double t1,
                   const EvolveOptions& opts, long& steps) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                          e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  double span = t1 - t0;
  if (span <= 0.0) return;
  double t = t0;
  Eigen::VectorXcd k1 = gen(t0) * y;
  double dt = span;
  {
    double ynorm = y.norm();
    double fnorm = k1.norm();
    if (fnorm > 0.0) dt = std::min(span, 0.01 * std::max(ynorm, 1.0) / fnorm);
  }
  bool k1_fresh = true;
  while (t < t1) {
    if (++steps > opts.max_steps)
      throw NumericError("time integration exceeded step budget at t = " +
                         std::to_string(t) + " s");
    dt = std::min(dt, t1 - t);
    double floor_dt = 16.0 * std::numeric_limits<double>::epsilon() *
                      std::max({std::abs(t), std::abs(t1), 1e-12});
    if (dt < floor_dt)
      throw NumericError("time step underflow at t = " + std::to_string(t) +
                         " s");
    if (!k1_fresh) k1 = gen(t) * y;
    Eigen::VectorXcd k2 = gen(t + c2 * dt) * (y + dt * (a21 * k1));
    Eigen::VectorXcd k3 = gen(t + c3 * dt) * (y + dt * (a31 * k1 + a32 * k2));
    Eigen::VectorXcd k4 =
        gen(t + c4 * dt) * (y + dt * (a41 * k1 + a42 * k2 + a43 * k3));
    Eigen::VectorXcd k5 = gen(t + c5 * dt) *
                          (y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Eigen::VectorXcd k6 =
        gen(t + dt) *
        (y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Eigen::VectorXcd ynew =
        y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Eigen::VectorXcd k7 = gen(t + dt) * ynew;
    Eigen::VectorXcd errv =
        dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      double sc = opts.atol + opts.rtol * std::max(std::abs(y(i)),
                                                   std::abs(ynew(i)));
      double r = std::abs(errv(i)) / sc;
      err += r * r;
    }
    err = std::sqrt(err / static_cast<double>(y.size()));

    if (err <= 1.0) {
      t += dt;
      y = std::move(ynew);
      k1 = std::move(k7);
      k1_fresh = true;
    } else {
      k1_fresh = true;  // k1 still valid: t and y unchanged
    }
    double factor = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
    dt *= std::clamp(factor, 0.2, 5.0);
  }
}

}  // namespace detail

// Evolves rho through `times` (ascending; times.front() is the initial time),
// invoking record(k, rho_k) at every grid point. Envelope breakpoints are
// hard step boundaries. Piecewise-constant stretches advance by cached matrix
// exponentials; ramps fall back to adaptive Dormand-Prince 5(4).
inline void evolve_record(
    const LadderSystem& sys, const std::vector<double>& optical_offsets,
    const DensityMatrix& rho0, const std::vector<double>& times,
    const EvolveOptions& opts,
    const std::function<void(std::size_t, const DensityMatrix&)>& record) {
  sys.validate();
  if (times.empty()) throw ConfigError("evolve needs a non-empty time grid");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] >= times[k - 1]))
      throw ConfigError("evolve time grid must be ascending");
  if (rho0.rows() != sys.size() || rho0.cols() != sys.size())
    throw ConfigError("initial state dimension does not match system");

  detail::GeneratorBasis basis =
      detail::make_generator_basis(sys, optical_offsets);
  const Eigen::Index n = sys.size();

  // All envelope breakpoints, to be forced as step boundaries.
  std::vector<double> cuts;
  for (const DriveField& d : sys.drives)
    for (double bp : d.envelope.breakpoints()) cuts.push_back(bp);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto env_at = [&sys](double t) {
    std::vector<double> env(sys.drives.size());
    for (std::size_t d = 0; d < sys.drives.size(); ++d)
      env[d] = sys.drives[d].envelope(t);
    return env;
  };
  auto env_left_limit = [&sys](double t) {
    std::vector<double> env(sys.drives.size());
    for (std::size_t d = 0; d < sys.drives.size(); ++d)
      env[d] = sys.drives[d].envelope.left_limit(t);
    return env;
  };

  // Propagator cache: per distinct envelope signature, one generator and the
  // matrix exponentials of the step sizes seen with it.
  struct CacheEntry {
    std::vector<double> signature;
    Eigen::MatrixXcd generator;
    std::map<double, Eigen::MatrixXcd> propagators;
  };
  std::vector<CacheEntry> cache;
  auto propagator = [&](const std::vector<double>& sig, double dt)
      -> const Eigen::MatrixXcd& {
    for (CacheEntry& e : cache) {
      if (e.signature == sig) {
        auto it = e.propagators.find(dt);
        if (it == e.propagators.end())
          it = e.propagators.emplace(dt, (e.generator * dt).exp()).first;
        return it->second;
      }
    }
    cache.push_back({sig, basis.at(sig), {}});
    return cache.back()
        .propagators.emplace(dt, (cache.back().generator * dt).exp())
        .first->second;
  };

  Eigen::VectorXcd y = Eigen::Map<const Eigen::VectorXcd>(rho0.data(), n * n);
  long steps = 0;
  record(0, rho0);

  for (std::size_t k = 1; k < times.size(); ++k) {
    double a = times[k - 1];
    double b = times[k];
    std::vector<double> bounds{a};
    for (double c : cuts)
      if (c > a && c < b) bounds.push_back(c);
    bounds.push_back(b);

    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
      double u = bounds[s];
      double v = bounds[s + 1];
      if (v <= u) continue;
      bool constant = !opts.force_adaptive;
      if (constant)
        for (const DriveField& d : sys.drives)
          constant = constant && d.envelope.is_constant_on(u, v);
      if (constant) {
        y = propagator(env_at(0.5 * (u + v)), v - u) * y;
      } else {
        auto gen = [&](double t) {
          return basis.at(t >= v ? env_left_limit(v) : env_at(t));
        };
        detail::dopri5(gen, y, u, v, opts, steps);
      }
    }
    Eigen::Map<const DensityMatrix> rho_map(y.data(), n, n);
    record(k, rho_map);
  }
}

inline std::vector<DensityMatrix> evolve(
    const LadderSystem& sys, const std::vector<double>& optical_offsets,
    const DensityMatrix& rho0, const std::vector<double>& times,
    const EvolveOptions& opts = {}) {
  std::vector<DensityMatrix> out(times.size());
  evolve_record(sys, optical_offsets, rho0, times, opts,
                [&out](std::size_t k, const DensityMatrix& rho) {
                  out[k] = rho;
                });
  return out;
}

// Memory-light variant: stores observable(rho) per grid point.
inline std::vector<double> evolve_observable(
    const LadderSystem& sys, const std::vector<double>& optical_offsets,
    const DensityMatrix& rho0, const std::vector<double>& times,
    const std::function<double(const DensityMatrix&)>& observable,
    const EvolveOptions& opts = {}) {
  std::vector<double> out(times.size());
  evolve_record(sys, optical_offsets, rho0, times, opts,
                [&](std::size_t k, const DensityMatrix& rho) {
                  out[k] = observable(rho);
                });
  return out;
}

}  // namespace rydrx

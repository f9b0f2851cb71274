#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>

#include "rydrx/errors.hpp"

namespace rydrx {

using DensityMatrix = Eigen::MatrixXcd;

inline DensityMatrix pure_state(int dim, int level) {
  DensityMatrix rho = DensityMatrix::Zero(dim, dim);
  rho(level, level) = 1.0;
  return rho;
}

inline DensityMatrix ground_state(int dim) { return pure_state(dim, 0); }

inline double trace_error(const DensityMatrix& rho) {
  return std::abs(rho.trace() - std::complex<double>(1.0, 0.0));
}

inline double hermiticity_error(const DensityMatrix& rho) {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

inline double min_eigenvalue(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<DensityMatrix> es(
      0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Physical-state gate: trace 1, Hermitian, no eigenvalue materially below 0.
inline void check_density_matrix(const DensityMatrix& rho,
                                 double trace_tol = 1e-9,
                                 double herm_tol = 1e-12,
                                 double eigen_floor = -1e-9) {
  if (rho.rows() != rho.cols())
    throw NumericError("density matrix is not square");
  double te = trace_error(rho);
  if (!(te <= trace_tol))
    throw NumericError("density-matrix trace off by " + std::to_string(te));
  double he = hermiticity_error(rho);
  if (!(he <= herm_tol))
    throw NumericError("density matrix non-Hermitian by " + std::to_string(he));
  double lam = min_eigenvalue(rho);
  if (!(lam >= eigen_floor))
    throw NumericError("density matrix has negative eigenvalue " +
                       std::to_string(lam));
}

}  // namespace rydrx

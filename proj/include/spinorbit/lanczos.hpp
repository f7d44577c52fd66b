#pragma once

#include <Eigen/Dense>
#include <functional>

namespace spinorbit {

/// Applies a Hermitian operator to a block of column vectors.
using BlockOperator = std::function<Eigen::MatrixXcd(const Eigen::MatrixXcd&)>;

struct LanczosConfig {
  int block_size = 4;
  int max_basis = 96;         // basis size at which the iteration restarts
  int max_restarts = 60;
  double tol = 1e-10;         // relative Ritz residual ||Op y - theta y|| / |theta|
  unsigned seed = 12345;
};

struct LanczosResult {
  Eigen::VectorXd theta;      // wanted Ritz values, descending
  Eigen::MatrixXcd vectors;   // matching Ritz vectors (orthonormal columns)
  Eigen::VectorXd residuals;  // ||Op y - theta y||
  int operator_applications = 0;
  bool converged = false;
};

/// Thick-restart block Lanczos for the `wanted` algebraically largest
/// eigenvalues of a Hermitian operator (used on shifted inverses, where the
/// largest values are the eigenvalues nearest the shift). Full
/// reorthogonalisation; the projected matrix is formed explicitly, so kept Ritz
/// vectors and fresh Krylov blocks are handled uniformly after a restart.
/// Returns with converged = false when the restart budget is exhausted.
LanczosResult block_lanczos_largest(const BlockOperator& op, Eigen::Index dim, int wanted,
                                    const LanczosConfig& config = {});

}  // namespace spinorbit

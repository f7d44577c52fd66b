#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "spinorbit/dispersion.hpp"
#include "spinorbit/lanczos.hpp"
#include "spinorbit/potential.hpp"
#include "spinorbit/variational.hpp"

namespace spinorbit {

using SparseMatrixC = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;

struct DiscretizationConfig {
  double box_width = 40.0;  // Dirichlet box [-L/2, L/2]^2
  int grid_points = 256;    // interior points per axis, spacing L / (n + 1)
  double resid_tol = 1e-8;  // ||(H_h - E) psi|| / ||psi|| for every reported pair
  /// Eigenvalues are counted below kappa_h - margin; a negative value selects
  /// the default 1e-8 + resid_tol.
  double margin = -1.0;
  int initial_count = 8;    // eigenvalues requested first; doubled until the window closes
  int max_count = 64;
  bool doubling_check = true;  // repeat on the n/2 grid and record the drift
  double drift_tol = 1e-3;
  LanczosConfig lanczos;
};

/// The 2n^2 x 2n^2 Hermitian finite-difference operator: 5-point Laplacian on
/// each spin component, centred first differences for the linear coupling,
/// the potential sampled at the nodes. Index = spin * n^2 + iy * n + ix.
struct GridOperator {
  SparseMatrixC matrix;
  int n = 0;
  double box_width = 0.0;
  double h = 0.0;
  double min_potential = 0.0;
  double tail_mass = 0.0;  // \int |V| outside the box (bound)
  double symbol_min = 0.0; // infimum of the discrete free symbol (below the free spectrum)
};

/// Throws UnsupportedCoupling for custom or tabulated symbols, Config for n < 64.
GridOperator build_hamiltonian(const Coupling& coupling, const Potential& potential,
                               const DiscretizationConfig& config);

/// Infimum over the Brillouin zone of |4/h^2 (sin^2(k_x h/2) + sin^2(k_y h/2))
/// - |c_x sin(k_x h) + c_y sin(k_y h)| / h|, a lower bound for the free part.
double discrete_symbol_min(const Coupling& coupling, double h);

struct EigenPairs {
  std::vector<double> values;     // ascending
  std::vector<double> residuals;  // ||(H - E) psi||, psi normalised
  Eigen::MatrixXcd vectors;
  bool converged = false;
  int factorizations = 0;
  int operator_applications = 0;
};

/// The `count` lowest eigenvalues of op by shift-invert block Lanczos. `sigma`
/// must lie below the spectrum (H - sigma is factorised by Cholesky; it is
/// lowered automatically if the factorisation is not positive definite).
/// With `estimate_only` the Lanczos tolerance is loose and residuals are not
/// enforced (used to place a better shift).
EigenPairs lowest_eigenpairs(const GridOperator& op, double sigma, int count, const DiscretizationConfig& config,
                             bool estimate_only = false);

struct OracleSpectrum {
  double kappa = 0.0;    // continuum threshold of the continuous problem
  double kappa_h = 0.0;  // lowest eigenvalue of the V = 0 operator on the same grid
  double margin = 0.0;
  int n = 0;
  double box_width = 0.0;
  double tail_mass = 0.0;
  std::vector<double> eigenvalues;  // all eigenvalues < kappa_h - margin, ascending, with multiplicity
  std::vector<double> residuals;
  std::vector<int> level_multiplicities;  // eigenvalues grouped into distinct levels
  int count = 0;                          // eigenvalues below kappa_h - margin
  int level_count = 0;                    // distinct levels (Kramers doublets count once)
  double first_above = 0.0;               // the next eigenvalue, which closes the window
  bool complete = false;                  // first_above >= kappa_h - margin was resolved
  bool converged = true;                  // residuals met resid_tol and the grid check agreed
  bool grid_checked = false;
  int coarse_count = -1;                  // count on the n/2 grid
  double drift = 0.0;                     // max |(E_n - kappa_h) - coarse counterpart|
  std::string note;
};

/// Eigenvalues of `op` below kappa_h - margin with residual certificates.
/// Throws EigensolverStall if the iteration budget is exhausted.
OracleSpectrum eigen_below_kappa(const GridOperator& op, double kappa_h, double kappa,
                                 const DiscretizationConfig& config);

/// Lowest eigenvalue of the potential-free operator on the grid of `op`.
double grid_threshold(const Coupling& coupling, const DiscretizationConfig& config);

/// Full pipeline: grid threshold, eigenvalues, optional n/2 drift check.
OracleSpectrum solve_oracle(const Coupling& coupling, const Potential& potential, double kappa,
                            const DiscretizationConfig& config);

struct ValidationRow {
  int n = 0;  // 1-based level index
  double nu_minus_kappa = 0.0;
  double oracle_minus_kappa_h = 0.0;  // NaN when the oracle has fewer eigenvalues
  double allowance = 0.0;
  bool ok = false;
};

struct BoundValidation {
  bool pass = true;
  double tol_oracle = 0.0;
  std::vector<ValidationRow> rows;
  std::string message;
};

/// Pass iff for every certified nu_n the oracle has at least n eigenvalues
/// below its threshold and E_n - kappa_h <= nu_n - kappa + tol_oracle + drift.
BoundValidation validate_bounds(const OracleSpectrum& oracle, const BoundReport& report, double tol_oracle = 1e-6);

}  // namespace spinorbit

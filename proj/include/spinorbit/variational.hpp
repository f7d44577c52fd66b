#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "spinorbit/dispersion.hpp"
#include "spinorbit/potential.hpp"

namespace spinorbit {

/// Trial spinors Phi_m(x) = e^{i p_m.x} f_a(|x|) chi_m with chi_m the lower-band
/// eigenvector of the free symbol at the anchor p_m in S.
struct TrialFamily {
  double a = 1.0;
  std::vector<Vec2> anchors;
  std::vector<Spinor> spinors;
};

/// Anchor placement on S: equally spaced in angle on a circle (starting at
/// `angle_offset`), every stored point for isolated points, farthest-point
/// sampling on a curve. `count` is ignored for isolated points.
std::vector<Vec2> place_anchors(const ExtremumSet& extrema, int count, double angle_offset = 0.0);

struct FamilyConfig {
  double sep_min_rel = 0.05;  // minimum anchor separation, relative to diam(S)
  double anchor_tol_factor = 1.0;  // |lambda_minus(p_m) - kappa| <= factor * tol_extremum
};

/// Validates the anchors (on S, pairwise separated) and freezes their spinors.
/// Throws DuplicateAnchors or Config.
TrialFamily make_family(const Coupling& coupling, const ExtremumSet& extrema, std::vector<Vec2> anchors,
                        double a, const FamilyConfig& config = {});

struct VariationalMatrices {
  double a = 1.0;
  Eigen::MatrixXcd K;         // <Phi_m | (H0 - kappa) Phi_n>
  Eigen::MatrixXcd W;         // <Phi_m | V Phi_n>
  Eigen::MatrixXcd G;         // <Phi_m | Phi_n>
  Eigen::MatrixXcd W_scalar;  // \int V e^{i(p_n - p_m).x} f_a^2, the spin-free potential matrix
  Eigen::MatrixXcd G_scalar;  // \int e^{i(p_n - p_m).x} f_a^2
  Eigen::MatrixXd K_error, W_error, G_error;  // per-entry absolute error estimates
  double cond_G = 1.0;         // condition number of the unit-diagonal scaled Gram matrix
  bool momentum_route = false; // coupling part of K integrated in momentum space
};

struct AssemblyConfig {
  double cond_max = 1e8;
  unsigned threads = 1;
  /// Integrate the coupling part of K in momentum space even when the closed
  /// form for linear couplings is available (used as an independent check).
  bool force_momentum_route = false;
  int momentum_angles = 96;
  double momentum_p_max = 0.0;  // 0: chosen from a and the coupling
};

/// Throws IllConditionedGram when cond(G) exceeds cond_max.
VariationalMatrices assemble_matrices(const Coupling& coupling, const ExtremumSet& extrema,
                                      const Potential& potential, const TrialFamily& family,
                                      const AssemblyConfig& config = {});

struct BoundReport {
  double kappa = 0.0;
  double a_used = 0.0;
  std::vector<Vec2> anchors;
  std::vector<double> mu;  // generalized eigenvalues of (K + W, G), ascending
  std::vector<double> nu;  // kappa + mu
  int certified_count = 0; // number of mu_n < -margin, i.e. nu_n < kappa - margin
  double margin = 0.0;
  double cond_G = 1.0;
  /// Diagnostic: kappa + generalized eigenvalues of (W_scalar, G_scalar), the
  /// potential-only quotient. Never certified.
  std::vector<double> mu_potential_only;
};

BoundReport variational_bounds(const VariationalMatrices& matrices, double kappa);

struct SweepEntry {
  double a = 0.0;
  std::string status;  // "ok", or the error kind that stopped this exponent
  std::optional<BoundReport> report;
};

struct SweepResult {
  BoundReport best;
  std::vector<SweepEntry> entries;
};

/// Runs the exponents in order (expected descending); after the first success
/// a failing exponent ends the sweep. Best = most certified, then smallest
/// largest nu. Throws AllGramsIllConditioned when no exponent succeeds.
SweepResult sweep_exponent(const Coupling& coupling, const ExtremumSet& extrema, const Potential& potential,
                           const std::vector<Vec2>& anchors, const std::vector<double>& a_grid,
                           const AssemblyConfig& assembly = {}, const FamilyConfig& family = {});

/// Coupling contribution \int chi_m^* [[0, A(p)], [A(p)^*, 0]] chi_n f^_a(p - p_m) f^_a(p - p_n) dp
/// evaluated by polar quadrature in momentum space around both anchors.
struct MomentumEntry {
  Complex value;
  double error = 0.0;
};
MomentumEntry coupling_entry_momentum(const Coupling& coupling, double a, const Vec2& pm, const Vec2& pn,
                                      const Spinor& chi_m, const Spinor& chi_n, int angles = 96,
                                      double p_max = 0.0);

}  // namespace spinorbit

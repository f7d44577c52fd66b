#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "spinorbit/dispersion.hpp"
#include "spinorbit/potential.hpp"

namespace spinorbit {

enum class Verdict { NegativeDefinite, NegativeSemiDefinite, Indefinite };
std::string to_string(Verdict v);

struct DefinitenessCertificate {
  std::vector<Vec2> anchors;
  Eigen::MatrixXcd matrix;  // (V^(p_m - p_n))
  Eigen::VectorXd eigenvalues;
  double max_eigenvalue = 0.0;
  double tol_def = 0.0;
  Verdict verdict = Verdict::Indefinite;
};

struct CertifyConfig {
  double tol_def_rel = 1e-12;  // tol_def = rel * ||matrix||_2 (floor 1e-300); ~4500 eps covers entry roundoff
  double duplicate_tol = 1e-12;
};

/// Hermitian matrix of V^ differences at the anchors and its verdict:
/// NegativeDefinite iff max eigenvalue < -tol_def. Throws DuplicateAnchors.
DefinitenessCertificate certify(const Potential& potential, const std::vector<Vec2>& anchors,
                                const CertifyConfig& config = {});

struct CountPrediction {
  int count = 0;
  DefinitenessCertificate certificate;  // for the returned anchors (empty when count = 0)
  std::string method;                   // "non-positive" or "greedy"
};

struct PredictConfig {
  int max_candidates = 64;
  double angle_offset = 0.0;
  CertifyConfig certify;
};

/// Largest N <= n_max with a NegativeDefinite certificate. Non-positive wells
/// use the natural anchors of S (capacity n_max for circles and curves, #S for
/// isolated points); otherwise anchors are chosen greedily from up to
/// `max_candidates` points of S, each step adding the candidate that keeps the
/// matrix negative definite with the most negative top eigenvalue.
CountPrediction predicted_count(const ExtremumSet& extrema, const Potential& potential, int n_max,
                                const PredictConfig& config = {});

}  // namespace spinorbit

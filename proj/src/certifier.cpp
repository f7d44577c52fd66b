#include "spinorbit/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spinorbit/errors.hpp"
#include "spinorbit/variational.hpp"

namespace spinorbit {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::NegativeDefinite: return "NegativeDefinite";
    case Verdict::NegativeSemiDefinite: return "NegativeSemiDefinite";
    case Verdict::Indefinite: return "Indefinite";
  }
  return "?";
}

DefinitenessCertificate certify(const Potential& potential, const std::vector<Vec2>& anchors,
                                const CertifyConfig& config) {
  const auto n = static_cast<Eigen::Index>(anchors.size());
  if (n == 0) throw Error(ErrorKind::Config, "certify needs at least one anchor");
  double scale = 1.0;
  for (const auto& p : anchors) scale = std::max(scale, p.norm());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (distance(anchors[i], anchors[j]) <= config.duplicate_tol * scale)
        throw Error(ErrorKind::DuplicateAnchors,
                    "anchors " + std::to_string(j) + " and " + std::to_string(i) + " coincide");

  DefinitenessCertificate c;
  c.anchors = anchors;
  c.matrix.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c.matrix(i, i) = fourier_V(potential, {0.0, 0.0}).real();
    for (Eigen::Index j = i + 1; j < n; ++j) {
      c.matrix(i, j) = fourier_V(potential, anchors[i] - anchors[j]);
      c.matrix(j, i) = std::conj(c.matrix(i, j));
    }
  }
  c.eigenvalues = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(c.matrix, Eigen::EigenvaluesOnly).eigenvalues();
  c.max_eigenvalue = c.eigenvalues(n - 1);
  const double norm2 = c.eigenvalues.cwiseAbs().maxCoeff();
  c.tol_def = std::max(config.tol_def_rel * norm2, 1e-300);
  if (c.max_eigenvalue < -c.tol_def)
    c.verdict = Verdict::NegativeDefinite;
  else if (c.max_eigenvalue <= c.tol_def)
    c.verdict = Verdict::NegativeSemiDefinite;
  else
    c.verdict = Verdict::Indefinite;
  return c;
}

namespace {

std::vector<Vec2> candidate_points(const ExtremumSet& extrema, int count, double offset) {
  if (extrema.shape == ShapeKind::IsolatedPoints) return extrema.points;
  return place_anchors(extrema, count, offset);
}

}  // namespace

CountPrediction predicted_count(const ExtremumSet& extrema, const Potential& potential, int n_max,
                                const PredictConfig& config) {
  CountPrediction out;
  if (n_max < 1) return out;

  if (potential.sign_certificate() == SignCertificate::NonPositive) {
    out.method = "non-positive";
    std::vector<Vec2> anchors = candidate_points(extrema, n_max, config.angle_offset);
    if (static_cast<int>(anchors.size()) > n_max) anchors.resize(n_max);
    if (anchors.empty()) return out;
    const Vec2 first = anchors.front();
    // Bochner guarantees definiteness; shrink only if the numerics disagree.
    while (!anchors.empty()) {
      auto cert = certify(potential, anchors, config.certify);
      if (cert.verdict == Verdict::NegativeDefinite) {
        out.count = static_cast<int>(anchors.size());
        out.certificate = std::move(cert);
        return out;
      }
      if (extrema.shape == ShapeKind::IsolatedPoints)
        anchors.pop_back();
      else
        anchors = anchors.size() > 1
                      ? place_anchors(extrema, static_cast<int>(anchors.size()) - 1, config.angle_offset)
                      : std::vector<Vec2>{};
    }
    out.certificate = certify(potential, {first}, config.certify);  // evidence for the failure
    return out;
  }

  out.method = "greedy";
  const int pool_size = extrema.shape == ShapeKind::IsolatedPoints
                            ? static_cast<int>(extrema.points.size())
                            : config.max_candidates;
  std::vector<Vec2> pool = candidate_points(extrema, pool_size, config.angle_offset);
  if (static_cast<int>(pool.size()) > config.max_candidates) pool.resize(config.max_candidates);
  std::vector<Vec2> chosen;
  std::vector<bool> used(pool.size(), false);
  while (static_cast<int>(chosen.size()) < n_max) {
    int best = -1;
    DefinitenessCertificate best_cert;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (used[i]) continue;
      auto trial = chosen;
      trial.push_back(pool[i]);
      auto cert = certify(potential, trial, config.certify);
      if (cert.verdict != Verdict::NegativeDefinite) continue;
      if (best < 0 || cert.max_eigenvalue < best_cert.max_eigenvalue) {
        best = static_cast<int>(i);
        best_cert = std::move(cert);
      }
    }
    if (best < 0) break;
    used[best] = true;
    chosen.push_back(pool[best]);
    out.certificate = std::move(best_cert);
  }
  out.count = static_cast<int>(chosen.size());
  if (out.count == 0) out.certificate = certify(potential, {pool.front()}, config.certify);
  return out;
}

}  // namespace spinorbit

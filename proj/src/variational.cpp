#include "spinorbit/variational.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>

#include "spinorbit/errors.hpp"
#include "spinorbit/parallel.hpp"
#include "spinorbit/radial_transform.hpp"

namespace spinorbit {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// chi_m^* [[0, A], [A^*, 0]] chi_n
Complex coupling_form(const Spinor& chi_m, const Spinor& chi_n, Complex a) {
  return std::conj(chi_m(0)) * a * chi_n(1) + std::conj(chi_m(1)) * std::conj(a) * chi_n(0);
}

double default_p_max(double a) { return a >= 2.0 ? 14.0 : (a >= 0.8 ? 50.0 : 1e4); }

// Polar quadrature of q(p) around `center` over the whole plane with a smooth
// partition weight; radial panels geometric in t with ratio sqrt(2).
template <int Points, typename Q>
Complex polar_plane(const Vec2& center, int angles, double t_max, Q&& q) {
  using boost::math::quadrature::gauss;
  const double ratio = std::sqrt(2.0);
  const double t_lo = 1e-7;
  Complex total{};
  for (int i = 0; i < angles; ++i) {
    const double phi = 2.0 * kPi * (i + 0.5) / angles;
    const Vec2 u{std::cos(phi), std::sin(phi)};
    const auto ray = [&](double t) { return q(center + u * t) * t; };
    const auto re = [&](double t) { return ray(t).real(); };
    const auto im = [&](double t) { return ray(t).imag(); };
    double lo = 0.0, hi = t_lo;
    while (lo < t_max) {
      hi = std::min(hi, t_max);
      total += Complex(gauss<double, Points>::integrate(re, lo, hi), gauss<double, Points>::integrate(im, lo, hi));
      lo = hi;
      hi *= ratio;
    }
  }
  return total * (2.0 * kPi / angles);
}

MomentumEntry coupling_entry_table(const Coupling& coupling, const FHatTable& table, const Vec2& pm,
                                   const Vec2& pn, const Spinor& chi_m, const Spinor& chi_n, int angles,
                                   double p_max) {
  const bool same = (pm - pn).norm() == 0.0;
  const auto integrand = [&](const Vec2& p) {
    return coupling_form(chi_m, chi_n, coupling(p)) * table((p - pm).norm()) * table((p - pn).norm());
  };
  const auto weighted = [&](const Vec2& c, const Vec2& o) {
    return [&, c, o](const Vec2& p) {
      if (same) return integrand(p);
      const double dc = (p - c).norm2(), d_o = (p - o).norm2();
      return integrand(p) * (d_o / (dc + d_o));
    };
  };
  const auto rule = [&](int n_angles, bool fine) {
    const auto run = [&](const Vec2& c, const Vec2& o) {
      return fine ? polar_plane<20>(c, n_angles, p_max, weighted(c, o))
                  : polar_plane<10>(c, n_angles, p_max, weighted(c, o));
    };
    Complex v = run(pm, pn);
    if (!same) v += run(pn, pm);
    return v;
  };
  const Complex coarse = rule(angles, false);
  const Complex fine = rule(2 * angles, true);
  // Tail beyond p_max around each center from the power-law decay of f^_a.
  const TrialProfile f(table.a());
  const double c_tail = f.f_hat_tail_coefficient();
  double tail = 0.0;
  if (c_tail != 0.0) {
    double rho = 0.0;
    const double reach = std::max(pm.norm(), pn.norm()) + p_max;
    for (int i = 0; i < 64; ++i) {
      const Vec2 p = pm + Vec2::polar(p_max, 2.0 * kPi * i / 64);
      rho = std::max(rho, std::abs(coupling(p)) / (reach * reach));
    }
    const double a = table.a();
    tail = 2.0 * kPi * rho * c_tail * c_tail * 4.0 * std::pow(p_max, -2.0 * a) / (2.0 * a);
    tail *= same ? 1.0 : 2.0;
  }
  const double interp_rel = table.interpolation_error() / table(0.0);
  return {fine, std::abs(fine - coarse) + tail + 2.0 * interp_rel * std::abs(fine)};
}

struct PairGeometry {
  int m, n;
};

}  // namespace

// ---------------------------------------------------------------------------

std::vector<Vec2> place_anchors(const ExtremumSet& extrema, int count, double angle_offset) {
  std::vector<Vec2> out;
  switch (extrema.shape) {
    case ShapeKind::Circle:
      if (count < 1) throw Error(ErrorKind::Config, "anchor count must be positive");
      for (int m = 0; m < count; ++m)
        out.push_back(Vec2::polar(extrema.circle_radius, angle_offset + 2.0 * kPi * m / count));
      return out;
    case ShapeKind::IsolatedPoints:
      return extrema.points;
    case ShapeKind::Curve: {
      if (count < 1) throw Error(ErrorKind::Config, "anchor count must be positive");
      const auto& pts = extrema.points;
      if (pts.empty()) return out;
      std::vector<double> dmin(pts.size(), std::numeric_limits<double>::infinity());
      std::size_t next = 0;
      while (static_cast<int>(out.size()) < count && out.size() < pts.size()) {
        out.push_back(pts[next]);
        std::size_t best = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          dmin[i] = std::min(dmin[i], distance(pts[i], pts[next]));
          if (dmin[i] > dmin[best]) best = i;
        }
        if (dmin[best] == 0.0) break;
        next = best;
      }
      return out;
    }
  }
  return out;
}

TrialFamily make_family(const Coupling& coupling, const ExtremumSet& extrema, std::vector<Vec2> anchors,
                        double a, const FamilyConfig& config) {
  if (!(a > 0) || !std::isfinite(a)) throw Error(ErrorKind::Config, "trial exponent a must be positive");
  if (anchors.empty()) throw Error(ErrorKind::Config, "trial family needs at least one anchor");
  const double scale = std::max(1.0, extrema.diameter());
  const double sep_min = config.sep_min_rel * extrema.diameter();
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const double off = std::abs(lambda_minus(coupling, anchors[i]) - extrema.kappa);
    if (off > config.anchor_tol_factor * extrema.tol_extremum)
      throw Error(ErrorKind::Config, "anchor " + std::to_string(i) + " is not on S (|lambda_minus - kappa| = " +
                                         std::to_string(off) + ")");
    for (std::size_t j = 0; j < i; ++j) {
      const double d = distance(anchors[i], anchors[j]);
      if (d <= 1e-12 * scale || d < sep_min)
        throw Error(ErrorKind::DuplicateAnchors, "anchors " + std::to_string(j) + " and " + std::to_string(i) +
                                                     " are closer than the minimum separation");
    }
  }
  TrialFamily family;
  family.a = a;
  family.anchors = std::move(anchors);
  for (const auto& p : family.anchors) family.spinors.push_back(lower_band_spinor(coupling, p));
  return family;
}

// ---------------------------------------------------------------------------

VariationalMatrices assemble_matrices(const Coupling& coupling, const ExtremumSet& extrema,
                                      const Potential& potential, const TrialFamily& family,
                                      const AssemblyConfig& config) {
  const int n = static_cast<int>(family.anchors.size());
  const double a = family.a;
  const double kappa = extrema.kappa;
  VariationalMatrices out;
  out.a = a;
  out.K = out.W = out.G = out.W_scalar = out.G_scalar = Eigen::MatrixXcd::Zero(n, n);
  out.K_error = out.W_error = out.G_error = Eigen::MatrixXd::Zero(n, n);
  out.momentum_route = config.force_momentum_route || !coupling.is_linear();

  std::optional<FHatTable> table;
  const double p_max = config.momentum_p_max > 0 ? config.momentum_p_max : default_p_max(a);
  if (out.momentum_route && coupling.kind() != Coupling::Kind::None)
    table.emplace(a, p_max + 2.0 * extrema.diameter() + 1.0, 96);

  std::vector<PairGeometry> pairs;
  for (int m = 0; m < n; ++m)
    for (int k = m; k < n; ++k) pairs.push_back({m, k});

  std::vector<std::optional<Error>> failures(pairs.size());
  parallel_for(pairs.size(), config.threads, [&](std::size_t idx) {
    const auto [m, k] = pairs[idx];
    try {
      const Vec2& pm = family.anchors[m];
      const Vec2& pn = family.anchors[k];
      const Spinor& cm = family.spinors[m];
      const Spinor& cn = family.spinors[k];
      const Vec2 delta = pn - pm;
      const double q = delta.norm();
      const Complex s = cm.dot(cn);  // conjugate-linear in the first argument
      const QuadratureValue g0 = hankel(0.0, 1.0, a, q);
      const QuadratureValue l0 = hankel(2.0 * a - 2.0, 1.0, a, q);
      const double g = 2.0 * kPi * g0.value, g_err = 2.0 * kPi * g0.error;
      const double lap = 2.0 * kPi * 0.25 * a * a * l0.value, lap_err = 2.0 * kPi * 0.25 * a * a * l0.error;

      const Vec2 mid = (pm + pn) * 0.5;
      const double kin = 0.5 * (pm.norm2() + pn.norm2()) - kappa;
      Complex kval = kin * s * g + s * lap;
      double kerr = std::abs(kin * s) * g_err + std::abs(s) * lap_err +
                    8.0 * kEps * (std::abs(kin) + std::abs(kappa) + 0.5 * (pm.norm2() + pn.norm2())) * g;
      if (coupling.kind() != Coupling::Kind::None) {
        if (out.momentum_route) {
          const MomentumEntry me =
              coupling_entry_table(coupling, *table, pm, pn, cm, cn, config.momentum_angles, p_max);
          kval += me.value;
          kerr += me.error;
        } else {
          const Complex am = coupling(mid);
          const Complex form = coupling_form(cm, cn, am);
          kval += form * g;
          kerr += std::abs(form) * g_err + 8.0 * kEps * std::abs(am) * g;
        }
      }

      const WeightedIntegral w = integrate_weighted(
          potential,
          [&](const Vec2& x) { return std::exp(-std::pow(x.norm(), a)) * std::polar(1.0, dot(delta, x)); }, q);

      out.G_scalar(m, k) = g;
      out.G(m, k) = s * g;
      out.G_error(m, k) = std::abs(s) * g_err + 4.0 * kEps * g;
      out.K(m, k) = kval;
      out.K_error(m, k) = kerr;
      out.W_scalar(m, k) = w.value;
      out.W(m, k) = s * w.value;
      out.W_error(m, k) = std::abs(s) * w.error + 4.0 * kEps * std::abs(w.value);
    } catch (const Error& e) {
      failures[idx] = e;
    }
  });
  for (const auto& f : failures)
    if (f) throw *f;

  // Fill the lower triangle by Hermitian symmetry.
  for (int m = 0; m < n; ++m) {
    for (int k = 0; k < m; ++k) {
      out.G_scalar(m, k) = std::conj(out.G_scalar(k, m));
      out.G(m, k) = std::conj(out.G(k, m));
      out.K(m, k) = std::conj(out.K(k, m));
      out.W(m, k) = std::conj(out.W(k, m));
      out.W_scalar(m, k) = std::conj(out.W_scalar(k, m));
      out.G_error(m, k) = out.G_error(k, m);
      out.K_error(m, k) = out.K_error(k, m);
      out.W_error(m, k) = out.W_error(k, m);
    }
    out.K(m, m) = out.K(m, m).real();
    out.W(m, m) = out.W(m, m).real();
    out.G(m, m) = out.G(m, m).real();
    out.W_scalar(m, m) = out.W_scalar(m, m).real();
  }

  const Eigen::VectorXd d = out.G.diagonal().real().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXcd gs = d.asDiagonal() * out.G * d.asDiagonal();
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(gs, Eigen::EigenvaluesOnly).eigenvalues();
  out.cond_G = ev(0) > 0 ? ev(n - 1) / ev(0) : std::numeric_limits<double>::infinity();
  if (!(out.cond_G <= config.cond_max))
    throw Error(ErrorKind::IllConditionedGram,
                "cond(G) = " + std::to_string(out.cond_G) + " exceeds " + std::to_string(config.cond_max) +
                    " at a = " + std::to_string(a));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct GeneralizedSpectrum {
  Eigen::VectorXd values;
  double g_min = 0.0;
};

// Eigenvalues of (H, G) after the congruence with diag(G)^{-1/2}.
GeneralizedSpectrum solve_scaled(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& g, const Eigen::VectorXd& d) {
  const Eigen::MatrixXcd hs = d.asDiagonal() * h * d.asDiagonal();
  const Eigen::MatrixXcd gs = d.asDiagonal() * g * d.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hs, gs, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::IllConditionedGram, "generalized eigenproblem failed");
  GeneralizedSpectrum out;
  out.values = solver.eigenvalues();
  out.g_min = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(gs, Eigen::EigenvaluesOnly).eigenvalues()(0);
  return out;
}

}  // namespace

BoundReport variational_bounds(const VariationalMatrices& mat, double kappa) {
  const Eigen::Index n = mat.G.rows();
  BoundReport r;
  r.kappa = kappa;
  r.a_used = mat.a;
  r.cond_G = mat.cond_G;
  const Eigen::VectorXd d = mat.G.diagonal().real().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXcd h = mat.K + mat.W;
  const GeneralizedSpectrum spec = solve_scaled(h, mat.G, d);
  const double mu_max = spec.values.cwiseAbs().maxCoeff();

  // Weyl-type propagation of the entrywise errors through the scaled problem:
  // |d mu| <= (||dH|| + |mu| ||dG||) / lambda_min(G).
  const Eigen::MatrixXd eh = d.asDiagonal() * (mat.K_error + mat.W_error) * d.asDiagonal();
  const Eigen::MatrixXd eg = d.asDiagonal() * mat.G_error * d.asDiagonal();
  const Eigen::MatrixXcd hs = d.asDiagonal() * h * d.asDiagonal();
  const double propagated = (eh.norm() + mu_max * eg.norm()) / spec.g_min;
  const double roundoff = 64.0 * kEps * (hs.norm() + mu_max * static_cast<double>(n)) / spec.g_min;
  // kappa is itself a computed minimum; allow a few ulps for it.
  r.margin = 3.0 * propagated + roundoff + 8.0 * kEps * std::abs(kappa);

  for (Eigen::Index i = 0; i < n; ++i) {
    r.mu.push_back(spec.values(i));
    r.nu.push_back(kappa + spec.values(i));
  }
  r.certified_count = static_cast<int>(
      std::count_if(r.mu.begin(), r.mu.end(), [&](double v) { return v < -r.margin; }));

  try {
    const Eigen::VectorXd ds = mat.G_scalar.diagonal().real().cwiseSqrt().cwiseInverse();
    const GeneralizedSpectrum pot = solve_scaled(mat.W_scalar, mat.G_scalar, ds);
    for (Eigen::Index i = 0; i < n; ++i) r.mu_potential_only.push_back(kappa + pot.values(i));
  } catch (const Error&) {
    // the spin-free Gram matrix can be singular (e.g. coinciding plane waves); diagnostic only
  }
  return r;
}

SweepResult sweep_exponent(const Coupling& coupling, const ExtremumSet& extrema, const Potential& potential,
                           const std::vector<Vec2>& anchors, const std::vector<double>& a_grid,
                           const AssemblyConfig& assembly, const FamilyConfig& family_cfg) {
  SweepResult out;
  bool any = false;
  for (double a : a_grid) {
    SweepEntry entry;
    entry.a = a;
    try {
      const TrialFamily family = make_family(coupling, extrema, anchors, a, family_cfg);
      const VariationalMatrices mat = assemble_matrices(coupling, extrema, potential, family, assembly);
      BoundReport rep = variational_bounds(mat, extrema.kappa);
      rep.anchors = anchors;
      entry.status = "ok";
      entry.report = rep;
      const bool better = !any || rep.certified_count > out.best.certified_count ||
                          (rep.certified_count == out.best.certified_count && rep.nu.back() < out.best.nu.back());
      if (better) out.best = rep;
      any = true;
      out.entries.push_back(entry);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::IllConditionedGram && e.kind() != ErrorKind::QuadratureFailure) throw;
      entry.status = std::string(to_string(e.kind()));
      out.entries.push_back(entry);
      if (any) break;
    }
  }
  if (!any) throw Error(ErrorKind::AllGramsIllConditioned, "no exponent in the sweep produced a usable Gram matrix");
  return out;
}

MomentumEntry coupling_entry_momentum(const Coupling& coupling, double a, const Vec2& pm, const Vec2& pn,
                                      const Spinor& chi_m, const Spinor& chi_n, int angles, double p_max) {
  if (p_max <= 0) p_max = default_p_max(a);
  const FHatTable table(a, p_max + (pm - pn).norm() + std::max(pm.norm(), pn.norm()) + 1.0, 96);
  return coupling_entry_table(coupling, table, pm, pn, chi_m, chi_n, angles, p_max);
}

}  // namespace spinorbit

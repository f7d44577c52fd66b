#include "spinorbit/oracle.hpp"

#include <Eigen/CholmodSupport>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spinorbit/errors.hpp"

namespace spinorbit {

namespace {

double effective_margin(const DiscretizationConfig& config) {
  return config.margin >= 0.0 ? config.margin : 1e-8 + config.resid_tol;
}

void check_config(const DiscretizationConfig& config) {
  if (config.grid_points < 64) throw Error(ErrorKind::Config, "oracle: grid_points must be >= 64");
  if (!(config.box_width > 0.0)) throw Error(ErrorKind::Config, "oracle: box_width must be positive");
  if (!(config.resid_tol > 0.0)) throw Error(ErrorKind::Config, "oracle: resid_tol must be positive");
  if (config.initial_count < 1 || config.max_count < config.initial_count)
    throw Error(ErrorKind::Config, "oracle: need 1 <= initial_count <= max_count");
}

double free_symbol(const Coupling& coupling, double h, double kx, double ky) {
  const double sx = std::sin(0.5 * kx * h), sy = std::sin(0.5 * ky * h);
  const double lap = 4.0 / (h * h) * (sx * sx + sy * sy);
  const Complex a = (coupling.cx() * std::sin(kx * h) + coupling.cy() * std::sin(ky * h)) / h;
  return lap - std::abs(a);
}

}  // namespace

double discrete_symbol_min(const Coupling& coupling, double h) {
  if (!coupling.is_linear()) throw Error(ErrorKind::UnsupportedCoupling, "discrete symbol needs a linear coupling");
  const double zone = kPi / h;
  const double reach = std::min(zone, 2.0 * (std::abs(coupling.cx()) + std::abs(coupling.cy())) + 1.0);
  double best = 0.0, bx = 0.0, by = 0.0;  // k = 0 gives 0
  double half = reach;
  int points = 200;
  for (int round = 0; round < 6; ++round) {
    const double cx = bx, cy = by, step = 2.0 * half / points;
    for (int i = 0; i <= points; ++i)
      for (int j = 0; j <= points; ++j) {
        const double kx = cx - half + i * step, ky = cy - half + j * step;
        const double v = free_symbol(coupling, h, kx, ky);
        if (v < best) {
          best = v;
          bx = kx;
          by = ky;
        }
      }
    half = 2.0 * step;
    points = 40;
  }
  return best;
}

GridOperator build_hamiltonian(const Coupling& coupling, const Potential& potential,
                               const DiscretizationConfig& config) {
  check_config(config);
  if (!coupling.is_linear())
    throw Error(ErrorKind::UnsupportedCoupling,
                "the grid operator supports polynomial couplings only; '" + coupling.name() + "' is not");
  const int n = config.grid_points;
  const double width = config.box_width;
  const double h = width / (n + 1);
  const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
  const Complex cx = coupling.cx(), cy = coupling.cy();
  const double hop = -1.0 / (h * h);
  const Complex i_unit(0.0, 1.0);
  // -i d/dx by centred differences: (u_{i+1} - u_{i-1}) * (-i / 2h)
  const Complex bxp = cx * (-i_unit) / (2.0 * h), bxm = -bxp;
  const Complex byp = cy * (-i_unit) / (2.0 * h), bym = -byp;
  const bool coupled = cx != Complex(0.0) || cy != Complex(0.0);

  GridOperator op;
  op.n = n;
  op.box_width = width;
  op.h = h;
  op.min_potential = 0.0;
  op.tail_mass = potential.is_zero() ? 0.0 : tail_mass(potential, 0.5 * width);
  op.symbol_min = discrete_symbol_min(coupling, h);

  std::vector<Eigen::Triplet<Complex, int>> triplets;
  triplets.reserve(static_cast<std::size_t>(2 * nn * (coupled ? 9 : 5)));
  auto index = [n](int ix, int iy) { return iy * n + ix; };
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 x{-0.5 * width + (ix + 1) * h, -0.5 * width + (iy + 1) * h};
      const double v = potential.is_zero() ? 0.0 : eval_potential_lenient(potential, x).value;
      op.min_potential = std::min(op.min_potential, v);
      const int k = index(ix, iy);
      for (int s = 0; s < 2; ++s) {
        const int o = s * static_cast<int>(nn);
        triplets.emplace_back(o + k, o + k, 4.0 / (h * h) + v);
        if (ix > 0) triplets.emplace_back(o + k, o + index(ix - 1, iy), hop);
        if (ix + 1 < n) triplets.emplace_back(o + k, o + index(ix + 1, iy), hop);
        if (iy > 0) triplets.emplace_back(o + k, o + index(ix, iy - 1), hop);
        if (iy + 1 < n) triplets.emplace_back(o + k, o + index(ix, iy + 1), hop);
      }
      if (!coupled) continue;
      const int up = k, down = static_cast<int>(nn);
      auto couple = [&](int col, Complex value) {
        triplets.emplace_back(up, down + col, value);           // B
        triplets.emplace_back(down + col, up, std::conj(value));  // B^*
      };
      if (ix + 1 < n) couple(index(ix + 1, iy), bxp);
      if (ix > 0) couple(index(ix - 1, iy), bxm);
      if (iy + 1 < n) couple(index(ix, iy + 1), byp);
      if (iy > 0) couple(index(ix, iy - 1), bym);
    }
  op.matrix.resize(2 * nn, 2 * nn);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix.makeCompressed();
  return op;
}

EigenPairs lowest_eigenpairs(const GridOperator& op, double sigma, int count, const DiscretizationConfig& config,
                             bool estimate_only) {
  const Eigen::Index dim = op.matrix.rows();
  SparseMatrixC identity(dim, dim);
  identity.setIdentity();

  EigenPairs out;
  Eigen::CholmodSupernodalLLT<SparseMatrixC, Eigen::Lower> llt;
  double step = 1e-3 * std::max(1.0, std::abs(sigma));
  for (int attempt = 0;; ++attempt) {
    const SparseMatrixC shifted = op.matrix - sigma * identity;
    llt.compute(shifted);
    ++out.factorizations;
    if (llt.info() == Eigen::Success) break;
    if (attempt >= 12) throw Error(ErrorKind::EigensolverStall, "could not factorise H - sigma below the spectrum");
    sigma -= step;
    step *= 4.0;
  }

  LanczosConfig lc = config.lanczos;
  lc.max_basis = std::max(lc.max_basis, 3 * count + 2 * lc.block_size);
  if (estimate_only) lc.tol = std::max(lc.tol, 1e-5);
  const BlockOperator apply = [&](const Eigen::MatrixXcd& x) -> Eigen::MatrixXcd { return llt.solve(x); };

  LanczosResult lr;
  for (int tighten = 0; tighten < 3; ++tighten) {
    lr = block_lanczos_largest(apply, dim, count, lc);
    out.operator_applications += lr.operator_applications;
    out.values.assign(static_cast<std::size_t>(count), 0.0);
    out.residuals.assign(static_cast<std::size_t>(count), 0.0);
    out.vectors = lr.vectors;
    bool good = lr.converged;
    for (int j = 0; j < count; ++j) {
      Eigen::VectorXcd psi = out.vectors.col(j);
      psi /= psi.norm();
      const Eigen::VectorXcd hpsi = op.matrix * psi;
      const double e = psi.dot(hpsi).real();
      out.values[j] = e;
      out.residuals[j] = (hpsi - e * psi).norm();
      out.vectors.col(j) = psi;
      if (!estimate_only && out.residuals[j] > config.resid_tol) good = false;
    }
    out.converged = good;
    if (good || !lr.converged) break;
    lc.tol *= 1e-2;  // the inverted-operator tolerance was not enough for the H residual
  }

  std::vector<int> order(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return out.values[a] < out.values[b]; });
  EigenPairs sorted = out;
  for (int j = 0; j < count; ++j) {
    sorted.values[j] = out.values[order[j]];
    sorted.residuals[j] = out.residuals[order[j]];
    sorted.vectors.col(j) = out.vectors.col(order[j]);
  }
  return sorted;
}

double grid_threshold(const Coupling& coupling, const DiscretizationConfig& config) {
  const GridOperator free_op = build_hamiltonian(coupling, Potential::zero(), config);
  const double sigma = free_op.symbol_min - 1e-4 * std::max(1.0, std::abs(free_op.symbol_min));
  DiscretizationConfig c = config;
  const EigenPairs pairs = lowest_eigenpairs(free_op, sigma, 2, c);
  if (!pairs.converged)
    throw Error(ErrorKind::EigensolverStall, "grid threshold did not converge to the residual tolerance");
  return pairs.values.front();
}

OracleSpectrum eigen_below_kappa(const GridOperator& op, double kappa_h, double kappa,
                                 const DiscretizationConfig& config) {
  check_config(config);
  OracleSpectrum out;
  out.kappa = kappa;
  out.kappa_h = kappa_h;
  out.margin = effective_margin(config);
  out.n = op.n;
  out.box_width = op.box_width;
  out.tail_mass = op.tail_mass;
  const double threshold = kappa_h - out.margin;

  // Stage 1: a shift below the whole spectrum locates the ground state.
  const double lower = op.symbol_min + op.min_potential;
  double sigma = lower - 1e-3 * std::max(1.0, std::abs(lower));
  EigenPairs pairs = lowest_eigenpairs(op, sigma, std::min(2, config.initial_count), config, true);
  const double e1 = pairs.values.front();

  // Stage 2: a shift just below the ground state, growing the request until
  // one eigenvalue above the window is resolved.
  if (e1 < threshold) sigma = e1 - 0.1 * (kappa_h - e1);
  int request = config.initial_count;
  for (;;) {
    pairs = lowest_eigenpairs(op, sigma, request, config);
    const auto above = std::find_if(pairs.values.begin(), pairs.values.end(), [&](double e) { return e >= threshold; });
    if (above != pairs.values.end() || request >= config.max_count) break;
    request = std::min(2 * request, config.max_count);
  }
  if (!pairs.converged)
    throw Error(ErrorKind::EigensolverStall, "eigenpairs did not reach the residual tolerance");

  for (std::size_t j = 0; j < pairs.values.size(); ++j) {
    if (pairs.values[j] >= threshold) {
      out.first_above = pairs.values[j];
      out.complete = true;
      break;
    }
    out.eigenvalues.push_back(pairs.values[j]);
    out.residuals.push_back(pairs.residuals[j]);
  }
  out.count = static_cast<int>(out.eigenvalues.size());
  if (!out.complete) out.note = "window not closed within max_count eigenvalues; count is a lower bound";

  const double level_tol = 1e-7 + 10.0 * config.resid_tol;
  for (std::size_t j = 0; j < out.eigenvalues.size(); ++j) {
    if (j > 0 && out.eigenvalues[j] - out.eigenvalues[j - 1] <= level_tol * std::max(1.0, std::abs(out.eigenvalues[j])))
      ++out.level_multiplicities.back();
    else
      out.level_multiplicities.push_back(1);
  }
  out.level_count = static_cast<int>(out.level_multiplicities.size());
  out.converged = out.complete;
  return out;
}

OracleSpectrum solve_oracle(const Coupling& coupling, const Potential& potential, double kappa,
                            const DiscretizationConfig& config) {
  const double kappa_h = grid_threshold(coupling, config);
  OracleSpectrum fine;
  {
    const GridOperator op = build_hamiltonian(coupling, potential, config);
    fine = eigen_below_kappa(op, kappa_h, kappa, config);
  }
  if (!config.doubling_check) return fine;

  DiscretizationConfig coarse_cfg = config;
  coarse_cfg.grid_points = config.grid_points / 2;
  if (coarse_cfg.grid_points < 64) {
    fine.note += (fine.note.empty() ? "" : "; ") + std::string("grid check skipped: n/2 < 64");
    return fine;
  }
  const double coarse_threshold = grid_threshold(coupling, coarse_cfg);
  const GridOperator coarse_op = build_hamiltonian(coupling, potential, coarse_cfg);
  const OracleSpectrum coarse = eigen_below_kappa(coarse_op, coarse_threshold, kappa, coarse_cfg);
  fine.grid_checked = true;
  fine.coarse_count = coarse.count;
  double drift = 0.0;
  const std::size_t common = std::min(fine.eigenvalues.size(), coarse.eigenvalues.size());
  for (std::size_t j = 0; j < common; ++j)
    drift = std::max(drift, std::abs((fine.eigenvalues[j] - fine.kappa_h) - (coarse.eigenvalues[j] - coarse.kappa_h)));
  fine.drift = drift;
  fine.converged = fine.complete && coarse.complete && coarse.count == fine.count && drift <= config.drift_tol;
  if (coarse.count != fine.count) {
    std::ostringstream msg;
    msg << "count differs on the n/2 grid (" << coarse.count << " vs " << fine.count << ")";
    fine.note += (fine.note.empty() ? "" : "; ") + msg.str();
  }
  return fine;
}

BoundValidation validate_bounds(const OracleSpectrum& oracle, const BoundReport& report, double tol_oracle) {
  BoundValidation out;
  out.tol_oracle = tol_oracle;
  const double allowance = tol_oracle + (oracle.grid_checked ? oracle.drift : 0.0);
  for (int k = 0; k < report.certified_count; ++k) {
    ValidationRow row;
    row.n = k + 1;
    row.nu_minus_kappa = report.nu[k] - report.kappa;
    row.allowance = allowance;
    if (k < oracle.count) {
      row.oracle_minus_kappa_h = oracle.eigenvalues[k] - oracle.kappa_h;
      row.ok = row.oracle_minus_kappa_h <= row.nu_minus_kappa + allowance;
    } else {
      row.oracle_minus_kappa_h = std::numeric_limits<double>::quiet_NaN();
      row.ok = false;
    }
    out.pass = out.pass && row.ok;
    out.rows.push_back(row);
  }
  std::ostringstream msg;
  if (report.certified_count == 0)
    msg << "no certified bounds";
  else if (out.pass)
    msg << report.certified_count << " certified bound(s) consistent with " << oracle.count << " oracle eigenvalue(s)";
  else if (oracle.count < report.certified_count)
    msg << "oracle found " << oracle.count << " eigenvalue(s) below threshold, fewer than "
        << report.certified_count << " certified";
  else
    msg << "an oracle eigenvalue exceeds its certified bound";
  out.message = msg.str();
  return out;
}

}  // namespace spinorbit

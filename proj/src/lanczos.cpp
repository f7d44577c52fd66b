#include "spinorbit/lanczos.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>

#include "spinorbit/errors.hpp"
#include "spinorbit/vec2.hpp"

namespace spinorbit {

namespace {

Eigen::MatrixXcd random_block(Eigen::Index rows, Eigen::Index cols, std::mt19937& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex(normal(rng), normal(rng));
  return m;
}

// Classical Gram-Schmidt passes against the first `used` basis columns.
void orthogonalise(const Eigen::MatrixXcd& basis, Eigen::Index used, Eigen::MatrixXcd& w, int passes = 2) {
  if (used == 0) return;
  for (int pass = 0; pass < passes; ++pass) {
    const Eigen::MatrixXcd c = basis.leftCols(used).adjoint() * w;
    w.noalias() -= basis.leftCols(used) * c;
  }
}

// Thin QR w = q r with q orthogonal to the basis. Rank-deficient columns are
// replaced by random directions (r gets a zero diagonal) so the block keeps
// its size; the Krylov relation is unaffected because their r column is zero.
Eigen::MatrixXcd orthonormal_block(const Eigen::MatrixXcd& basis, Eigen::Index used, const Eigen::MatrixXcd& w,
                                   Eigen::MatrixXcd& r, std::mt19937& rng) {
  const Eigen::Index b = w.cols();
  const double scale = std::max(w.norm(), 1e-300);
  r = Eigen::MatrixXcd::Zero(b, b);
  Eigen::MatrixXcd q(w.rows(), b);
  for (Eigen::Index j = 0; j < b; ++j) {
    Eigen::VectorXcd v = w.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i) {
        const Complex c = q.col(i).dot(v);
        r(i, j) += c;
        v -= c * q.col(i);
      }
    double nv = v.norm();
    if (nv <= 1e-13 * scale) {
      r(j, j) = 0.0;  // deflated: the column lies in the span of the previous ones
      Eigen::MatrixXcd fresh = random_block(w.rows(), 1, rng);
      orthogonalise(basis, used, fresh);
      v = fresh.col(0);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index i = 0; i < j; ++i) v -= q.col(i).dot(v) * q.col(i);
      nv = v.norm();
    } else {
      r(j, j) = nv;
    }
    q.col(j) = v / nv;
  }
  return q;
}

}  // namespace

LanczosResult block_lanczos_largest(const BlockOperator& op, Eigen::Index dim, int wanted,
                                    const LanczosConfig& config) {
  const int b = config.block_size;
  const int max_basis = config.max_basis;
  if (b < 1 || wanted < 1 || max_basis < wanted + 2 * b)
    throw Error(ErrorKind::Config, "block Lanczos: max_basis must be at least wanted + 2 * block_size");
  if (dim < max_basis) throw Error(ErrorKind::Config, "block Lanczos: operator dimension below the basis size");

  std::mt19937 rng(config.seed);
  Eigen::MatrixXcd basis(dim, max_basis);
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(max_basis, max_basis);
  Eigen::MatrixXcd r;
  basis.leftCols(b) = orthonormal_block(basis, 0, random_block(dim, b, rng), r, rng);
  Eigen::Index used = b;
  Eigen::Index projected = 0;
  const int keep = std::clamp(std::max(wanted + b, max_basis / 2), wanted, max_basis - b);

  LanczosResult out;
  for (int restart = 0;; ++restart) {
    // Expand: Op V = V T + R E^T, with R the remainder of the last block.
    Eigen::MatrixXcd remainder;
    while (projected < used) {
      Eigen::MatrixXcd w = op(basis.middleCols(projected, b));
      ++out.operator_applications;
      const Eigen::MatrixXcd c = basis.leftCols(used).adjoint() * w;
      t.block(0, projected, used, b) = c;
      t.block(projected, 0, b, used) = c.adjoint();
      projected += b;
      w.noalias() -= basis.leftCols(used) * c;
      orthogonalise(basis, used, w, 1);  // the projection above was the first pass
      if (used + b > max_basis) {
        remainder = std::move(w);
        break;
      }
      basis.middleCols(used, b) = orthonormal_block(basis, used, w, r, rng);
      t.block(used, used - b, b, b) = r;
      t.block(used - b, used, b, b) = r.adjoint();
      used += b;
    }

    const Eigen::Index m = used;
    Eigen::MatrixXcd tm = t.topLeftCorner(m, m);
    tm = (0.5 * (tm + tm.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(tm);
    const Eigen::VectorXd theta = es.eigenvalues().reverse();
    const Eigen::MatrixXcd s = es.eigenvectors().rowwise().reverse();

    Eigen::MatrixXcd q_next = orthonormal_block(basis, used, remainder, r, rng);
    // residual of Ritz pair j: ||R s_j(last block)|| = ||r s_j(last block)||
    const int nk = std::min<int>(keep, static_cast<int>(m));
    Eigen::VectorXd res(nk);
    for (int j = 0; j < nk; ++j) res[j] = (r * s.col(j).tail(b)).norm();

    bool done = true;
    for (int j = 0; j < wanted; ++j)
      if (res[j] > config.tol * std::abs(theta[j])) done = false;

    if (done || restart >= config.max_restarts) {
      out.theta = theta.head(wanted);
      out.vectors = basis.leftCols(m) * s.leftCols(wanted);
      out.residuals = res.head(wanted);
      out.converged = done;
      return out;
    }

    // Thick restart: [Y_keep, Q_next] with T = [[Theta, (r S_last)^*], [r S_last, .]].
    const Eigen::MatrixXcd y = basis.leftCols(m) * s.leftCols(nk);
    basis.leftCols(nk) = y;
    basis.middleCols(nk, b) = q_next;
    t.setZero();
    t.topLeftCorner(nk, nk).diagonal() = theta.head(nk).cast<Complex>();
    const Eigen::MatrixXcd coupling = r * s.leftCols(nk).bottomRows(b);
    t.block(nk, 0, b, nk) = coupling;
    t.block(0, nk, nk, b) = coupling.adjoint();
    used = nk + b;
    projected = nk;
  }
}

}  // namespace spinorbit

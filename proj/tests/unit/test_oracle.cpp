#include <cmath>

#include "doctest.h"
#include "spinorbit/errors.hpp"
#include "spinorbit/oracle.hpp"

using namespace spinorbit;

namespace {

DiscretizationConfig small_grid(int n = 64, double width = 40.0) {
  DiscretizationConfig cfg;
  cfg.grid_points = n;
  cfg.box_width = width;
  cfg.doubling_check = false;
  return cfg;
}

}  // namespace

TEST_CASE("block Lanczos on a diagonal operator with degenerate pairs") {
  const Eigen::Index dim = 2000;
  Eigen::VectorXd d(dim);
  for (Eigen::Index i = 0; i < dim; ++i) d[i] = 1.0 / (1.0 + static_cast<double>(i / 2));  // each value twice
  const BlockOperator op = [&](const Eigen::MatrixXcd& x) -> Eigen::MatrixXcd { return d.asDiagonal() * x; };
  const auto r = block_lanczos_largest(op, dim, 6);
  REQUIRE(r.converged);
  for (int j = 0; j < 6; ++j) CHECK(r.theta[j] == doctest::Approx(1.0 / (1 + j / 2)).epsilon(1e-10));
  CHECK((r.vectors.adjoint() * r.vectors - Eigen::MatrixXcd::Identity(6, 6)).norm() <= 1e-10);
}

TEST_CASE("operator structure") {
  const auto cfg = small_grid();
  const auto op = build_hamiltonian(Coupling::mixed(1.0, 0.5), Potential::gaussian_well(0.5, 1.0), cfg);
  CHECK(op.matrix.rows() == 2 * 64 * 64);
  const SparseMatrixC adj = op.matrix.adjoint();
  CHECK((op.matrix - adj).norm() == 0.0);
  // even n: the nodes nearest the centre sit at (+-h/2, +-h/2)
  CHECK(op.min_potential == doctest::Approx(-0.5 * std::exp(-0.25 * op.h * op.h)).epsilon(1e-12));

  CHECK_THROWS_AS((void)build_hamiltonian(Coupling::custom("c", [](const Vec2& p) { return Complex(p.x * p.x); }),
                                          Potential::zero(), cfg),
                  Error);
  try {
    (void)build_hamiltonian(Coupling::custom("c", [](const Vec2&) { return Complex(0.0); }), Potential::zero(), cfg);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedCoupling);
  }
  CHECK_THROWS_AS((void)build_hamiltonian(Coupling::none(), Potential::zero(), small_grid(32)), Error);
}

TEST_CASE("free Laplacian: exact Dirichlet ground state, nothing below it") {
  const auto cfg = small_grid(64, 20.0);
  const double h = 20.0 / 65.0;
  const double exact = 2.0 * 4.0 / (h * h) * std::pow(std::sin(kPi * h / (2.0 * 20.0)), 2);
  const double kh = grid_threshold(Coupling::none(), cfg);
  CHECK(kh == doctest::Approx(exact).epsilon(1e-10));
  CHECK(kh > 0.0);
  const auto op = build_hamiltonian(Coupling::none(), Potential::zero(), cfg);
  const auto s = eigen_below_kappa(op, kh, 0.0, cfg);
  CHECK(s.count == 0);
  CHECK(s.complete);
  CHECK(s.first_above == doctest::Approx(kh).epsilon(1e-9));
}

TEST_CASE("Rashba threshold on the grid sits just above the continuum value") {
  for (double alpha : {1.0, -1.0}) {
    const auto cfg = small_grid(96);
    const auto c = Coupling::rashba(alpha);
    const double kh = grid_threshold(c, cfg);
    const auto op = build_hamiltonian(c, Potential::zero(), cfg);
    CHECK(kh >= op.symbol_min);
    CHECK(kh - (-0.25) < 0.02);
    CHECK(kh - (-0.25) > -0.01);
    // no discrete eigenvalue below the free grid threshold
    CHECK(eigen_below_kappa(op, kh, -0.25, cfg).count == 0);
  }
}

TEST_CASE("weak well without coupling: exactly one spin-degenerate level") {
  const auto cfg = small_grid(64);
  const double kh = grid_threshold(Coupling::none(), cfg);
  const auto op = build_hamiltonian(Coupling::none(), Potential::gaussian_well(0.1, 1.0), cfg);
  const auto s = eigen_below_kappa(op, kh, 0.0, cfg);
  CHECK(s.level_count == 1);
  CHECK(s.count == 2);
  REQUIRE(s.level_multiplicities.size() == 1);
  CHECK(s.level_multiplicities[0] == 2);
  for (double r : s.residuals) CHECK(r <= cfg.resid_tol);
}

TEST_CASE("spin symmetry and depth monotonicity") {
  const auto cfg = small_grid(64);
  const double kh = grid_threshold(Coupling::rashba(1.0), cfg);
  const auto plus = eigen_below_kappa(build_hamiltonian(Coupling::rashba(1.0), Potential::gaussian_well(0.5, 1.0), cfg),
                                      kh, -0.25, cfg);
  const double kh_minus = grid_threshold(Coupling::rashba(-1.0), cfg);
  const auto minus = eigen_below_kappa(
      build_hamiltonian(Coupling::rashba(-1.0), Potential::gaussian_well(0.5, 1.0), cfg), kh_minus, -0.25, cfg);
  CHECK(kh == doctest::Approx(kh_minus).epsilon(1e-10));
  REQUIRE(plus.count == minus.count);
  for (int j = 0; j < plus.count; ++j) CHECK(plus.eigenvalues[j] == doctest::Approx(minus.eigenvalues[j]).epsilon(1e-8));

  const auto deeper = eigen_below_kappa(build_hamiltonian(Coupling::rashba(1.0), Potential::gaussian_well(1.0, 1.0), cfg),
                                        kh, -0.25, cfg);
  CHECK(deeper.count >= plus.count);
  for (int j = 0; j < plus.count; ++j) CHECK(deeper.eigenvalues[j] <= plus.eigenvalues[j]);
}

TEST_CASE("grid doubling check and bound validation") {
  DiscretizationConfig cfg = small_grid(128);
  cfg.doubling_check = true;
  const auto s = solve_oracle(Coupling::rashba(1.0), Potential::gaussian_well(0.5, 1.0), -0.25, cfg);
  CHECK(s.grid_checked);
  CHECK(s.coarse_count >= 0);
  CHECK(s.drift >= 0.0);
  REQUIRE(s.count >= 2);

  BoundReport none;
  none.kappa = -0.25;
  CHECK(validate_bounds(s, none).pass);

  BoundReport report;
  report.kappa = -0.25;
  report.certified_count = 2;
  report.nu = {-0.25 - 1e-3, -0.25 - 1e-3, -0.2};
  CHECK(validate_bounds(s, report).pass);

  BoundReport corrupted = report;
  corrupted.nu[0] = report.kappa + (s.eigenvalues[0] - s.kappa_h) - 10.0 * (1e-6 + s.drift) - 1e-3;
  const auto v = validate_bounds(s, corrupted);
  CHECK_FALSE(v.pass);
  CHECK_FALSE(v.rows[0].ok);

  BoundReport too_many = report;
  too_many.certified_count = s.count + 1;
  too_many.nu.assign(static_cast<std::size_t>(s.count + 1), -0.25 - 1e-3);
  CHECK_FALSE(validate_bounds(s, too_many).pass);
}

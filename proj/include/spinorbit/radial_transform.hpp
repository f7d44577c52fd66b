#pragma once

#include <vector>

namespace spinorbit {

struct QuadratureValue {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

/// Order-zero Hankel-type integral
///   H(b, c, a, k) = \int_0^\infty r^{b+1} exp(-c r^a) J0(k r) dr,   b > -2, c > 0, a > 0.
/// k = 0 uses the closed form Gamma((b+2)/a) / (a c^{(b+2)/a}). For a < 0.8 the
/// contour is turned onto the imaginary axis, which replaces J0 by K0 and removes
/// the slowly decaying oscillation; otherwise the real axis is split into
/// half-periods of J0. Throws QuadratureFailure when the estimated relative
/// error exceeds `rel_tol` of the absolute integrand mass.
enum class HankelPath { Auto, RealAxis, Rotated };
QuadratureValue hankel(double b, double c, double a, double k, double rel_tol = 1e-9,
                       HankelPath path = HankelPath::Auto);

/// The radial trial profile f_a(x) = exp(-|x|^a / 2).
class TrialProfile {
 public:
  explicit TrialProfile(double a);

  double a() const { return a_; }
  double operator()(double r) const;
  double derivative(double r) const;

  /// ||f_a||^2 = 2 pi Gamma(2/a) / a
  double norm2() const;
  /// \int |grad f_a|^2 = pi a / 2
  double grad_norm2() const;

  /// The same two quantities by direct radial quadrature (independent of the
  /// closed forms above).
  QuadratureValue norm2_numeric() const;
  QuadratureValue grad_norm2_numeric() const;

  /// Unitary 2D transform f^_a(p) = (2 pi)^-1 \int f_a e^{-i p.x} dx
  ///                            = \int_0^\infty exp(-r^a/2) J0(p r) r dr.
  /// a = 2 returns the closed form exp(-p^2/2).
  double f_hat(double p) const;
  QuadratureValue f_hat_numeric(double p) const;

  /// Leading large-p behaviour f^_a(p) ~ C p^{-2-a} (C = 0 for even integer a).
  double f_hat_tail_coefficient() const;

  /// \int |f^_a|^2 dp by quadrature in p plus the analytic tail; Plancherel
  /// makes this equal to norm2().
  QuadratureValue plancherel_norm2() const;

 private:
  double a_;
};

/// f^_a tabulated on a logarithmic grid in p with cubic interpolation in
/// (log p, log |f^|) and the asymptotic power law beyond the last node.
class FHatTable {
 public:
  FHatTable(double a, double p_max, int nodes_per_decade = 48);

  double operator()(double p) const;
  double a() const { return a_; }
  double p_max() const { return p_max_; }
  double interpolation_error() const { return interp_error_; }

 private:
  double a_;
  double p_min_, p_max_;
  double f0_;
  double tail_c_;
  std::vector<double> s_, v_;  // log p nodes and values
  double interp_error_ = 0.0;
};

}  // namespace spinorbit

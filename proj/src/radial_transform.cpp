#include "spinorbit/radial_transform.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "spinorbit/errors.hpp"
#include "spinorbit/vec2.hpp"

namespace spinorbit {

namespace {

using boost::math::quadrature::gauss;
using boost::math::quadrature::gauss_kronrod;

// Integrand magnitudes below exp(-kDecay) relative to O(1) are dropped.
constexpr double kDecay = 46.0;

struct Accumulator {
  double value = 0.0, error = 0.0, mass = 0.0;
  template <typename F>
  void add(F&& f, double lo, double hi, unsigned depth = 12, double tol = 1e-13) {
    if (!(hi > lo)) return;
    double err = 0.0, l1 = 0.0;
    value += gauss_kronrod<double, 31>::integrate(f, lo, hi, depth, tol, &err, &l1);
    error += err;
    mass += l1;
  }
};

// Contour-rotated form, valid for 0 < a < 1:
//   (2/pi) \int_0^\infty t^{b+1} K0(k t) Re exp(i pi (b+1)/2 - c t^a e^{i pi a/2}) dt,
// integrated in s = ln t.
Accumulator hankel_rotated(double b, double c, double a, double k) {
  const double ca = c * std::cos(0.5 * kPi * a), sa = c * std::sin(0.5 * kPi * a);
  const double phase0 = 0.5 * kPi * (b + 1.0);
  const auto f = [&](double s) {
    const double t = std::exp(s);
    const double ta = std::pow(t, a);
    const double mag = std::exp((b + 2.0) * s - ca * ta);
    if (mag == 0.0) return 0.0;
    return mag * boost::math::cyl_bessel_k(0, k * t) * std::cos(phase0 - sa * ta);
  };
  // t^{b+2} below e^{-kDecay} at the lower end (log factor of K0 is harmless).
  const double s_lo = -kDecay / (b + 2.0) - 1.0;
  const double t_hi = std::min((kDecay + 5.0) / k, std::pow((kDecay + 5.0) / ca + 1.0, 1.0 / a));
  const double s_hi = std::log(t_hi);
  Accumulator acc;
  // Panel width follows the local rates of the phase (a sa t^a) and of K0 (k t).
  for (double s = s_lo; s < s_hi;) {
    const double t = std::exp(s);
    const double rate = 1.0 + a * sa * std::pow(t, a) + k * t + (b + 2.0);
    const double w = std::min(1.0, 3.0 / rate);
    acc.add(f, s, std::min(s + w, s_hi), 0);
    s += w;
  }
  const double scale = 2.0 / kPi;
  acc.value *= scale;
  acc.error *= scale;
  acc.mass *= scale;
  return acc;
}

// Radius beyond which r^{b+1} exp(-c r^a) is below e^{-kDecay}.
double decay_radius(double b, double c, double a) {
  double r = std::pow(kDecay / c, 1.0 / a);
  for (int i = 0; i < 60; ++i) {
    const double next = std::pow((kDecay + std::max(0.0, (b + 1.0) * std::log(std::max(r, 1.0)))) / c, 1.0 / a);
    if (std::abs(next - r) <= 1e-12 * r) break;
    r = next;
  }
  return r;
}

Accumulator hankel_real_axis(double b, double c, double a, double k) {
  const auto f = [&](double r) {
    if (r == 0.0) return 0.0;
    return std::pow(r, b + 1.0) * std::exp(-c * std::pow(r, a)) * boost::math::cyl_bessel_j(0, k * r);
  };
  const double r_max = decay_radius(b, c, a);
  const double width = std::min(kPi / k, 0.5 * std::pow(1.0 / c, 1.0 / a));
  Accumulator acc;
  // graded panels toward r = 0 where r^a or r^b is not smooth
  double hi = std::min(width, r_max);
  const bool smooth = std::abs(a - std::round(a)) < 1e-14 && std::abs(b - std::round(b)) < 1e-14;
  if (smooth) {
    acc.add(f, 0.0, hi, 0);
  } else {
    for (int j = 0; j < 48; ++j) {
      acc.add(f, 0.5 * hi, hi, 0);
      hi *= 0.5;
    }
    acc.add(f, 0.0, hi, 0);
  }
  const int panels = static_cast<int>(std::ceil((r_max - width) / width));
  for (int i = 0; i < panels; ++i) acc.add(f, width * (i + 1), std::min(width * (i + 2), r_max), 0);
  return acc;
}

}  // namespace

QuadratureValue hankel(double b, double c, double a, double k, double rel_tol, HankelPath path) {
  if (!(a > 0) || !(c > 0) || !(b > -2.0) || !(k >= 0))
    throw Error(ErrorKind::QuadratureFailure, "hankel: parameters out of range");
  const double nu = (b + 2.0) / a;
  if (k == 0.0) return {std::exp(std::lgamma(nu) - nu * std::log(c)) / a, 0.0};
  if (path == HankelPath::Auto) path = a < 0.8 ? HankelPath::Rotated : HankelPath::RealAxis;
  if (path == HankelPath::Rotated && !(a < 1.0))
    throw Error(ErrorKind::QuadratureFailure, "hankel: the rotated contour needs a < 1");
  const Accumulator acc =
      path == HankelPath::Rotated ? hankel_rotated(b, c, a, k) : hankel_real_axis(b, c, a, k);
  if (!std::isfinite(acc.value) || acc.error > rel_tol * std::max(acc.mass, 1e-300) + 1e-300)
    throw Error(ErrorKind::QuadratureFailure,
                "hankel transform did not reach tolerance (a=" + std::to_string(a) +
                    ", k=" + std::to_string(k) + ")");
  return {acc.value, acc.error};
}

// ---------------------------------------------------------------------------

TrialProfile::TrialProfile(double a) : a_(a) {
  if (!(a > 0) || !std::isfinite(a)) throw Error(ErrorKind::Config, "trial exponent a must be positive");
}

double TrialProfile::operator()(double r) const { return std::exp(-0.5 * std::pow(r, a_)); }

double TrialProfile::derivative(double r) const {
  if (r == 0.0) return a_ < 1.0 ? -HUGE_VAL : (a_ == 1.0 ? -0.5 : 0.0);
  return -0.5 * a_ * std::pow(r, a_ - 1.0) * (*this)(r);
}

double TrialProfile::norm2() const { return 2.0 * kPi * std::tgamma(2.0 / a_) / a_; }

double TrialProfile::grad_norm2() const { return 0.5 * kPi * a_; }

namespace {

// 2 pi \int_0^\infty g(r) r dr for integrands with an integrable algebraic
// behaviour at 0, by panels geometric in r on both sides of r = 1.
template <typename G>
QuadratureValue radial_quadrature(G&& g, double r_max) {
  Accumulator acc;
  const auto f = [&](double r) { return g(r) * r; };
  double hi = std::min(1.0, r_max);
  for (int j = 0; j < 200 && hi > 1e-300; ++j) {
    acc.add(f, 0.5 * hi, hi, 10, 1e-14);
    hi *= 0.5;
  }
  for (double lo = 1.0; lo < r_max; lo *= 2.0) acc.add(f, lo, std::min(2.0 * lo, r_max), 10, 1e-14);
  return {2.0 * kPi * acc.value, 2.0 * kPi * acc.error};
}

}  // namespace

QuadratureValue TrialProfile::norm2_numeric() const {
  const double r_max = decay_radius(1.0, 1.0, a_);
  return radial_quadrature([&](double r) { const double f = (*this)(r); return f * f; }, r_max);
}

QuadratureValue TrialProfile::grad_norm2_numeric() const {
  const double r_max = decay_radius(2.0 * a_ - 1.0, 1.0, a_);
  return radial_quadrature([&](double r) { const double d = derivative(r); return d * d; }, r_max);
}

double TrialProfile::f_hat(double p) const {
  if (a_ == 2.0) return std::exp(-0.5 * p * p);
  return f_hat_numeric(p).value;
}

QuadratureValue TrialProfile::f_hat_numeric(double p) const { return hankel(0.0, 0.5, a_, std::abs(p)); }

double TrialProfile::f_hat_tail_coefficient() const {
  // Hankel transform of r^a: 2^{a+1} Gamma(1 + a/2) / Gamma(-a/2) p^{-2-a};
  // f_a = 1 - r^a/2 + ... contributes -1/2 of that.
  const double half = 0.5 * a_;
  if (std::abs(half - std::round(half)) < 1e-14) return 0.0;
  return -0.5 * std::pow(2.0, a_ + 1.0) * std::tgamma(1.0 + half) / std::tgamma(-half);
}

QuadratureValue TrialProfile::plancherel_norm2() const {
  // 2 pi \int_0^P f^(p)^2 p dp + tail with f^ ~ C p^{-2-a}
  Accumulator acc;
  const auto f = [&](double p) { const double v = f_hat(p); return v * v * p; };
  double p_max;
  if (a_ >= 2.0) {
    p_max = std::sqrt(2.0 * kDecay) + 2.0;
  } else if (a_ >= 0.8) {
    p_max = 64.0;  // real-axis transforms get expensive at large p
  } else {
    p_max = 4096.0;
  }
  // f^ is sharply peaked at p = 0 for small a: panels geometric in p on both
  // sides of p = 1 down to where the disk [0, p_lo] holds < 1e-12 of the norm.
  const double ratio = std::sqrt(2.0);
  const double f0 = f_hat(0.0);
  const double p_lo = std::sqrt(1e-12 * norm2() / (kPi * f0 * f0));
  double hi = 1.0;
  while (hi > p_lo) {
    acc.add(f, hi / ratio, hi, 0);
    hi /= ratio;
  }
  acc.add(f, 0.0, hi, 0);
  for (double lo = 1.0; lo < p_max; lo *= ratio) acc.add(f, lo, std::min(ratio * lo, p_max), 0);
  const double c = f_hat_tail_coefficient();
  const double tail = c * c * std::pow(p_max, -2.0 * a_ - 2.0) / (2.0 * a_ + 2.0);
  return {2.0 * kPi * (acc.value + tail), 2.0 * kPi * (acc.error + tail)};
}

// ---------------------------------------------------------------------------

namespace {

double catmull_rom(const std::vector<double>& v, int i, double t) {
  const int n = static_cast<int>(v.size());
  const double p0 = v[std::max(i - 1, 0)], p1 = v[i], p2 = v[std::min(i + 1, n - 1)],
               p3 = v[std::min(i + 2, n - 1)];
  const double m1 = 0.5 * (p2 - p0), m2 = 0.5 * (p3 - p1);
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * p1 + (t3 - 2 * t2 + t) * m1 + (-2 * t3 + 3 * t2) * p2 + (t3 - t2) * m2;
}

}  // namespace

FHatTable::FHatTable(double a, double p_max, int nodes_per_decade) : a_(a), p_min_(1e-7), p_max_(p_max) {
  const TrialProfile f(a);
  f0_ = f.f_hat(0.0);
  tail_c_ = f.f_hat_tail_coefficient();
  const double s0 = std::log(p_min_), s1 = std::log(p_max_);
  const int n = std::max(8, static_cast<int>(std::ceil((s1 - s0) / std::log(10.0) * nodes_per_decade)) + 1);
  s_.resize(n);
  v_.resize(n);
  for (int i = 0; i < n; ++i) {
    s_[i] = s0 + (s1 - s0) * i / (n - 1);
    v_[i] = f.f_hat(std::exp(s_[i]));
  }
  // spot-check interpolation at cell midpoints
  for (int i = 1; i + 2 < n; i += std::max(1, n / 16)) {
    const double p = std::exp(0.5 * (s_[i] + s_[i + 1]));
    interp_error_ = std::max(interp_error_, std::abs((*this)(p) - f.f_hat(p)));
  }
}

double FHatTable::operator()(double p) const {
  p = std::abs(p);
  if (p <= p_min_) {
    const double t = p / p_min_;
    return f0_ + (v_.front() - f0_) * t * t;
  }
  if (p >= p_max_) {
    if (tail_c_ == 0.0) return 0.0;
    return v_.back() * std::pow(p / p_max_, -2.0 - a_);
  }
  const double h = s_[1] - s_[0];
  const double u = (std::log(p) - s_[0]) / h;
  const int i = std::min(static_cast<int>(u), static_cast<int>(s_.size()) - 2);
  return catmull_rom(v_, i, u - i);
}

}  // namespace spinorbit

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "spinorbit/vec2.hpp"

namespace spinorbit {

/// Fourier convention used throughout:
///   V^(p) = (2 pi)^-1 \int V(x) e^{-i p.x} dx,
/// so V^(0) = (2 pi)^-1 \int V and the small-exponent limit of the trial
/// matrix elements is exactly 2 pi e^-1 V^(p_m - p_n).
inline constexpr double kFourierNorm = 1.0 / (2.0 * kPi);

enum class WellShape { Gaussian, Circular };

/// Contributes -depth * profile(|x - center| / radius). Positive depth is a well.
struct WellTerm {
  WellShape shape = WellShape::Gaussian;
  double depth = 0.0;
  double radius = 1.0;
  Vec2 center;
};

/// Uniform row-major grid of samples V(x, y) over a rectangle.
class TabulatedPotential {
 public:
  TabulatedPotential(double x0, double y0, double dx, double dy, int nx, int ny,
                     std::vector<double> values);

  static TabulatedPotential load_csv(const std::string& path);

  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double at(int i, int j) const { return values_[static_cast<std::size_t>(j) * nx_ + i]; }
  Vec2 node(int i, int j) const { return {x0_ + i * dx_, y0_ + j * dy_}; }
  bool contains(const Vec2& x) const;

  /// Bilinear interpolation; nodes are reproduced exactly. Throws OutOfExtent.
  double operator()(const Vec2& x) const;

 private:
  double x0_, y0_, dx_, dy_;
  int nx_, ny_;
  std::vector<double> values_;
};

enum class SignCertificate { NonPositive, Indefinite, Unknown };
std::string to_string(SignCertificate s);

/// A real scalar potential well: a sum of analytic terms or a tabulated grid.
class Potential {
 public:
  static Potential zero();
  static Potential gaussian_well(double depth, double radius, Vec2 center = {});
  static Potential circular_well(double depth, double radius, Vec2 center = {});
  static Potential sum(std::vector<WellTerm> terms);
  static Potential tabulated(TabulatedPotential table);

  Potential scaled(double factor) const;
  Potential translated(const Vec2& shift) const;

  bool is_zero() const;
  bool is_tabulated() const { return table_ != nullptr; }
  const std::vector<WellTerm>& terms() const { return terms_; }
  const TabulatedPotential* table() const { return table_.get(); }
  double table_scale() const { return table_scale_; }
  Vec2 table_shift() const { return table_shift_; }
  SignCertificate sign_certificate() const;
  double min_value() const;  // infimum of V (<= 0 for wells)
  std::string describe() const;

 private:
  std::vector<WellTerm> terms_;
  std::shared_ptr<const TabulatedPotential> table_;
  double table_scale_ = 1.0;
  Vec2 table_shift_;
};

struct PotentialSample {
  double value = 0.0;
  bool out_of_extent = false;
};

double eval_potential(const Potential& v, const Vec2& x);
/// Lenient variant: outside a tabulated grid returns 0 with the flag set.
PotentialSample eval_potential_lenient(const Potential& v, const Vec2& x);

struct IntegralEstimate {
  double value = 0.0;
  double error = 0.0;
};

IntegralEstimate integral_V(const Potential& v);
Complex fourier_V(const Potential& v, const Vec2& p);

struct WeightedIntegral {
  Complex value;
  double error = 0.0;
};

/// \int V(x) g(x) dx. `bandwidth` is a hint for the angular oscillation rate
/// of g (for plane-wave factors, |k|). Presets use graded polar panels around
/// each term center; tabulated grids use the trapezoid rule. The error is the
/// difference between two resolutions.
WeightedIntegral integrate_weighted(const Potential& v, const std::function<Complex(const Vec2&)>& g,
                                    double bandwidth = 0.0);

/// Upper bound on \int_{outside [-h, h]^2} |V|.
double tail_mass(const Potential& v, double half_width);

}  // namespace spinorbit

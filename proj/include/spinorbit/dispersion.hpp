#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spinorbit/vec2.hpp"

namespace spinorbit {

using Matrix2c = Eigen::Matrix2cd;
using Spinor = Eigen::Vector2cd;

/// Uniformly sampled complex symbol A(p) read from a `px,py,ReA,ImA` table.
/// Bilinear inside the sampled rectangle, zero outside it.
class TabulatedSymbol {
 public:
  TabulatedSymbol(double px0, double py0, double dpx, double dpy, int nx, int ny,
                  std::vector<Complex> values);

  static TabulatedSymbol load_csv(const std::string& path);

  Complex operator()(const Vec2& p) const;
  bool contains(const Vec2& p) const;
  double max_radius_inside() const;

 private:
  double px0_, py0_, dpx_, dpy_;
  int nx_, ny_;
  std::vector<Complex> values_;  // row-major in py, px fastest
};

/// The off-diagonal entry A(p) of the free symbol [[p², A], [A*, p²]].
/// Units: hbar = 2m = 1, so the kinetic part is exactly p².
class Coupling {
 public:
  enum class Kind { None, Rashba, Dresselhaus, Mixed, Custom };

  static Coupling none();
  /// A(p) = alpha (p_y + i p_x)
  static Coupling rashba(double alpha);
  /// A(p) = -alpha (p_x + i p_y)
  static Coupling dresselhaus(double alpha);
  static Coupling mixed(double alpha_r, double alpha_d);
  static Coupling custom(std::string name, std::function<Complex(const Vec2&)> symbol);
  static Coupling tabulated(std::string name, TabulatedSymbol table);

  Complex operator()(const Vec2& p) const;

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double alpha_r() const { return alpha_r_; }
  double alpha_d() const { return alpha_d_; }

  /// True when A(p) = cx p_x + cy p_y (all presets, including None).
  bool is_linear() const { return kind_ != Kind::Custom; }
  Complex cx() const { return cx_; }
  Complex cy() const { return cy_; }

 private:
  Kind kind_ = Kind::None;
  std::string name_ = "none";
  double alpha_r_ = 0.0;
  double alpha_d_ = 0.0;
  Complex cx_{0.0, 0.0};
  Complex cy_{0.0, 0.0};
  std::shared_ptr<const std::function<Complex(const Vec2&)>> symbol_;
};

struct DispersionSample {
  Vec2 p;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double gap = 0.0;  // 2|A(p)|
};

Matrix2c eval_symbol(const Coupling& coupling, const Vec2& p);
DispersionSample dispersion(const Coupling& coupling, const Vec2& p);

inline double lambda_minus(const Coupling& coupling, const Vec2& p) {
  return p.norm2() - std::abs(coupling(p));
}

struct DiagonalizerOptions {
  double eps_gap_rel = 1e-12;  // eps_gap = eps_gap_rel * max(1, p²)
  bool strict = false;         // throw DegenerateGap instead of returning identity
};

struct Diagonalizer {
  Matrix2c m;  // m * H(p) * m^* = diag(lambda_plus, lambda_minus)
  bool degenerate = false;
};

Diagonalizer diagonalizer(const Coupling& coupling, const Vec2& p,
                          const DiagonalizerOptions& options = {});

/// Lower-band eigenvector (A/|A|, -1)/sqrt(2); (0, 1) where the gap closes.
Spinor lower_band_spinor(const Coupling& coupling, const Vec2& p,
                         const DiagonalizerOptions& options = {});

struct GrowthConfig {
  double margin = 0.1;         // require |A|/p² < 1 - margin
  double r_start = 1e-6;
  int angles = 720;
  int confirm_doublings = 10;  // condition must also hold on 2R, 4R, ...
  int max_doublings = 90;
};

struct GrowthCheck {
  double radius = 0.0;     // R0 beyond which lambda_minus >= margin * p²
  double max_ratio = 0.0;  // sup |A|/p² seen on the confirming circles
};

/// Locates a radius beyond which the growth condition holds; throws
/// GrowthViolation when none is found.
GrowthCheck check_growth(const Coupling& coupling, const GrowthConfig& config = {});

struct ContinuityCheck {
  double jump_coarse = 0.0;
  double jump_fine = 0.0;
  bool continuous = true;
};

/// Max neighbour jump of A on a grid of spacing h and h/2 over a disk.
ContinuityCheck check_continuity(const Coupling& coupling, double radius, int n = 128);

enum class ShapeKind { Circle, IsolatedPoints, Curve };
std::string to_string(ShapeKind shape);

struct SearchConfig {
  int angles = 720;
  int radii = 400;
  double angle_offset = 0.0;
  double tol_extremum_rel = 1e-9;   // tol = rel * max(1, |kappa|)
  double cluster_radius_rel = 1e-4; // relative to the search radius
  double circle_tol_rel = 1e-7;     // radial residual, relative to max(1, r)
  int circle_min_points = 32;
  int max_isolated = 8;
  unsigned threads = 1;
  GrowthConfig growth;
};

struct ExtremumSet {
  double kappa = 0.0;
  std::vector<Vec2> points;
  ShapeKind shape = ShapeKind::IsolatedPoints;
  double circle_radius = 0.0;
  double tol_extremum = 0.0;
  double search_radius = 0.0;
  double grid_min = 0.0;  // dense-scan minimum, >= kappa - tol_extremum
  std::optional<double> curvature_constant;

  double diameter() const;
  double distance_to(const Vec2& p) const;
};

ExtremumSet find_kappa_and_S(const Coupling& coupling, const SearchConfig& config = {});

struct QuadraticConfig {
  int angles = 360;
  int radii = 200;
  double inflation = 1.1;
  double min_distance_rel = 1e-6;
};

struct QuadraticConstant {
  double c = 0.0;              // inflated constant
  double raw_max_ratio = 0.0;  // max (lambda_minus - kappa) / dist² on the grid
  double max_violation = 0.0;  // max of lambda_minus - kappa - c dist² (<= 0 when valid)
  int samples = 0;
};

/// Estimates c with 0 <= lambda_minus(p) - kappa <= c dist(p, S)²; throws
/// C2Violation when second differences of |A| near S do not settle.
QuadraticConstant quadratic_constant(const Coupling& coupling, const ExtremumSet& extrema,
                                     const QuadraticConfig& config = {});

}  // namespace spinorbit

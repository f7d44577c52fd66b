#include "spinorbit/potential.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <sstream>

#include "spinorbit/csv.hpp"
#include "spinorbit/errors.hpp"

namespace spinorbit {

namespace {

// Radius beyond which a Gaussian term is below 1e-18 of its depth.
constexpr double kGaussianCutoff = 9.1;

double profile(const WellTerm& t, const Vec2& x) {
  const double r2 = (x - t.center).norm2() / (t.radius * t.radius);
  if (t.shape == WellShape::Gaussian) return std::exp(-0.5 * r2);
  return r2 < 1.0 ? 1.0 : 0.0;
}

// J1(z)/z with its removable singularity.
double j1_over_z(double z) {
  if (z < 1e-4) return 0.5 - z * z / 16.0;
  return boost::math::cyl_bessel_j(1, z) / z;
}

}  // namespace

// ---------------------------------------------------------------------------

TabulatedPotential::TabulatedPotential(double x0, double y0, double dx, double dy, int nx, int ny,
                                       std::vector<double> values)
    : x0_(x0), y0_(y0), dx_(dx), dy_(dy), nx_(nx), ny_(ny), values_(std::move(values)) {
  if (nx_ < 2 || ny_ < 2 || !(dx_ > 0) || !(dy_ > 0))
    throw Error(ErrorKind::Config, "tabulated potential needs a uniform grid of at least 2x2");
  if (values_.size() != static_cast<std::size_t>(nx_) * ny_)
    throw Error(ErrorKind::Config, "tabulated potential size mismatch");
}

TabulatedPotential TabulatedPotential::load_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const int cx = t.column("x"), cy = t.column("y"), cv = t.column("V");
  if (cx < 0 || cy < 0 || cv < 0 || t.header.size() != 3)
    throw Error(ErrorKind::Config, path + ": header must be x,y,V");
  if (t.rows.size() < 4) throw Error(ErrorKind::Config, path + ": too few samples");
  // Row-major: x runs fastest.
  const double x0 = t.rows[0][cx], y0 = t.rows[0][cy];
  int nx = 1;
  while (nx < static_cast<int>(t.rows.size()) && t.rows[nx][cy] == y0) ++nx;
  if (nx < 2 || t.rows.size() % nx != 0)
    throw Error(ErrorKind::Config, path + ": rows are not a row-major uniform grid");
  const int ny = static_cast<int>(t.rows.size()) / nx;
  const double dx = t.rows[1][cx] - x0;
  const double dy = ny > 1 ? t.rows[nx][cy] - y0 : 0.0;
  std::vector<double> values;
  values.reserve(t.rows.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const auto& r = t.rows[static_cast<std::size_t>(j) * nx + i];
      if (std::abs(r[cx] - (x0 + i * dx)) > 1e-6 * dx || std::abs(r[cy] - (y0 + j * dy)) > 1e-6 * dy)
        throw Error(ErrorKind::Config, path + ":" + std::to_string(j * nx + i + 2) +
                                           ": sample off the inferred uniform grid");
      values.push_back(r[cv]);
    }
  }
  return TabulatedPotential(x0, y0, dx, dy, nx, ny, std::move(values));
}

bool TabulatedPotential::contains(const Vec2& x) const {
  const double u = (x.x - x0_) / dx_, v = (x.y - y0_) / dy_;
  constexpr double slack = 1e-9;
  return u >= -slack && v >= -slack && u <= nx_ - 1 + slack && v <= ny_ - 1 + slack;
}

double TabulatedPotential::operator()(const Vec2& x) const {
  if (!contains(x)) throw Error(ErrorKind::OutOfExtent, "position outside the tabulated grid");
  double u = std::clamp((x.x - x0_) / dx_, 0.0, nx_ - 1.0);
  double v = std::clamp((x.y - y0_) / dy_, 0.0, ny_ - 1.0);
  if (std::abs(u - std::round(u)) < 1e-9) u = std::round(u);
  if (std::abs(v - std::round(v)) < 1e-9) v = std::round(v);
  const int i = std::min(static_cast<int>(u), nx_ - 2);
  const int j = std::min(static_cast<int>(v), ny_ - 2);
  const double fu = u - i, fv = v - j;
  if (fu == 0.0 && fv == 0.0) return at(i, j);
  if (fu == 1.0 && fv == 0.0) return at(i + 1, j);
  if (fu == 0.0 && fv == 1.0) return at(i, j + 1);
  if (fu == 1.0 && fv == 1.0) return at(i + 1, j + 1);
  return (1 - fu) * (1 - fv) * at(i, j) + fu * (1 - fv) * at(i + 1, j) +
         (1 - fu) * fv * at(i, j + 1) + fu * fv * at(i + 1, j + 1);
}

// ---------------------------------------------------------------------------

std::string to_string(SignCertificate s) {
  switch (s) {
    case SignCertificate::NonPositive: return "NonPositive";
    case SignCertificate::Indefinite: return "Indefinite";
    case SignCertificate::Unknown: return "Unknown";
  }
  return "?";
}

Potential Potential::zero() { return Potential{}; }

Potential Potential::gaussian_well(double depth, double radius, Vec2 center) {
  return sum({WellTerm{WellShape::Gaussian, depth, radius, center}});
}

Potential Potential::circular_well(double depth, double radius, Vec2 center) {
  return sum({WellTerm{WellShape::Circular, depth, radius, center}});
}

Potential Potential::sum(std::vector<WellTerm> terms) {
  for (const auto& t : terms)
    if (!(t.radius > 0) || !std::isfinite(t.depth))
      throw Error(ErrorKind::Config, "well radius must be positive and depth finite");
  Potential v;
  v.terms_ = std::move(terms);
  return v;
}

Potential Potential::tabulated(TabulatedPotential table) {
  Potential v;
  v.table_ = std::make_shared<const TabulatedPotential>(std::move(table));
  return v;
}

Potential Potential::scaled(double factor) const {
  Potential v = *this;
  for (auto& t : v.terms_) t.depth *= factor;
  v.table_scale_ *= factor;
  return v;
}

Potential Potential::translated(const Vec2& shift) const {
  Potential v = *this;
  for (auto& t : v.terms_) t.center += shift;
  v.table_shift_ += shift;
  return v;
}

bool Potential::is_zero() const {
  if (table_) {
    if (table_scale_ == 0.0) return true;
    for (int j = 0; j < table_->ny(); ++j)
      for (int i = 0; i < table_->nx(); ++i)
        if (table_->at(i, j) != 0.0) return false;
    return true;
  }
  return std::all_of(terms_.begin(), terms_.end(), [](const WellTerm& t) { return t.depth == 0.0; });
}

SignCertificate Potential::sign_certificate() const {
  if (table_) {
    bool pos = false, neg = false;
    for (int j = 0; j < table_->ny(); ++j)
      for (int i = 0; i < table_->nx(); ++i) {
        const double s = table_scale_ * table_->at(i, j);
        pos = pos || s > 0;
        neg = neg || s < 0;
      }
    return pos ? SignCertificate::Indefinite : SignCertificate::NonPositive;
  }
  const bool any_barrier =
      std::any_of(terms_.begin(), terms_.end(), [](const WellTerm& t) { return t.depth < 0; });
  return any_barrier ? SignCertificate::Indefinite : SignCertificate::NonPositive;
}

double Potential::min_value() const {
  if (table_) {
    double m = 0.0;
    for (int j = 0; j < table_->ny(); ++j)
      for (int i = 0; i < table_->nx(); ++i) m = std::min(m, table_scale_ * table_->at(i, j));
    return m;
  }
  // Every term peaks at its own center; summing positive depths bounds the minimum.
  double m = 0.0;
  for (const auto& t : terms_) m -= std::max(0.0, t.depth);
  return m;
}

std::string Potential::describe() const {
  std::ostringstream os;
  if (table_) {
    os << "tabulated(" << table_->nx() << "x" << table_->ny() << ")";
    return os.str();
  }
  if (is_zero()) return "zero";
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    os << (i ? " + " : "") << (t.shape == WellShape::Gaussian ? "gaussian" : "circular") << "(U="
       << t.depth << ",R=" << t.radius << ")";
  }
  return os.str();
}

// ---------------------------------------------------------------------------

PotentialSample eval_potential_lenient(const Potential& v, const Vec2& x) {
  if (const auto* t = v.table()) {
    const Vec2 local = x - v.table_shift();
    if (!t->contains(local)) return {0.0, true};
    return {v.table_scale() * (*t)(local), false};
  }
  double sum = 0.0;
  for (const auto& term : v.terms()) sum -= term.depth * profile(term, x);
  return {sum, false};
}

double eval_potential(const Potential& v, const Vec2& x) {
  const PotentialSample s = eval_potential_lenient(v, x);
  if (s.out_of_extent) throw Error(ErrorKind::OutOfExtent, "position outside the tabulated grid");
  return s.value;
}

namespace {

// Trapezoid sum over a tabulated grid using every `stride`-th node.
template <typename F>
auto trapezoid(const TabulatedPotential& t, int stride, F&& f) {
  using R = decltype(f(0, 0));
  R acc{};
  const int ni = (t.nx() - 1) / stride, nj = (t.ny() - 1) / stride;
  for (int jj = 0; jj <= nj; ++jj) {
    const double wy = (jj == 0 || jj == nj) ? 0.5 : 1.0;
    for (int ii = 0; ii <= ni; ++ii) {
      const double wx = (ii == 0 || ii == ni) ? 0.5 : 1.0;
      acc += wx * wy * f(ii * stride, jj * stride);
    }
  }
  return acc * (t.dx() * t.dy() * stride * stride);
}

double boundary_mass(const TabulatedPotential& t, double scale) {
  double m = 0.0;
  for (int i = 0; i < t.nx(); ++i) m += std::abs(t.at(i, 0)) + std::abs(t.at(i, t.ny() - 1));
  for (int j = 1; j + 1 < t.ny(); ++j) m += std::abs(t.at(0, j)) + std::abs(t.at(t.nx() - 1, j));
  return std::abs(scale) * m * t.dx() * t.dy();
}

}  // namespace

IntegralEstimate integral_V(const Potential& v) {
  if (const auto* t = v.table()) {
    const auto node = [&](int i, int j) { return t->at(i, j); };
    const double fine = v.table_scale() * trapezoid(*t, 1, node);
    double err = boundary_mass(*t, v.table_scale());
    if ((t->nx() - 1) % 2 == 0 && (t->ny() - 1) % 2 == 0) {
      const double coarse = v.table_scale() * trapezoid(*t, 2, node);
      err += std::abs(fine - coarse) / 3.0;
    }
    return {fine, err};
  }
  double sum = 0.0;
  for (const auto& term : v.terms()) {
    const double r2 = term.radius * term.radius;
    sum -= term.depth * (term.shape == WellShape::Gaussian ? 2.0 * kPi * r2 : kPi * r2);
  }
  return {sum, 0.0};
}

Complex fourier_V(const Potential& v, const Vec2& p) {
  if (const auto* t = v.table()) {
    // Direct transform of the trapezoid rule, separable in x and y.
    std::vector<Complex> ex(t->nx()), ey(t->ny());
    for (int i = 0; i < t->nx(); ++i) {
      const double w = (i == 0 || i == t->nx() - 1) ? 0.5 : 1.0;
      ex[i] = w * std::polar(1.0, -p.x * t->node(i, 0).x);
    }
    for (int j = 0; j < t->ny(); ++j) {
      const double w = (j == 0 || j == t->ny() - 1) ? 0.5 : 1.0;
      ey[j] = w * std::polar(1.0, -p.y * t->node(0, j).y);
    }
    Complex acc{};
    for (int j = 0; j < t->ny(); ++j) {
      Complex row{};
      for (int i = 0; i < t->nx(); ++i) row += t->at(i, j) * ex[i];
      acc += row * ey[j];
    }
    const Complex shift = std::polar(1.0, -dot(p, v.table_shift()));
    return kFourierNorm * v.table_scale() * t->dx() * t->dy() * acc * shift;
  }
  Complex sum{};
  const double k = p.norm();
  for (const auto& term : v.terms()) {
    const double r2 = term.radius * term.radius;
    const double radial = term.shape == WellShape::Gaussian
                              ? r2 * std::exp(-0.5 * r2 * k * k)
                              : r2 * j1_over_z(k * term.radius);
    sum -= term.depth * radial * std::polar(1.0, -dot(p, term.center));
  }
  return sum;
}

namespace {

// Graded polar rule around `center` on [0, rmax]: panels halve toward the
// center so cusps of the weight at the center stay resolved.
template <typename F>
Complex polar_rule(const Vec2& center, double rmax, int angles, int grading, F&& f) {
  using boost::math::quadrature::gauss;
  Complex total{};
  double hi = rmax;
  for (int k = 0; k <= grading; ++k) {
    const double lo = k == grading ? 0.0 : 0.5 * hi;
    const auto ring = [&](double r) {
      Complex acc{};
      for (int i = 0; i < angles; ++i) {
        const double phi = 2.0 * kPi * (i + 0.5) / angles;
        acc += f(center + Vec2::polar(r, phi));
      }
      return acc * (2.0 * kPi / angles) * r;
    };
    total += gauss<double, 20>::integrate(ring, lo, hi);
    hi = lo;
  }
  return total;
}

}  // namespace

WeightedIntegral integrate_weighted(const Potential& v,
                                    const std::function<Complex(const Vec2&)>& g,
                                    double bandwidth) {
  if (const auto* t = v.table()) {
    const auto node = [&](int i, int j) {
      return Complex(t->at(i, j)) * g(t->node(i, j) + v.table_shift());
    };
    const Complex fine = v.table_scale() * trapezoid(*t, 1, node);
    double err = 0.0;
    if ((t->nx() - 1) % 2 == 0 && (t->ny() - 1) % 2 == 0)
      err = std::abs(fine - v.table_scale() * trapezoid(*t, 2, node)) / 3.0;
    return {fine, err + boundary_mass(*t, v.table_scale())};
  }
  const auto rule = [&](int level) {
    Complex sum{};
    for (const auto& term : v.terms()) {
      if (term.depth == 0.0) continue;
      const double rmax = term.radius * (term.shape == WellShape::Gaussian ? kGaussianCutoff : 1.0);
      const double reach = rmax + term.center.norm();
      const int angles = level * (32 + 2 * static_cast<int>(std::ceil(bandwidth * reach)));
      const auto integrand = [&](const Vec2& x) {
        return -term.depth * profile(term, x) * g(x);
      };
      if (term.shape == WellShape::Gaussian) {
        sum += polar_rule(term.center, rmax, angles, 24 * level, integrand);
      } else {
        sum += polar_rule(term.center, rmax, angles, 24 * level,
                          [&](const Vec2& x) { return -term.depth * g(x); });
      }
    }
    return sum;
  };
  const Complex coarse = rule(1);
  const Complex fine = rule(2);
  return {fine, std::abs(fine - coarse)};
}

double tail_mass(const Potential& v, double half_width) {
  if (const auto* t = v.table()) {
    double m = 0.0;
    for (int j = 0; j < t->ny(); ++j)
      for (int i = 0; i < t->nx(); ++i) {
        const Vec2 x = t->node(i, j) + v.table_shift();
        if (std::abs(x.x) > half_width || std::abs(x.y) > half_width)
          m += std::abs(v.table_scale() * t->at(i, j)) * t->dx() * t->dy();
      }
    return m;
  }
  double m = 0.0;
  for (const auto& term : v.terms()) {
    const double rho = half_width - term.center.norm();
    const double r2 = term.radius * term.radius;
    const double a = std::abs(term.depth);
    if (term.shape == WellShape::Gaussian)
      m += rho <= 0 ? 2.0 * kPi * a * r2 : 2.0 * kPi * a * r2 * std::exp(-0.5 * rho * rho / r2);
    else
      m += rho >= term.radius ? 0.0 : kPi * a * r2;
  }
  return m;
}

}  // namespace spinorbit

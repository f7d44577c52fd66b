#include "spinorbit/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "spinorbit/csv.hpp"
#include "spinorbit/errors.hpp"
#include "spinorbit/parallel.hpp"

namespace spinorbit {

// ---------------------------------------------------------------------------
// TabulatedSymbol

TabulatedSymbol::TabulatedSymbol(double px0, double py0, double dpx, double dpy, int nx, int ny,
                                 std::vector<Complex> values)
    : px0_(px0), py0_(py0), dpx_(dpx), dpy_(dpy), nx_(nx), ny_(ny), values_(std::move(values)) {
  if (nx_ < 2 || ny_ < 2 || dpx_ <= 0 || dpy_ <= 0)
    throw Error(ErrorKind::Config, "tabulated symbol needs at least a 2x2 grid");
  if (values_.size() != static_cast<std::size_t>(nx_) * ny_)
    throw Error(ErrorKind::Config, "tabulated symbol size mismatch");
}

namespace {

// Sorted distinct coordinates of one column, validated for uniform spacing.
std::vector<double> uniform_axis(const CsvTable& t, int col, const std::string& what) {
  std::vector<double> v;
  v.reserve(t.rows.size());
  for (const auto& r : t.rows) v.push_back(r[col]);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  if (v.size() < 2) throw Error(ErrorKind::Config, what + ": fewer than two distinct values");
  const double step = (v.back() - v.front()) / static_cast<double>(v.size() - 1);
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i] - v[i - 1] - step) > 1e-6 * step)
      throw Error(ErrorKind::Config, what + ": grid is not uniform");
  return v;
}

}  // namespace

TabulatedSymbol TabulatedSymbol::load_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const int cpx = t.column("px"), cpy = t.column("py"), cre = t.column("ReA"),
            cim = t.column("ImA");
  if (cpx < 0 || cpy < 0 || cre < 0 || cim < 0)
    throw Error(ErrorKind::Config, path + ": header must be px,py,ReA,ImA");
  const auto xs = uniform_axis(t, cpx, path + " px");
  const auto ys = uniform_axis(t, cpy, path + " py");
  const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());
  if (t.rows.size() != static_cast<std::size_t>(nx) * ny)
    throw Error(ErrorKind::Config, path + ": expected a full " + std::to_string(nx) + "x" +
                                       std::to_string(ny) + " grid");
  const double dx = (xs.back() - xs.front()) / (nx - 1);
  const double dy = (ys.back() - ys.front()) / (ny - 1);
  std::vector<Complex> values(t.rows.size());
  std::vector<char> seen(t.rows.size(), 0);
  for (const auto& r : t.rows) {
    const int i = static_cast<int>(std::lround((r[cpx] - xs.front()) / dx));
    const int j = static_cast<int>(std::lround((r[cpy] - ys.front()) / dy));
    const std::size_t k = static_cast<std::size_t>(j) * nx + i;
    if (seen[k]) throw Error(ErrorKind::Config, path + ": duplicate grid node");
    seen[k] = 1;
    values[k] = {r[cre], r[cim]};
  }
  return TabulatedSymbol(xs.front(), ys.front(), dx, dy, nx, ny, std::move(values));
}

bool TabulatedSymbol::contains(const Vec2& p) const {
  const double u = (p.x - px0_) / dpx_, v = (p.y - py0_) / dpy_;
  return u >= 0 && v >= 0 && u <= nx_ - 1 && v <= ny_ - 1;
}

double TabulatedSymbol::max_radius_inside() const {
  const double x1 = px0_ + dpx_ * (nx_ - 1), y1 = py0_ + dpy_ * (ny_ - 1);
  return std::max(0.0, std::min({-px0_, -py0_, x1, y1}));
}

Complex TabulatedSymbol::operator()(const Vec2& p) const {
  if (!contains(p)) return {0.0, 0.0};
  const double u = (p.x - px0_) / dpx_, v = (p.y - py0_) / dpy_;
  const int i = std::min(static_cast<int>(u), nx_ - 2);
  const int j = std::min(static_cast<int>(v), ny_ - 2);
  const double fu = u - i, fv = v - j;
  const auto at = [&](int a, int b) { return values_[static_cast<std::size_t>(b) * nx_ + a]; };
  return (1 - fu) * (1 - fv) * at(i, j) + fu * (1 - fv) * at(i + 1, j) +
         (1 - fu) * fv * at(i, j + 1) + fu * fv * at(i + 1, j + 1);
}

// ---------------------------------------------------------------------------
// Coupling

Coupling Coupling::none() { return Coupling{}; }

Coupling Coupling::rashba(double alpha) {
  Coupling c;
  c.kind_ = Kind::Rashba;
  c.name_ = "rashba";
  c.alpha_r_ = alpha;
  c.cx_ = {0.0, alpha};
  c.cy_ = {alpha, 0.0};
  return c;
}

Coupling Coupling::dresselhaus(double alpha) {
  Coupling c;
  c.kind_ = Kind::Dresselhaus;
  c.name_ = "dresselhaus";
  c.alpha_d_ = alpha;
  c.cx_ = {-alpha, 0.0};
  c.cy_ = {0.0, -alpha};
  return c;
}

Coupling Coupling::mixed(double alpha_r, double alpha_d) {
  Coupling c;
  c.kind_ = Kind::Mixed;
  c.name_ = "mixed";
  c.alpha_r_ = alpha_r;
  c.alpha_d_ = alpha_d;
  c.cx_ = Complex{-alpha_d, alpha_r};
  c.cy_ = Complex{alpha_r, -alpha_d};
  return c;
}

Coupling Coupling::custom(std::string name, std::function<Complex(const Vec2&)> symbol) {
  Coupling c;
  c.kind_ = Kind::Custom;
  c.name_ = std::move(name);
  c.symbol_ = std::make_shared<const std::function<Complex(const Vec2&)>>(std::move(symbol));
  return c;
}

Coupling Coupling::tabulated(std::string name, TabulatedSymbol table) {
  auto shared = std::make_shared<const TabulatedSymbol>(std::move(table));
  return custom(std::move(name), [shared](const Vec2& p) { return (*shared)(p); });
}

Complex Coupling::operator()(const Vec2& p) const {
  if (kind_ != Kind::Custom) return cx_ * p.x + cy_ * p.y;
  Complex a;
  try {
    a = (*symbol_)(p);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::Evaluation, name_ + ": " + e.what());
  }
  if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
    throw Error(ErrorKind::Evaluation, name_ + ": non-finite symbol value");
  return a;
}

// ---------------------------------------------------------------------------
// Pointwise quantities

Matrix2c eval_symbol(const Coupling& coupling, const Vec2& p) {
  const Complex a = coupling(p);
  const double k = p.norm2();
  Matrix2c h;
  h << k, a, std::conj(a), k;
  return h;
}

DispersionSample dispersion(const Coupling& coupling, const Vec2& p) {
  const double k = p.norm2();
  const double g = std::abs(coupling(p));
  return {p, k + g, k - g, 2.0 * g};
}

Diagonalizer diagonalizer(const Coupling& coupling, const Vec2& p,
                          const DiagonalizerOptions& options) {
  const Complex a = coupling(p);
  const double mod = std::abs(a);
  const double eps = options.eps_gap_rel * std::max(1.0, p.norm2());
  if (mod < eps) {
    if (options.strict)
      throw Error(ErrorKind::DegenerateGap, "|A(p)| below eps_gap at p=(" +
                                                std::to_string(p.x) + "," + std::to_string(p.y) + ")");
    return {Matrix2c::Identity(), true};
  }
  const Complex w = std::conj(a / mod);
  const double s = 1.0 / std::sqrt(2.0);
  Matrix2c m;
  m << s * w, s, s * w, -s;
  return {m, false};
}

Spinor lower_band_spinor(const Coupling& coupling, const Vec2& p,
                         const DiagonalizerOptions& options) {
  const Diagonalizer d = diagonalizer(coupling, p, options);
  return d.m.row(1).adjoint();
}

// ---------------------------------------------------------------------------
// Growth and continuity

namespace {

double circle_ratio(const Coupling& coupling, double r, int angles) {
  double worst = 0.0;
  for (int i = 0; i < angles; ++i) {
    const Vec2 p = Vec2::polar(r, 2.0 * kPi * i / angles);
    worst = std::max(worst, std::abs(coupling(p)) / (r * r));
  }
  return worst;
}

}  // namespace

GrowthCheck check_growth(const Coupling& coupling, const GrowthConfig& config) {
  const double limit = 1.0 - config.margin;
  double r = config.r_start;
  for (int k = 0; k < config.max_doublings; ++k, r *= 2.0) {
    double worst = 0.0;
    bool ok = true;
    double rr = r;
    for (int j = 0; j <= config.confirm_doublings && ok; ++j, rr *= 2.0) {
      const double ratio = circle_ratio(coupling, rr, config.angles);
      worst = std::max(worst, ratio);
      ok = ratio < limit;
    }
    if (ok) return {r, worst};
  }
  throw Error(ErrorKind::GrowthViolation,
              "|A(p)|/p^2 stays above " + std::to_string(limit) + " up to radius " +
                  std::to_string(r));
}

ContinuityCheck check_continuity(const Coupling& coupling, double radius, int n) {
  const auto max_jump = [&](int m) {
    const double h = 2.0 * radius / m;
    double jump = 0.0;
    std::vector<Complex> row(m + 1), prev(m + 1);
    for (int j = 0; j <= m; ++j) {
      for (int i = 0; i <= m; ++i) {
        row[i] = coupling({-radius + i * h, -radius + j * h});
        if (i > 0) jump = std::max(jump, std::abs(row[i] - row[i - 1]));
        if (j > 0) jump = std::max(jump, std::abs(row[i] - prev[i]));
      }
      std::swap(row, prev);
    }
    return jump;
  };
  ContinuityCheck out;
  out.jump_coarse = max_jump(n);
  out.jump_fine = max_jump(2 * n);
  out.continuous = out.jump_fine <= 0.75 * out.jump_coarse + 1e-12;
  return out;
}

// ---------------------------------------------------------------------------
// Minimization of lambda_minus

namespace {

struct Minimum {
  Vec2 x;
  double f = 0.0;
};

// Quasi-Newton with central-difference gradients and Armijo backtracking.
template <typename F>
Minimum minimize_bfgs(const F& f, Vec2 x, double h, int max_iter = 200) {
  const auto grad = [&](const Vec2& p) {
    return Eigen::Vector2d((f(p + Vec2{h, 0}) - f(p - Vec2{h, 0})) / (2 * h),
                           (f(p + Vec2{0, h}) - f(p - Vec2{0, h})) / (2 * h));
  };
  Eigen::Matrix2d hinv = 0.5 * Eigen::Matrix2d::Identity();
  double fx = f(x);
  Eigen::Vector2d g = grad(x);
  for (int it = 0; it < max_iter; ++it) {
    if (g.norm() == 0.0) break;
    Eigen::Vector2d d = -hinv * g;
    if (d.dot(g) >= 0) {
      hinv = 0.5 * Eigen::Matrix2d::Identity();
      d = -hinv * g;
    }
    double t = 1.0;
    Vec2 xn;
    double fn = fx;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      xn = x + Vec2{t * d.x(), t * d.y()};
      fn = f(xn);
      if (fn <= fx + 1e-4 * t * g.dot(d)) {
        moved = true;
        break;
      }
    }
    if (!moved || fn > fx) break;
    const Eigen::Vector2d s(xn.x - x.x, xn.y - x.y);
    const Eigen::Vector2d gn = grad(xn);
    const Eigen::Vector2d y = gn - g;
    x = xn;
    const double df = fx - fn;
    fx = fn;
    g = gn;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const Eigen::Matrix2d i2 = Eigen::Matrix2d::Identity();
      hinv = (i2 - rho * s * y.transpose()) * hinv * (i2 - rho * y * s.transpose()) +
             rho * s * s.transpose();
    }
    if (s.norm() < 1e-15 * (1.0 + std::hypot(x.x, x.y)) && df <= 0) break;
  }
  return {x, fx};
}

}  // namespace

std::string to_string(ShapeKind shape) {
  switch (shape) {
    case ShapeKind::Circle: return "Circle";
    case ShapeKind::IsolatedPoints: return "IsolatedPoints";
    case ShapeKind::Curve: return "Curve";
  }
  return "?";
}

double ExtremumSet::diameter() const {
  if (shape == ShapeKind::Circle) return 2.0 * circle_radius;
  double d = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) d = std::max(d, distance(points[i], points[j]));
  return d;
}

double ExtremumSet::distance_to(const Vec2& p) const {
  if (shape == ShapeKind::Circle) return std::abs(p.norm() - circle_radius);
  double d = std::numeric_limits<double>::infinity();
  for (const auto& q : points) d = std::min(d, distance(p, q));
  return d;
}

ExtremumSet find_kappa_and_S(const Coupling& coupling, const SearchConfig& config) {
  const GrowthCheck growth = check_growth(coupling, config.growth);
  const double radius = growth.radius;
  const int na = config.angles, nr = config.radii;
  const auto lm = [&](const Vec2& p) { return lambda_minus(coupling, p); };

  // Coarse polar scan; one radial minimum per ray.
  std::vector<Vec2> start(na);
  std::vector<double> ray_min(na);
  parallel_for(static_cast<std::size_t>(na), config.threads, [&](std::size_t i) {
    const double phi = config.angle_offset + 2.0 * kPi * static_cast<double>(i) / na;
    double best = std::numeric_limits<double>::infinity();
    Vec2 arg;
    for (int j = 0; j <= nr; ++j) {
      const Vec2 p = Vec2::polar(radius * j / nr, phi);
      const double v = lm(p);
      if (v < best) {
        best = v;
        arg = p;
      }
    }
    start[i] = arg;
    ray_min[i] = best;
  });

  std::vector<Minimum> refined(na);
  const double h = 1e-5 * radius;
  parallel_for(static_cast<std::size_t>(na), config.threads,
               [&](std::size_t i) { refined[i] = minimize_bfgs(lm, start[i], h); });

  ExtremumSet out;
  out.search_radius = radius;
  out.grid_min = *std::min_element(ray_min.begin(), ray_min.end());
  out.kappa = out.grid_min;
  for (const auto& m : refined) out.kappa = std::min(out.kappa, m.f);
  out.tol_extremum = config.tol_extremum_rel * std::max(1.0, std::abs(out.kappa));

  // Cluster the refined minimizers that reach kappa.
  const double cluster_radius = config.cluster_radius_rel * radius;
  std::vector<Minimum> reps;
  for (const auto& m : refined) {
    if (m.f > out.kappa + out.tol_extremum) continue;
    auto it = std::find_if(reps.begin(), reps.end(),
                           [&](const Minimum& r) { return distance(r.x, m.x) < cluster_radius; });
    if (it == reps.end())
      reps.push_back(m);
    else if (m.f < it->f)
      *it = m;
  }
  std::sort(reps.begin(), reps.end(), [](const Minimum& a, const Minimum& b) {
    const double ta = a.x.angle(), tb = b.x.angle();
    return ta != tb ? ta < tb : a.x.norm2() < b.x.norm2();
  });
  for (const auto& r : reps) out.points.push_back(r.x);

  out.shape = static_cast<int>(reps.size()) <= config.max_isolated ? ShapeKind::IsolatedPoints
                                                                   : ShapeKind::Curve;
  if (static_cast<int>(reps.size()) >= config.circle_min_points) {
    double mean = 0.0;
    for (const auto& r : reps) mean += r.x.norm();
    mean /= static_cast<double>(reps.size());
    double resid = 0.0;
    for (const auto& r : reps) resid = std::max(resid, std::abs(r.x.norm() - mean));
    if (resid < config.circle_tol_rel * std::max(1.0, mean)) {
      out.shape = ShapeKind::Circle;
      out.circle_radius = mean;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quadratic constant

namespace {

// Second difference of |A| along `dir`, at step h.
double second_difference(const Coupling& c, const Vec2& p, const Vec2& dir, double h) {
  const double f0 = std::abs(c(p));
  return (std::abs(c(p + h * dir)) - 2.0 * f0 + std::abs(c(p - h * dir))) / (h * h);
}

void check_c2(const Coupling& coupling, const ExtremumSet& s) {
  std::vector<Vec2> probes;
  if (s.shape == ShapeKind::Circle) {
    for (int i = 0; i < 8; ++i) probes.push_back(Vec2::polar(s.circle_radius, 2.0 * kPi * i / 8));
  } else {
    const std::size_t step = std::max<std::size_t>(1, s.points.size() / 8);
    for (std::size_t i = 0; i < s.points.size(); i += step) probes.push_back(s.points[i]);
  }
  const double scale = std::max(s.diameter(), 1e-2 * s.search_radius);
  const Vec2 dirs[] = {{1, 0}, {0, 1}, {std::sqrt(0.5), std::sqrt(0.5)}};
  for (const auto& p : probes) {
    for (const auto& d : dirs) {
      double h = 1e-2 * scale;
      double prev = second_difference(coupling, p, d, h);
      double prev_delta = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 3; ++k) {
        h *= 0.5;
        const double cur = second_difference(coupling, p, d, h);
        const double delta = std::abs(cur - prev);
        const double noise = 1e-6 * (1.0 + std::abs(cur)) +
                             64.0 * 1e-16 * (1.0 + std::abs(coupling(p))) / (h * h);
        if (delta > noise && delta > 0.6 * prev_delta)
          throw Error(ErrorKind::C2Violation,
                      "second differences of |A| do not settle near (" + std::to_string(p.x) +
                          "," + std::to_string(p.y) + ")");
        prev_delta = delta;
        prev = cur;
      }
    }
  }
}

}  // namespace

QuadraticConstant quadratic_constant(const Coupling& coupling, const ExtremumSet& extrema,
                                     const QuadraticConfig& config) {
  check_c2(coupling, extrema);
  const double radius = extrema.search_radius;
  const double dmin = config.min_distance_rel * std::max(radius, 1e-300);

  std::vector<Vec2> grid;
  grid.reserve(static_cast<std::size_t>(config.angles) * (config.radii + 1));
  for (int i = 0; i < config.angles; ++i) {
    const double phi = 2.0 * kPi * (i + 0.5) / config.angles;
    for (int j = 0; j <= config.radii; ++j)
      grid.push_back(Vec2::polar(radius * j / config.radii, phi));
  }
  // Dense geometric offsets around S, where the ratio is most delicate.
  std::vector<Vec2> anchors = extrema.points;
  if (extrema.shape == ShapeKind::Circle) {
    anchors.clear();
    for (int i = 0; i < 64; ++i) anchors.push_back(Vec2::polar(extrema.circle_radius, 2.0 * kPi * i / 64));
  }
  for (const auto& a : anchors) {
    for (int k = 0; k < 16; ++k) {
      const double phi = 2.0 * kPi * k / 16;
      for (double d = 1e-3 * radius; d <= radius; d *= 2.0) grid.push_back(a + Vec2::polar(d, phi));
    }
  }

  QuadraticConstant out;
  std::vector<std::pair<double, double>> excess_and_d2;
  excess_and_d2.reserve(grid.size());
  for (const auto& p : grid) {
    const double d = extrema.distance_to(p);
    const double excess = lambda_minus(coupling, p) - extrema.kappa;
    excess_and_d2.emplace_back(excess, d * d);
    if (d < dmin) continue;
    out.raw_max_ratio = std::max(out.raw_max_ratio, excess / (d * d));
  }
  out.c = config.inflation * out.raw_max_ratio;
  out.samples = static_cast<int>(grid.size());
  out.max_violation = -std::numeric_limits<double>::infinity();
  for (const auto& [excess, d2] : excess_and_d2)
    out.max_violation = std::max(out.max_violation, excess - out.c * d2);
  return out;
}

}  // namespace spinorbit

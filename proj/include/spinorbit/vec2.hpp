#pragma once

#include <cmath>
#include <complex>

namespace spinorbit {

using Complex = std::complex<double>;

/// Plain 2-vector used for both momenta and positions.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;

  constexpr double norm2() const { return x * x + y * y; }
  double norm() const { return std::hypot(x, y); }
  double angle() const { return std::atan2(y, x); }

  static Vec2 polar(double r, double phi) { return {r * std::cos(phi), r * std::sin(phi)}; }
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace spinorbit

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "transonic/errors.hpp"

namespace transonic {

inline constexpr double kPi = 3.14159265358979323846;

// small fixed-size linear algebra for the 2D solver (polar frame components)
struct Vec2 {
  double x = 0.0, y = 0.0;

  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::sqrt(norm2(a)); }

struct Mat2 {
  // row-major: [[a, b], [c, d]]
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  double det() const { return a * d - b * c; }
  Mat2 transpose() const { return {a, c, b, d}; }
  Mat2 inverse() const {
    double dt = det();
    if (std::abs(dt) < 1e-300) throw ValidationError("singular 2x2 matrix");
    return {d / dt, -b / dt, -c / dt, a / dt};
  }
};

inline Vec2 operator*(const Mat2& m, Vec2 v) {
  return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}
inline Mat2 operator*(const Mat2& m, const Mat2& n) {
  return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
          m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}
inline Mat2 operator*(double s, const Mat2& m) {
  return {s * m.a, s * m.b, s * m.c, s * m.d};
}
inline Mat2 operator+(const Mat2& m, const Mat2& n) {
  return {m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d};
}
inline Mat2 operator-(const Mat2& m, const Mat2& n) {
  return {m.a - n.a, m.b - n.b, m.c - n.c, m.d - n.d};
}
inline Mat2 outer(Vec2 u, Vec2 v) {
  return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y};
}

// sampled smooth function of one variable with cubic Hermite evaluation
class CubicCurve {
 public:
  CubicCurve() = default;
  CubicCurve(std::vector<double> x, std::vector<double> y, std::vector<double> dy);

  double operator()(double x) const;
  double deriv(double x) const;
  double x_lo() const { return x_.front(); }
  double x_hi() const { return x_.back(); }
  bool empty() const { return x_.empty(); }

 private:
  std::size_t cell(double x) const;
  std::vector<double> x_, y_, d_;
};

// 8-point Gauss-Legendre rule mapped to [0,1]
struct Quad8 {
  std::array<double, 8> t;
  std::array<double, 8> w;
};
const Quad8& gauss8();

// quintic smoothstep: 0 for t<=0, 1 for t>=1, C^2 join
inline double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}
inline double smoothstep5_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

template <class F>
void parallel_for(int n, bool parallel, F&& body) {
#ifdef _OPENMP
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
#else
  (void)parallel;
#endif
  for (int i = 0; i < n; ++i) body(i);
}

}  // namespace transonic

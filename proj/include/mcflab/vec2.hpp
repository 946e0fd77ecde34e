#pragma once
#include <cmath>

namespace mcflab {

// Plain 2-D vector. Doubles throughout; everything in this codebase is
// either a planar point (x, y) or an axisymmetric profile point (x, r).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
// z-component of the 3-D cross product; twice the signed area of the
// triangle (0, a, b).
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Rotate 90 degrees counterclockwise / clockwise.
inline Vec2 perp_ccw(const Vec2& v) { return {-v.y, v.x}; }
inline Vec2 perp_cw(const Vec2& v) { return {v.y, -v.x}; }

}  // namespace mcflab

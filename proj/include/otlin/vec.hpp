#pragma once

#include <cmath>

namespace otlin {

/// Point or covector in R^d, d ∈ {1,2}. One-dimensional data keeps y = 0.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    constexpr bool operator==(const Vec2&) const = default;

    double norm() const { return std::hypot(x, y); }
    constexpr double norm2() const { return x * x + y * y; }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

/// Symmetric 2×2 matrix [[a11, a12], [a12, a22]].
struct Mat2 {
    double a11 = 1.0;
    double a12 = 0.0;
    double a22 = 1.0;

    constexpr Vec2 operator*(const Vec2& v) const { return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y}; }
    constexpr double det() const { return a11 * a22 - a12 * a12; }
    constexpr Mat2 inverse() const {
        const double d = det();
        return {a22 / d, -a12 / d, a11 / d};
    }
    constexpr Mat2 operator+(const Mat2& o) const { return {a11 + o.a11, a12 + o.a12, a22 + o.a22}; }
    constexpr Mat2 operator*(double s) const { return {a11 * s, a12 * s, a22 * s}; }
    constexpr bool operator==(const Mat2&) const = default;
};

/// Outer product v vᵀ.
constexpr Mat2 outer(const Vec2& v) { return {v.x * v.x, v.x * v.y, v.y * v.y}; }

} // namespace otlin

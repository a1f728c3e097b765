#pragma once

#include <Eigen/Core>
#include <cmath>

namespace proxgen {

// Forward-mode dual number carrying derivatives against N inputs. Used for
// exact kinematics Jacobians; only the operations the body model needs.
template <int N>
struct Jet {
  double v = 0.0;
  Eigen::Matrix<double, N, 1> d = Eigen::Matrix<double, N, 1>::Zero();

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT: implicit constant lift

  static Jet variable(double value, int index) {
    Jet j(value);
    j.d[index] = 1.0;
    return j;
  }

  Jet operator-() const {
    Jet r(-v);
    r.d = -d;
    return r;
  }
  Jet& operator+=(const Jet& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
};

template <int N>
Jet<N> operator+(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r(a.v + b.v);
  r.d = a.d + b.d;
  return r;
}

template <int N>
Jet<N> operator-(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r(a.v - b.v);
  r.d = a.d - b.d;
  return r;
}

template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r(a.v * b.v);
  r.d = a.v * b.d + b.v * a.d;
  return r;
}

template <int N>
Jet<N> operator*(double a, const Jet<N>& b) {
  Jet<N> r(a * b.v);
  r.d = a * b.d;
  return r;
}

template <int N>
Jet<N> operator*(const Jet<N>& a, double b) {
  return b * a;
}

template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r(a.v / b.v);
  r.d = (a.d - r.v * b.d) / b.v;
  return r;
}

template <int N>
Jet<N> sin(const Jet<N>& a) {
  Jet<N> r(std::sin(a.v));
  r.d = std::cos(a.v) * a.d;
  return r;
}

template <int N>
Jet<N> cos(const Jet<N>& a) {
  Jet<N> r(std::cos(a.v));
  r.d = -std::sin(a.v) * a.d;
  return r;
}

template <int N>
Jet<N> sqrt(const Jet<N>& a) {
  const double s = std::sqrt(a.v);
  Jet<N> r(s);
  r.d = (0.5 / s) * a.d;
  return r;
}

// Clamp with the true (sub)derivative: constant outside the range.
template <int N>
Jet<N> clamp(const Jet<N>& a, double lo, double hi, bool* clamped) {
  if (a.v < lo) {
    if (clamped) *clamped = true;
    return Jet<N>(lo);
  }
  if (a.v > hi) {
    if (clamped) *clamped = true;
    return Jet<N>(hi);
  }
  return a;
}

inline double clamp(double a, double lo, double hi, bool* clamped) {
  if (a < lo) {
    if (clamped) *clamped = true;
    return lo;
  }
  if (a > hi) {
    if (clamped) *clamped = true;
    return hi;
  }
  return a;
}

}  // namespace proxgen

#pragma once

// Truncated Taylor arithmetic in one variable. A Jet<N> stores the first N+1
// Taylor coefficients c[k] = f^(k)(x0) / k! of a quantity that depends on a
// single seed variable, so evaluating a formula on Jets yields exact
// derivatives up to order N (to round-off).

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace accelwave {

template <std::size_t N>
class Jet {
 public:
  constexpr Jet() = default;
  constexpr Jet(double constant) { c_[0] = constant; }  // NOLINT: implicit by intent

  static constexpr Jet variable(double x0) {
    Jet j(x0);
    if constexpr (N >= 1) j.c_[1] = 1.0;
    return j;
  }

  constexpr double value() const { return c_[0]; }
  constexpr double coefficient(std::size_t k) const { return c_[k]; }
  constexpr double& coefficient(std::size_t k) { return c_[k]; }

  /// k-th derivative with respect to the seed variable.
  constexpr double derivative(std::size_t k) const {
    double factorial = 1.0;
    for (std::size_t i = 2; i <= k; ++i) factorial *= static_cast<double>(i);
    return c_[k] * factorial;
  }

  Jet& operator+=(const Jet& o) {
    for (std::size_t k = 0; k <= N; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t k = 0; k <= N; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator-(const Jet& a) {
    Jet r;
    for (std::size_t k = 0; k <= N; ++k) r.c_[k] = -a.c_[k];
    return r;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (std::size_t k = 0; k <= N; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j <= k; ++j) s += a.c_[j] * b.c_[k - j];
      r.c_[k] = s;
    }
    return r;
  }

  friend Jet operator/(const Jet& u, const Jet& v) {
    if (v.c_[0] == 0.0) throw std::domain_error("Jet: division by zero");
    Jet y;
    for (std::size_t k = 0; k <= N; ++k) {
      double s = u.c_[k];
      for (std::size_t j = 1; j <= k; ++j) s -= v.c_[j] * y.c_[k - j];
      y.c_[k] = s / v.c_[0];
    }
    return y;
  }

  /// x^p for real p, requires x0 > 0.
  friend Jet pow(const Jet& x, double p) {
    if (!(x.c_[0] > 0.0)) throw std::domain_error("Jet: pow of non-positive base");
    Jet y;
    y.c_[0] = std::pow(x.c_[0], p);
    for (std::size_t k = 1; k <= N; ++k) {
      double s = 0.0;
      for (std::size_t j = 1; j <= k; ++j) {
        s += (p * static_cast<double>(j) - static_cast<double>(k - j)) * x.c_[j] * y.c_[k - j];
      }
      y.c_[k] = s / (static_cast<double>(k) * x.c_[0]);
    }
    return y;
  }

  friend Jet log(const Jet& x) {
    if (!(x.c_[0] > 0.0)) throw std::domain_error("Jet: log of non-positive argument");
    Jet y;
    y.c_[0] = std::log(x.c_[0]);
    for (std::size_t k = 1; k <= N; ++k) {
      double s = x.c_[k];
      for (std::size_t j = 1; j < k; ++j) {
        s -= static_cast<double>(j) * y.c_[j] * x.c_[k - j] / static_cast<double>(k);
      }
      y.c_[k] = s / x.c_[0];
    }
    return y;
  }

 private:
  std::array<double, N + 1> c_{};
};

}  // namespace accelwave

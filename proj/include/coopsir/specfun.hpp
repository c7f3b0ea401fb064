// Copyright 2026 The coopsir Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "coopsir/error.hpp"

namespace coopsir::specfun {

inline constexpr int kMaxSeriesTerms = 500;
inline constexpr double kSeriesTolerance = 1e-16;

namespace detail {

inline bool is_nonpositive_integer(double x) noexcept {
  return x <= 0.0 && x == std::nearbyint(x);
}

inline bool is_integer(double x) noexcept { return x == std::nearbyint(x); }

// 1/Gamma(x), zero at the poles.
inline double rgamma(double x) {
  if (is_nonpositive_integer(x)) return 0.0;
  return 1.0 / std::tgamma(x);
}

// Gauss series; caller guarantees |z| <= 1/2 or a terminating series.
inline double series(double a, double b, double c, double z) {
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
    sum += term;
    if (std::abs(term) <= kSeriesTolerance * std::abs(sum)) return sum;
  }
  throw ConvergenceError("2F1 series did not converge within " +
                             std::to_string(kMaxSeriesTerms) + " terms",
                         kMaxSeriesTerms);
}

// Euler integral, used when c - a - b is an integer and z > 1/2 (the
// connection formula degenerates there). Requires c > b > 0 after swapping.
inline double euler_integral(double a, double b, double c, double z) {
  if (!(c > b && b > 0.0)) std::swap(a, b);
  if (!(c > b && b > 0.0))
    throw DomainError("2F1: integer c-a-b with z > 1/2 needs c > b > 0 or c > a > 0");
  boost::math::quadrature::tanh_sinh<double> ts;
  auto integrand = [&](double t) {
    return std::pow(t, b - 1.0) * std::pow(1.0 - t, c - b - 1.0) * std::pow(1.0 - z * t, -a);
  };
  double err = 0.0;
  const double v = ts.integrate(integrand, 0.0, 1.0, 1e-14, &err);
  return v * std::tgamma(c) * rgamma(b) * rgamma(c - b);
}

// 0 < z < 1.
inline double positive(double a, double b, double c, double z) {
  if (z <= 0.5) return series(a, b, c, z);
  const double s = c - a - b;
  if (is_integer(s)) return euler_integral(a, b, c, z);
  const double w = 1.0 - z;
  const double t1 = std::tgamma(c) * std::tgamma(s) * rgamma(c - a) * rgamma(c - b);
  const double t2 = std::tgamma(c) * std::tgamma(-s) * rgamma(a) * rgamma(b);
  double value = 0.0;
  if (t1 != 0.0) value += t1 * series(a, b, 1.0 - s, w);
  if (t2 != 0.0) value += t2 * std::pow(w, s) * series(c - a, c - b, 1.0 + s, w);
  return value;
}

}  // namespace detail

// Gauss hypergeometric function 2F1(a, b; c; z) for real arguments, z <= 1.
// Negative z is mapped into (0, 1) by a Pfaff transformation, z > 1/2 onto
// the series in 1 - z by the connection formula.
inline double hyp2f1(double a, double b, double c, double z) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(z))
    throw DomainError("2F1: arguments must be finite");
  if (detail::is_nonpositive_integer(c))
    throw DomainError("2F1: c must not be a nonpositive integer");
  if (z > 1.0) throw DomainError("2F1: z > 1 is outside the real branch");
  if (z == 0.0) return 1.0;
  if (z == 1.0) {
    const double s = c - a - b;
    if (!(s > 0.0)) throw DomainError("2F1(z=1) diverges unless c - a - b > 0");
    return std::tgamma(c) * std::tgamma(s) * detail::rgamma(c - a) * detail::rgamma(c - b);
  }
  // Terminating series converge for every z.
  if (detail::is_nonpositive_integer(a) || detail::is_nonpositive_integer(b)) {
    if (std::abs(z) <= 0.5 || z > 0.0) return detail::series(a, b, c, z);
  }
  if (z < 0.0) {
    // Pfaff: (1-z)^(-a) 2F1(a, c-b; c; z/(z-1)).
    const double w = z / (z - 1.0);
    return std::pow(1.0 - z, -a) * detail::positive(a, c - b, c, w);
  }
  return detail::positive(a, b, c, z);
}

// F(x) = integral from x to infinity of t / (1 + t^alpha) dt, general-alpha
// route through 2F1(1, 1; 2 - delta; 1/(1 + x^alpha)).
inline double interference_tail_general(double x, double alpha) {
  if (!(alpha > 2.0)) throw DomainError("interference tail diverges for alpha <= 2");
  if (!(x >= 0.0)) throw DomainError("interference tail needs x >= 0");
  if (x == 0.0) return (std::numbers::pi / alpha) / std::sin(2.0 * std::numbers::pi / alpha);
  if (std::isinf(x)) return 0.0;
  const double delta = 2.0 / alpha;
  if (x <= 1.0) {
    // F(0) minus the head integral_0^x t/(1+t^alpha) dt; the argument
    // 1/(1+x^alpha) of the tail form rounds to 1 as x -> 0
    const double head = 0.5 * x * x * hyp2f1(1.0, delta, 1.0 + delta, -std::pow(x, alpha));
    return (std::numbers::pi / alpha) / std::sin(2.0 * std::numbers::pi / alpha) - head;
  }
  // x^2/(1+x^alpha) = x^(2-alpha)/(1+x^-alpha), no overflow for large x
  const double inv = std::pow(x, -alpha);
  const double prefactor = std::pow(x, 2.0 - alpha) / ((alpha - 2.0) * (1.0 + inv));
  return prefactor * hyp2f1(1.0, 1.0, 2.0 - delta, inv / (1.0 + inv));
}

// alpha = 4: F(x) = (pi/2 - arctan x^2)/2 = arctan(1/x^2)/2.
inline double interference_tail_alpha4(double x) {
  if (!(x >= 0.0)) throw DomainError("interference tail needs x >= 0");
  return 0.5 * std::atan2(1.0, x * x);
}

inline double interference_tail(double x, double alpha) {
  if (alpha == 4.0) return interference_tail_alpha4(x);
  return interference_tail_general(x, alpha);
}

}  // namespace coopsir::specfun

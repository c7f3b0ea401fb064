// Copyright 2026 The coopsir Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "coopsir/error.hpp"

namespace coopsir::quadrature {

// A quadrature value with its error estimate. Integrands may return an
// Estimate themselves (nested integration); the inner error is then carried
// into the outer error instead of being lost.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  int max_intervals = 256;
};

namespace detail {

inline Estimate as_estimate(double v) noexcept { return {v, 0.0}; }
inline Estimate as_estimate(Estimate e) noexcept { return e; }

struct Interval {
  double a, b;
  double value;
  double error;       // discretization error on this interval
  double propagated;  // integrated error of a nested integrand

  bool operator<(const Interval& o) const noexcept { return error < o.error; }
};

// 15-point Kronrod rule with embedded 7-point Gauss rule, error estimate as
// in QUADPACK's qk15.
template <class F>
Interval gk15(F& f, double a, double b) {
  using kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
  using gauss = boost::math::quadrature::gauss<double, 7>;
  const auto& xk = kronrod::abscissa();
  const auto& wk = kronrod::weights();
  const auto& wg = gauss::weights();
  constexpr double eps = std::numeric_limits<double>::epsilon();

  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  std::array<double, 15> fv{};
  double prop = 0.0;

  const Estimate fc = as_estimate(f(center));
  fv[7] = fc.value;
  double res_k = wk[0] * fc.value;
  double res_g = wg[0] * fc.value;
  prop += wk[0] * fc.error;
  for (std::size_t j = 1; j < xk.size(); ++j) {
    const double dx = half * xk[j];
    const Estimate f1 = as_estimate(f(center - dx));
    const Estimate f2 = as_estimate(f(center + dx));
    fv[7 - j] = f1.value;
    fv[7 + j] = f2.value;
    res_k += wk[j] * (f1.value + f2.value);
    prop += wk[j] * (f1.error + f2.error);
    if (j % 2 == 0) res_g += wg[j / 2] * (f1.value + f2.value);
  }

  const double mean = 0.5 * res_k;
  double res_abs = wk[0] * std::abs(fv[7]);
  double res_asc = wk[0] * std::abs(fv[7] - mean);
  for (std::size_t j = 1; j < xk.size(); ++j) {
    res_abs += wk[j] * (std::abs(fv[7 - j]) + std::abs(fv[7 + j]));
    res_asc += wk[j] * (std::abs(fv[7 - j] - mean) + std::abs(fv[7 + j] - mean));
  }
  res_abs *= std::abs(half);
  res_asc *= std::abs(half);

  double err = std::abs((res_k - res_g) * half);
  if (res_asc != 0.0 && err != 0.0)
    err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(50.0 * eps * res_abs, err);

  return {a, b, res_k * half, err, prop * std::abs(half)};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod on a finite interval: the interval with
// the largest error is bisected until the discretization error meets
// max(abs_tol, rel_tol*|value|) or the interval budget is spent. The
// returned error is the discretization error plus the propagated error of a
// nested integrand. Never throws; see integrate_checked.
template <class F>
Estimate integrate(F&& f, double a, double b, const Options& opt = {}) {
  if (a == b) return {};
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("quadrature limits must be finite; map the interval first");

  std::priority_queue<detail::Interval> heap;
  heap.push(detail::gk15(f, a, b));
  double value = heap.top().value;
  double error = heap.top().error;
  double propagated = heap.top().propagated;

  auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(value)); };

  int intervals = 1;
  while (error > target() && intervals < opt.max_intervals) {
    const detail::Interval worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // no room left to bisect
    heap.pop();
    const detail::Interval left = detail::gk15(f, worst.a, mid);
    const detail::Interval right = detail::gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    propagated += left.propagated + right.propagated - worst.propagated;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }

  // Re-sum from the leaves to shed accumulated update round-off.
  value = 0.0;
  error = 0.0;
  propagated = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    propagated += heap.top().propagated;
    heap.pop();
  }
  return {value, error + propagated};
}

// As integrate(), but throws NumericalAccuracyError when the total error
// (discretization plus propagated inner error) exceeds max_error.
template <class F>
Estimate integrate_checked(F&& f, double a, double b, const Options& opt, double max_error,
                           const std::string& what) {
  const Estimate e = integrate(std::forward<F>(f), a, b, opt);
  if (!(e.error <= max_error) || !std::isfinite(e.value))
    throw NumericalAccuracyError("quadrature did not converge: " + what, max_error, e.error);
  return e;
}

}  // namespace coopsir::quadrature

// Copyright 2026 The coopsir Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "coopsir/error.hpp"

namespace coopsir::analytic {

// G_dB(gamma) ~ a * tanh(b * gamma).
struct GainFit {
  double a = 0.0;
  double b = 0.0;
  double residual = 0.0;  // residual sum of squares, dB^2
  int iterations = 0;

  double operator()(double gamma) const { return a * std::tanh(b * gamma); }
};

namespace detail {

struct FitState {
  double a, b, rss;
  int iterations;
  bool converged;
};

inline double tanh_rss(std::span<const double> x, std::span<const double> y, double a, double b) {
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = a * std::tanh(b * x[i]) - y[i];
    rss += r * r;
  }
  return rss;
}

// Levenberg-Marquardt on the two parameters.
inline FitState levenberg_marquardt(std::span<const double> x, std::span<const double> y,
                                    double a, double b) {
  double mu = 1e-3;
  double rss = tanh_rss(x, y, a, b);
  for (int it = 1; it <= 500; ++it) {
    // normal equations J^T J delta = -J^T r
    double jaa = 0.0, jab = 0.0, jbb = 0.0, ga = 0.0, gb = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = std::tanh(b * x[i]);
      const double da = t;
      const double db = a * x[i] * (1.0 - t * t);
      const double r = a * t - y[i];
      jaa += da * da;
      jab += da * db;
      jbb += db * db;
      ga += da * r;
      gb += db * r;
    }
    if (std::hypot(ga, gb) <= 1e-14 * (1.0 + std::sqrt(rss)))
      return {a, b, rss, it, true};

    bool accepted = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      const double m11 = jaa * (1.0 + mu), m22 = jbb * (1.0 + mu), m12 = jab;
      const double det = m11 * m22 - m12 * m12;
      if (!(std::abs(det) > 0.0)) {
        mu *= 10.0;
        continue;
      }
      const double step_a = -(m22 * ga - m12 * gb) / det;
      const double step_b = -(m11 * gb - m12 * ga) / det;
      const double trial = tanh_rss(x, y, a + step_a, b + step_b);
      if (trial <= rss) {
        const double rel_step = std::hypot(step_a, step_b) / (1e-12 + std::hypot(a, b));
        a += step_a;
        b += step_b;
        const double improvement = rss - trial;
        rss = trial;
        mu = std::max(mu / 10.0, 1e-15);
        accepted = true;
        if (rel_step < 1e-15 || improvement <= 1e-30) return {a, b, rss, it, true};
      } else {
        mu *= 10.0;
      }
    }
    if (!accepted) return {a, b, rss, it, true};  // no descent direction left: at a minimum
  }
  return {a, b, rss, 500, false};
}

}  // namespace detail

// Least-squares fit of a*tanh(b*gamma) to gains in dB, multistart over
// b in {1, ..., 5} with the optimal a for each start.
inline GainFit fit_gain_tanh(std::span<const double> gamma, std::span<const double> gain_db) {
  if (gamma.size() != gain_db.size())
    throw std::invalid_argument("gamma and gain grids differ in length");
  if (gamma.size() < 5) throw std::invalid_argument("tanh fit needs at least 5 points");
  const auto [lo, hi] = std::minmax_element(gamma.begin(), gamma.end());
  if (*lo > 1e-12 || *hi < 1.0 - 1e-12)
    throw std::invalid_argument("gamma grid must span [0, 1]");
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (!std::isfinite(gain_db[i])) throw std::invalid_argument("gain values must be finite");
    if (gamma[i] == 0.0 && std::abs(gain_db[i]) > 1e-6)
      throw std::invalid_argument("gain at gamma = 0 must be 0 dB");
  }

  detail::FitState best{0.0, 0.0, std::numeric_limits<double>::infinity(), 0, false};
  for (double b0 : {1.0, 2.0, 3.0, 4.0, 5.0}) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
      const double t = std::tanh(b0 * gamma[i]);
      num += t * gain_db[i];
      den += t * t;
    }
    const double a0 = den > 0.0 ? num / den : 1.0;
    const detail::FitState s = detail::levenberg_marquardt(gamma, gain_db, a0, b0);
    if (s.converged && s.rss < best.rss) best = s;
  }

  std::vector<double> residuals;
  for (std::size_t i = 0; i < gamma.size(); ++i)
    residuals.push_back(best.a * std::tanh(best.b * gamma[i]) - gain_db[i]);
  if (!std::isfinite(best.rss)) throw FitError("tanh fit did not converge from any start", residuals);
  // a*tanh(b g) is unchanged under (a, b) -> (-a, -b)
  if (best.b < 0.0) {
    best.a = -best.a;
    best.b = -best.b;
  }
  if (!(best.a > 0.0 && best.b > 0.0))
    throw FitError("tanh fit produced nonpositive parameters", residuals);
  return {best.a, best.b, best.rss, best.iterations};
}

}  // namespace coopsir::analytic

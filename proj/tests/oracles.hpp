// Copyright 2026 The coopsir Authors
// SPDX-License-Identifier: Apache-2.0

// Reference values computed along routes that share no code with the
// library: plain Boost quadrature of the defining integrals, and a change of
// variables that collapses the region integrals to one or two dimensions.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

template <class F>
double gk(F f, double a, double b, double tol = 1e-13, unsigned depth = 20) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, depth, tol);
}

template <class F>
double ts(F f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> integrator(12);
  return integrator.integrate(f, a, b, 1e-14);
}

// integral_x^inf t/(1+t^alpha) dt
inline double interference_tail(double x, double alpha) {
  auto f = [alpha](double t) { return t / (1.0 + std::pow(t, alpha)); };
  const double cut = std::max(x, 1.0) * 1e3;
  double head = 0.0;
  if (x < 1.0) head = gk(f, x, 1.0) + gk(f, 1.0, cut);
  else head = gk(f, x, cut);
  // t^(1-alpha)(1 - t^-alpha + ...) beyond cut
  const double tail = std::pow(cut, 2.0 - alpha) / (alpha - 2.0) - std::pow(cut, 2.0 - 2.0 * alpha) / (2.0 * alpha - 2.0);
  return head + tail;
}

// alpha = 3 antiderivative of t/(1+t^3):
// ln((t^2-t+1)/(t+1)^2)/6 + atan((2t-1)/sqrt3)/sqrt3
inline double interference_tail_alpha3(double x) {
  const double r3 = std::sqrt(3.0);
  const double at_x = std::log((x * x - x + 1.0) / ((x + 1.0) * (x + 1.0))) / 6.0 + std::atan((2.0 * x - 1.0) / r3) / r3;
  return kPi / (2.0 * r3) - at_x;
}

// Euler integral for 2F1(a, b; c; z), c > b > 0, z < 1. The substitution
// 1 - t = s^(1/(c-b)) absorbs the (1-t)^(c-b-1) endpoint factor.
inline double hyp2f1_euler(double a, double b, double c, double z) {
  const double p = 1.0 / (c - b);
  auto f = [=](double s) {
    const double one_minus_t = std::pow(s, p);
    const double t = 1.0 - one_minus_t;
    return p * std::pow(t, b - 1.0) * std::pow(1.0 - z * t, -a);
  };
  return std::exp(std::lgamma(c) - std::lgamma(b) - std::lgamma(c - b)) * gk(f, 0.0, 1.0, 1e-14);
}

// h(q) = 2 q^delta F(q^(-1/alpha)): the PGFL exponent of a unit-intensity PPP
// beyond distance 1 at Laplace argument q, divided by pi.
inline double pgfl_unit(double q, double alpha) {
  if (q == 0.0) return 0.0;
  if (alpha == 4.0) return std::sqrt(q) * std::atan(std::sqrt(q));
  if (alpha == 3.0) return 2.0 * std::pow(q, 2.0 / 3.0) * interference_tail_alpha3(std::pow(q, -1.0 / 3.0));
  return 2.0 * std::pow(q, 2.0 / alpha) * interference_tail(std::pow(q, -1.0 / alpha), alpha);
}

inline double baseline_ccdf(double theta, double alpha) { return 1.0 / (1.0 + pgfl_unit(theta, alpha)); }

// Cooperative ccdf per region with the outermost distance integrated out.
// With v_j = r_j/r_k (k the last explicitly known station) and the PPP
// scaled to that radius, the Gaussian integral over r_k has closed form
// 1/(1 + h)^k, leaving integrals over the normalized distances only.
struct RegionCcdf {
  double p1, p2, p3;
  double total() const { return p1 + p2 + p3; }
};

inline RegionCcdf cooperative_ccdf(double theta, double gamma, double alpha) {
  const double rho = 1.0 - gamma;
  RegionCcdf out{0.0, 0.0, 0.0};
  // C1: v = r1/r2 <= rho, density 2v; interference: r2 with Rayleigh plus
  // PPP beyond r2.
  if (rho > 0.0) {
    out.p1 = gk(
        [&](double v) {
          const double q = theta * std::pow(v, alpha);
          return 2.0 * v / ((1.0 + pgfl_unit(q, alpha)) * (1.0 + pgfl_unit(q, alpha)) * (1.0 + q));
        },
        0.0, rho);
  }
  // C2 and C3: (v1, v2) = (r1/r3, r2/r3), density 8 v1 v2 on v1 < v2 < 1.
  auto inner2 = [&](double v1) {
    const double hi = std::min(1.0, v1 / rho);
    if (!(hi > v1)) return 0.0;
    return gk(
        [&](double v2) {
          const double q = theta / (std::pow(v1, -alpha) + std::pow(v2, -alpha));
          const double h = 1.0 + pgfl_unit(q, alpha);
          return 8.0 * v1 * v2 / (h * h * h * (1.0 + q));
        },
        v1, hi, 1e-12, 10);
  };
  auto inner3 = [&](double v1) {
    return gk(
        [&](double v2) {
          const double q = theta / (std::pow(v1, -alpha) + std::pow(v2, -alpha) + 1.0);
          const double h = 1.0 + pgfl_unit(q, alpha);
          return 8.0 * v1 * v2 / (h * h * h);
        },
        v1, 1.0, 1e-12, 10);
  };
  if (rho > 0.0 && rho < 1.0) out.p2 = gk(inner2, 0.0, rho, 1e-11);
  // C3 needs r1 > rho r3, i.e. v1 > rho.
  if (rho < 1.0) out.p3 = gk(inner3, rho, 1.0, 1e-11);
  return out;
}

// Region expectations behind the gain, reduced through the relative
// distance process: U = (r1/r2)^2 is uniform, (r1/r3)^2 and (r2/r3)^2 are
// the order statistics of two uniforms.
struct Expectations {
  double e1, e2, e3;
};

inline Expectations region_expectations(double gamma, double alpha) {
  const double rho = 1.0 - gamma;
  const double a2 = alpha / 2.0;
  Expectations e{};
  e.e1 = 2.0 * std::pow(rho, alpha + 2.0) / (alpha + 2.0);
  if (rho > 0.0 && rho < 1.0) {
    // the u1 integral is elementary once t = u2/u1 is fixed
    const double w = gk([&](double t) { return std::pow(t, a2) / (1.0 + std::pow(t, a2)); }, 1.0, 1.0 / (rho * rho), 1e-14);
    e.e2 = 2.0 * std::pow(rho, alpha + 4.0) / (a2 + 2.0) * w;
  }
  if (rho < 1.0) {
    const double r2 = rho * rho;
    e.e3 = gk(
        [&](double u1) {
          return gk(
              [&](double u2) {
                const double b1 = std::pow(u1 / u2, a2);
                const double b2 = std::pow(u1, a2);
                return 2.0 * b2 / (1.0 + b1 + b2);
              },
              u1, 1.0, 1e-12, 8);
        },
        r2, 1.0, 1e-11, 10);
  }
  return e;
}

inline double gain(double gamma, double alpha) {
  const Expectations e = region_expectations(gamma, alpha);
  const double c = 2.0 / (alpha - 2.0);
  const double misr = e.e1 * (1.0 + 2.0 * c) + e.e2 * (1.0 + 3.0 * c) + e.e3 * 3.0 * c;
  return c / misr;
}

// E[log(1 + SIR)] without cooperation, integral_0^inf P(SIR > e^t - 1) dt.
inline double baseline_log_rate(double alpha) {
  auto f = [&](double t) { return baseline_ccdf(std::expm1(t), alpha); };
  return gk(f, 0.0, 5.0, 1e-12) + gk(f, 5.0, 60.0, 1e-12) + gk(f, 60.0, 400.0, 1e-12);
}

// Gamma(3, 1) cdf, the law of lambda*pi*r3^2.
inline double gamma3_cdf(double t) { return 1.0 - std::exp(-t) * (1.0 + t + 0.5 * t * t); }

inline double gamma3_quantile(double p) {
  double lo = 0.0, hi = 50.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (gamma3_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Kolmogorov-Smirnov distance of a sample to a continuous cdf.
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  return d;
}

}  // namespace oracle

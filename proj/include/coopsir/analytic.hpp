// Copyright 2026 The coopsir Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopsir/config.hpp"
#include "coopsir/error.hpp"
#include "coopsir/quadrature.hpp"
#include "coopsir/results.hpp"
#include "coopsir/specfun.hpp"

namespace coopsir::analytic {

using quadrature::Estimate;

namespace detail {

inline void check_alpha(double alpha) {
  if (!(alpha > 2.0) || !std::isfinite(alpha))
    throw DomainError("path-loss exponent must exceed 2");
}

inline void check_theta(double theta) {
  if (!(theta >= 0.0)) throw DomainError("SIR threshold must be nonnegative");
}

inline void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0, 1]");
}

}  // namespace detail

// Success probability without cooperation, 1 / 2F1(1, -delta; 1 - delta; -theta).
inline double ccdf_ppp_baseline(double theta, double alpha) {
  detail::check_theta(theta);
  detail::check_alpha(alpha);
  if (std::isinf(theta)) return 0.0;
  const double delta = 2.0 / alpha;
  return 1.0 / specfun::hyp2f1(1.0, -delta, 1.0 - delta, -theta);
}

// ---------------------------------------------------------------------------
// Conditional Laplace transforms of the interference.

// Which base stations serve the user; fixes the interferer set.
//  one:   r2 interferes explicitly, PPP beyond r2
//  two:   r3 interferes explicitly, PPP beyond r3
//  three: PPP beyond r3 only
enum class Serving { one = 1, two = 2, three = 3 };

inline Serving serving_for(RegionLabel r) noexcept { return static_cast<Serving>(static_cast<int>(r)); }

// Exponent of the PGFL of the PPP of intensity lambda outside radius d,
// 2*pi*lambda*s^delta*F(d*s^(-delta/2)).
inline double pgfl_exponent_general(double s, double d, double alpha, double lambda) {
  if (s == 0.0) return 0.0;
  const double delta = 2.0 / alpha;
  const double w = d * std::pow(s, -1.0 / alpha);
  return 2.0 * lambda * std::numbers::pi * std::pow(s, delta) *
         specfun::interference_tail_general(w, alpha);
}

// alpha = 4 closed form: lambda*pi*sqrt(s)*arctan(sqrt(s)/d^2).
inline double pgfl_exponent_alpha4(double s, double d, double lambda) {
  const double rs = std::sqrt(s);
  return lambda * std::numbers::pi * rs * std::atan(rs / (d * d));
}

namespace detail {

inline void check_laplace(double s, double d, double alpha, double lambda) {
  if (!(s >= 0.0)) throw DomainError("Laplace argument must be nonnegative");
  if (!(d > 0.0)) throw DomainError("exclusion radius must be positive");
  if (!(lambda > 0.0)) throw DomainError("intensity must be positive");
  check_alpha(alpha);
}

inline double explicit_factor(Serving serving, double s, double d, double alpha) {
  if (serving == Serving::three) return 1.0;
  return 1.0 / (1.0 + s * std::pow(d, -alpha));
}

}  // namespace detail

// d is r2 for Serving::one and r3 otherwise.
inline double laplace_interference_general(Serving serving, double s, double d, double alpha,
                                           double lambda = 1.0) {
  detail::check_laplace(s, d, alpha, lambda);
  if (s == 0.0) return 1.0;
  return std::exp(-pgfl_exponent_general(s, d, alpha, lambda)) *
         detail::explicit_factor(serving, s, d, alpha);
}

inline double laplace_interference_alpha4(Serving serving, double s, double d, double lambda = 1.0) {
  detail::check_laplace(s, d, 4.0, lambda);
  if (s == 0.0) return 1.0;
  const double factor = serving == Serving::three ? 1.0 : 1.0 / (1.0 + s / (d * d * d * d));
  return std::exp(-pgfl_exponent_alpha4(s, d, lambda)) * factor;
}

inline double laplace_interference(Serving serving, double s, double d, double alpha,
                                   double lambda = 1.0) {
  if (alpha == 4.0) return laplace_interference_alpha4(serving, s, d, lambda);
  return laplace_interference_general(serving, s, d, alpha, lambda);
}

// L(s) with the first two derivatives of log L(s).
struct LaplaceJet {
  double value = 1.0;
  double dlog = 0.0;
  double d2log = 0.0;

  double d1() const noexcept { return value * dlog; }
  double d2() const noexcept { return value * (dlog * dlog + d2log); }
};

// Derivatives follow from d/ds[s^delta F(d s^(-1/alpha))] with
// F'(w) = -w/(1+w^alpha); requires s > 0.
inline LaplaceJet laplace_jet(Serving serving, double s, double d, double alpha,
                              double lambda = 1.0) {
  detail::check_laplace(s, d, alpha, lambda);
  if (!(s > 0.0)) throw DomainError("Laplace derivatives need s > 0");
  const double delta = 2.0 / alpha;
  const double w = d * std::pow(s, -1.0 / alpha);
  const double tail = specfun::interference_tail(w, alpha);
  // w^2/(1+w^alpha) and w^(alpha+2)/(1+w^alpha)^2 without overflow
  double q1 = 0.0;
  double q2 = 0.0;
  if (w > 1.0) {
    const double inv = std::pow(w, -alpha);
    q1 = std::pow(w, 2.0 - alpha) / (1.0 + inv);
    q2 = q1 / (1.0 + inv);
  } else {
    const double wa = std::pow(w, alpha);
    q1 = w * w / (1.0 + wa);
    q2 = q1 * wa / (1.0 + wa);
  }
  const double two_pi_lambda = 2.0 * std::numbers::pi * lambda;
  const double k = delta * tail + q1 / alpha;
  const double exponent = two_pi_lambda * std::pow(s, delta) * tail;
  const double d1_exp = two_pi_lambda * std::pow(s, delta - 1.0) * k;
  const double d2_exp = two_pi_lambda * std::pow(s, delta - 2.0) * ((delta - 1.0) * k + q2 / alpha);

  LaplaceJet jet;
  jet.dlog = -d1_exp;
  jet.d2log = -d2_exp;
  double log_value = -exponent;
  if (serving != Serving::three) {
    const double c = std::pow(d, -alpha);
    const double one_plus = 1.0 + s * c;
    log_value -= std::log(one_plus);
    jet.dlog -= c / one_plus;
    jet.d2log += c * c / (one_plus * one_plus);
  }
  jet.value = std::exp(log_value);
  return jet;
}

// ---------------------------------------------------------------------------
// Signal-power ccdf for power combining.

// P(sum_j g_j b_j > t) averaged over the interference, for unit-mean
// exponentials g_j and normalized means b_0 = 1 >= b_1 >= b_2 > 0, where t =
// unit_s * I. By partial fractions this is the divided difference of
// psi(b) = b^(n-1) L(unit_s / b) over the means. Means closer than
// 1e-9 relative are merged and the confluent (Erlang-limit) divided
// difference is used, which needs L' and L''.
template <class Jet>
double hypoexponential_success(std::span<const double> means, double unit_s, Jet&& jet_at) {
  const std::size_t n = means.size();
  if (n == 0 || n > 3) throw std::invalid_argument("1 to 3 serving stations supported");
  const int m = static_cast<int>(n) - 1;
  constexpr double kMergeTolerance = 1e-9;

  auto psi = [&](double b) {
    return std::pow(b, m) * jet_at(unit_s / b).value;
  };
  auto dpsi = [&](double b) {
    const double s = unit_s / b;
    const LaplaceJet j = jet_at(s);
    return std::pow(b, m - 1) * (m * j.value - s * j.d1());
  };
  auto d2psi = [&](double b) {
    const double s = unit_s / b;
    const LaplaceJet j = jet_at(s);
    return std::pow(b, m - 2) * (m * (m - 1) * j.value - 2.0 * (m - 1) * s * j.d1() + s * s * j.d2());
  };
  auto close = [&](double a, double b) {
    return std::abs(a - b) <= kMergeTolerance * std::max(a, b);
  };
  auto dd2 = [&](double a, double b) {
    if (close(a, b)) return dpsi(0.5 * (a + b));
    return (psi(a) - psi(b)) / (a - b);
  };

  if (n == 1) return psi(means[0]);
  if (n == 2) return dd2(means[0], means[1]);

  const double b0 = means[0], b1 = means[1], b2 = means[2];
  const bool c01 = close(b0, b1);
  const bool c12 = close(b1, b2);
  if (close(b0, b2) || (c01 && c12)) return 0.5 * d2psi((b0 + b1 + b2) / 3.0);
  if (c01) {
    const double a = 0.5 * (b0 + b1);
    return (dd2(a, b2) - dpsi(a)) / (b2 - a);
  }
  if (c12) {
    const double b = 0.5 * (b1 + b2);
    return (dpsi(b) - dd2(b0, b)) / (b - b0);
  }
  return (dd2(b1, b2) - dd2(b0, b1)) / (b2 - b0);
}

// ---------------------------------------------------------------------------
// Integration of a function of (r1, r2[, r3]) against the joint density
// (2*pi)^3 xyz exp(-pi z^2) (lambda = 1) over one cooperation region.
// Half-lines are mapped onto (0, 1) by t = lo + tau/(1 - tau), keeping the
// Gaussian weight in the integrand.

// Inner levels use relative tolerances tied to the outer absolute target so
// their propagated error stays a small share of it.
struct RegionTolerances {
  double outer_abs = 1e-7;

  double middle_rel() const noexcept { return std::max(1e-2 * outer_abs, 1e-12); }
  double inner_rel() const noexcept { return std::max(1e-3 * outer_abs, 1e-13); }
};

namespace detail {

inline constexpr double kPi = std::numbers::pi;

inline quadrature::Options inner_options(const RegionTolerances& tol) {
  return {tol.outer_abs * 1e-6, tol.inner_rel(), 256};
}
inline quadrature::Options middle_options(const RegionTolerances& tol) {
  return {tol.outer_abs * 1e-5, tol.middle_rel(), 256};
}
inline quadrature::Options outer_options(const RegionTolerances& tol) {
  return {0.5 * tol.outer_abs, 0.0, 512};
}

inline Estimate scaled(Estimate e, double k) { return {k * e.value, std::abs(k) * e.error}; }

// Integral of f over [lo, hi]; hi may be +infinity.
template <class F>
Estimate integrate_to(F&& f, double lo, double hi, const quadrature::Options& opt) {
  if (hi <= lo) return {};
  if (std::isfinite(hi)) return quadrature::integrate(f, lo, hi, opt);
  auto mapped = [&](double tau) -> Estimate {
    const double one_minus = 1.0 - tau;
    const Estimate v = quadrature::detail::as_estimate(f(lo + tau / one_minus));
    if (v.value == 0.0 && v.error == 0.0) return {};
    return scaled(v, 1.0 / (one_minus * one_minus));
  };
  return quadrature::integrate(mapped, 0.0, 1.0, opt);
}

// 2*pi*t*exp(-pi t^2), the marginal weight of the outermost distance.
inline double gaussian_weight(double t) { return 2.0 * kPi * t * std::exp(-kPi * t * t); }

// Beyond this radius exp(-pi t^2) < 1e-196. Finite limits past it are
// clipped; otherwise small rho stretches [y, x/rho] until every Kronrod node
// lands where the weight has underflowed and the integral reads as zero.
inline constexpr double kGaussianCutoff = 12.0;

inline double upper_limit(double x, double rho) {
  return rho > 0.0 ? std::min(x / rho, kGaussianCutoff) : std::numeric_limits<double>::infinity();
}

}  // namespace detail

// C1: r1 <= rho r2. g(x, y) with x = r1, y = r2.
template <class G>
Estimate integrate_region_c1(double rho, G&& g, const RegionTolerances& tol = {}) {
  if (rho <= 0.0) return {};
  auto outer = [&](double x) -> Estimate {
    const Estimate in = detail::integrate_to(
        [&](double y) {
          const double w = detail::gaussian_weight(y);
          return w == 0.0 ? 0.0 : w * g(x, y);
        },
        x / rho, std::numeric_limits<double>::infinity(), detail::inner_options(tol));
    return detail::scaled(in, 2.0 * detail::kPi * x);
  };
  // r1 <= rho r2 < rho * cutoff
  const Estimate e = detail::integrate_to(outer, 0.0, rho * detail::kGaussianCutoff,
                                          detail::outer_options(tol));
  if (!(e.error <= tol.outer_abs))
    throw NumericalAccuracyError("quadrature did not converge: region C1", tol.outer_abs, e.error);
  return e;
}

// C2: rho r2 < r1 <= rho r3. g(x, y, z) with x = r1, y = r2, z = r3.
template <class G>
Estimate integrate_region_c2(double rho, G&& g, const RegionTolerances& tol = {}) {
  if (rho <= 0.0 || rho >= 1.0) return {};
  auto outer = [&](double x) -> Estimate {
    const double edge = x / rho;
    auto middle = [&](double y) -> Estimate {
      const Estimate in = detail::integrate_to(
          [&](double z) {
            const double w = detail::gaussian_weight(z);
            return w == 0.0 ? 0.0 : w * g(x, y, z);
          },
          edge, std::numeric_limits<double>::infinity(), detail::inner_options(tol));
      return detail::scaled(in, 2.0 * detail::kPi * y);
    };
    const Estimate mid = detail::integrate_to(middle, x, std::min(edge, detail::kGaussianCutoff),
                                              detail::middle_options(tol));
    return detail::scaled(mid, 2.0 * detail::kPi * x);
  };
  const Estimate e = detail::integrate_to(outer, 0.0, rho * detail::kGaussianCutoff,
                                          detail::outer_options(tol));
  if (!(e.error <= tol.outer_abs))
    throw NumericalAccuracyError("quadrature did not converge: region C2", tol.outer_abs, e.error);
  return e;
}

// C3: r1 > rho r3.
template <class G>
Estimate integrate_region_c3(double rho, G&& g, const RegionTolerances& tol = {}) {
  if (rho >= 1.0) return {};
  auto outer = [&](double x) -> Estimate {
    const double edge = detail::upper_limit(x, rho);
    auto middle = [&](double y) -> Estimate {
      const Estimate in = detail::integrate_to(
          [&](double z) {
            const double w = detail::gaussian_weight(z);
            return w == 0.0 ? 0.0 : w * g(x, y, z);
          },
          y, edge, detail::inner_options(tol));
      return detail::scaled(in, 2.0 * detail::kPi * y);
    };
    const Estimate mid = detail::integrate_to(middle, x, edge, detail::middle_options(tol));
    return detail::scaled(mid, 2.0 * detail::kPi * x);
  };
  // the constraint r3 < r1/rho binds only below rho * cutoff
  const double split = rho * detail::kGaussianCutoff;
  const Estimate lo = detail::integrate_to(outer, 0.0, split, detail::outer_options(tol));
  const Estimate hi = detail::integrate_to(outer, split, detail::kGaussianCutoff, detail::outer_options(tol));
  const Estimate e{lo.value + hi.value, lo.error + hi.error};
  if (!(e.error <= tol.outer_abs))
    throw NumericalAccuracyError("quadrature did not converge: region C3", tol.outer_abs, e.error);
  return e;
}

// ---------------------------------------------------------------------------
// Success probability with cooperation.

struct CcdfOptions {
  double abs_tol = 1e-7;  // per region term
  SignalCombining combining = SignalCombining::amplitude;
};

struct CooperativeCcdf {
  double total = 0.0;
  std::array<double, 3> per_region{};  // P(SIR > theta, C_i)
  double error = 0.0;                  // summed quadrature error estimate
};

namespace detail {

// Region success-probability integrands at lambda = 1. Signal means are
// normalized by r1^(-alpha), so b_j = (r1/r_j)^alpha and the Laplace
// argument is theta*r1^alpha / sum_j b_j (amplitude) or theta*r1^alpha / b_j
// inside the divided difference (power).
struct SuccessIntegrand {
  double theta;
  double alpha;
  SignalCombining combining;

  double c1(double x, double y) const {
    if (theta == 0.0) return 1.0;
    return laplace_interference(Serving::one, theta * std::pow(x, alpha), y, alpha);
  }

  double c2(double x, double y, double z) const {
    if (theta == 0.0) return 1.0;
    const double b1 = std::pow(x / y, alpha);
    const double unit_s = theta * std::pow(x, alpha);
    if (combining == SignalCombining::amplitude)
      return laplace_interference(Serving::two, unit_s / (1.0 + b1), z, alpha);
    const std::array<double, 2> means{1.0, b1};
    return hypoexponential_success(means, unit_s, [&](double s) {
      return laplace_jet(Serving::two, s, z, alpha);
    });
  }

  double c3(double x, double y, double z) const {
    if (theta == 0.0) return 1.0;
    const double b1 = std::pow(x / y, alpha);
    const double b2 = std::pow(x / z, alpha);
    const double unit_s = theta * std::pow(x, alpha);
    if (combining == SignalCombining::amplitude)
      return laplace_interference(Serving::three, unit_s / (1.0 + b1 + b2), z, alpha);
    const std::array<double, 3> means{1.0, b1, b2};
    return hypoexponential_success(means, unit_s, [&](double s) {
      return laplace_jet(Serving::three, s, z, alpha);
    });
  }
};

}  // namespace detail

// P(SIR > theta) under cooperation level gamma, split by region, evaluated
// at lambda = 1 (the SIR law does not depend on lambda).
inline CooperativeCcdf ccdf_cooperative(double theta, double gamma, double alpha,
                                        const CcdfOptions& opt = {}) {
  detail::check_theta(theta);
  detail::check_gamma(gamma);
  detail::check_alpha(alpha);
  CooperativeCcdf out;
  if (std::isinf(theta)) return out;

  const double rho = 1.0 - gamma;
  const detail::SuccessIntegrand f{theta, alpha, opt.combining};
  const RegionTolerances tol{opt.abs_tol};

  const Estimate p1 = integrate_region_c1(rho, [&](double x, double y) { return f.c1(x, y); }, tol);
  const Estimate p2 = integrate_region_c2(
      rho, [&](double x, double y, double z) { return f.c2(x, y, z); }, tol);
  const Estimate p3 = integrate_region_c3(
      rho, [&](double x, double y, double z) { return f.c3(x, y, z); }, tol);

  out.per_region = {p1.value, p2.value, p3.value};
  out.total = p1.value + p2.value + p3.value;
  out.error = p1.error + p2.error + p3.error;
  return out;
}

// ---------------------------------------------------------------------------
// MISR and the asymptotic gain.

inline double misr_ppp(double alpha) {
  detail::check_alpha(alpha);
  return 2.0 / (alpha - 2.0);
}

// Sum over i > k of E[(r_k/r_i)^alpha] for the PPP, from the relative
// distance process: 2k/(alpha-2).
inline double relative_distance_tail_sum(int k, double alpha) {
  detail::check_alpha(alpha);
  if (k < 1) throw std::invalid_argument("tail sum index starts at 1");
  return 2.0 * k / (alpha - 2.0);
}

// Interference tail factors multiplying the per-region expectations.
inline double misr_tail_factor(RegionLabel region, double alpha) {
  switch (region) {
    case RegionLabel::C1: return 1.0 + relative_distance_tail_sum(2, alpha);  // 1 + 4/(a-2)
    case RegionLabel::C2: return 1.0 + relative_distance_tail_sum(3, alpha);  // 1 + 6/(a-2)
    case RegionLabel::C3: return relative_distance_tail_sum(3, alpha);        // 6/(a-2)
  }
  return 0.0;
}

// E[(r1/r2)^a 1_C1], E[(r1/r3)^a/(1+(r1/r2)^a) 1_C2],
// E[(r1/r3)^a/(1+(r1/r2)^a+(r1/r3)^a) 1_C3].
struct RegionExpectations {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

struct MisrGain {
  double gain = 1.0;  // linear
  MisrBreakdown breakdown;
  RegionExpectations expectations;
  double error = 0.0;  // quadrature error on MISR_gamma

  double gain_db() const { return linear_to_db(gain); }
};

inline RegionExpectations misr_region_expectations(double gamma, double alpha, double& error,
                                                   double abs_tol = 1e-10) {
  detail::check_gamma(gamma);
  detail::check_alpha(alpha);
  const double rho = 1.0 - gamma;
  const RegionTolerances tol{abs_tol};
  const Estimate e1 = integrate_region_c1(
      rho, [&](double x, double y) { return std::pow(x / y, alpha); }, tol);
  const Estimate e2 = integrate_region_c2(
      rho,
      [&](double x, double y, double z) {
        return std::pow(x / z, alpha) / (1.0 + std::pow(x / y, alpha));
      },
      tol);
  const Estimate e3 = integrate_region_c3(
      rho,
      [&](double x, double y, double z) {
        const double b2 = std::pow(x / z, alpha);
        return b2 / (1.0 + std::pow(x / y, alpha) + b2);
      },
      tol);
  error = e1.error * misr_tail_factor(RegionLabel::C1, alpha) +
          e2.error * misr_tail_factor(RegionLabel::C2, alpha) +
          e3.error * misr_tail_factor(RegionLabel::C3, alpha);
  return {e1.value, e2.value, e3.value};
}

// Gain written with the coefficients grouped over a common 2/(alpha-2):
// G = 2 / ((a+2) E1 + (a+4) E2 + 6 E3).
inline double gain_from_grouping(const RegionExpectations& e, double alpha) {
  return 2.0 / ((alpha + 2.0) * e.c1 + (alpha + 4.0) * e.c2 + 6.0 * e.c3);
}

// G = MISR_PPP / MISR_gamma with MISR_gamma summed over the three regions.
inline MisrGain misr_gain(double gamma, double alpha, double abs_tol = 1e-10) {
  MisrGain out;
  out.expectations = misr_region_expectations(gamma, alpha, out.error, abs_tol);
  out.breakdown.misr_c1 = out.expectations.c1 * misr_tail_factor(RegionLabel::C1, alpha);
  out.breakdown.misr_c2 = out.expectations.c2 * misr_tail_factor(RegionLabel::C2, alpha);
  out.breakdown.misr_c3 = out.expectations.c3 * misr_tail_factor(RegionLabel::C3, alpha);
  out.gain = misr_ppp(alpha) / out.breakdown.total();
  return out;
}

// Horizontal-shift approximation F_PPP(theta / G) for a known gain G.
inline double shifted_baseline_ccdf(double theta, double gain, double alpha) {
  if (!(gain > 0.0)) throw DomainError("gain must be positive");
  return ccdf_ppp_baseline(theta / gain, alpha);
}

inline double asymptotic_ccdf(double theta, double gamma, double alpha) {
  return shifted_baseline_ccdf(theta, misr_gain(gamma, alpha).gain, alpha);
}

// ---------------------------------------------------------------------------
// Curves over a theta grid.

inline SirCurve analytic_curve(double gamma, double alpha, std::span<const double> theta_db,
                               const CcdfOptions& opt = {}) {
  SirCurve c;
  c.gamma = gamma;
  c.alpha = alpha;
  c.method = CurveMethod::analytic;
  for (double db : theta_db) {
    c.theta_db.push_back(db);
    c.ccdf.push_back(std::clamp(ccdf_cooperative(db_to_linear(db), gamma, alpha, opt).total, 0.0, 1.0));
  }
  return c;
}

inline SirCurve asymptotic_curve(double gamma, double alpha, std::span<const double> theta_db) {
  const double gain = misr_gain(gamma, alpha).gain;
  SirCurve c;
  c.gamma = gamma;
  c.alpha = alpha;
  c.method = CurveMethod::asymptotic;
  for (double db : theta_db) {
    c.theta_db.push_back(db);
    c.ccdf.push_back(shifted_baseline_ccdf(db_to_linear(db), gain, alpha));
  }
  return c;
}

}  // namespace coopsir::analytic

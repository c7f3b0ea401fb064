// Copyright 2026 The coopsir Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "coopsir/analytic.hpp"
#include "coopsir/gain_fit.hpp"
#include "coopsir/geometry.hpp"
#include "oracles.hpp"

using namespace coopsir;
using analytic::Serving;

constexpr double kPi = std::numbers::pi;

TEST(BaselineCcdf, ZeroThresholdAndUnitTheta) {
  for (double alpha : {2.5, 3.0, 4.0, 6.0}) EXPECT_EQ(analytic::ccdf_ppp_baseline(0.0, alpha), 1.0);
  EXPECT_NEAR(analytic::ccdf_ppp_baseline(1.0, 4.0), 1.0 / (1.0 + kPi / 4.0), 1e-12);
  EXPECT_NEAR(analytic::ccdf_ppp_baseline(1.0, 4.0), 0.56010, 5e-6);
  EXPECT_EQ(analytic::ccdf_ppp_baseline(std::numeric_limits<double>::infinity(), 4.0), 0.0);
}

TEST(BaselineCcdf, AlphaFourClosedForm) {
  for (double db = -20.0; db <= 20.0; db += 0.25) {
    const double th = db_to_linear(db);
    EXPECT_NEAR(analytic::ccdf_ppp_baseline(th, 4.0), 1.0 / (1.0 + std::sqrt(th) * std::atan(std::sqrt(th))), 1e-10);
  }
}

TEST(BaselineCcdf, GeneralAlphaAgainstQuadrature) {
  for (double alpha : {2.7, 3.0, 3.5, 5.0})
    for (double db : {-15.0, -5.0, 0.0, 5.0, 15.0}) {
      const double th = db_to_linear(db);
      EXPECT_NEAR(analytic::ccdf_ppp_baseline(th, alpha), oracle::baseline_ccdf(th, alpha), 1e-10);
    }
}

TEST(BaselineCcdf, DomainErrors) {
  EXPECT_THROW(analytic::ccdf_ppp_baseline(-1.0, 4.0), DomainError);
  EXPECT_THROW(analytic::ccdf_ppp_baseline(1.0, 2.0), DomainError);
}

TEST(LaplaceInterference, UnitAtZero) {
  for (Serving s : {Serving::one, Serving::two, Serving::three})
    for (double alpha : {3.0, 4.0}) {
      EXPECT_EQ(analytic::laplace_interference(s, 0.0, 1.3, alpha), 1.0);
      EXPECT_EQ(analytic::laplace_interference_general(s, 0.0, 1.3, alpha), 1.0);
    }
}

TEST(LaplaceInterference, AlphaFourWorkedValue) {
  const double v = analytic::laplace_interference_alpha4(Serving::three, 1.0, 1.0, 1.0);
  EXPECT_NEAR(v, std::exp(-kPi * kPi / 4.0), 1e-15);
  EXPECT_NEAR(v, 0.0848050, 5e-8);
}

TEST(LaplaceInterference, ExplicitInterfererFactor) {
  for (double alpha : {3.0, 4.0, 5.0})
    for (double s : {0.1, 1.0, 7.0})
      for (double d : {0.5, 1.0, 2.0}) {
        const double l1 = analytic::laplace_interference(Serving::one, s, d, alpha);
        const double l2 = analytic::laplace_interference(Serving::two, s, d, alpha);
        const double l3 = analytic::laplace_interference(Serving::three, s, d, alpha);
        EXPECT_NEAR(l1, l3 / (1.0 + s * std::pow(d, -alpha)), 1e-15);
        EXPECT_EQ(l1, l2);
      }
}

TEST(LaplaceInterference, GeneralPathMatchesAlphaFour) {
  for (double s : {1e-4, 0.01, 0.3, 1.0, 4.0, 50.0, 1e4})
    for (double d : {0.05, 0.4, 1.0, 2.5, 10.0})
      for (Serving sv : {Serving::one, Serving::three}) {
        EXPECT_NEAR(analytic::laplace_interference_general(sv, s, d, 4.0),
                    analytic::laplace_interference_alpha4(sv, s, d), 1e-9);
      }
}

TEST(LaplaceInterference, IntensityScaling) {
  // lambda enters as exp(-lambda * exponent)
  const double l1 = analytic::laplace_interference(Serving::three, 2.0, 1.0, 3.5, 1.0);
  const double l3 = analytic::laplace_interference(Serving::three, 2.0, 1.0, 3.5, 3.0);
  EXPECT_NEAR(l3, l1 * l1 * l1, 1e-14);
}

TEST(LaplaceJet, DerivativesMatchFiniteDifferences) {
  for (double alpha : {3.0, 4.0})
    for (Serving sv : {Serving::one, Serving::three})
      for (double s : {0.05, 0.7, 3.0}) {
        const double d = 0.9;
        const auto j = analytic::laplace_jet(sv, s, d, alpha);
        auto L = [&](double x) { return analytic::laplace_interference(sv, x, d, alpha); };
        const double h = 1e-4 * s;
        EXPECT_NEAR(j.value, L(s), 1e-13);
        EXPECT_NEAR(j.d1(), (L(s + h) - L(s - h)) / (2 * h), 1e-7 * std::abs(j.d1()) + 1e-12);
        EXPECT_NEAR(j.d2(), (L(s + h) - 2 * L(s) + L(s - h)) / (h * h), 1e-4 * std::abs(j.d2()) + 1e-8);
      }
  EXPECT_THROW(analytic::laplace_jet(Serving::one, 0.0, 1.0, 4.0), DomainError);
}

// P(b0 g0 + b1 g1 [+ b2 g2] > x) for unit exponentials, by direct quadrature.
double hypo_ccdf(const std::vector<double>& b, double x) {
  if (b.size() == 1) return std::exp(-x / b[0]);
  const std::vector<double> rest(b.begin() + 1, b.end());
  // condition on g0 = u
  const double cut = x / b[0];
  return std::exp(-cut) + oracle::gk([&](double u) { return std::exp(-u) * hypo_ccdf(rest, x - b[0] * u); }, 0.0, cut, 1e-12, 6);
}

TEST(HypoexponentialSuccess, DeterministicInterference) {
  // L(s) = exp(-c s) turns the success probability into the plain ccdf of
  // the signal sum at c * unit_s
  const double c = 0.8;
  auto jet = [&](double s) {
    analytic::LaplaceJet j;
    j.value = std::exp(-c * s);
    j.dlog = -c;
    j.d2log = 0.0;
    return j;
  };
  const std::vector<std::vector<double>> cases{
      {1.0}, {1.0, 0.4}, {1.0, 1.0}, {1.0, 1.0 - 1e-12}, {1.0, 0.5, 0.2},
      {1.0, 1.0, 0.3}, {1.0, 0.3, 0.3}, {1.0, 1.0, 1.0}, {1.0, 0.3 + 1e-13, 0.3}, {1.0, 0.9, 0.8}};
  for (const auto& means : cases)
    for (double unit_s : {0.1, 1.0, 3.0}) {
      const double got = analytic::hypoexponential_success(means, unit_s, jet);
      EXPECT_NEAR(got, hypo_ccdf(means, c * unit_s), 1e-9) << means.size() << " " << means.back() << " " << unit_s;
    }
}

TEST(HypoexponentialSuccess, ErlangLimits) {
  auto jet = [](double s) {
    analytic::LaplaceJet j;
    j.value = std::exp(-s);
    j.dlog = -1.0;
    return j;
  };
  const double x = 1.7;
  const std::array<double, 2> two{1.0, 1.0};
  const std::array<double, 3> three{1.0, 1.0, 1.0};
  EXPECT_NEAR(analytic::hypoexponential_success(two, x, jet), std::exp(-x) * (1 + x), 1e-12);
  EXPECT_NEAR(analytic::hypoexponential_success(three, x, jet), std::exp(-x) * (1 + x + x * x / 2), 1e-12);
}

class CooperativeCcdfTest : public ::testing::TestWithParam<std::tuple<double, double, double>> {};

TEST_P(CooperativeCcdfTest, MatchesScaleIntegratedReference) {
  const auto [gamma, db, alpha] = GetParam();
  const double theta = db_to_linear(db);
  const auto got = analytic::ccdf_cooperative(theta, gamma, alpha);
  const auto ref = oracle::cooperative_ccdf(theta, gamma, alpha);
  EXPECT_NEAR(got.per_region[0], ref.p1, 2e-7);
  EXPECT_NEAR(got.per_region[1], ref.p2, 2e-7);
  EXPECT_NEAR(got.per_region[2], ref.p3, 2e-7);
  EXPECT_NEAR(got.total, ref.total(), 3e-7);
  EXPECT_LE(got.error, 3e-7);
}

INSTANTIATE_TEST_SUITE_P(Grid, CooperativeCcdfTest,
                         ::testing::Combine(::testing::Values(0.2, 0.5, 0.8, 1.0), ::testing::Values(-10.0, 0.0, 10.0),
                                            ::testing::Values(3.0, 4.0)));

TEST(CooperativeCcdf, ReferenceValuesAlphaFour) {
  const std::array<std::array<double, 4>, 3> table{{
      {0.2, 0.954963, 0.690659, 0.238962},
      {0.5, 0.973097, 0.795265, 0.339183},
      {1.0, 0.974436, 0.807310, 0.394946},
  }};
  for (const auto& row : table) {
    EXPECT_NEAR(analytic::ccdf_cooperative(0.1, row[0], 4.0).total, row[1], 1e-6);
    EXPECT_NEAR(analytic::ccdf_cooperative(1.0, row[0], 4.0).total, row[2], 1e-6);
    EXPECT_NEAR(analytic::ccdf_cooperative(10.0, row[0], 4.0).total, row[3], 1e-6);
  }
}

TEST(CooperativeCcdf, NoCooperationIsBaseline) {
  for (double alpha : {3.0, 4.0})
    for (double db : {-10.0, -3.0, 0.0, 6.0, 15.0}) {
      const double th = db_to_linear(db);
      const auto c = analytic::ccdf_cooperative(th, 0.0, alpha);
      EXPECT_NEAR(c.total, analytic::ccdf_ppp_baseline(th, alpha), 1e-6);
      EXPECT_EQ(c.per_region[1], 0.0);
      EXPECT_EQ(c.per_region[2], 0.0);
    }
}

TEST(CooperativeCcdf, ZeroThresholdGivesAreaFractions) {
  for (double gamma : {0.0, 0.1, 0.35, 0.5, 0.9, 1.0}) {
    const auto c = analytic::ccdf_cooperative(0.0, gamma, 4.0);
    const auto a = geometry::area_fractions(gamma);
    EXPECT_NEAR(c.per_region[0], a.p1, 1e-7);
    EXPECT_NEAR(c.per_region[1], a.p2, 1e-7);
    EXPECT_NEAR(c.per_region[2], a.p3, 1e-7);
    EXPECT_NEAR(c.total, 1.0, 1e-7);
  }
}

TEST(CooperativeCcdf, HalvingToleranceStaysWithinErrorEstimate) {
  for (double gamma : {0.2, 0.5, 1.0})
    for (double db : {-10.0, 0.0, 10.0}) {
      const double th = db_to_linear(db);
      const auto coarse = analytic::ccdf_cooperative(th, gamma, 4.0, {1e-7});
      const auto fine = analytic::ccdf_cooperative(th, gamma, 4.0, {5e-8});
      for (int r = 0; r < 3; ++r)
        EXPECT_LE(std::abs(coarse.per_region[r] - fine.per_region[r]), std::max(coarse.error, 1e-15))
            << gamma << " " << db << " C" << r + 1;
    }
}

TEST(CooperativeCcdf, NearFullCooperation) {
  // the C1 and C2 slivers shrink like rho^2 and must not be lost
  const double full = analytic::ccdf_cooperative(db_to_linear(-11.2), 1.0, 4.0).total;
  for (double gamma : {0.999, 0.9997, 0.99999}) {
    const auto c = analytic::ccdf_cooperative(0.0, gamma, 4.0);
    const auto a = geometry::area_fractions(gamma);
    EXPECT_NEAR(c.per_region[0], a.p1, 1e-9) << gamma;
    EXPECT_NEAR(c.per_region[1], a.p2, 1e-9) << gamma;
    EXPECT_NEAR(c.per_region[2], a.p3, 1e-9) << gamma;
    EXPECT_NEAR(analytic::ccdf_cooperative(db_to_linear(-11.2), gamma, 4.0).total, full, 1e-6) << gamma;
    EXPECT_NEAR(analytic::misr_gain(gamma, 4.0).gain, analytic::misr_gain(1.0, 4.0).gain, 1e-6) << gamma;
  }
}

TEST(CooperativeCcdf, RegionTermsBelowAreaFractions) {
  for (double gamma : {0.2, 0.5, 0.7})
    for (double db : {-10.0, 0.0, 10.0}) {
      const auto c = analytic::ccdf_cooperative(db_to_linear(db), gamma, 4.0);
      const auto a = geometry::area_fractions(gamma);
      EXPECT_LE(c.per_region[0], a.p1 + 1e-7);
      EXPECT_LE(c.per_region[1], a.p2 + 1e-7);
      EXPECT_LE(c.per_region[2], a.p3 + 1e-7);
    }
}

TEST(CooperativeCcdf, InfiniteThresholdAndDomainErrors) {
  EXPECT_EQ(analytic::ccdf_cooperative(std::numeric_limits<double>::infinity(), 0.5, 4.0).total, 0.0);
  EXPECT_THROW(analytic::ccdf_cooperative(-1.0, 0.5, 4.0), DomainError);
  EXPECT_THROW(analytic::ccdf_cooperative(1.0, 1.5, 4.0), DomainError);
  EXPECT_THROW(analytic::ccdf_cooperative(1.0, 0.5, 1.9), DomainError);
}

TEST(CooperativeCcdf, UnreachableToleranceRaises) {
  analytic::CcdfOptions opt;
  opt.abs_tol = 1e-17;
  EXPECT_THROW(analytic::ccdf_cooperative(1.0, 0.5, 4.0, opt), NumericalAccuracyError);
}

TEST(CooperativeCcdf, PowerCombiningReducesToBaselineWithoutCooperation) {
  analytic::CcdfOptions opt;
  opt.combining = SignalCombining::power;
  EXPECT_NEAR(analytic::ccdf_cooperative(1.0, 0.0, 4.0, opt).total, analytic::ccdf_ppp_baseline(1.0, 4.0), 1e-6);
  // adding powers beats adding random-phase amplitudes at fixed geometry
  EXPECT_GT(analytic::ccdf_cooperative(1.0, 0.5, 4.0, opt).total, analytic::ccdf_cooperative(1.0, 0.5, 4.0).total);
}

TEST(Misr, PppValueAndTailSums) {
  EXPECT_DOUBLE_EQ(analytic::misr_ppp(4.0), 1.0);
  EXPECT_DOUBLE_EQ(analytic::misr_ppp(3.0), 2.0);
  EXPECT_DOUBLE_EQ(analytic::misr_tail_factor(RegionLabel::C1, 4.0), 3.0);
  EXPECT_DOUBLE_EQ(analytic::misr_tail_factor(RegionLabel::C2, 4.0), 4.0);
  EXPECT_DOUBLE_EQ(analytic::misr_tail_factor(RegionLabel::C3, 4.0), 3.0);
  EXPECT_THROW(analytic::relative_distance_tail_sum(0, 4.0), std::invalid_argument);
}

TEST(Misr, RegionExpectationsAgainstReducedIntegrals) {
  for (double alpha : {3.0, 4.0, 5.0})
    for (double gamma : {0.0, 0.1, 0.3, 0.5, 0.8, 1.0}) {
      double err = 0.0;
      const auto e = analytic::misr_region_expectations(gamma, alpha, err);
      const auto ref = oracle::region_expectations(gamma, alpha);
      EXPECT_NEAR(e.c1, ref.e1, 1e-9) << gamma << " " << alpha;
      EXPECT_NEAR(e.c2, ref.e2, 1e-9) << gamma << " " << alpha;
      EXPECT_NEAR(e.c3, ref.e3, 1e-9) << gamma << " " << alpha;
      EXPECT_LE(err, 1e-9);
    }
}

TEST(Misr, NoCooperationGainIsOne) {
  for (double alpha : {3.0, 4.0, 5.0}) {
    const auto g = analytic::misr_gain(0.0, alpha);
    EXPECT_NEAR(g.gain, 1.0, 1e-6);
    EXPECT_NEAR(g.breakdown.total(), analytic::misr_ppp(alpha), 1e-6);
    EXPECT_EQ(g.breakdown.misr_c2, 0.0);
  }
}

TEST(Misr, GroupedFormMatchesComponents) {
  for (double gamma : {0.1, 0.4, 0.7, 1.0}) {
    const auto g = analytic::misr_gain(gamma, 4.0);
    EXPECT_NEAR(analytic::gain_from_grouping(g.expectations, 4.0), g.gain, 1e-9);
    EXPECT_NEAR(g.breakdown.total(), g.breakdown.misr_c1 + g.breakdown.misr_c2 + g.breakdown.misr_c3, 1e-15);
  }
}

TEST(Misr, GainReferenceValues) {
  const std::array<std::pair<double, double>, 5> alpha4{{{0.2, 3.23799}, {0.5, 5.54184}, {0.6, 5.69821}, {0.9, 5.75799}, {1.0, 5.75801}}};
  for (const auto& [gamma, db] : alpha4) {
    EXPECT_NEAR(analytic::misr_gain(gamma, 4.0).gain_db(), db, 1e-5);
    EXPECT_NEAR(analytic::misr_gain(gamma, 4.0).gain, oracle::gain(gamma, 4.0), 1e-9);
  }
  EXPECT_NEAR(analytic::misr_gain(1.0, 3.0).gain_db(), 4.5402, 1e-4);
  EXPECT_NEAR(analytic::misr_gain(1.0, 5.0).gain_db(), 6.8353, 1e-4);
}

TEST(Misr, GainTracksTanhModel) {
  for (int i = 0; i <= 20; ++i) {
    const double g = i / 20.0;
    EXPECT_NEAR(analytic::misr_gain(g, 4.0).gain_db(), 5.865 * std::tanh(3.234 * g), 0.15) << g;
  }
}

TEST(AsymptoticCcdf, NoCooperationIsBaseline) {
  for (double db : {-10.0, 0.0, 10.0}) {
    const double th = db_to_linear(db);
    EXPECT_NEAR(analytic::asymptotic_ccdf(th, 0.0, 4.0), analytic::ccdf_ppp_baseline(th, 4.0), 1e-9);
  }
}

TEST(AsymptoticCcdf, AccurateAtLowThreshold) {
  const double th = db_to_linear(-10.0);
  EXPECT_NEAR(analytic::asymptotic_ccdf(th, 0.5, 4.0), analytic::ccdf_cooperative(th, 0.5, 4.0).total, 0.01);
  for (double gamma : {0.2, 0.5, 1.0})
    for (double db : {-15.0, -20.0, -25.0}) {
      const double t = db_to_linear(db);
      const double outage_exact = 1.0 - analytic::ccdf_cooperative(t, gamma, 4.0, {1e-9}).total;
      const double outage_asym = 1.0 - analytic::asymptotic_ccdf(t, gamma, 4.0);
      EXPECT_NEAR(outage_asym / outage_exact, 1.0, 0.10) << gamma << " " << db;
    }
}

TEST(AnalyticCurve, ShapeAndMetadata) {
  const std::vector<double> grid{-std::numeric_limits<double>::infinity(), -10, 0, 10};
  const auto c = analytic::analytic_curve(0.5, 4.0, grid);
  c.validate();
  EXPECT_EQ(c.method, CurveMethod::analytic);
  EXPECT_NEAR(c.ccdf[0], 1.0, 1e-7);
  const auto a = analytic::asymptotic_curve(0.5, 4.0, grid);
  EXPECT_EQ(a.method, CurveMethod::asymptotic);
  EXPECT_EQ(a.ccdf[0], 1.0);
}

TEST(GainFit, RecoversExactModel) {
  std::vector<double> g, y;
  for (int i = 0; i <= 20; ++i) {
    g.push_back(i / 20.0);
    y.push_back(6.0 * std::tanh(3.0 * g.back()));
  }
  const auto fit = analytic::fit_gain_tanh(g, y);
  EXPECT_NEAR(fit.a, 6.0, 1e-6);
  EXPECT_NEAR(fit.b, 3.0, 1e-6);
  EXPECT_LT(fit.residual, 1e-12);
}

TEST(GainFit, AnalyticGainCurve) {
  std::vector<double> g, y;
  for (int i = 0; i <= 20; ++i) {
    g.push_back(i / 20.0);
    y.push_back(analytic::misr_gain(g.back(), 4.0).gain_db());
  }
  const auto fit = analytic::fit_gain_tanh(g, y);
  EXPECT_NEAR(fit.a, 5.865, 0.2);
  EXPECT_NEAR(fit.b, 3.234, 0.2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_LE(std::abs(fit(g[i]) - y[i]), 0.2);
    EXPECT_LE(std::abs(6.0 * std::tanh(3.0 * g[i]) - y[i]), 0.3);
  }
}

TEST(GainFit, RejectsBadInput) {
  const std::vector<double> g{0.0, 0.25, 0.5, 0.75, 1.0};
  const std::vector<double> y{0.0, 3.0, 5.0, 5.6, 5.8};
  EXPECT_NO_THROW(analytic::fit_gain_tanh(g, y));
  EXPECT_THROW(analytic::fit_gain_tanh(std::vector<double>{0.0, 0.5, 1.0}, std::vector<double>{0, 1, 2}),
               std::invalid_argument);
  const std::vector<double> short_span{0.0, 0.1, 0.2, 0.3, 0.4};
  EXPECT_THROW(analytic::fit_gain_tanh(short_span, y), std::invalid_argument);
  std::vector<double> shifted = y;
  shifted[0] = 0.5;
  EXPECT_THROW(analytic::fit_gain_tanh(g, shifted), std::invalid_argument);
}

TEST(GainFit, NonconvergentDataRaisesFitError) {
  // decreasing data cannot be fit with a, b > 0
  const std::vector<double> g{0.0, 0.25, 0.5, 0.75, 1.0};
  const std::vector<double> y{0.0, -3.0, -5.0, -5.6, -5.8};
  try {
    analytic::fit_gain_tanh(g, y);
    FAIL() << "expected FitError";
  } catch (const FitError& e) {
    EXPECT_EQ(e.residuals().size(), g.size());
  }
}

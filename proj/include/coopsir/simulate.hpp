// Copyright 2026 The coopsir Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "coopsir/config.hpp"
#include "coopsir/geometry.hpp"
#include "coopsir/results.hpp"
#include "coopsir/rng.hpp"

namespace coopsir::simulate {

inline constexpr std::uint64_t kMinCcdfTrials = 10'000;
inline constexpr std::uint64_t kMinMisrTrials = 100'000;
inline constexpr std::uint64_t kMinSeTrials = 100'000;

struct Options {
  double window_radius = 0.0;  // 0: geometry::default_window_radius(lambda)
  // Add the mean interference of the PPP outside the window,
  // 2*pi*lambda*R^(2-alpha)/(alpha-2), to every trial.
  bool far_field_correction = true;
  SignalCombining combining = SignalCombining::amplitude;
  unsigned threads = 0;  // 0: hardware concurrency
  std::size_t min_interferers = 100;
};

inline double resolve_window(double lambda, const Options& opt) {
  if (opt.window_radius < 0.0 || !std::isfinite(opt.window_radius))
    throw std::invalid_argument("window radius must be positive (or 0 for the default)");
  return opt.window_radius > 0.0 ? opt.window_radius : geometry::default_window_radius(lambda);
}

// Everything one trial needs, independent of gamma: the three nearest
// distances with their complex fading, and the aggregate interference of
// the remaining base stations (with and without fading).
struct TrialDraw {
  std::array<double, 3> r{};
  std::array<double, 3> path{};  // r_j^(-alpha)
  std::array<std::complex<double>, 3> h{};
  double interference_beyond = 0.0;  // sum_{k>3} |h_k|^2 r_k^(-alpha)
  double path_beyond = 0.0;          // sum_{k>3} r_k^(-alpha)
  double window_radius = 0.0;
  std::size_t points = 0;
  int enlargements = 0;
};

// Draw order: the three nearest arrivals, their fading (power, phase), then
// (arrival, power) pairs for the rest. Arrivals are those of a unit-rate
// Poisson process in lambda*pi*r^2, i.e. PPP distances in increasing order.
// If fewer than 3 + min_interferers points fall inside the window, the
// window is doubled and the stream continues.
template <class Rng>
TrialDraw draw_trial(double alpha, double lambda, double window_radius, const Options& opt, Rng& rng) {
  const double scale = lambda * std::numbers::pi;
  TrialDraw t;
  t.window_radius = window_radius;
  double limit = scale * window_radius * window_radius;

  auto enlarge = [&] {
    t.window_radius *= 2.0;
    limit = scale * t.window_radius * t.window_radius;
    ++t.enlargements;
  };
  auto path_of = [&](double arrival) {
    if (alpha == 4.0) {
      const double inv = scale / arrival;
      return inv * inv;
    }
    return std::pow(arrival / scale, -0.5 * alpha);
  };

  double arrival = rng.exponential();
  for (int j = 0; j < 3; ++j) {
    while (arrival > limit) enlarge();
    t.r[j] = std::sqrt(arrival / scale);
    t.path[j] = path_of(arrival);
    arrival += rng.exponential();
  }
  t.points = 3;
  for (auto& h : t.h) h = std::polar(std::sqrt(rng.exponential()), rng.angle());

  for (;;) {
    while (arrival <= limit) {
      const double a = path_of(arrival);
      t.interference_beyond += rng.exponential() * a;
      t.path_beyond += a;
      ++t.points;
      arrival += rng.exponential();
    }
    if (t.points >= 3 + opt.min_interferers) break;
    enlarge();
  }

  if (opt.far_field_correction) {
    const double far = 2.0 * scale * std::pow(t.window_radius, 2.0 - alpha) / (alpha - 2.0);
    t.interference_beyond += far;
    t.path_beyond += far;
  }
  return t;
}

// Signal, interference and fading-averaged signal for one region.
struct LinkBudget {
  double signal = 0.0;
  double interference = 0.0;
  double mean_signal = 0.0;

  double sir() const noexcept { return signal / interference; }
};

inline LinkBudget link_budget(const TrialDraw& t, RegionLabel region, SignalCombining combining) {
  const int n = serving_count(region);
  LinkBudget b;
  b.interference = t.interference_beyond;
  for (int j = 2; j >= n; --j) b.interference += std::norm(t.h[j]) * t.path[j];
  std::complex<double> amplitude{};
  for (int j = 0; j < n; ++j) {
    b.mean_signal += t.path[j];
    if (combining == SignalCombining::amplitude)
      amplitude += t.h[j] * std::sqrt(t.path[j]);
    else
      b.signal += std::norm(t.h[j]) * t.path[j];
  }
  if (combining == SignalCombining::amplitude) b.signal = std::norm(amplitude);
  return b;
}

struct SirSample {
  double sir = 0.0;
  RegionLabel region = RegionLabel::C1;
  int n_serving = 1;
};

// One SIR draw for the typical user, seeded directly by `seed`.
inline SirSample sample_sir(const CooperationConfig& config, double window_radius, std::uint64_t seed,
                            const Options& opt = {}) {
  Xoshiro256pp rng(seed);
  const double window = window_radius > 0.0 ? window_radius : resolve_window(config.lambda(), opt);
  const TrialDraw t = draw_trial(config.alpha(), config.lambda(), window, opt, rng);
  const RegionLabel region = geometry::classify_region(t.r[0], t.r[1], t.r[2], config.gamma());
  return {link_budget(t, region, opt.combining).sir(), region, serving_count(region)};
}

// ---------------------------------------------------------------------------
// Batch execution. Trials are grouped in fixed blocks; block sums are
// combined pairwise in block order, so results do not depend on the number
// of threads.

struct Diagnostics {
  std::uint64_t trials = 0;
  std::uint64_t enlargements = 0;  // window doublings across all trials
  std::uint64_t enlarged_trials = 0;
  double window_radius = 0.0;

  // More than 0.1% of trials needed a larger window.
  bool flagged() const noexcept { return enlarged_trials * 1000 > trials; }
};

namespace detail {

inline constexpr std::uint64_t kBlockSize = 4096;

struct Accumulator {
  std::vector<double> sums;
  std::uint64_t enlargements = 0;
  std::uint64_t enlarged_trials = 0;

  void merge(const Accumulator& o) {
    for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += o.sums[i];
    enlargements += o.enlargements;
    enlarged_trials += o.enlarged_trials;
  }
};

// body(sums, draw) adds one trial's contributions into sums.
template <class Body>
Accumulator run_trials(double alpha, double lambda, std::uint64_t trials, std::uint64_t root_seed,
                       std::size_t width, const Options& opt, Body body) {
  const double window = resolve_window(lambda, opt);
  const std::uint64_t blocks = (trials + kBlockSize - 1) / kBlockSize;
  std::vector<Accumulator> partial(blocks, Accumulator{std::vector<double>(width, 0.0)});

  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t blk = next++; blk < blocks; blk = next++) {
      Accumulator& acc = partial[blk];
      const std::uint64_t end = std::min(trials, (blk + 1) * kBlockSize);
      for (std::uint64_t i = blk * kBlockSize; i < end; ++i) {
        Xoshiro256pp rng = trial_rng(root_seed, i);
        const TrialDraw t = draw_trial(alpha, lambda, window, opt, rng);
        acc.enlargements += static_cast<std::uint64_t>(t.enlargements);
        acc.enlarged_trials += t.enlargements > 0 ? 1 : 0;
        body(acc.sums, t);
      }
    }
  };

  unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(blocks, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }

  if (partial.empty()) return Accumulator{std::vector<double>(width, 0.0)};
  for (std::size_t stride = 1; stride < partial.size(); stride *= 2)
    for (std::size_t i = 0; i + stride < partial.size(); i += 2 * stride) partial[i].merge(partial[i + stride]);
  return std::move(partial.front());
}

inline Diagnostics diagnostics_of(const Accumulator& acc, std::uint64_t trials, double window) {
  return {trials, acc.enlargements, acc.enlarged_trials, window};
}

inline void check_gammas(std::span<const double> gammas) {
  if (gammas.empty()) throw std::invalid_argument("gamma sweep is empty");
  for (double g : gammas)
    if (!(g >= 0.0 && g <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
}

inline void check_alpha_lambda(double alpha, double lambda) {
  CooperationConfig(0.0, alpha, lambda);  // validates
}

inline void check_trials(std::uint64_t trials, std::uint64_t minimum, const char* what) {
  if (trials < minimum)
    throw std::invalid_argument(std::string(what) + " needs at least " + std::to_string(minimum) + " trials");
}

inline double std_error(double sum, double sum_sq, double n) {
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  return std::sqrt(var / n);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// SIR ccdf.

struct CcdfSweep {
  std::vector<SirCurve> curves;  // one per gamma, method montecarlo
  std::vector<std::array<double, 3>> region_frequency;
  std::vector<double> mean_serving;
  std::vector<double> mean_serving_std_error;
  Diagnostics diagnostics;
};

// Empirical ccdfs for several gammas from the same realizations (common
// random numbers). An entry of -inf dB is theta = 0.
inline CcdfSweep ccdf_sweep(double alpha, std::span<const double> gammas, std::span<const double> theta_db,
                            std::uint64_t trials, std::uint64_t root_seed, const Options& opt = {},
                            double lambda = 1.0) {
  detail::check_alpha_lambda(alpha, lambda);
  detail::check_gammas(gammas);
  detail::check_trials(trials, 1, "ccdf sweep");
  for (std::size_t i = 1; i < theta_db.size(); ++i)
    if (theta_db[i] < theta_db[i - 1]) throw std::invalid_argument("theta grid must be nondecreasing");

  std::vector<double> theta;
  for (double db : theta_db) theta.push_back(db_to_linear(db));
  const std::size_t ng = gammas.size();
  const std::size_t nt = theta.size();
  // layout: [gamma][theta] exceedance counts, then [gamma][region] counts,
  // then [gamma] sum of N^2
  const std::size_t region_base = ng * nt;
  const std::size_t nsq_base = region_base + 3 * ng;

  const auto acc = detail::run_trials(
      alpha, lambda, trials, root_seed, nsq_base + ng, opt, [&](std::vector<double>& sums, const TrialDraw& t) {
        for (std::size_t g = 0; g < ng; ++g) {
          const RegionLabel region = geometry::classify_region(t.r[0], t.r[1], t.r[2], gammas[g]);
          const double sir = link_budget(t, region, opt.combining).sir();
          double* row = &sums[g * nt];
          for (std::size_t k = 0; k < nt; ++k) row[k] += sir > theta[k] ? 1.0 : 0.0;
          const int n = serving_count(region);
          sums[region_base + 3 * g + static_cast<std::size_t>(n - 1)] += 1.0;
          sums[nsq_base + g] += n * n;
        }
      });

  const double n = static_cast<double>(trials);
  CcdfSweep out;
  out.diagnostics = detail::diagnostics_of(acc, trials, resolve_window(lambda, opt));
  for (std::size_t g = 0; g < ng; ++g) {
    SirCurve c;
    c.gamma = gammas[g];
    c.alpha = alpha;
    c.method = CurveMethod::montecarlo;
    c.theta_db.assign(theta_db.begin(), theta_db.end());
    for (std::size_t k = 0; k < nt; ++k) {
      const double p = acc.sums[g * nt + k] / n;
      c.ccdf.push_back(p);
      c.std_error.push_back(std::sqrt(p * (1.0 - p) / n));
    }
    out.curves.push_back(std::move(c));

    std::array<double, 3> freq{};
    double sum_n = 0.0;
    for (int r = 0; r < 3; ++r) {
      freq[r] = acc.sums[region_base + 3 * g + r] / n;
      sum_n += (r + 1) * acc.sums[region_base + 3 * g + r];
    }
    out.region_frequency.push_back(freq);
    out.mean_serving.push_back(sum_n / n);
    out.mean_serving_std_error.push_back(detail::std_error(sum_n, acc.sums[nsq_base + g], n));
  }
  return out;
}

inline SirCurve empirical_ccdf(const CooperationConfig& config, std::span<const double> theta_db,
                               std::uint64_t trials, std::uint64_t root_seed, const Options& opt = {}) {
  detail::check_trials(trials, kMinCcdfTrials, "empirical ccdf");
  const std::array<double, 1> g{config.gamma()};
  return ccdf_sweep(config.alpha(), g, theta_db, trials, root_seed, opt, config.lambda()).curves.front();
}

// ---------------------------------------------------------------------------
// MISR.

struct MisrEstimate {
  double gamma = 0.0;
  double alpha = 4.0;
  MisrBreakdown breakdown;
  std::array<double, 3> std_error{};
  double total_std_error = 0.0;
  // sum_{i>1} E[(r2/ri)^a], sum_{i>2} E[(r3/ri)^a], sum_{i>3} E[(r3/ri)^a]
  std::array<double, 3> tail_sums{};
  std::array<double, 3> tail_sums_std_error{};
  Diagnostics diagnostics;

  double gain() const { return 2.0 / (alpha - 2.0) / breakdown.total(); }
};

// E[I / S_bar] with S_bar = sum over serving BSs of r^(-alpha); fading
// enters only through I.
inline std::vector<MisrEstimate> misr_sweep(double alpha, std::span<const double> gammas,
                                            std::uint64_t trials, std::uint64_t root_seed,
                                            const Options& opt = {}, double lambda = 1.0) {
  detail::check_alpha_lambda(alpha, lambda);
  detail::check_gammas(gammas);
  detail::check_trials(trials, 2, "MISR sweep");
  const std::size_t ng = gammas.size();
  // per gamma: 3 region sums, 3 region sums of squares, total sum of squares;
  // then 3 tail sums and their squares
  const std::size_t per = 7;
  const std::size_t tail_base = per * ng;

  const auto acc = detail::run_trials(
      alpha, lambda, trials, root_seed, tail_base + 6, opt, [&](std::vector<double>& sums, const TrialDraw& t) {
        for (std::size_t g = 0; g < ng; ++g) {
          const RegionLabel region = geometry::classify_region(t.r[0], t.r[1], t.r[2], gammas[g]);
          const LinkBudget b = link_budget(t, region, opt.combining);
          const double ratio = b.interference / b.mean_signal;
          const auto r = static_cast<std::size_t>(serving_count(region) - 1);
          sums[per * g + r] += ratio;
          sums[per * g + 3 + r] += ratio * ratio;
          sums[per * g + 6] += ratio * ratio;
        }
        const double r2a = 1.0 / t.path[1];
        const double r3a = 1.0 / t.path[2];
        const std::array<double, 3> tails{r2a * (t.path[1] + t.path[2] + t.path_beyond),
                                          r3a * (t.path[2] + t.path_beyond), r3a * t.path_beyond};
        for (int k = 0; k < 3; ++k) {
          sums[tail_base + k] += tails[k];
          sums[tail_base + 3 + k] += tails[k] * tails[k];
        }
      });

  const double n = static_cast<double>(trials);
  const Diagnostics diag = detail::diagnostics_of(acc, trials, resolve_window(lambda, opt));
  std::vector<MisrEstimate> out;
  for (std::size_t g = 0; g < ng; ++g) {
    MisrEstimate e;
    e.gamma = gammas[g];
    e.alpha = alpha;
    e.diagnostics = diag;
    const double* s = &acc.sums[per * g];
    e.breakdown = {s[0] / n, s[1] / n, s[2] / n};
    for (int r = 0; r < 3; ++r) e.std_error[r] = detail::std_error(s[r], s[3 + r], n);
    e.total_std_error = detail::std_error(s[0] + s[1] + s[2], s[6], n);
    for (int k = 0; k < 3; ++k) {
      e.tail_sums[k] = acc.sums[tail_base + k] / n;
      e.tail_sums_std_error[k] = detail::std_error(acc.sums[tail_base + k], acc.sums[tail_base + 3 + k], n);
    }
    out.push_back(e);
  }
  return out;
}

inline MisrEstimate estimate_misr(const CooperationConfig& config, std::uint64_t trials, std::uint64_t root_seed,
                                  const Options& opt = {}) {
  detail::check_trials(trials, kMinMisrTrials, "MISR estimate");
  const std::array<double, 1> g{config.gamma()};
  return misr_sweep(config.alpha(), g, trials, root_seed, opt, config.lambda()).front();
}

// ---------------------------------------------------------------------------
// Normalized spectral efficiency N^(-1) log(1 + SIR).

enum class LogBase { two, e };

struct SpectralEfficiencyEstimate {
  double gamma = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  std::array<double, 3> per_region{};  // E[1_Ci N^(-1) log(1 + SIR)]
  Diagnostics diagnostics;
};

struct SeSweep {
  std::vector<SpectralEfficiencyEstimate> points;
  // paired (same realizations) difference to the first gamma of the sweep
  std::vector<double> delta;
  std::vector<double> delta_std_error;

  // First gamma after the curve has risen above its starting level where it
  // falls back to it, by linear interpolation between grid points.
  std::optional<double> crossing() const {
    bool risen = false;
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (delta[i] > 0.0) {
        risen = true;
        continue;
      }
      if (risen) {
        const double g0 = points[i - 1].gamma, g1 = points[i].gamma;
        const double d0 = delta[i - 1], d1 = delta[i];
        return g0 + (g1 - g0) * d0 / (d0 - d1);
      }
    }
    return std::nullopt;
  }
};

inline SeSweep se_sweep(double alpha, std::span<const double> gammas, std::uint64_t trials,
                        std::uint64_t root_seed, const Options& opt = {}, LogBase base = LogBase::e,
                        double lambda = 1.0) {
  detail::check_alpha_lambda(alpha, lambda);
  detail::check_gammas(gammas);
  detail::check_trials(trials, 2, "spectral efficiency sweep");
  const std::size_t ng = gammas.size();
  const double log_scale = base == LogBase::two ? 1.0 / std::numbers::ln2 : 1.0;
  // per gamma: 3 region sums, sum of squares, sum and square of difference
  // to gamma[0]
  const std::size_t per = 6;

  const auto acc = detail::run_trials(
      alpha, lambda, trials, root_seed, per * ng, opt, [&](std::vector<double>& sums, const TrialDraw& t) {
        double first = 0.0;
        for (std::size_t g = 0; g < ng; ++g) {
          const RegionLabel region = geometry::classify_region(t.r[0], t.r[1], t.r[2], gammas[g]);
          const double sir = link_budget(t, region, opt.combining).sir();
          const int n = serving_count(region);
          const double value = log_scale * std::log1p(sir) / n;
          if (g == 0) first = value;
          sums[per * g + static_cast<std::size_t>(n - 1)] += value;
          sums[per * g + 3] += value * value;
          const double d = value - first;
          sums[per * g + 4] += d;
          sums[per * g + 5] += d * d;
        }
      });
  const double n = static_cast<double>(trials);
  const Diagnostics diag = detail::diagnostics_of(acc, trials, resolve_window(lambda, opt));
  SeSweep out;
  for (std::size_t g = 0; g < ng; ++g) {
    const double* s = &acc.sums[per * g];
    SpectralEfficiencyEstimate e;
    e.gamma = gammas[g];
    e.trials = trials;
    e.per_region = {s[0] / n, s[1] / n, s[2] / n};
    e.mean = (s[0] + s[1] + s[2]) / n;
    e.std_error = detail::std_error(s[0] + s[1] + s[2], s[3], n);
    e.diagnostics = diag;
    out.points.push_back(e);
    out.delta.push_back(s[4] / n);
    out.delta_std_error.push_back(detail::std_error(s[4], s[5], n));
  }
  return out;
}

inline SpectralEfficiencyEstimate estimate_normalized_se(const CooperationConfig& config, std::uint64_t trials,
                                                         std::uint64_t root_seed, const Options& opt = {},
                                                         LogBase base = LogBase::e) {
  detail::check_trials(trials, kMinSeTrials, "spectral efficiency estimate");
  const std::array<double, 1> g{config.gamma()};
  return se_sweep(config.alpha(), g, trials, root_seed, opt, base, config.lambda()).points.front();
}

// Region frequencies and mean serving count, the geometric part of a sweep.
inline CcdfSweep region_statistics(const CooperationConfig& config, std::uint64_t trials, std::uint64_t root_seed,
                                   const Options& opt = {}) {
  const std::array<double, 1> g{config.gamma()};
  return ccdf_sweep(config.alpha(), g, {}, trials, root_seed, opt, config.lambda());
}

}  // namespace coopsir::simulate

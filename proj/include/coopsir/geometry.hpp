// Copyright 2026 The coopsir Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopsir/config.hpp"
#include "coopsir/error.hpp"
#include "coopsir/rng.hpp"

namespace coopsir::geometry {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  double norm() const noexcept { return std::hypot(x, y); }
  friend bool operator==(const Point2&, const Point2&) = default;
};

// One PPP draw restricted to the disk of radius window_radius around the
// typical user at the origin.
struct NetworkRealization {
  std::vector<Point2> points;
  double window_radius = 0.0;
  std::uint64_t seed = 0;
};

// Ordered distances r1 <= r2 <= ... from the origin to the base stations.
class DistanceProcess {
 public:
  DistanceProcess() = default;

  explicit DistanceProcess(std::vector<double> distances) : r_(std::move(distances)) {
    if (r_.size() < 3)
      throw InsufficientRealization(
          "distance process needs at least 3 base stations, got " + std::to_string(r_.size()),
          r_.size());
    for (std::size_t i = 0; i < r_.size(); ++i) {
      if (!(r_[i] > 0.0)) throw std::invalid_argument("distances must be strictly positive");
      if (i > 0 && r_[i] < r_[i - 1]) throw std::invalid_argument("distances must be sorted");
    }
  }

  std::span<const double> distances() const noexcept { return r_; }
  std::size_t size() const noexcept { return r_.size(); }
  double operator[](std::size_t i) const noexcept { return r_[i]; }
  double r1() const noexcept { return r_[0]; }
  double r2() const noexcept { return r_[1]; }
  double r3() const noexcept { return r_[2]; }

 private:
  std::vector<double> r_;
};

// Radius whose disk holds `expected_points` base stations on average.
inline double default_window_radius(double lambda = 1.0, double expected_points = 500.0) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  return std::sqrt(expected_points / (lambda * std::numbers::pi));
}

namespace detail {

inline void check_window(double lambda, double window_radius) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("PPP intensity must be positive");
  if (!(window_radius > 0.0) || !std::isfinite(window_radius))
    throw std::invalid_argument("window radius must be positive");
}

}  // namespace detail

// Homogeneous PPP on the disk: the count is Poisson(lambda*pi*R^2), obtained
// by counting unit-rate arrivals below the mean, then each point is placed
// uniformly on the disk.
inline NetworkRealization sample_ppp(double lambda, double window_radius, std::uint64_t seed) {
  detail::check_window(lambda, window_radius);
  Xoshiro256pp rng(seed);
  const double mean = lambda * std::numbers::pi * window_radius * window_radius;

  std::size_t count = 0;
  for (double arrival = rng.exponential(); arrival <= mean; arrival += rng.exponential())
    ++count;

  NetworkRealization net{{}, window_radius, seed};
  net.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double r = window_radius * std::sqrt(rng.uniform());
    const double phi = rng.angle();
    net.points.push_back({r * std::cos(phi), r * std::sin(phi)});
  }
  return net;
}

inline DistanceProcess distance_process(const NetworkRealization& net) {
  if (net.points.size() < 3)
    throw InsufficientRealization("realization has " + std::to_string(net.points.size()) +
                                      " points; enlarge the window",
                                  net.points.size());
  std::vector<double> r;
  r.reserve(net.points.size());
  for (const auto& p : net.points) r.push_back(p.norm());
  std::sort(r.begin(), r.end());
  return DistanceProcess(std::move(r));
}

// Appends to `out` the ordered PPP distances in (r_from, r_to], given that
// `arrival` is the last area-mass lambda*pi*r^2 already consumed. Mapping the
// arrival times of a unit-rate Poisson process through r = sqrt(t/(lambda*pi))
// yields exactly the sorted norms of a PPP, without placing points.
template <class Rng>
double extend_distances(std::vector<double>& out, double lambda, double window_radius,
                        double arrival, Rng& rng) {
  const double scale = lambda * std::numbers::pi;
  const double limit = scale * window_radius * window_radius;
  for (;;) {
    const double next = arrival + rng.exponential();
    if (next > limit) return arrival;
    arrival = next;
    out.push_back(std::sqrt(arrival / scale));
  }
}

// Ordered distances of a PPP within the window, same law as
// distance_process(sample_ppp(...)).
template <class Rng>
std::vector<double> sample_distances(double lambda, double window_radius, Rng& rng) {
  detail::check_window(lambda, window_radius);
  std::vector<double> r;
  r.reserve(static_cast<std::size_t>(lambda * std::numbers::pi * window_radius * window_radius * 1.2) + 8);
  extend_distances(r, lambda, window_radius, 0.0, rng);
  return r;
}

// Region membership from r1, r2, r3 in multiplied form, so rho = 0 needs no
// special case. Ties go to the lower region.
inline RegionLabel classify_region(double r1, double r2, double r3, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("gamma must lie in [0, 1]");
  const double rho = 1.0 - gamma;
  if (r1 <= rho * r2) return RegionLabel::C1;
  if (r1 <= rho * r3) return RegionLabel::C2;
  return RegionLabel::C3;
}

inline RegionLabel classify_region(const DistanceProcess& d, double gamma) {
  return classify_region(d.r1(), d.r2(), d.r3(), gamma);
}

// Probability that the typical user falls in C1, C2, C3.
struct AreaFractions {
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;

  double operator[](RegionLabel r) const noexcept {
    return r == RegionLabel::C1 ? p1 : r == RegionLabel::C2 ? p2 : p3;
  }
};

inline AreaFractions area_fractions(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("gamma must lie in [0, 1]");
  // extended precision, one rounding per fraction
  const long double g = gamma;
  const long double rho = 1.0L - g;
  const long double two_minus = 2.0L - g;
  return {static_cast<double>(rho * rho), static_cast<double>(g * rho * rho * two_minus),
          static_cast<double>(g * g * two_minus * two_minus)};
}

// E[N], the mean number of serving base stations.
inline double mean_serving_count(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("gamma must lie in [0, 1]");
  const double g2 = gamma * gamma;
  return g2 * g2 - 4.0 * g2 * gamma + 3.0 * g2 + 2.0 * gamma + 1.0;
}

}  // namespace coopsir::geometry

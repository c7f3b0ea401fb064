// Copyright 2026 The coopsir Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coopsir {

// Cooperation scheme parameters. rho = 1 - gamma and delta = 2 / alpha are
// derived on access so they can never drift from gamma and alpha.
class CooperationConfig {
 public:
  CooperationConfig(double gamma, double alpha, double lambda = 1.0)
      : gamma_(gamma), alpha_(alpha), lambda_(lambda) {
    if (!(gamma >= 0.0 && gamma <= 1.0))
      throw std::invalid_argument("cooperation level gamma must lie in [0, 1], got " +
                                  std::to_string(gamma));
    if (!(alpha > 2.0) || !std::isfinite(alpha))
      throw std::invalid_argument("path-loss exponent alpha must exceed 2, got " +
                                  std::to_string(alpha));
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw std::invalid_argument("intensity lambda must be positive, got " +
                                  std::to_string(lambda));
  }

  double gamma() const noexcept { return gamma_; }
  double alpha() const noexcept { return alpha_; }
  double lambda() const noexcept { return lambda_; }
  double rho() const noexcept { return 1.0 - gamma_; }
  double delta() const noexcept { return 2.0 / alpha_; }

  CooperationConfig with_gamma(double gamma) const { return {gamma, alpha_, lambda_}; }

 private:
  double gamma_;
  double alpha_;
  double lambda_;
};

// C1: cell center (one BS), C2: cell edge (two BSs), C3: cell corner (three BSs).
enum class RegionLabel { C1 = 1, C2 = 2, C3 = 3 };

constexpr int serving_count(RegionLabel r) noexcept { return static_cast<int>(r); }

constexpr std::string_view to_string(RegionLabel r) noexcept {
  switch (r) {
    case RegionLabel::C1: return "C1";
    case RegionLabel::C2: return "C2";
    case RegionLabel::C3: return "C3";
  }
  return "?";
}

}  // namespace coopsir

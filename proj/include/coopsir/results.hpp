// Copyright 2026 The coopsir Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace coopsir {

// How the serving base stations' signals combine at the user.
//  amplitude: the same symbol is sent by every serving BS without phase
//             alignment, so complex amplitudes add: S = |sum h_x r_x^(-a/2)|^2,
//             which is exponential with mean sum r_x^(-a).
//  power:     per-BS powers add: S = sum |h_x|^2 r_x^(-a) (hypoexponential).
enum class SignalCombining { amplitude, power };

enum class CurveMethod { analytic, montecarlo, asymptotic };

constexpr std::string_view to_string(CurveMethod m) noexcept {
  switch (m) {
    case CurveMethod::analytic: return "analytic";
    case CurveMethod::montecarlo: return "montecarlo";
    case CurveMethod::asymptotic: return "asymptotic";
  }
  return "?";
}

inline double db_to_linear(double db) {
  if (db == -std::numeric_limits<double>::infinity()) return 0.0;
  return std::pow(10.0, db / 10.0);
}

inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

// SIR ccdf sampled on a theta grid given in dB. std_error is empty for
// non-sampled curves.
struct SirCurve {
  std::vector<double> theta_db;
  std::vector<double> ccdf;
  std::vector<double> std_error;
  double gamma = 0.0;
  double alpha = 4.0;
  CurveMethod method = CurveMethod::analytic;

  void validate() const {
    if (theta_db.size() != ccdf.size())
      throw std::logic_error("SirCurve grids differ in length");
    if (!std_error.empty() && std_error.size() != ccdf.size())
      throw std::logic_error("SirCurve std_error length mismatch");
    for (std::size_t i = 0; i < ccdf.size(); ++i) {
      if (!(ccdf[i] >= 0.0 && ccdf[i] <= 1.0)) throw std::logic_error("ccdf outside [0, 1]");
      if (i > 0 && theta_db[i] < theta_db[i - 1])
        throw std::logic_error("theta grid must be nondecreasing");
    }
  }
};

// Per-region mean interference-to-signal ratio; total() is their sum.
struct MisrBreakdown {
  double misr_c1 = 0.0;
  double misr_c2 = 0.0;
  double misr_c3 = 0.0;

  double total() const noexcept { return misr_c1 + misr_c2 + misr_c3; }
  double operator[](int region) const noexcept {
    return region == 1 ? misr_c1 : region == 2 ? misr_c2 : misr_c3;
  }
};

}  // namespace coopsir

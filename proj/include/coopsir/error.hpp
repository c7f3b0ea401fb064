// Copyright 2026 The coopsir Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace coopsir {

// Parameter outside the range an operation is defined on.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A series or iteration ran out of budget before meeting its stopping rule.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations)
      : std::runtime_error(what), iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

// Quadrature could not reach its requested tolerance.
class NumericalAccuracyError : public std::runtime_error {
 public:
  NumericalAccuracyError(const std::string& what, double requested, double achieved)
      : std::runtime_error(what + " (requested " + format(requested) + ", achieved " +
                           format(achieved) + ")"),
        requested_(requested),
        achieved_(achieved) {}
  double requested() const noexcept { return requested_; }
  double achieved() const noexcept { return achieved_; }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
  }

  double requested_;
  double achieved_;
};

// Too few points in a realization to define r1, r2, r3.
class InsufficientRealization : public std::runtime_error {
 public:
  InsufficientRealization(const std::string& what, std::size_t points)
      : std::runtime_error(what), points_(points) {}
  std::size_t points() const noexcept { return points_; }

 private:
  std::size_t points_;
};

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, std::vector<double> residuals)
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

}  // namespace coopsir

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace corex {

/// Invalid argument to a library call (bad index sets, empty data, shape mismatch).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input data. Carries the offending coordinate when known.
class IngestionError : public std::runtime_error {
 public:
  IngestionError(const std::string& what, long row = -1, long column = -1)
      : std::runtime_error(what), row_(row), column_(column) {}
  long row() const noexcept { return row_; }
  long column() const noexcept { return column_; }

 private:
  long row_;
  long column_;
};

/// A request outside the preconditions of a bound or model (e.g. upper bound on continuous data).
class UnsupportedConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

/// x log x with the 0 log 0 = 0 convention.
inline double xlogx(double x) noexcept { return x > 0.0 ? x * std::log(x) : 0.0; }

inline double log_sum_exp(std::span<const double> xs) noexcept {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : xs) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - hi);
  return hi + std::log(s);
}

/// Index of the largest element; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> xs) noexcept {
  std::size_t best = 0;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    if (xs[k] > xs[best]) best = k;
  }
  return best;
}

/// Shannon entropy in nats of a probability vector.
inline double entropy_of(std::span<const double> p) noexcept {
  double h = 0.0;
  for (double v : p) h -= xlogx(v);
  return h;
}

}  // namespace corex

/*
 * Copyright 2026 The idfair Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef IDFAIR_NUMERIC_HPP_
#define IDFAIR_NUMERIC_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace idfair {

// Neumaier-compensated running sum. Prefix values stay accurate to a few ulps
// of the magnitude sum, which the curve sweeps rely on.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double Value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double AccurateSum(std::span<const double> values) {
  CompensatedSum s;
  for (double v : values) s.Add(v);
  return s.Value();
}

// Seeded generator with distribution code under our control, so that a seed
// produces the same stream regardless of the standard library in use.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  double Normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Uniform integer in [0, n).
  std::uint64_t Below(std::uint64_t n) {
    // Rejection sampling keeps the result unbiased.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Shortest representation that parses back to the same double (17 significant
// digits); used for every machine-readable numeric field.
std::string FormatExact(double value);

// Human-facing rounding.
std::string FormatRounded(double value, int decimals = 4);

// Strict numeric parse of a full cell (surrounding blanks allowed). Returns
// false for empty cells, trailing junk and the usual missing-value tokens.
bool ParseDouble(const std::string& text, double& out);

}  // namespace idfair

#endif  // IDFAIR_NUMERIC_HPP_

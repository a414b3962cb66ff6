// Copyright 2026 The ierg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ierg/piecewise_polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "ierg/error.hpp"

namespace ierg {
namespace {

double Horner(const std::vector<double>& c, double t) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
  return acc;
}

// Coefficients of q(s + shift) given those of q(t).
std::vector<double> TaylorShift(std::vector<double> c, double shift) {
  if (shift == 0.0) return c;
  const std::size_t n = c.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = n - 1; j > i; --j) c[j - 1] += shift * c[j];
  }
  return c;
}

std::vector<double> Multiply(const std::vector<double>& a,
                             const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {0.0};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

void CheckBreakpoints(const std::vector<double>& b) {
  if (b.size() < 2 || b.front() != 0.0 || b.back() != 1.0) {
    throw InvalidArgument("breakpoints must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < b.size(); ++i) {
    if (!(b[i] > b[i - 1])) {
      throw InvalidArgument("breakpoints must be strictly increasing");
    }
  }
}

}  // namespace

PiecewisePolynomial::PiecewisePolynomial()
    : breakpoints_{0.0, 1.0}, coefficients_{{0.0}} {}

PiecewisePolynomial::PiecewisePolynomial(
    std::vector<double> breakpoints,
    std::vector<std::vector<double>> coefficients)
    : breakpoints_(std::move(breakpoints)),
      coefficients_(std::move(coefficients)) {
  CheckBreakpoints(breakpoints_);
  if (coefficients_.size() + 1 != breakpoints_.size()) {
    throw InvalidArgument("need exactly one coefficient list per piece");
  }
  for (auto& c : coefficients_) {
    if (c.empty()) c.push_back(0.0);
    for (double v : c) {
      if (!std::isfinite(v)) throw InvalidArgument("non-finite coefficient");
    }
  }
}

PiecewisePolynomial PiecewisePolynomial::Constant(double value) {
  return PiecewisePolynomial({0.0, 1.0}, {{value}});
}

PiecewisePolynomial PiecewisePolynomial::Polynomial(
    std::vector<double> coefficients) {
  return PiecewisePolynomial({0.0, 1.0}, {std::move(coefficients)});
}

PiecewisePolynomial PiecewisePolynomial::Steps(std::vector<double> breakpoints,
                                               std::span<const double> values) {
  if (values.size() + 1 != breakpoints.size()) {
    throw InvalidArgument("step function needs one value per interval");
  }
  std::vector<std::vector<double>> coeffs;
  coeffs.reserve(values.size());
  for (double v : values) coeffs.push_back({v});
  return PiecewisePolynomial(std::move(breakpoints), std::move(coeffs));
}

PiecewisePolynomial PiecewisePolynomial::Linear(std::vector<double> knots,
                                                std::span<const double> values) {
  if (values.size() != knots.size()) {
    throw InvalidArgument("tabulated function needs one value per knot");
  }
  CheckBreakpoints(knots);
  std::vector<std::vector<double>> coeffs;
  coeffs.reserve(knots.size() - 1);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double slope = (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]);
    coeffs.push_back({values[i], slope});
  }
  return PiecewisePolynomial(std::move(knots), std::move(coeffs));
}

std::size_t PiecewisePolynomial::piece_index(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw InvalidArgument("argument outside [0,1]");
  }
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  auto p = static_cast<std::size_t>(it - breakpoints_.begin());
  // p >= 1 since breakpoints_[0] == 0 <= x; x == 1 lands past the end.
  return std::min(p - 1, num_pieces() - 1);
}

double PiecewisePolynomial::operator()(double x) const {
  const std::size_t p = piece_index(x);
  return Horner(coefficients_[p], x - breakpoints_[p]);
}

double PiecewisePolynomial::RightEndValue(std::size_t p) const {
  return Horner(coefficients_[p], breakpoints_[p + 1] - breakpoints_[p]);
}

std::size_t PiecewisePolynomial::degree() const {
  std::size_t d = 0;
  for (const auto& c : coefficients_) {
    std::size_t n = c.size();
    while (n > 1 && c[n - 1] == 0.0) --n;
    d = std::max(d, n - 1);
  }
  return d;
}

double PiecewisePolynomial::Integral() const {
  double total = 0.0;
  for (std::size_t p = 0; p < num_pieces(); ++p) {
    const double h = breakpoints_[p + 1] - breakpoints_[p];
    double hk = h;
    double piece = 0.0;
    for (std::size_t k = 0; k < coefficients_[p].size(); ++k) {
      piece += coefficients_[p][k] * hk / static_cast<double>(k + 1);
      hk *= h;
    }
    total += piece;
  }
  return total;
}

double PiecewisePolynomial::PieceExtreme(std::size_t p, bool maximize) const {
  const auto& c = coefficients_[p];
  const double h = breakpoints_[p + 1] - breakpoints_[p];
  const double sign = maximize ? 1.0 : -1.0;
  auto value = [&](double t) { return sign * Horner(c, t); };

  double best_t = 0.0;
  double best = value(0.0);
  if (value(h) > best) {
    best = value(h);
    best_t = h;
  }
  std::size_t deg = c.size() - 1;
  while (deg > 0 && c[deg] == 0.0) --deg;
  if (deg <= 1) return sign * best;

  constexpr int kSamples = 256;
  for (int s = 1; s < kSamples; ++s) {
    const double t = h * s / kSamples;
    if (value(t) > best) {
      best = value(t);
      best_t = t;
    }
  }
  // Golden-section refinement on the bracket around the best sample.
  double lo = std::max(0.0, best_t - h / kSamples);
  double hi = std::min(h, best_t + h / kSamples);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
    const double a = hi - g * (hi - lo);
    const double b = lo + g * (hi - lo);
    if (value(a) >= value(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  best = std::max(best, value(0.5 * (lo + hi)));
  return sign * best;
}

double PiecewisePolynomial::Max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < num_pieces(); ++p) {
    m = std::max(m, PieceExtreme(p, true));
  }
  return m;
}

double PiecewisePolynomial::Min() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < num_pieces(); ++p) {
    m = std::min(m, PieceExtreme(p, false));
  }
  return m;
}

double PiecewisePolynomial::SupAbs() const {
  return std::max(std::abs(Max()), std::abs(Min()));
}

PiecewisePolynomial PiecewisePolynomial::operator*(
    const PiecewisePolynomial& other) const {
  std::vector<double> merged;
  merged.reserve(breakpoints_.size() + other.breakpoints_.size());
  std::set_union(breakpoints_.begin(), breakpoints_.end(),
                 other.breakpoints_.begin(), other.breakpoints_.end(),
                 std::back_inserter(merged));
  std::vector<std::vector<double>> coeffs;
  coeffs.reserve(merged.size() - 1);
  for (std::size_t q = 0; q + 1 < merged.size(); ++q) {
    const double u = merged[q];
    const std::size_t pa = piece_index(u);
    const std::size_t pb = other.piece_index(u);
    auto ca = TaylorShift(coefficients_[pa], u - breakpoints_[pa]);
    auto cb = TaylorShift(other.coefficients_[pb], u - other.breakpoints_[pb]);
    coeffs.push_back(Multiply(ca, cb));
  }
  return PiecewisePolynomial(std::move(merged), std::move(coeffs));
}

PiecewisePolynomial& PiecewisePolynomial::operator*=(double scale) {
  for (auto& c : coefficients_) {
    for (double& v : c) v *= scale;
  }
  return *this;
}

double IntegrateProduct(std::span<const PiecewisePolynomial* const> factors) {
  if (factors.empty()) return 1.0;
  PiecewisePolynomial acc = *factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) acc = acc * *factors[i];
  return acc.Integral();
}

}  // namespace ierg

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

#include "ierg/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ierg/error.hpp"

namespace ierg::stats {
namespace {

void RequireSize(std::size_t n, std::size_t min, const char* what) {
  if (n < min) throw InsufficientData(std::string(what) + ": too few samples");
}

// Central moments m2, m3, m4 (population normalization).
std::array<double, 3> CentralMoments(std::span<const double> x) {
  const double mu = mean(x);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mu;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double n = static_cast<double>(x.size());
  return {m2 / n, m3 / n, m4 / n};
}

}  // namespace

double mean(std::span<const double> x) {
  RequireSize(x.size(), 1, "mean");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) { return covariance(x, x); }

double covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("covariance: size mismatch");
  RequireSize(x.size(), 2, "covariance");
  const double mx = mean(x);
  const double my = mean(y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
  return s / static_cast<double>(x.size() - 1);
}

Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& samples) {
  RequireSize(static_cast<std::size_t>(samples.rows()), 2, "covariance_matrix");
  const Eigen::MatrixXd centered =
      samples.rowwise() - samples.colwise().mean();
  return (centered.transpose() * centered) /
         static_cast<double>(samples.rows() - 1);
}

double standard_error(std::span<const double> x) {
  return std::sqrt(variance(x) / static_cast<double>(x.size()));
}

double skewness(std::span<const double> x) {
  RequireSize(x.size(), 3, "skewness");
  const auto [m2, m3, m4] = CentralMoments(x);
  if (m2 == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return m3 / std::pow(m2, 1.5);
}

double excess_kurtosis(std::span<const double> x) {
  RequireSize(x.size(), 4, "excess_kurtosis");
  const auto [m2, m3, m4] = CentralMoments(x);
  if (m2 == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return m4 / (m2 * m2) - 3.0;
}

MomentZ moment_z(std::span<const double> x) {
  MomentZ z;
  z.skewness = skewness(x);
  z.kurtosis = excess_kurtosis(x);
  const double n = static_cast<double>(x.size());
  z.skewness_z = z.skewness / std::sqrt(6.0 / n);
  z.kurtosis_z = z.kurtosis / std::sqrt(24.0 / n);
  return z;
}

double quantile(std::vector<double> x, double q) {
  RequireSize(x.size(), 1, "quantile");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile: q outside [0,1]");
  std::sort(x.begin(), x.end());
  const double h = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double vx = variance(x);
  const double vy = variance(y);
  if (vx <= 0.0 || vy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return covariance(x, y) / std::sqrt(vx * vy);
}

double normal_pdf(double x, double variance) {
  if (!(variance > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::exp(-0.5 * x * x / variance) /
         std::sqrt(2.0 * std::numbers::pi * variance);
}

}  // namespace ierg::stats

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

#ifndef IERG_STATS_HPP_
#define IERG_STATS_HPP_

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ierg::stats {

double mean(std::span<const double> x);
// Unbiased (R - 1) sample variance.
double variance(std::span<const double> x);
double covariance(std::span<const double> x, std::span<const double> y);
// Columns are variables, rows observations.
Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& samples);
// Standard error of the mean.
double standard_error(std::span<const double> x);

// Sample skewness g1 = m3 / m2^{3/2} and excess kurtosis g2 = m4 / m2^2 - 3
// with population central moments.
double skewness(std::span<const double> x);
double excess_kurtosis(std::span<const double> x);

// Normal-theory z-scores g1 / sqrt(6/R) and g2 / sqrt(24/R).
struct MomentZ {
  double skewness = 0.0;
  double kurtosis = 0.0;
  double skewness_z = 0.0;
  double kurtosis_z = 0.0;
};
MomentZ moment_z(std::span<const double> x);

// Type-7 (linear interpolation) quantile, q in [0, 1].
double quantile(std::vector<double> x, double q);

// NaN when either sample has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

double normal_pdf(double x, double variance);

}  // namespace ierg::stats

#endif  // IERG_STATS_HPP_

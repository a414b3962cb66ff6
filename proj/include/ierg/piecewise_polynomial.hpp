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

#ifndef IERG_PIECEWISE_POLYNOMIAL_HPP_
#define IERG_PIECEWISE_POLYNOMIAL_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace ierg {

// A function on [0,1] that is a polynomial on each piece [b_p, b_{p+1}).
// Pieces are left-closed and right-open, except the last which is closed at
// 1. Coefficients of piece p are stored in the local variable t = x - b_p,
// lowest order first.
//
// This is the common representation behind all eigenfunction kinds: indicator
// steps are degree 0, global polynomials are a single piece, and linearly
// interpolated tables are degree 1. Products and integrals are exact.
class PiecewisePolynomial {
 public:
  PiecewisePolynomial();  // the zero function

  // breakpoints must start at 0, end at 1 and be strictly increasing;
  // coefficients.size() == breakpoints.size() - 1.
  PiecewisePolynomial(std::vector<double> breakpoints,
                      std::vector<std::vector<double>> coefficients);

  static PiecewisePolynomial Constant(double value);
  // Global polynomial sum_k c_k x^k on [0,1].
  static PiecewisePolynomial Polynomial(std::vector<double> coefficients);
  // values[p] on [breakpoints[p], breakpoints[p+1]).
  static PiecewisePolynomial Steps(std::vector<double> breakpoints,
                                   std::span<const double> values);
  // Linear interpolation through (knots[i], values[i]).
  static PiecewisePolynomial Linear(std::vector<double> knots,
                                    std::span<const double> values);

  double operator()(double x) const;
  // Value of piece p at its right end (the left limit at b_{p+1}).
  double RightEndValue(std::size_t p) const;

  std::size_t piece_index(double x) const;
  std::size_t num_pieces() const { return coefficients_.size(); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& coefficients(std::size_t p) const {
    return coefficients_[p];
  }
  std::size_t degree() const;

  double Integral() const;
  // Extremes over [0,1] including one-sided limits at breakpoints. Exact for
  // degree <= 1; otherwise sampled and refined by golden-section search.
  double Max() const;
  double Min() const;
  double SupAbs() const;

  PiecewisePolynomial operator*(const PiecewisePolynomial& other) const;
  PiecewisePolynomial& operator*=(double scale);

 private:
  double PieceExtreme(std::size_t p, bool maximize) const;

  std::vector<double> breakpoints_;
  std::vector<std::vector<double>> coefficients_;
};

// Exact integral over [0,1] of the product of the given functions.
double IntegrateProduct(std::span<const PiecewisePolynomial* const> factors);

}  // namespace ierg

#endif  // IERG_PIECEWISE_POLYNOMIAL_HPP_

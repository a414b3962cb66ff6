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

#ifndef IERG_KERNEL_HPP_
#define IERG_KERNEL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ierg/piecewise_polynomial.hpp"

namespace ierg {

// Indices in the C++ API are 0-based: eigenvalue theta(0) is the largest.
// File formats and reports use the 1-based labels of the model (theta_1, ...).

enum class EigenfunctionKind { kPiecewiseConstant, kPolynomial, kTabulated };

std::string to_string(EigenfunctionKind kind);

// One eigenfunction r_i : [0,1] -> R of the kernel's integral operator.
class EigenfunctionDesc {
 public:
  // values[p] on [breakpoints[p], breakpoints[p+1]); last block closed at 1.
  static EigenfunctionDesc PiecewiseConstant(std::vector<double> breakpoints,
                                             std::vector<double> values);
  // sum_k coefficients[k] x^k.
  static EigenfunctionDesc Polynomial(std::vector<double> coefficients);
  // Linear interpolation through (knots[i], values[i]).
  static EigenfunctionDesc Tabulated(std::vector<double> knots,
                                     std::vector<double> values);
  // Uniform knots i / (values.size() - 1).
  static EigenfunctionDesc Tabulated(std::vector<double> values);

  EigenfunctionKind kind() const { return kind_; }
  // breakpoints (piecewise constant), knots (tabulated), empty (polynomial).
  const std::vector<double>& points() const { return points_; }
  // block values, coefficients or knot values, depending on kind().
  const std::vector<double>& values() const { return values_; }
  const PiecewisePolynomial& function() const { return function_; }

  double operator()(double x) const { return function_(x); }
  double L2Norm() const;

 private:
  EigenfunctionDesc(EigenfunctionKind kind, std::vector<double> points,
                    std::vector<double> values, PiecewisePolynomial function);

  EigenfunctionKind kind_;
  std::vector<double> points_;
  std::vector<double> values_;
  PiecewisePolynomial function_;
};

// Finite-rank symmetric kernel f(x,y) = sum_i theta_i r_i(x) r_i(y).
// Immutable once built.
class KernelSpec {
 public:
  // Throws InvalidArgument unless thetas is non-empty, positive, non-increasing
  // and matches eigenfunctions in size. Orthonormality and non-negativity of
  // f are reported by validate(), not enforced here. When sup_bound is absent
  // it is measured on a grid refined at every breakpoint (exact for
  // piecewise-constant kernels).
  KernelSpec(std::vector<double> thetas,
             std::vector<EigenfunctionDesc> eigenfunctions,
             std::optional<double> sup_bound = std::nullopt,
             std::optional<double> lipschitz_constant = std::nullopt);

  std::size_t rank() const { return thetas_.size(); }
  const std::vector<double>& thetas() const { return thetas_; }
  double theta(std::size_t i) const { return thetas_.at(i); }
  const std::vector<EigenfunctionDesc>& eigenfunctions() const {
    return eigenfunctions_;
  }
  const EigenfunctionDesc& eigenfunction(std::size_t i) const {
    return eigenfunctions_.at(i);
  }

  // M = sup f.
  double sup_bound() const { return sup_bound_; }
  const std::optional<double>& lipschitz_constant() const {
    return lipschitz_constant_;
  }
  // sum_i theta_i sup|r_i|^2 >= sup f; the rejection envelope for sampling.
  double envelope() const { return envelope_; }
  bool is_piecewise_constant() const { return piecewise_constant_; }

  // Content hash over thetas, eigenfunction descriptors and sup bound.
  std::uint64_t id() const { return id_; }
  std::string id_hex() const;

 private:
  std::vector<double> thetas_;
  std::vector<EigenfunctionDesc> eigenfunctions_;
  double sup_bound_ = 0.0;
  std::optional<double> lipschitz_constant_;
  double envelope_ = 0.0;
  bool piecewise_constant_ = false;
  std::uint64_t id_ = 0;
};

// Stochastic block model f(x,y) = p(a,b) for x in block a, y in block b.
struct SBMParams {
  Eigen::MatrixXd p;
  std::vector<double> block_boundaries;  // 0 = b_0 < ... < b_k = 1
};

KernelSpec kernel_from_sbm(const SBMParams& params);
KernelSpec kernel_rank_one(double theta, const EigenfunctionDesc& r);

double eval_f(const KernelSpec& spec, double x, double y);

// N x k matrix whose column i is e_i = (N^{-1/2} r_i(a/N))_{a=1..N}.
Eigen::MatrixXd discretize(const KernelSpec& spec, std::size_t N);

// Indices i with theta_{i-1} > theta_i > theta_{i+1} (theta_{-1} = +inf,
// theta_k = -inf), strict inequalities tested with a relative gap.
std::vector<std::size_t> isolated_indices(std::span<const double> thetas,
                                          double relative_gap = 1e-9);

struct ValidationReport {
  double orthonormality_defect = 0.0;  // max |<r_i, r_j> - delta_ij|
  double min_f_grid = 0.0;             // min of f on the 256 x 256 grid
  double sup_f = 0.0;                  // measured sup f
  double declared_sup = 0.0;           // KernelSpec::sup_bound()
  double lipschitz_quotient = 0.0;     // max |f(p) - f(q)| / |p - q|_1, grid
  bool krein_rutman_applies = false;   // min f on grid > 0
  bool krein_rutman_ok = true;
  std::vector<std::size_t> isolated;   // 0-based

  // Orthonormal within 1e-8, f >= -1e-12 on the grid, declared sup not below
  // the measured one, and Krein-Rutman consistent.
  bool ok() const;
};

ValidationReport validate(const KernelSpec& spec);

}  // namespace ierg

#endif  // IERG_KERNEL_HPP_

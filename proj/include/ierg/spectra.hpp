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

#ifndef IERG_SPECTRA_HPP_
#define IERG_SPECTRA_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "ierg/kernel.hpp"
#include "ierg/sampler.hpp"

namespace ierg {

// Symmetric matrix-free operator; apply(x, y) writes y = M x.
struct LinearOperator {
  std::size_t size = 0;
  std::function<void(std::span<const double>, std::span<double>)> apply;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
};

LinearOperator as_operator(const GraphSample& g);         // A
LinearOperator as_operator(const CenteredAdjacency& w);   // W
LinearOperator as_operator(const Eigen::MatrixXd& dense);  // keeps a reference
LinearOperator negated(LinearOperator op);

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;  // unit norm
  double residual = 0.0;   // ||M v - value v||
};

enum class EigenMethod { kAuto, kLanczos, kDense };

struct EigenOptions {
  // Pairs are accepted when residual <= tol * max(1, |value|).
  double tol = 1e-9;
  // Lanczos steps before giving up; 0 means 10 m + 200.
  std::size_t max_iter = 0;
  // kAuto uses the dense solver for size <= kDenseCutoff.
  EigenMethod method = EigenMethod::kAuto;
  // Accept on the a-posteriori eigenvalue error min(r, r^2 / gap) instead of
  // the residual r, where gap is the distance to the nearest other Ritz
  // value. Used when only the eigenvalue matters.
  bool value_only = false;
  // Further eigenvalues below the m pairs, returned without vectors once their
  // eigenvalue error estimate is below extra_tol * max(1, |value|).
  std::size_t extra_values = 0;
  double extra_tol = 1e-6;
  std::uint64_t start_seed = 0x5EED1A2C05ULL;
};

inline constexpr std::size_t kDenseCutoff = 512;

struct EigenResult {
  std::vector<EigenPair> pairs;       // descending
  std::vector<double> extra_values;   // descending, below pairs
  std::size_t iterations = 0;         // Lanczos steps (0 for dense)
  bool dense = false;
};

// Largest m eigenpairs, descending. Lanczos with full reorthogonalization;
// a breakdown (invariant subspace) restarts from a fresh vector orthogonal to
// everything found so far. Vectors follow the default sign convention (first
// non-negligible coordinate positive).
// Throws InvalidArgument if m == 0 or m > size, ConvergenceError with the
// best residual estimates if max_iter is exhausted.
EigenResult top_eigenpairs(const LinearOperator& op, std::size_t m,
                           const EigenOptions& options);
std::vector<EigenPair> top_eigenpairs(const LinearOperator& op, std::size_t m,
                                      double tol = 1e-9);

// Dense eigendecomposition of the assembled operator; the reference path.
EigenResult dense_top_eigenpairs(const LinearOperator& op, std::size_t m,
                                 std::size_t extra_values = 0);

// ||W|| = max(lambda_1(W), lambda_1(-W)), accurate to about rel_tol.
double operator_norm_W(const CenteredAdjacency& w, double rel_tol = 1e-7);
double operator_norm_W(const GraphSample& g, const KernelSpec& spec);

struct MinresResult {
  Eigen::VectorXd x;
  double relative_residual = 0.0;  // ||b - M x|| / ||b||, recomputed
  std::size_t iterations = 0;
  bool converged = false;
};

// Minimal-residual iteration for symmetric M x = b, x0 = 0.
MinresResult minres(const LinearOperator& op, const Eigen::VectorXd& b,
                    double tol = 1e-10, std::size_t max_iter = 1000);

// V(j,l) = N eps sqrt(theta_j theta_l) e_j' (I - W/mu)^{-1} e_l. The k
// solves use MINRES to a relative residual of 1e-10, falling back to the
// Neumann series sum_n (W/mu)^n e_l (at most 200 terms). Symmetrized.
// Throws DomainError if ||W|| >= mu; pass norm_W when it is already known.
Eigen::MatrixXd resolvent_V(const CenteredAdjacency& w, double mu,
                            std::optional<double> norm_W = std::nullopt);
Eigen::MatrixXd resolvent_V(const GraphSample& g, const KernelSpec& spec,
                            double mu);

// Eigenvalues of a small symmetric matrix, descending.
Eigen::VectorXd descending_eigenvalues(const Eigen::MatrixXd& m);

// e' v with v's sign chosen so that reference' v >= 0. With no reference,
// e itself is the reference, so the result is |e' v|.
double overlap(const Eigen::VectorXd& v, const Eigen::VectorXd& e,
               const Eigen::VectorXd* reference = nullptr);

// Flips v in place so that reference' v >= 0.
void align_sign(EigenPair& pair, const Eigen::VectorXd& reference);

// [{"value", "residual", "overlaps": {"e_1": ..., ...}}, ...]. Overlaps use
// the pair's stored sign. Vectors are not included.
nlohmann::json eigenpairs_to_json(std::span<const EigenPair> pairs,
                                  const Eigen::MatrixXd& e);

}  // namespace ierg

#endif  // IERG_SPECTRA_HPP_

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

#ifndef IERG_SAMPLER_HPP_
#define IERG_SAMPLER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ierg/kernel.hpp"

namespace ierg {

// One sampled graph. Stores the upper triangle (self-loops included) in
// compressed rows with 0-based vertices: row i holds the sorted columns j >= i
// of its edges. Immutable.
class GraphSample {
 public:
  // Throws InvalidArgument if rows are not sorted, duplicate-free and within
  // [i, N).
  GraphSample(std::size_t N, double epsilon, std::uint64_t kernel_id,
              std::uint64_t seed, std::vector<std::uint64_t> row_offsets,
              std::vector<std::uint32_t> columns);

  std::size_t N() const { return N_; }
  double epsilon() const { return epsilon_; }
  std::uint64_t kernel_id() const { return kernel_id_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t edge_count() const { return columns_.size(); }

  std::span<const std::uint32_t> row(std::size_t i) const {
    return {columns_.data() + row_offsets_[i],
            columns_.data() + row_offsets_[i + 1]};
  }
  const std::vector<std::uint64_t>& row_offsets() const { return row_offsets_; }
  const std::vector<std::uint32_t>& columns() const { return columns_; }

  // FNV-1a over header and edge list.
  std::uint64_t content_hash() const;

  friend bool operator==(const GraphSample&, const GraphSample&) = default;

 private:
  std::size_t N_;
  double epsilon_;
  std::uint64_t kernel_id_;
  std::uint64_t seed_;
  std::vector<std::uint64_t> row_offsets_;
  std::vector<std::uint32_t> columns_;
};

// Samples A(a,c) ~ Bernoulli(epsilon f(a/N, c/N)) independently for
// 1 <= a <= c <= N. Row i draws from the Philox stream (seed, i), so each
// row is a pure function of (spec, N, epsilon, seed, i).
//
// Piecewise-constant kernels skip geometrically through each constant
// segment at its exact probability. Other kernels skip at the envelope rate
// epsilon * spec.envelope() and accept with the ratio of the true
// probability to the envelope.
//
// Throws ProbabilityOverflow if epsilon * sup f > 1, InvalidArgument if N = 0
// or epsilon <= 0, DomainError if f is negative at a grid point.
GraphSample sample_graph(const KernelSpec& spec, std::size_t N, double epsilon,
                         std::uint64_t seed);

// y = A x. Self-loops contribute once to their coordinate.
void apply_A(const GraphSample& g, std::span<const double> x,
             std::span<double> y);
Eigen::VectorXd apply_A(const GraphSample& g, const Eigen::VectorXd& x);

// W = A - E(A) with E(A) = N eps sum_j theta_j e_j e_j', applied matrix-free.
// Holds the discretized eigenvectors so repeated applications cost
// O(edges + kN).
class CenteredAdjacency {
 public:
  // Throws KernelMismatch if g was not sampled from spec.
  CenteredAdjacency(const GraphSample& g, const KernelSpec& spec);

  std::size_t size() const { return graph_->N(); }
  void apply(std::span<const double> x, std::span<double> y) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  const GraphSample& graph() const { return *graph_; }
  // N x k, column j is e_j.
  const Eigen::MatrixXd& e() const { return e_; }
  // N eps theta_j.
  const Eigen::VectorXd& mean_weights() const { return weights_; }

 private:
  const GraphSample* graph_;
  Eigen::MatrixXd e_;
  Eigen::VectorXd weights_;
};

Eigen::VectorXd apply_W(const GraphSample& g, const KernelSpec& spec,
                        const Eigen::VectorXd& x);

}  // namespace ierg

#endif  // IERG_SAMPLER_HPP_

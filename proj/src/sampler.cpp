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

#include "ierg/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "ierg/error.hpp"
#include "ierg/random.hpp"

namespace ierg {
namespace {

constexpr double kProbabilitySlack = 1e-12;

double GridPoint(std::size_t index, std::size_t N) {
  return static_cast<double>(index + 1) / static_cast<double>(N);
}

// First column of every constant segment (0-based, ascending, starting at
// 0) for a piecewise-constant kernel.
std::vector<std::size_t> SegmentStarts(const KernelSpec& spec, std::size_t N) {
  std::vector<double> cuts;
  for (const auto& r : spec.eigenfunctions()) {
    const auto& b = r.function().breakpoints();
    cuts.insert(cuts.end(), b.begin() + 1, b.end() - 1);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<std::size_t> starts{0};
  for (double b : cuts) {
    auto c = static_cast<std::size_t>(
        std::max(0.0, std::ceil(b * static_cast<double>(N)) - 1.0));
    while (c > 0 && GridPoint(c - 1, N) >= b) --c;
    while (c < N && GridPoint(c, N) < b) ++c;
    if (c > starts.back() && c < N) starts.push_back(c);
  }
  return starts;
}

// Next accepted index after `current` for Bernoulli(p) trials, p in (0,1).
// Returns a value >= limit when the run ends first.
double GeometricNext(CounterStream& stream, double current, double log_q) {
  const double u = stream.NextOpenClosed();
  return current + 1.0 + std::floor(std::log(u) / log_q);
}

double CheckedProbability(double epsilon, double f) {
  if (f < 0.0) {
    throw DomainError("kernel is negative at a grid point");
  }
  const double p = epsilon * f;
  if (p > 1.0 + kProbabilitySlack) {
    throw ProbabilityOverflow("edge probability exceeds one");
  }
  return std::min(p, 1.0);
}

void SampleRowSegments(const KernelSpec& spec, std::size_t N, double epsilon,
                       std::size_t i, const std::vector<std::size_t>& starts,
                       CounterStream& stream, std::vector<std::uint32_t>& out) {
  const double x = GridPoint(i, N);
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const std::size_t seg_end = s + 1 < starts.size() ? starts[s + 1] : N;
    if (seg_end <= i) continue;
    const std::size_t seg_begin = std::max(starts[s], i);
    const double p =
        CheckedProbability(epsilon, eval_f(spec, x, GridPoint(seg_begin, N)));
    if (p == 0.0) continue;
    if (p == 1.0) {
      for (std::size_t c = seg_begin; c < seg_end; ++c) {
        out.push_back(static_cast<std::uint32_t>(c));
      }
      continue;
    }
    const double log_q = std::log1p(-p);
    double c = static_cast<double>(seg_begin) - 1.0;
    while (true) {
      c = GeometricNext(stream, c, log_q);
      if (c >= static_cast<double>(seg_end)) break;
      out.push_back(static_cast<std::uint32_t>(c));
    }
  }
}

void SampleRowRejection(const KernelSpec& spec, std::size_t N, double epsilon,
                        std::size_t i, CounterStream& stream,
                        std::vector<std::uint32_t>& out) {
  const double x = GridPoint(i, N);
  const double p_env = std::min(1.0, epsilon * spec.envelope());
  const double log_q = p_env < 1.0 ? std::log1p(-p_env) : 0.0;
  double c = static_cast<double>(i) - 1.0;
  while (true) {
    c = p_env < 1.0 ? GeometricNext(stream, c, log_q) : c + 1.0;
    if (c >= static_cast<double>(N)) break;
    const auto col = static_cast<std::size_t>(c);
    const double p = CheckedProbability(epsilon, eval_f(spec, x, GridPoint(col, N)));
    if (p > p_env * (1.0 + kProbabilitySlack)) {
      throw DomainError("kernel exceeds its sampling envelope");
    }
    if (stream.NextUnit() * p_env < p) {
      out.push_back(static_cast<std::uint32_t>(col));
    }
  }
}

}  // namespace

GraphSample::GraphSample(std::size_t N, double epsilon,
                         std::uint64_t kernel_id, std::uint64_t seed,
                         std::vector<std::uint64_t> row_offsets,
                         std::vector<std::uint32_t> columns)
    : N_(N),
      epsilon_(epsilon),
      kernel_id_(kernel_id),
      seed_(seed),
      row_offsets_(std::move(row_offsets)),
      columns_(std::move(columns)) {
  if (row_offsets_.size() != N_ + 1 || row_offsets_.front() != 0 ||
      row_offsets_.back() != columns_.size()) {
    throw InvalidArgument("graph: row offsets inconsistent with edge list");
  }
  for (std::size_t i = 0; i < N_; ++i) {
    if (row_offsets_[i + 1] < row_offsets_[i]) {
      throw InvalidArgument("graph: row offsets must be non-decreasing");
    }
    auto r = row(i);
    for (std::size_t t = 0; t < r.size(); ++t) {
      if (r[t] < i || r[t] >= N_ || (t > 0 && r[t] <= r[t - 1])) {
        throw InvalidArgument(
            "graph: rows must be sorted, duplicate-free, upper-triangular");
      }
    }
  }
}

std::uint64_t GraphSample::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto add = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t n = N_;
  add(&n, sizeof n);
  add(&epsilon_, sizeof epsilon_);
  add(&kernel_id_, sizeof kernel_id_);
  add(&seed_, sizeof seed_);
  add(row_offsets_.data(), row_offsets_.size() * sizeof(std::uint64_t));
  add(columns_.data(), columns_.size() * sizeof(std::uint32_t));
  return h;
}

GraphSample sample_graph(const KernelSpec& spec, std::size_t N, double epsilon,
                         std::uint64_t seed) {
  if (N == 0) throw InvalidArgument("sample_graph: empty vertex set (N = 0)");
  if (N > 0xFFFFFFFFull) throw InvalidArgument("sample_graph: N too large");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("sample_graph: epsilon must be positive");
  }
  if (epsilon * spec.sup_bound() > 1.0 + kProbabilitySlack) {
    throw ProbabilityOverflow("sample_graph: epsilon * sup f exceeds one");
  }

  const std::vector<std::size_t> starts =
      spec.is_piecewise_constant() ? SegmentStarts(spec, N)
                                   : std::vector<std::size_t>{};
  std::vector<std::uint64_t> offsets{0};
  offsets.reserve(N + 1);
  std::vector<std::uint32_t> columns;
  columns.reserve(static_cast<std::size_t>(
      epsilon * spec.sup_bound() * 0.5 * static_cast<double>(N) * (N + 1) *
      1.05));
  for (std::size_t i = 0; i < N; ++i) {
    CounterStream stream(seed, i);
    if (spec.is_piecewise_constant()) {
      SampleRowSegments(spec, N, epsilon, i, starts, stream, columns);
    } else {
      SampleRowRejection(spec, N, epsilon, i, stream, columns);
    }
    offsets.push_back(columns.size());
  }
  return GraphSample(N, epsilon, spec.id(), seed, std::move(offsets),
                     std::move(columns));
}

void apply_A(const GraphSample& g, std::span<const double> x,
             std::span<double> y) {
  if (x.size() != g.N() || y.size() != g.N()) {
    throw InvalidArgument("apply_A: dimension mismatch");
  }
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t i = 0; i < g.N(); ++i) {
    const double xi = x[i];
    double acc = 0.0;
    for (std::uint32_t j : g.row(i)) {
      if (j == i) {
        acc += xi;
      } else {
        acc += x[j];
        y[j] += xi;
      }
    }
    y[i] += acc;
  }
}

Eigen::VectorXd apply_A(const GraphSample& g, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != g.N()) {
    throw InvalidArgument("apply_A: dimension mismatch");
  }
  Eigen::VectorXd y(x.size());
  apply_A(g, std::span<const double>(x.data(), x.size()),
          std::span<double>(y.data(), y.size()));
  return y;
}

CenteredAdjacency::CenteredAdjacency(const GraphSample& g,
                                     const KernelSpec& spec)
    : graph_(&g), e_(discretize(spec, g.N())) {
  if (g.kernel_id() != spec.id()) {
    throw KernelMismatch("graph was sampled from a different kernel");
  }
  const double n_eps = static_cast<double>(g.N()) * g.epsilon();
  weights_.resize(static_cast<Eigen::Index>(spec.rank()));
  for (std::size_t j = 0; j < spec.rank(); ++j) {
    weights_(static_cast<Eigen::Index>(j)) = n_eps * spec.theta(j);
  }
}

void CenteredAdjacency::apply(std::span<const double> x,
                              std::span<double> y) const {
  apply_A(*graph_, x, y);
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
  Eigen::Map<Eigen::VectorXd> yv(y.data(), n);
  const Eigen::VectorXd coeff = (e_.transpose() * xv).cwiseProduct(weights_);
  yv.noalias() -= e_ * coeff;
}

Eigen::VectorXd CenteredAdjacency::apply(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != size()) {
    throw InvalidArgument("apply_W: dimension mismatch");
  }
  Eigen::VectorXd y(x.size());
  apply(std::span<const double>(x.data(), x.size()),
        std::span<double>(y.data(), y.size()));
  return y;
}

Eigen::VectorXd apply_W(const GraphSample& g, const KernelSpec& spec,
                        const Eigen::VectorXd& x) {
  return CenteredAdjacency(g, spec).apply(x);
}

}  // namespace ierg

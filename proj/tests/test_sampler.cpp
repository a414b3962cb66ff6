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

#include <cmath>
#include <vector>

#include "doctest.h"

#include "ierg/error.hpp"
#include "ierg/random.hpp"
#include "ierg/sampler.hpp"
#include "ierg/theory.hpp"
#include "test_util.hpp"

using namespace ierg;

TEST_CASE("sampling is deterministic in (spec, N, eps, seed)") {
  const KernelSpec spec = testing::CoupledBlock();
  const GraphSample a = sample_graph(spec, 700, 0.1, 5);
  const GraphSample b = sample_graph(spec, 700, 0.1, 5);
  const GraphSample c = sample_graph(spec, 700, 0.1, 6);
  CHECK(a == b);
  CHECK(a.content_hash() == b.content_hash());
  CHECK(a.content_hash() != c.content_hash());
  const GraphSample s1 = sample_graph(testing::Sqrt3x(), 300, 0.2, 5);
  CHECK(s1 == sample_graph(testing::Sqrt3x(), 300, 0.2, 5));
}

TEST_CASE("stored edges are upper-triangular, sorted and unique") {
  const GraphSample g = sample_graph(testing::Sqrt3x(), 400, 0.3, 11);
  for (std::size_t i = 0; i < g.N(); ++i) {
    const auto row = g.row(i);
    for (std::size_t t = 0; t < row.size(); ++t) {
      REQUIRE(row[t] >= i);
      REQUIRE(row[t] < g.N());
      if (t > 0) REQUIRE(row[t] > row[t - 1]);
    }
  }
}

TEST_CASE("complete graph at eps = 1") {
  const GraphSample g = sample_graph(testing::Ones(), 50, 1.0, 3);
  CHECK(g.edge_count() == 50 * 51 / 2);
  const KernelSpec spec = testing::Ones();
  const CenteredAdjacency w(g, spec);
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(50, -1.0, 2.0);
  CHECK(w.apply(x).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("zero region of the kernel never gets edges") {
  const KernelSpec spec = testing::TwoBlock();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GraphSample g = sample_graph(spec, 400, 0.5, seed);
    // vertex a sits at (a+1)/N, so x < 1/2 exactly for a < 199
    for (std::size_t i = 0; i < 199; ++i) {
      for (std::uint32_t j : g.row(i)) REQUIRE(j < 199);
    }
  }
}

TEST_CASE("edge count of f = 1 matches binomial moments") {
  const double mean = 0.01 * 2000.0 * 2001.0 / 2.0;
  const double sd = std::sqrt(mean * 0.99);
  int excursions = 0;
  double total = 0.0, total_pairs = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const GraphSample g = sample_graph(testing::Ones(), 2000, 0.01, seed);
    const double z = (static_cast<double>(g.edge_count()) - mean) / sd;
    if (std::abs(z) > 4.0) ++excursions;
    total += static_cast<double>(g.edge_count());
    total_pairs += 2000.0 * 2001.0 / 2.0;
  }
  CHECK(excursions <= 1);
  // Exchangeability: pooled edge frequency within 3 sigma of eps.
  const double freq = total / total_pairs;
  CHECK(std::abs(freq - 0.01) <= 3.0 * std::sqrt(0.01 * 0.99 / total_pairs));
}

namespace {

// Per-pair frequencies over many seeds against eps f(i/N, j/N).
int PairFrequencyExcursions(const KernelSpec& spec, std::size_t N, double eps,
                            int seeds) {
  std::vector<double> count(N * N, 0.0);
  for (int s = 0; s < seeds; ++s) {
    const GraphSample g = sample_graph(spec, N, eps, static_cast<std::uint64_t>(s));
    for (std::size_t i = 0; i < N; ++i) {
      for (std::uint32_t j : g.row(i)) count[i * N + j] += 1.0;
    }
  }
  int bad = 0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i; j < N; ++j) {
      const double p = eps * eval_f(spec, static_cast<double>(i + 1) / N,
                                    static_cast<double>(j + 1) / N);
      const double sd = std::sqrt(p * (1 - p) / seeds);
      const double f = count[i * N + j] / seeds;
      if (sd == 0.0 ? f != p : std::abs(f - p) > 4.0 * sd) ++bad;
    }
  }
  return bad;
}

}  // namespace

TEST_CASE("per-pair edge frequencies: piecewise-constant path") {
  CHECK(PairFrequencyExcursions(testing::CoupledBlock(), 20, 0.4, 100000) == 0);
}

TEST_CASE("per-pair edge frequencies: rejection path") {
  CHECK(PairFrequencyExcursions(testing::Sqrt3x(), 20, 0.3, 100000) == 0);
}

TEST_CASE("sampler errors") {
  CHECK_THROWS_AS(sample_graph(testing::Ones(), 0, 0.5, 1), InvalidArgument);
  CHECK_THROWS_AS(sample_graph(testing::TwoBlock(), 10, 0.6, 1), ProbabilityOverflow);
  CHECK_THROWS_AS(sample_graph(testing::Ones(), 10, 0.0, 1), InvalidArgument);
  const GraphSample g = sample_graph(testing::Ones(), 40, 0.5, 1);
  CHECK_THROWS_AS(CenteredAdjacency(g, testing::TwoBlock()), KernelMismatch);
  CHECK_THROWS_AS(apply_A(g, Eigen::VectorXd::Zero(39)), InvalidArgument);
}

TEST_CASE("apply_A basics") {
  const GraphSample empty(5, 0.1, 0, 0, {0, 0, 0, 0, 0, 0}, {});
  CHECK(apply_A(empty, Eigen::VectorXd::Ones(5)).isZero());
  const GraphSample one(3, 0.1, 0, 0, {0, 1, 1, 1}, {1});
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(3);
  e0(0) = 1.0;
  const Eigen::VectorXd y = apply_A(one, e0);
  CHECK(y(0) == 0.0);
  CHECK(y(1) == 1.0);
  CHECK(y(2) == 0.0);
  const GraphSample loop(2, 0.1, 0, 0, {0, 1, 1}, {0});
  CHECK(apply_A(loop, Eigen::VectorXd::Ones(2))(0) == 1.0);
  CHECK_THROWS_AS(GraphSample(3, 0.1, 0, 0, {0, 2, 2, 2}, {2, 1}), InvalidArgument);
}

TEST_CASE("apply_A and apply_W match dense assembly, are symmetric and linear") {
  const KernelSpec spec = testing::CoupledBlock();
  const GraphSample g = sample_graph(spec, 300, 0.2, 77);
  const Eigen::MatrixXd A = testing::DenseA(g);
  const Eigen::MatrixXd W = testing::DenseW(g, spec);
  CenteredAdjacency w(g, spec);
  CounterStream rng(1, 1);
  Eigen::VectorXd x(300), y(300);
  for (int i = 0; i < 300; ++i) {
    x(i) = rng.NextUnit() - 0.5;
    y(i) = rng.NextUnit() - 0.5;
  }
  CHECK((apply_A(g, x) - A * x).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((w.apply(x) - W * x).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(std::abs(apply_A(g, x).dot(y) - x.dot(apply_A(g, y))) <= 1e-12 * 300);
  const Eigen::VectorXd lin = w.apply(Eigen::VectorXd(2.0 * x - 3.0 * y));
  CHECK((lin - (2.0 * w.apply(x) - 3.0 * w.apply(y))).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((apply_W(g, spec, x) - w.apply(x)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("W e_j has mean zero and the exact bilinear variance") {
  // Monte Carlo over 10^4 replicates at N = 100.
  const KernelSpec spec = testing::CoupledBlock();
  const std::size_t N = 100;
  const double eps = 0.3;
  const int R = 10000;
  const FiniteNTheory theory(spec, N, eps);
  const Eigen::MatrixXd e = theory.e();
  Eigen::VectorXd sum_w = Eigen::VectorXd::Zero(N);
  double s[3] = {0, 0, 0}, ss[3] = {0, 0, 0};
  for (int r = 0; r < R; ++r) {
    const GraphSample g = sample_graph(spec, N, eps, seed_derive(3, N, r));
    const CenteredAdjacency w(g, spec);
    const Eigen::VectorXd w1 = w.apply(Eigen::VectorXd(e.col(0)));
    const Eigen::VectorXd w2 = w.apply(Eigen::VectorXd(e.col(1)));
    sum_w += w1;
    const double b[3] = {e.col(0).dot(w1), e.col(0).dot(w2), e.col(1).dot(w2)};
    for (int t = 0; t < 3; ++t) {
      s[t] += b[t];
      ss[t] += b[t] * b[t];
    }
  }
  // Coordinates of W e_1: mean 0 with sd sqrt(sum_c e_1(c)^2 var(a,c) / R).
  int bad = 0;
  for (std::size_t a = 0; a < N; ++a) {
    double var = 0.0;
    for (std::size_t c = 0; c < N; ++c) var += e(c, 0) * e(c, 0) * theory.var_profile(a, c);
    if (std::abs(sum_w(a) / R) > 4.0 * std::sqrt(var / R)) ++bad;
  }
  CHECK(bad == 0);
  const std::size_t pairs[3][2] = {{0, 0}, {0, 1}, {1, 1}};
  for (int t = 0; t < 3; ++t) {
    const double exact = theory.exact_bilinear_cov(pairs[t][0], pairs[t][1],
                                                   pairs[t][0], pairs[t][1]);
    const double mean = s[t] / R;
    const double var = ss[t] / R - mean * mean;
    CHECK(std::abs(mean) <= 3.0 * std::sqrt(exact / R));
    // SE of a variance estimate ~ var sqrt(2/R) for near-Gaussian data
    CHECK(std::abs(var - exact) <= 3.0 * exact * std::sqrt(2.0 / R) * 1.2);
  }
}

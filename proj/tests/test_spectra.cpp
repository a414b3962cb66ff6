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

#include "doctest.h"

#include "ierg/error.hpp"
#include "ierg/random.hpp"
#include "ierg/spectra.hpp"
#include "test_util.hpp"

using namespace ierg;

namespace {

EigenOptions Lanczos() {
  EigenOptions o;
  o.method = EigenMethod::kLanczos;
  return o;
}

}  // namespace

TEST_CASE("diagonal and identity operators") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d.diagonal() << 1.0, 3.0, 2.0;
  for (EigenMethod method : {EigenMethod::kDense, EigenMethod::kLanczos}) {
    EigenOptions o;
    o.method = method;
    const EigenResult r = top_eigenpairs(as_operator(d), 2, o);
    REQUIRE(r.pairs.size() == 2);
    CHECK(r.pairs[0].value == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(r.pairs[1].value == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(r.pairs[0].residual <= 1e-14);
    CHECK(r.pairs[1].residual <= 1e-14);
    CHECK(std::abs(r.pairs[0].vector(1)) == doctest::Approx(1.0));
  }
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(10, 10);
  const EigenResult r = top_eigenpairs(as_operator(id), 1, Lanczos());
  CHECK(r.pairs[0].value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.pairs[0].vector.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.pairs[0].residual <= 1e-14);
}

TEST_CASE("argument errors and non-convergence") {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
  CHECK_THROWS_AS(top_eigenpairs(as_operator(id), 0, Lanczos()), InvalidArgument);
  CHECK_THROWS_AS(top_eigenpairs(as_operator(id), 5, Lanczos()), InvalidArgument);
  const GraphSample g = sample_graph(testing::Ones(), 2000, 0.01, 1);
  EigenOptions o = Lanczos();
  o.max_iter = 3;
  try {
    top_eigenpairs(as_operator(g), 2, o);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.best_residuals().size() == 2);
  }
}

TEST_CASE("Lanczos matches the dense oracle on sampled graphs") {
  const KernelSpec spec = testing::CoupledBlock();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GraphSample g = sample_graph(spec, 256, 0.2, seed);
    const Eigen::MatrixXd A = testing::DenseA(g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const EigenResult r = top_eigenpairs(as_operator(g), 4, Lanczos());
    double max_row = A.rowwise().sum().maxCoeff();
    for (int i = 0; i < 4; ++i) {
      const double ref = es.eigenvalues()(255 - i);
      CHECK(std::abs(r.pairs[static_cast<std::size_t>(i)].value - ref) <=
            1e-8 * std::abs(ref));
      const double gap = std::min(
          i > 0 ? es.eigenvalues()(256 - i) - ref : 1e300,
          ref - es.eigenvalues()(254 - i));
      if (gap > 1e-6) {
        const double c = std::abs(r.pairs[static_cast<std::size_t>(i)].vector.dot(
            es.eigenvectors().col(255 - i)));
        CHECK(std::acos(std::min(1.0, c)) < 1e-6);
      }
      for (int j = 0; j < i; ++j) {
        CHECK(std::abs(r.pairs[static_cast<std::size_t>(i)].vector.dot(
                  r.pairs[static_cast<std::size_t>(j)].vector)) <= 1e-8);
      }
    }
    CHECK(r.pairs[0].value <= max_row + 1e-9);
  }
}

TEST_CASE("sign convention") {
  const GraphSample g = sample_graph(testing::Ones(), 300, 0.3, 4);
  const EigenResult r = top_eigenpairs(as_operator(g), 1, Lanczos());
  const auto& v = r.pairs[0].vector;
  Eigen::Index first = 0;
  while (std::abs(v(first)) <= 1e-10 * v.cwiseAbs().maxCoeff()) ++first;
  CHECK(v(first) > 0.0);
  EigenPair p = r.pairs[0];
  const Eigen::VectorXd ref = -Eigen::VectorXd::Ones(300);
  align_sign(p, ref);
  CHECK(ref.dot(p.vector) >= 0.0);
}

TEST_CASE("extra values report lambda_{k+1}") {
  const KernelSpec spec = testing::TwoBlock();
  const GraphSample g = sample_graph(spec, 1500, 0.05, 8);
  EigenOptions o = Lanczos();
  o.extra_values = 1;
  const EigenResult r = top_eigenpairs(as_operator(g), 2, o);
  REQUIRE(r.extra_values.size() == 1);
  const EigenResult dense = dense_top_eigenpairs(as_operator(g), 3);
  CHECK(std::abs(r.extra_values[0] - dense.pairs[2].value) <=
        1e-6 * dense.pairs[2].value);
}

TEST_CASE("operator norm of W") {
  const KernelSpec spec = testing::CoupledBlock();
  const GraphSample g = sample_graph(spec, 256, 0.2, 21);
  const Eigen::MatrixXd W = testing::DenseW(g, spec);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W);
  const double dense = es.eigenvalues().cwiseAbs().maxCoeff();
  const CenteredAdjacency w(g, spec);
  CHECK(std::abs(operator_norm_W(w) - dense) <= 1e-6 * dense);
  CHECK(std::abs(operator_norm_W(g, spec) - dense) <= 1e-6 * dense);

  const KernelSpec ones = testing::Ones();
  const GraphSample full = sample_graph(ones, 80, 1.0, 1);
  CHECK(operator_norm_W(full, ones) <= 1e-12);
}

TEST_CASE("norm envelope on f = 1 at N = 4000") {
  const KernelSpec ones = testing::Ones();
  const double n_eps = 80.0;
  const double envelope =
      2.0 * std::sqrt(n_eps) + 10.0 * std::pow(n_eps, 0.25) * std::pow(std::log(4000.0), 2.0);
  int violations = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const GraphSample g = sample_graph(ones, 4000, 0.02, seed_derive(2, 4000, seed));
    if (operator_norm_W(g, ones) > envelope) ++violations;
  }
  CHECK(violations <= 1);
}

TEST_CASE("MINRES solves symmetric indefinite systems") {
  CounterStream rng(3, 0);
  Eigen::MatrixXd M(60, 60);
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 60; ++j) M(i, j) = rng.NextUnit() - 0.5;
  M = (M + M.transpose()).eval();
  M.diagonal().array() += 0.3;
  Eigen::VectorXd b(60);
  for (int i = 0; i < 60; ++i) b(i) = rng.NextUnit();
  const MinresResult r = minres(as_operator(M), b, 1e-12, 500);
  CHECK(r.converged);
  CHECK((M * r.x - b).norm() <= 1e-10 * b.norm());
  CHECK(r.relative_residual <= 1e-10);
}

TEST_CASE("resolvent matrix") {
  SUBCASE("deterministic graph") {
    const KernelSpec ones = testing::Ones();
    const GraphSample g = sample_graph(ones, 64, 1.0, 1);
    const Eigen::MatrixXd V = resolvent_V(g, ones, 64.0);
    REQUIRE(V.rows() == 1);
    CHECK(V(0, 0) == doctest::Approx(64.0).epsilon(1e-12));
  }
  SUBCASE("matches dense inversion and reproduces the outliers") {
    const KernelSpec spec = testing::CoupledBlock();
    const GraphSample g = sample_graph(spec, 256, 0.3, 12);
    const Eigen::MatrixXd W = testing::DenseW(g, spec);
    const Eigen::MatrixXd e = discretize(spec, 256);
    const EigenResult r = top_eigenpairs(as_operator(g), 2, Lanczos());
    const CenteredAdjacency w(g, spec);
    const double norm = operator_norm_W(w);
    for (std::size_t i = 0; i < 2; ++i) {
      const double mu = r.pairs[i].value;
      REQUIRE(norm < mu);
      const Eigen::MatrixXd V = resolvent_V(w, mu, norm);
      const Eigen::MatrixXd inv =
          (Eigen::MatrixXd::Identity(256, 256) - W / mu).inverse();
      Eigen::MatrixXd Vd = e.transpose() * inv * e;
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l)
          Vd(j, l) *= 256 * 0.3 * std::sqrt(spec.theta(static_cast<std::size_t>(j)) *
                                            spec.theta(static_cast<std::size_t>(l)));
      CHECK((V - Vd).cwiseAbs().maxCoeff() <= 1e-8 * Vd.cwiseAbs().maxCoeff());
      CHECK((V - V.transpose()).cwiseAbs().maxCoeff() == 0.0);
      const Eigen::VectorXd lv = descending_eigenvalues(V);
      CHECK(std::abs(lv(static_cast<Eigen::Index>(i)) - mu) <= 1e-8 * mu);
    }
    CHECK_THROWS_AS(resolvent_V(w, 0.5 * norm, norm), DomainError);
    CHECK_THROWS_AS(resolvent_V(w, 0.5 * norm), DomainError);
  }
}

TEST_CASE("overlap") {
  Eigen::VectorXd e(4);
  e << 1.0, 2.0, 0.0, 0.0;
  const Eigen::VectorXd v = e / e.norm();
  CHECK(overlap(v, e) == doctest::Approx(e.norm()));
  CHECK(overlap(Eigen::VectorXd(-v), e) == doctest::Approx(e.norm()));
  Eigen::VectorXd perp(4);
  perp << 0.0, 0.0, 1.0, 0.0;
  CHECK(overlap(perp, e) == 0.0);
  CHECK_THROWS_AS(overlap(Eigen::VectorXd::Ones(3), e), InvalidArgument);
}

TEST_CASE("eigenpairs json") {
  const KernelSpec spec = testing::TwoBlock();
  const GraphSample g = sample_graph(spec, 200, 0.2, 3);
  const EigenResult r = top_eigenpairs(as_operator(g), 2, EigenOptions{});
  const auto j = eigenpairs_to_json(r.pairs, discretize(spec, 200));
  REQUIRE(j.size() == 2);
  CHECK(j[0].contains("value"));
  CHECK(j[0].contains("residual"));
  CHECK(j[0]["overlaps"].contains("e_1"));
  CHECK(j[0]["overlaps"].contains("e_2"));
}

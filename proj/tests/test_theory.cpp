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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"

#include "ierg/error.hpp"
#include "ierg/random.hpp"
#include "ierg/spectra.hpp"
#include "ierg/stats.hpp"
#include "ierg/theory.hpp"
#include "test_util.hpp"

using namespace ierg;

namespace {

// f = 1 + 0.3 * 3 (2x-1)(2y-1), smooth and positive.
KernelSpec Legendre2() {
  return KernelSpec({1.0, 0.3},
                    {EigenfunctionDesc::Polynomial({1.0}),
                     EigenfunctionDesc::Polynomial({-std::sqrt(3.0), 2.0 * std::sqrt(3.0)})});
}

double SimpsonCov(const KernelSpec& spec, double eps_inf, std::size_t i,
                  std::size_t j) {
  return 2.0 * testing::Simpson2D(
                   [&](double x, double y) {
                     const double f = eval_f(spec, x, y);
                     const auto& ri = spec.eigenfunction(i);
                     const auto& rj = spec.eigenfunction(j);
                     return ri(x) * ri(y) * rj(x) * rj(y) * f * (1.0 - eps_inf * f);
                   },
                   1024);
}

}  // namespace

TEST_CASE("variance profile") {
  const FiniteNTheory ones(testing::Ones(), 10, 0.5);
  CHECK(ones.var_profile(0, 9) == 0.25);
  CHECK(ones.var_profile(4, 4) == 0.25);
  const FiniteNTheory tb(testing::TwoBlock(), 100, 0.1);
  CHECK(tb.var_profile(3, 10) == doctest::Approx(0.16).epsilon(1e-14));
  CHECK(std::abs(tb.var_profile(3, 80)) <= 1e-16);
  CHECK(var_profile(testing::TwoBlock(), 100, 0.1, 3, 10) ==
        doctest::Approx(0.16).epsilon(1e-14));
  CHECK_THROWS_AS(tb.var_profile(100, 0), InvalidArgument);
  CHECK_THROWS_AS(var_profile(testing::TwoBlock(), 100, 0.1, 0, 100), InvalidArgument);
}

TEST_CASE("expected W^2 forms") {
  const std::size_t N = 500;
  const double eps = 0.1;
  CHECK(expected_W2_form(testing::Ones(), N, eps, 0, 0) ==
        doctest::Approx(N * eps * (1 - eps)).epsilon(1e-12));
  CHECK(expected_W2_form(testing::TwoBlock(), N, eps, 0, 1) == 0.0);
  CHECK_THROWS_AS(expected_W2_form(testing::Ones(), N, eps, 0, 1), InvalidArgument);
}

TEST_CASE("expected W^2 forms against Monte Carlo") {
  const KernelSpec spec = testing::CoupledBlock();
  const std::size_t N = 100;
  const double eps = 0.3;
  const int R = 100000;
  const FiniteNTheory th(spec, N, eps);
  const Eigen::MatrixXd& e = th.e();
  std::vector<double> x[3];
  for (int r = 0; r < R; ++r) {
    const GraphSample g = sample_graph(spec, N, eps, seed_derive(17, N, r));
    const CenteredAdjacency w(g, spec);
    const Eigen::VectorXd w1 = w.apply(Eigen::VectorXd(e.col(0)));
    const Eigen::VectorXd w2 = w.apply(Eigen::VectorXd(e.col(1)));
    x[0].push_back(w1.dot(w1));
    x[1].push_back(w1.dot(w2));
    x[2].push_back(w2.dot(w2));
  }
  const std::size_t pairs[3][2] = {{0, 0}, {0, 1}, {1, 1}};
  for (int t = 0; t < 3; ++t) {
    const double exact = th.expected_W2_form(pairs[t][0], pairs[t][1]);
    CHECK(std::abs(stats::mean(x[t]) - exact) <= 3.0 * stats::standard_error(x[t]));
  }
}

TEST_CASE("B matrix") {
  const std::size_t N = 4000;
  const double eps = 0.02;
  const BMatrix ones = b_matrix(testing::Ones(), N, eps, 0);
  CHECK(ones.B(0, 0) == doctest::Approx(N * eps + 1 - eps).epsilon(1e-12));
  CHECK(ones.eigenvalues(0) == doctest::Approx(80.98).epsilon(1e-12));
  const BMatrix tb = b_matrix(testing::TwoBlock(), N, eps, 1);
  CHECK(tb.B(0, 1) == 0.0);
  CHECK(tb.B(1, 0) == 0.0);
  const FiniteNTheory coupled(testing::CoupledBlock(), 1000, 0.05);
  const Eigen::MatrixXd B = coupled.b_matrix(0);
  CHECK((B - B.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(b_matrix(testing::Sbm(Eigen::MatrixXd::Identity(2, 2), {0, 0.5, 1}),
                           100, 0.1, 0),
                  InvalidArgument);
}

TEST_CASE("asymptotic covariance closed forms") {
  const KernelSpec eq = testing::Sbm(Eigen::MatrixXd::Identity(2, 2), {0, 0.5, 1});
  CHECK(asymptotic_cov_G(eq, 0.0, 0, 0) == doctest::Approx(2.0).epsilon(1e-13));
  const KernelSpec tb = testing::TwoBlock();
  CHECK(asymptotic_cov_G(tb, 0.0, 0, 0) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(asymptotic_cov_G(tb, 0.0, 1, 1) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(std::abs(asymptotic_cov_G(tb, 0.0, 0, 1)) <= 1e-14);
  for (double ei : {0.0, 0.3, 1.0}) {
    CHECK(asymptotic_cov_G(testing::Ones(), ei, 0, 0) ==
          doctest::Approx(2.0 * (1.0 - ei)).epsilon(1e-13));
    const double r3 = 3.0 * std::sqrt(3.0) / 4.0, r4 = 9.0 / 5.0;
    CHECK(asymptotic_cov_G(testing::Sqrt3x(), ei, 0, 0) ==
          doctest::Approx(2.0 * r3 * r3 - 2.0 * ei * r4 * r4).epsilon(1e-13));
  }
}

TEST_CASE("asymptotic covariance against 2D Simpson") {
  const KernelSpec leg = Legendre2();
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(std::abs(asymptotic_cov_G(leg, 0.2, i, j) - SimpsonCov(leg, 0.2, i, j)) <=
            1e-10);
    }
  }
  // Piecewise-linear eigenfunction with knots on the Simpson grid.
  std::vector<double> v;
  for (int i = 0; i <= 8; ++i) v.push_back(1.0 + 0.3 * std::sin(static_cast<double>(i)));
  const KernelSpec tab({1.0}, {EigenfunctionDesc::Tabulated(v)});
  CHECK(std::abs(asymptotic_cov_G(tab, 0.1, 0, 0) - SimpsonCov(tab, 0.1, 0, 0)) <= 1e-8);
}

TEST_CASE("asymptotic covariance matrix is positive semidefinite") {
  for (const KernelSpec& spec : {testing::CoupledBlock(), Legendre2(), testing::TwoBlock()}) {
    Eigen::MatrixXd S(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = asymptotic_cov_G(spec, 0.05, i, j);
    CHECK((S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(descending_eigenvalues(S).minCoeff() >= -1e-10);
  }
}

TEST_CASE("exact bilinear covariance") {
  const std::size_t N = 300;
  const double eps = 0.2;
  const double v = eps * (1 - eps);
  CHECK(exact_bilinear_cov(testing::Ones(), N, eps, 0, 0, 0, 0) ==
        doctest::Approx(2 * v * (N - 1) / N + v / N).epsilon(1e-12));
  CHECK(exact_bilinear_cov(testing::TwoBlock(), N, eps, 0, 0, 1, 1) == 0.0);
  const FiniteNTheory th(testing::CoupledBlock(), N, eps);
  const double base = th.exact_bilinear_cov(0, 1, 1, 1);
  CHECK(th.exact_bilinear_cov(1, 0, 1, 1) == doctest::Approx(base).epsilon(1e-13));
  CHECK(th.exact_bilinear_cov(0, 1, 1, 1) == doctest::Approx(base).epsilon(1e-13));
  CHECK(th.exact_bilinear_cov(1, 1, 0, 1) == doctest::Approx(base).epsilon(1e-13));
  CHECK(th.exact_bilinear_cov(1, 1, 1, 0) == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("exact bilinear covariance by enumerating every graph at N = 3") {
  const KernelSpec spec = Legendre2();
  const std::size_t N = 3;
  const double eps = 0.4;
  const FiniteNTheory th(spec, N, eps);
  const Eigen::MatrixXd& e = th.e();
  std::vector<std::pair<int, int>> slots;
  for (int a = 0; a < 3; ++a)
    for (int c = a; c < 3; ++c) slots.push_back({a, c});
  Eigen::MatrixXd P(3, 3);
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 3; ++c) P(a, c) = eps * eval_f(spec, (a + 1) / 3.0, (c + 1) / 3.0);
  const std::size_t idx[][4] = {{0, 0, 0, 0}, {0, 1, 0, 1}, {1, 1, 1, 1}, {0, 0, 1, 1}, {0, 1, 1, 1}};
  for (const auto& q : idx) {
    double m1 = 0.0, m2 = 0.0, m12 = 0.0;
    for (int mask = 0; mask < 64; ++mask) {
      Eigen::MatrixXd W = -P;
      double prob = 1.0;
      for (int s = 0; s < 6; ++s) {
        const auto [a, c] = slots[static_cast<std::size_t>(s)];
        const bool on = (mask >> s) & 1;
        prob *= on ? P(a, c) : 1.0 - P(a, c);
        if (on) {
          W(a, c) += 1.0;
          if (a != c) W(c, a) += 1.0;
        }
      }
      const double x = e.col(static_cast<Eigen::Index>(q[0])).dot(W * e.col(static_cast<Eigen::Index>(q[1])));
      const double y = e.col(static_cast<Eigen::Index>(q[2])).dot(W * e.col(static_cast<Eigen::Index>(q[3])));
      m1 += prob * x;
      m2 += prob * y;
      m12 += prob * x * y;
    }
    CHECK(std::abs(m1) <= 1e-14);
    CHECK(th.exact_bilinear_cov(q[0], q[1], q[2], q[3]) ==
          doctest::Approx(m12 - m1 * m2).epsilon(1e-12));
  }
}

TEST_CASE("finite-N covariance converges to the asymptotic integral") {
  const KernelSpec spec = testing::Sqrt3x();
  const double eps = 0.01;
  const double target = asymptotic_cov_G(spec, eps, 0, 0);
  auto gap = [&](std::size_t N) {
    return std::abs(exact_bilinear_cov(spec, N, eps, 0, 0, 0, 0) / eps - target);
  };
  const double g3 = gap(1000), g4 = gap(10000);
  CHECK(g4 * 2.0 <= g3);
  const KernelSpec leg = Legendre2();
  const double t2 = asymptotic_cov_G(leg, eps, 0, 1);
  double prev = 1e300;
  for (std::size_t N : {500u, 2000u, 8000u}) {
    const double g = std::abs(exact_bilinear_cov(leg, N, eps, 0, 0, 1, 1) / eps - t2);
    CHECK(g < prev);
    prev = g;
  }
  const PredictionSet p1 = make_predictions(leg, 1000, eps, eps);
  const PredictionSet p2 = make_predictions(leg, 8000, eps, eps);
  CHECK((p2.exact_sigma - p2.sigma_G).cwiseAbs().maxCoeff() <
        (p1.exact_sigma - p1.sigma_G).cwiseAbs().maxCoeff());
}

TEST_CASE("rank-one mean") {
  CHECK(rank_one_mean(testing::Ones(), 1000, 0.1) == doctest::Approx(101.0).epsilon(1e-14));
  CHECK(rank_one_mean(testing::Sqrt3x(), 1000, 0.1) ==
        doctest::Approx(100.0 + 9.0 / 8.0).epsilon(1e-14));
  const BMatrix b = b_matrix(testing::Sqrt3x(), 4000, 0.02, 0);
  CHECK(std::abs(rank_one_mean(testing::Sqrt3x(), 4000, 0.02) - b.eigenvalues(0)) <= 0.5);
  CHECK_THROWS_AS(rank_one_mean(testing::TwoBlock(), 100, 0.1), InvalidArgument);
}

TEST_CASE("z shift and overlap law") {
  const FiniteNTheory tb(testing::TwoBlock(), 1000, 0.05);
  CHECK(tb.z_shift(0, 1) == 0.0);
  CHECK(tb.eigvec_overlap_prediction(0, 1, 50.0, 0.0) == 0.0);
  CHECK(eigvec_overlap_prediction(testing::TwoBlock(), 1000, 0.05, 0, 1, 50.0, 0.0) == 0.0);
  CHECK_THROWS_AS(tb.eigvec_overlap_prediction(0, 1, 0.0, 0.1), DomainError);
  const FiniteNTheory eq(testing::Sbm(Eigen::MatrixXd::Identity(2, 2), {0, 0.5, 1}), 100, 0.1);
  CHECK_THROWS_AS(eq.z_shift(0, 1), DomainError);
  const FiniteNTheory c(testing::CoupledBlock(), 1000, 0.05);
  const double ti = c.spec().theta(0), tj = c.spec().theta(1);
  const double ne = 50.0;
  CHECK(c.z_shift(0, 1) ==
        doctest::Approx(c.expected_W2_form(0, 1) / (ne * ne * ti * (ti - tj))));
  CHECK(c.eigvec_overlap_prediction(0, 1, 55.0, 0.2) ==
        doctest::Approx((ti * 0.2 / 55.0) / (ti - tj) + c.z_shift(0, 1)));
  CHECK(c.overlap_fluctuation_variance(0, 1, 55.0) ==
        doctest::Approx(1e6 * 0.05 * std::pow(ti / (ti - tj), 2) *
                        c.exact_bilinear_cov(0, 1, 0, 1) / (55.0 * 55.0)));
}

namespace {

std::vector<double> OverlapLawErrors(const KernelSpec& spec, int replicates) {
  const std::size_t N = 4000;
  const double eps = std::pow(4000.0, -0.4);
  const FiniteNTheory th(spec, N, eps);
  std::vector<double> err;
  for (int r = 0; r < replicates; ++r) {
    const GraphSample g = sample_graph(spec, N, eps, seed_derive(5, N, static_cast<std::uint64_t>(r)));
    const EigenResult eig = top_eigenpairs(as_operator(g), 2, EigenOptions{});
    EigenPair v = eig.pairs[0];
    align_sign(v, th.e().col(0));
    const CenteredAdjacency w(g, spec);
    const double bw = th.e().col(0).dot(w.apply(Eigen::VectorXd(th.e().col(1))));
    const double pred = th.eigvec_overlap_prediction(0, 1, v.value, bw);
    err.push_back(th.e().col(1).dot(v.vector) - pred);
  }
  return err;
}

double Q90Abs(std::vector<double> err) {
  for (double& x : err) x = std::abs(x);
  return stats::quantile(err, 0.9);
}

}  // namespace

TEST_CASE("overlap law tracks measured cross overlaps") {
  const double bound = 0.5 / (4000.0 * std::sqrt(std::pow(4000.0, -0.4)));
  SUBCASE("two-block kernel") {
    CHECK(Q90Abs(OverlapLawErrors(testing::TwoBlock(), 30)) <= bound);
  }
  SUBCASE("coupled kernel") {
    // The law drops e_1'e_2, which is O(1/N) on the grid but not zero; here it
    // shifts every replicate by about 5e-4. Left unadjusted.
    const std::vector<double> err = OverlapLawErrors(testing::CoupledBlock(), 60);
    MESSAGE("mean error " << stats::mean(err) << ", sd " << std::sqrt(stats::variance(err)));
    CHECK(Q90Abs(err) <= bound);
  }
}

TEST_CASE("prediction set json") {
  const PredictionSet p = make_predictions(testing::TwoBlock(), 1000, 0.05, 0.0);
  CHECK(p.isolated == std::vector<std::size_t>{0, 1});
  const auto j = predictions_to_json(p);
  CHECK(j.at("isolated") == nlohmann::json::array({1, 2}));
  CHECK(j.at("sigma_G").at("shape") == nlohmann::json::array({2, 2}));
  CHECK(j.at("sigma_G").at("data").at(0).get<double>() == doctest::Approx(4.0));
  CHECK(j.at("z_shift").size() == 2);
  CHECK(j.at("b_matrices").size() == 2);
  CHECK_FALSE(j.contains("rank_one_mean"));
  const auto jo = predictions_to_json(make_predictions(testing::Ones(), 4000, 0.02, 0.02));
  CHECK(jo.at("lambda_B").at(0).get<double>() == doctest::Approx(80.98).epsilon(1e-12));
  CHECK(jo.at("rank_one_mean").get<double>() == doctest::Approx(81.0).epsilon(1e-12));
}

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

#include "ierg/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "ierg/error.hpp"
#include "ierg/json_util.hpp"
#include "ierg/spectra.hpp"

namespace ierg {
namespace {

using Eigen::Index;

Index Idx(std::size_t i) { return static_cast<Index>(i); }

}  // namespace

FiniteNTheory::FiniteNTheory(const KernelSpec& spec, std::size_t N,
                             double epsilon)
    : spec_(spec), N_(N), epsilon_(epsilon) {
  if (N == 0) throw InvalidArgument("theory: N must be positive");
  if (!(epsilon > 0.0)) throw InvalidArgument("theory: epsilon must be > 0");
  const Index k = Idx(spec.rank());
  e_ = discretize(spec, N);
  r_.resize(Idx(N), k);
  for (std::size_t a = 0; a < N; ++a) {
    const double x = static_cast<double>(a + 1) / static_cast<double>(N);
    for (Index m = 0; m < k; ++m) {
      r_(Idx(a), m) = spec.eigenfunction(static_cast<std::size_t>(m))(x);
    }
  }
  row_var_ = Eigen::VectorXd::Zero(Idx(N));
  for (std::size_t a = 0; a < N; ++a) {
    for (std::size_t c = a; c < N; ++c) {
      const double v = var_profile(a, c);
      row_var_(Idx(a)) += v;
      if (c != a) row_var_(Idx(c)) += v;
    }
  }
  expected_w2_.resize(k, k);
  for (Index j = 0; j < k; ++j) {
    for (Index l = j; l < k; ++l) {
      double acc = 0.0;
      for (Index a = 0; a < Idx(N); ++a) {
        acc += e_(a, j) * e_(a, l) * row_var_(a);
      }
      expected_w2_(j, l) = expected_w2_(l, j) = acc;
    }
  }
}

void FiniteNTheory::CheckEigenIndex(std::size_t i) const {
  if (i >= spec_.rank()) {
    throw InvalidArgument("theory: eigen-index out of range");
  }
}

void FiniteNTheory::CheckPair(std::size_t i, std::size_t j) const {
  CheckEigenIndex(i);
  CheckEigenIndex(j);
  if (spec_.theta(i) == spec_.theta(j)) {
    throw DomainError("theory: theta_i == theta_j, overlap law has a pole");
  }
}

double FiniteNTheory::var_profile(std::size_t a, std::size_t c) const {
  if (a >= N_ || c >= N_) throw InvalidArgument("var_profile: index out of range");
  double f = 0.0;
  for (Index m = 0; m < r_.cols(); ++m) {
    f += spec_.theta(static_cast<std::size_t>(m)) *
         (r_(Idx(a), m) * r_(Idx(c), m));
  }
  const double p = epsilon_ * f;
  return p * (1.0 - p);
}

double FiniteNTheory::expected_W2_form(std::size_t j, std::size_t l) const {
  CheckEigenIndex(j);
  CheckEigenIndex(l);
  return expected_w2_(Idx(j), Idx(l));
}

Eigen::MatrixXd FiniteNTheory::b_matrix(std::size_t i) const {
  CheckEigenIndex(i);
  const auto isolated = isolated_indices(spec_.thetas());
  if (std::find(isolated.begin(), isolated.end(), i) == isolated.end()) {
    throw InvalidArgument("b_matrix: index " + std::to_string(i + 1) +
                          " is not isolated");
  }
  const Index k = Idx(spec_.rank());
  const double theta_i = spec_.theta(i);
  const Eigen::MatrixXd gram = e_.transpose() * e_;
  Eigen::MatrixXd B(k, k);
  for (Index j = 0; j < k; ++j) {
    for (Index l = 0; l < k; ++l) {
      const double s = std::sqrt(spec_.theta(static_cast<std::size_t>(j)) *
                                 spec_.theta(static_cast<std::size_t>(l)));
      B(j, l) = s * n_eps() * gram(j, l) +
                s * expected_w2_(j, l) / (theta_i * theta_i * n_eps());
    }
  }
  return 0.5 * (B + B.transpose());
}

double FiniteNTheory::exact_bilinear_cov(std::size_t a, std::size_t b,
                                         std::size_t c, std::size_t d) const {
  for (std::size_t idx : {a, b, c, d}) CheckEigenIndex(idx);
  const auto ea = e_.col(Idx(a));
  const auto eb = e_.col(Idx(b));
  const auto ec = e_.col(Idx(c));
  const auto ed = e_.col(Idx(d));
  double total = 0.0;
  for (Index i = 0; i < Idx(N_); ++i) {
    double row = 0.0;
    for (Index j = i + 1; j < Idx(N_); ++j) {
      const double left = ea(i) * eb(j) + ea(j) * eb(i);
      const double right = ec(i) * ed(j) + ec(j) * ed(i);
      if (left == 0.0 || right == 0.0) continue;
      row += left * right *
             var_profile(static_cast<std::size_t>(i),
                         static_cast<std::size_t>(j));
    }
    total += row;
    total += ea(i) * eb(i) * ec(i) * ed(i) *
             var_profile(static_cast<std::size_t>(i),
                         static_cast<std::size_t>(i));
  }
  return total;
}

double FiniteNTheory::z_shift(std::size_t i, std::size_t j) const {
  CheckPair(i, j);
  return z_shift_law(spec_.theta(i), spec_.theta(j), n_eps(),
                     expected_w2_(Idx(i), Idx(j)));
}

double FiniteNTheory::eigvec_overlap_prediction(std::size_t i, std::size_t j,
                                                double lambda_i,
                                                double bilinear_W) const {
  CheckPair(i, j);
  if (!(lambda_i > 0.0)) {
    throw DomainError("eigvec_overlap_prediction: lambda_i must be positive");
  }
  return overlap_law(spec_.theta(i), spec_.theta(j), n_eps(),
                     expected_w2_(Idx(i), Idx(j)), lambda_i, bilinear_W);
}

double FiniteNTheory::overlap_fluctuation_variance(std::size_t i,
                                                   std::size_t j,
                                                   double lambda_i) const {
  CheckPair(i, j);
  return z_variance_law(spec_.theta(i), spec_.theta(j), N_, epsilon_,
                        exact_bilinear_cov(i, j, i, j), lambda_i);
}

double z_shift_law(double theta_i, double theta_j, double n_eps,
                   double ew2_ij) {
  return ew2_ij / (n_eps * n_eps * theta_i * (theta_i - theta_j));
}

double overlap_law(double theta_i, double theta_j, double n_eps,
                   double ew2_ij, double lambda_i, double bilinear_W) {
  return (theta_i * bilinear_W / lambda_i +
          ew2_ij / (n_eps * n_eps * theta_i)) /
         (theta_i - theta_j);
}

double z_variance_law(double theta_i, double theta_j, std::size_t N,
                      double epsilon, double var_ij, double lambda_i) {
  const double ratio = theta_i / (theta_i - theta_j);
  const double n = static_cast<double>(N);
  return n * n * epsilon * ratio * ratio * var_ij / (lambda_i * lambda_i);
}

double var_profile(const KernelSpec& spec, std::size_t N, double epsilon,
                   std::size_t a, std::size_t c) {
  if (a >= N || c >= N) throw InvalidArgument("var_profile: index out of range");
  const double x = static_cast<double>(a + 1) / static_cast<double>(N);
  const double y = static_cast<double>(c + 1) / static_cast<double>(N);
  const double p = epsilon * eval_f(spec, x, y);
  return p * (1.0 - p);
}

double expected_W2_form(const KernelSpec& spec, std::size_t N, double epsilon,
                        std::size_t j, std::size_t l) {
  return FiniteNTheory(spec, N, epsilon).expected_W2_form(j, l);
}

BMatrix b_matrix(const KernelSpec& spec, std::size_t N, double epsilon,
                 std::size_t i) {
  BMatrix out;
  out.B = FiniteNTheory(spec, N, epsilon).b_matrix(i);
  out.eigenvalues = descending_eigenvalues(out.B);
  return out;
}

double asymptotic_cov_G(const KernelSpec& spec, double eps_infty,
                        std::size_t i, std::size_t j) {
  const std::size_t k = spec.rank();
  if (i >= k || j >= k) throw InvalidArgument("asymptotic_cov_G: bad index");
  if (!(eps_infty >= 0.0)) {
    throw InvalidArgument("asymptotic_cov_G: eps_infty must be >= 0");
  }
  const PiecewisePolynomial rij =
      spec.eigenfunction(i).function() * spec.eigenfunction(j).function();
  double linear = 0.0;
  for (std::size_t m = 0; m < k; ++m) {
    const double t = (rij * spec.eigenfunction(m).function()).Integral();
    linear += spec.theta(m) * t * t;
  }
  double quadratic = 0.0;
  if (eps_infty > 0.0) {
    for (std::size_t m = 0; m < k; ++m) {
      const PiecewisePolynomial rijm = rij * spec.eigenfunction(m).function();
      for (std::size_t n = 0; n < k; ++n) {
        const double t = (rijm * spec.eigenfunction(n).function()).Integral();
        quadratic += spec.theta(m) * spec.theta(n) * t * t;
      }
    }
  }
  return 2.0 * (linear - eps_infty * quadratic);
}

double exact_bilinear_cov(const KernelSpec& spec, std::size_t N,
                          double epsilon, std::size_t a, std::size_t b,
                          std::size_t c, std::size_t d) {
  return FiniteNTheory(spec, N, epsilon).exact_bilinear_cov(a, b, c, d);
}

double rank_one_mean(const KernelSpec& spec, std::size_t N, double epsilon) {
  if (spec.rank() != 1) throw InvalidArgument("rank_one_mean: rank must be 1");
  const auto& r = spec.eigenfunction(0).function();
  const double int_r = r.Integral();
  const double int_r3 = (r * r * r).Integral();
  return spec.theta(0) * static_cast<double>(N) * epsilon + int_r3 * int_r;
}

double eigvec_overlap_prediction(const KernelSpec& spec, std::size_t N,
                                 double epsilon, std::size_t i, std::size_t j,
                                 double lambda_i, double bilinear_W) {
  return FiniteNTheory(spec, N, epsilon)
      .eigvec_overlap_prediction(i, j, lambda_i, bilinear_W);
}

PredictionSet make_predictions(const FiniteNTheory& theory, double eps_infty) {
  const KernelSpec& spec = theory.spec();
  PredictionSet p;
  p.kernel_id = spec.id();
  p.N = theory.N();
  p.epsilon = theory.epsilon();
  p.eps_infty = eps_infty;
  p.thetas = spec.thetas();
  p.sup_f = spec.sup_bound();
  p.isolated = isolated_indices(spec.thetas());
  p.expected_W2 = theory.expected_W2();
  const Index n_iso = Idx(p.isolated.size());
  p.sigma_G.resize(n_iso, n_iso);
  p.exact_sigma.resize(n_iso, n_iso);
  for (Index s = 0; s < n_iso; ++s) {
    const std::size_t i = p.isolated[static_cast<std::size_t>(s)];
    BMatrix b;
    b.B = theory.b_matrix(i);
    b.eigenvalues = descending_eigenvalues(b.B);
    p.b.emplace(i, std::move(b));
    for (Index t = s; t < n_iso; ++t) {
      const std::size_t j = p.isolated[static_cast<std::size_t>(t)];
      p.sigma_G(s, t) = p.sigma_G(t, s) = asymptotic_cov_G(spec, eps_infty, i, j);
      p.exact_sigma(s, t) = p.exact_sigma(t, s) =
          theory.exact_bilinear_cov(i, i, j, j) / theory.epsilon();
    }
    for (std::size_t j = 0; j < spec.rank(); ++j) {
      if (j != i && spec.theta(j) != spec.theta(i)) {
        p.z_shift[{i, j}] = theory.z_shift(i, j);
      }
    }
  }
  const Index k = Idx(spec.rank());
  p.bilinear_var.resize(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = i; j < k; ++j) {
      const auto a = static_cast<std::size_t>(i);
      const auto b = static_cast<std::size_t>(j);
      p.bilinear_var(i, j) = p.bilinear_var(j, i) =
          theory.exact_bilinear_cov(a, b, a, b);
    }
  }
  if (spec.rank() == 1) {
    p.rank_one_mean = rank_one_mean(spec, theory.N(), theory.epsilon());
  }
  return p;
}

PredictionSet make_predictions(const KernelSpec& spec, std::size_t N,
                               double epsilon, double eps_infty) {
  return make_predictions(FiniteNTheory(spec, N, epsilon), eps_infty);
}

nlohmann::json predictions_to_json(const PredictionSet& p) {
  char id[17];
  std::snprintf(id, sizeof id, "%016llx",
                static_cast<unsigned long long>(p.kernel_id));
  nlohmann::json isolated = nlohmann::json::array();
  for (std::size_t i : p.isolated) isolated.push_back(i + 1);
  nlohmann::json b = nlohmann::json::array();
  for (const auto& [i, bm] : p.b) {
    b.push_back({{"i", i + 1},
                 {"B", matrix_to_json(bm.B)},
                 {"lambda_B", to_std(bm.eigenvalues)}});
  }
  nlohmann::json z = nlohmann::json::array();
  for (const auto& [ij, value] : p.z_shift) {
    z.push_back({{"i", ij.first + 1}, {"j", ij.second + 1}, {"z", value}});
  }
  nlohmann::json out{{"kernel_id", id},
                     {"N", p.N},
                     {"epsilon", p.epsilon},
                     {"eps_infty", p.eps_infty},
                     {"thetas", p.thetas},
                     {"sup_f", p.sup_f},
                     {"isolated", isolated},
                     {"b_matrices", b},
                     {"expected_W2", matrix_to_json(p.expected_W2)},
                     {"sigma_G", matrix_to_json(p.sigma_G)},
                     {"exact_sigma", matrix_to_json(p.exact_sigma)},
                     {"bilinear_var", matrix_to_json(p.bilinear_var)},
                     {"z_shift", z}};
  // lambda_B of the leading isolated index, for quick reading.
  if (!p.b.empty()) {
    out["lambda_B"] = to_std(p.b.begin()->second.eigenvalues);
  }
  if (p.rank_one_mean) out["rank_one_mean"] = *p.rank_one_mean;
  return out;
}

}  // namespace ierg

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

#ifndef IERG_THEORY_HPP_
#define IERG_THEORY_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "ierg/kernel.hpp"

namespace ierg {

// Exact finite-N moments of the centered adjacency matrix W for one
// (kernel, N, epsilon). Vertex indices are 0-based (vertex a sits at grid
// point (a+1)/N); eigen-indices are 0-based.
//
// Construction costs O(N^2 k) for the row sums of the variance profile; the
// quantities below are then O(N k^2) except exact_bilinear_cov, which is
// O(N^2).
class FiniteNTheory {
 public:
  FiniteNTheory(const KernelSpec& spec, std::size_t N, double epsilon);

  const KernelSpec& spec() const { return spec_; }
  std::size_t N() const { return N_; }
  double epsilon() const { return epsilon_; }
  double n_eps() const { return static_cast<double>(N_) * epsilon_; }
  const Eigen::MatrixXd& e() const { return e_; }

  // Var A(a,c) = eps f (1 - eps f) at (a/N, c/N).
  double var_profile(std::size_t a, std::size_t c) const;
  // E(e_j' W^2 e_l) = sum_a e_j(a) e_l(a) sum_c Var A(a,c).
  double expected_W2_form(std::size_t j, std::size_t l) const;
  const Eigen::MatrixXd& expected_W2() const { return expected_w2_; }

  // B(j,l) = sqrt(theta_j theta_l) N eps e_j'e_l
  //          + theta_i^{-2} sqrt(theta_j theta_l) (N eps)^{-1} E(e_j'W^2 e_l).
  // Throws InvalidArgument unless i is isolated.
  Eigen::MatrixXd b_matrix(std::size_t i) const;

  // Cov(e_a'W e_b, e_c'W e_d), exact.
  double exact_bilinear_cov(std::size_t a, std::size_t b, std::size_t c,
                            std::size_t d) const;

  // z = E(e_i'W^2 e_j) / ((N eps)^2 theta_i (theta_i - theta_j)).
  double z_shift(std::size_t i, std::size_t j) const;

  // Leading-order e_j'v for the eigenvector v of lambda_i(A):
  // (theta_i - theta_j)^{-1} [theta_i bilinear_W / lambda_i
  //                           + (N eps)^{-2} theta_i^{-1} E(e_i'W^2 e_j)].
  // Throws DomainError if theta_i == theta_j or lambda_i <= 0.
  double eigvec_overlap_prediction(std::size_t i, std::size_t j,
                                   double lambda_i, double bilinear_W) const;

  // Variance of Z_ij = N sqrt(eps) (e_j'v - z) implied by the leading term:
  // N^2 eps (theta_i / (theta_i - theta_j))^2 Var(e_i'W e_j) / lambda_i^2.
  double overlap_fluctuation_variance(std::size_t i, std::size_t j,
                                      double lambda_i) const;

 private:
  void CheckEigenIndex(std::size_t i) const;
  void CheckPair(std::size_t i, std::size_t j) const;

  KernelSpec spec_;
  std::size_t N_;
  double epsilon_;
  Eigen::MatrixXd r_;  // r_m((a+1)/N), unscaled
  Eigen::MatrixXd e_;
  Eigen::VectorXd row_var_;
  Eigen::MatrixXd expected_w2_;
};

// Closed forms shared by FiniteNTheory and the experiment checks; ew2_ij is
// E(e_i'W^2 e_j) and var_ij is Var(e_i'W e_j).
double z_shift_law(double theta_i, double theta_j, double n_eps,
                   double ew2_ij);
double overlap_law(double theta_i, double theta_j, double n_eps,
                   double ew2_ij, double lambda_i, double bilinear_W);
double z_variance_law(double theta_i, double theta_j, std::size_t N,
                      double epsilon, double var_ij, double lambda_i);

double var_profile(const KernelSpec& spec, std::size_t N, double epsilon,
                   std::size_t a, std::size_t c);
double expected_W2_form(const KernelSpec& spec, std::size_t N, double epsilon,
                        std::size_t j, std::size_t l);

struct BMatrix {
  Eigen::MatrixXd B;
  Eigen::VectorXd eigenvalues;  // descending
};
BMatrix b_matrix(const KernelSpec& spec, std::size_t N, double epsilon,
                 std::size_t i);

// Cov(G_i, G_j) = 2 int int r_i r_i r_j r_j f (1 - eps_inf f), evaluated in
// closed form through the separable expansion of f:
//   2 [ sum_m theta_m (int r_i r_j r_m)^2
//       - eps_inf sum_{m,n} theta_m theta_n (int r_i r_j r_m r_n)^2 ].
double asymptotic_cov_G(const KernelSpec& spec, double eps_infty,
                        std::size_t i, std::size_t j);

double exact_bilinear_cov(const KernelSpec& spec, std::size_t N,
                          double epsilon, std::size_t a, std::size_t b,
                          std::size_t c, std::size_t d);

// theta N eps + (int r^3)(int r). Throws InvalidArgument unless rank 1.
double rank_one_mean(const KernelSpec& spec, std::size_t N, double epsilon);

double eigvec_overlap_prediction(const KernelSpec& spec, std::size_t N,
                                 double epsilon, std::size_t i, std::size_t j,
                                 double lambda_i, double bilinear_W);

struct PredictionSet {
  std::uint64_t kernel_id = 0;
  std::size_t N = 0;
  double epsilon = 0.0;
  double eps_infty = 0.0;
  std::vector<double> thetas;
  double sup_f = 0.0;                         // M
  std::vector<std::size_t> isolated;          // 0-based
  std::map<std::size_t, BMatrix> b;           // per isolated i
  Eigen::MatrixXd expected_W2;                // k x k
  Eigen::MatrixXd sigma_G;                    // |I| x |I|, asymptotic
  Eigen::MatrixXd exact_sigma;                // |I| x |I|, eps^{-1} Cov
  Eigen::MatrixXd bilinear_var;               // k x k, Var(e_i'W e_j)
  std::map<std::pair<std::size_t, std::size_t>, double> z_shift;  // (i, j)
  std::optional<double> rank_one_mean;
};

PredictionSet make_predictions(const FiniteNTheory& theory, double eps_infty);
PredictionSet make_predictions(const KernelSpec& spec, std::size_t N,
                               double epsilon, double eps_infty);

// Matrices as {"shape": [r, c], "data": [row-major]}; indices 1-based.
nlohmann::json predictions_to_json(const PredictionSet& p);

}  // namespace ierg

#endif  // IERG_THEORY_HPP_

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

#include "ierg/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ierg/error.hpp"
#include "ierg/random.hpp"

namespace ierg {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index Idx(std::size_t i) { return static_cast<Index>(i); }

// First coordinate above 1e-10 * max|v| made positive.
void DefaultSign(VectorXd& v) {
  const double cutoff = 1e-10 * v.cwiseAbs().maxCoeff();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > cutoff) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

double Residual(const LinearOperator& op, const VectorXd& v, double value) {
  return (op(v) - value * v).norm();
}

double Accept(double value, double tol) {
  return tol * std::max(1.0, std::abs(value));
}

// min(r, r^2 / gap): the eigenvalue error bound once the gap is resolved.
double ValueError(double residual, double gap) {
  if (!(gap > 0.0) || !std::isfinite(gap)) return residual;
  return std::min(residual, residual * residual / gap);
}

double GapAt(const VectorXd& ascending, Index idx) {
  double gap = std::numeric_limits<double>::infinity();
  if (idx > 0) gap = std::min(gap, ascending(idx) - ascending(idx - 1));
  if (idx + 1 < ascending.size()) {
    gap = std::min(gap, ascending(idx + 1) - ascending(idx));
  }
  return gap;
}

VectorXd RandomUnit(std::size_t n, CounterStream& stream) {
  VectorXd v(Idx(n));
  for (Index i = 0; i < v.size(); ++i) v(i) = 2.0 * stream.NextUnit() - 1.0;
  return v / v.norm();
}

// Two passes of classical Gram-Schmidt against the first `cols` columns.
// Returns the accumulated projection coefficients.
VectorXd Reorthogonalize(const MatrixXd& Q, Index cols, VectorXd& w) {
  VectorXd total = VectorXd::Zero(cols);
  for (int pass = 0; pass < 2; ++pass) {
    const VectorXd h = Q.leftCols(cols).transpose() * w;
    w.noalias() -= Q.leftCols(cols) * h;
    total += h;
  }
  return total;
}

EigenResult Lanczos(const LinearOperator& op, std::size_t m,
                    const EigenOptions& opt) {
  const std::size_t n = op.size;
  const std::size_t extra = std::min(opt.extra_values, n - m);
  const std::size_t want = m + extra;
  const std::size_t max_iter =
      opt.max_iter > 0 ? opt.max_iter : 10 * want + 200;
  const std::size_t cap = std::min(n, max_iter);

  MatrixXd Q(Idx(n), Idx(cap));
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples q_j and q_{j+1}
  CounterStream stream(opt.start_seed, 0);
  VectorXd q = RandomUnit(n, stream);
  VectorXd w(Idx(n));
  std::vector<double> best(want, std::numeric_limits<double>::infinity());
  std::size_t next_check = want;
  double scale = 0.0;

  for (std::size_t j = 0; j < cap; ++j) {
    Q.col(Idx(j)) = q;
    op.apply(std::span<const double>(q.data(), n),
             std::span<double>(w.data(), n));
    double a = q.dot(w);
    w -= a * q;
    if (j > 0) w -= beta[j - 1] * Q.col(Idx(j) - 1);
    a += Reorthogonalize(Q, Idx(j) + 1, w)(Idx(j));
    alpha.push_back(a);
    const double b = w.norm();
    scale = std::max({scale, std::abs(a), b});
    const std::size_t steps = j + 1;
    const bool breakdown = b <= 1e-12 * std::max(scale, 1e-300);
    const bool exhausted = steps == n;

    if (steps >= want &&
        (steps >= next_check || breakdown || exhausted || steps == cap)) {
      next_check = std::max(steps + 4, steps + steps / 10);
      VectorXd diag = Eigen::Map<VectorXd>(alpha.data(), Idx(steps));
      VectorXd sub = steps > 1 ? VectorXd(Eigen::Map<VectorXd>(
                                     beta.data(), Idx(steps) - 1))
                               : VectorXd();
      Eigen::SelfAdjointEigenSolver<MatrixXd> tri;
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      const VectorXd& theta = tri.eigenvalues();
      const MatrixXd& S = tri.eigenvectors();
      const double coupling = (breakdown || exhausted) ? 0.0 : b;

      bool estimates_ok = true;
      for (std::size_t t = 0; t < want; ++t) {
        const Index idx = Idx(steps - 1 - t);
        const double r = coupling * std::abs(S(Idx(steps) - 1, idx));
        const bool is_extra = t >= m;
        const double err = (is_extra || opt.value_only)
                               ? ValueError(r, GapAt(theta, idx))
                               : r;
        best[t] = std::min(best[t], err);
        const double tol = is_extra ? opt.extra_tol : opt.tol;
        if (err > Accept(theta(idx), tol)) estimates_ok = false;
      }

      if (estimates_ok) {
        EigenResult result;
        result.iterations = steps;
        bool verified = true;
        for (std::size_t t = 0; t < m; ++t) {
          const Index idx = Idx(steps - 1 - t);
          EigenPair pair;
          pair.value = theta(idx);
          pair.vector = Q.leftCols(Idx(steps)) * S.col(idx);
          pair.vector.normalize();
          pair.residual = Residual(op, pair.vector, pair.value);
          const double err =
              opt.value_only ? ValueError(pair.residual, GapAt(theta, idx))
                             : pair.residual;
          if (err > Accept(pair.value, opt.tol)) verified = false;
          DefaultSign(pair.vector);
          result.pairs.push_back(std::move(pair));
        }
        for (std::size_t t = m; t < want; ++t) {
          result.extra_values.push_back(theta(Idx(steps - 1 - t)));
        }
        if (verified || exhausted) return result;
      }
    }
    if (exhausted) break;

    if (breakdown) {
      // Invariant subspace: continue the Krylov basis from a fresh direction.
      VectorXd fresh = RandomUnit(n, stream);
      Reorthogonalize(Q, Idx(steps), fresh);
      const double norm = fresh.norm();
      if (norm < 1e-8) break;
      beta.push_back(0.0);
      q = fresh / norm;
    } else {
      beta.push_back(b);
      q = w / b;
    }
  }
  throw ConvergenceError("Lanczos did not converge within " +
                             std::to_string(max_iter) + " iterations",
                         best);
}

}  // namespace

VectorXd LinearOperator::operator()(const VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != size) {
    throw InvalidArgument("operator: dimension mismatch");
  }
  VectorXd y(x.size());
  apply(std::span<const double>(x.data(), size),
        std::span<double>(y.data(), size));
  return y;
}

LinearOperator as_operator(const GraphSample& g) {
  return {g.N(), [&g](std::span<const double> x, std::span<double> y) {
            apply_A(g, x, y);
          }};
}

LinearOperator as_operator(const CenteredAdjacency& w) {
  return {w.size(), [&w](std::span<const double> x, std::span<double> y) {
            w.apply(x, y);
          }};
}

LinearOperator as_operator(const MatrixXd& dense) {
  if (dense.rows() != dense.cols()) {
    throw InvalidArgument("operator: matrix must be square");
  }
  return {static_cast<std::size_t>(dense.rows()),
          [&dense](std::span<const double> x, std::span<double> y) {
            Eigen::Map<const VectorXd> xv(x.data(), dense.cols());
            Eigen::Map<VectorXd> yv(y.data(), dense.rows());
            yv.noalias() = dense * xv;
          }};
}

LinearOperator negated(LinearOperator op) {
  auto inner = std::move(op.apply);
  return {op.size,
          [inner = std::move(inner)](std::span<const double> x,
                                     std::span<double> y) {
            inner(x, y);
            for (double& v : y) v = -v;
          }};
}

EigenResult dense_top_eigenpairs(const LinearOperator& op, std::size_t m,
                                 std::size_t extra_values) {
  const std::size_t n = op.size;
  if (m == 0 || m > n) throw InvalidArgument("eigenpairs: need 1 <= m <= N");
  MatrixXd M(Idx(n), Idx(n));
  VectorXd unit = VectorXd::Zero(Idx(n));
  for (std::size_t c = 0; c < n; ++c) {
    unit(Idx(c)) = 1.0;
    M.col(Idx(c)) = op(unit);
    unit(Idx(c)) = 0.0;
  }
  const MatrixXd sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym);
  EigenResult result;
  result.dense = true;
  for (std::size_t t = 0; t < m; ++t) {
    const Index idx = Idx(n - 1 - t);
    EigenPair pair;
    pair.value = eig.eigenvalues()(idx);
    pair.vector = eig.eigenvectors().col(idx);
    pair.vector.normalize();
    pair.residual = Residual(op, pair.vector, pair.value);
    DefaultSign(pair.vector);
    result.pairs.push_back(std::move(pair));
  }
  for (std::size_t t = m; t < std::min(n, m + extra_values); ++t) {
    result.extra_values.push_back(eig.eigenvalues()(Idx(n - 1 - t)));
  }
  return result;
}

EigenResult top_eigenpairs(const LinearOperator& op, std::size_t m,
                           const EigenOptions& options) {
  if (m == 0 || m > op.size) {
    throw InvalidArgument("eigenpairs: need 1 <= m <= N");
  }
  const bool dense =
      options.method == EigenMethod::kDense ||
      (options.method == EigenMethod::kAuto && op.size <= kDenseCutoff);
  if (dense) return dense_top_eigenpairs(op, m, options.extra_values);
  return Lanczos(op, m, options);
}

std::vector<EigenPair> top_eigenpairs(const LinearOperator& op, std::size_t m,
                                      double tol) {
  EigenOptions options;
  options.tol = tol;
  return top_eigenpairs(op, m, options).pairs;
}

double operator_norm_W(const CenteredAdjacency& w, double rel_tol) {
  EigenOptions options;
  options.tol = rel_tol;
  options.value_only = true;
  options.max_iter = std::min<std::size_t>(w.size(), 3000);
  const LinearOperator op = as_operator(w);
  const double top = top_eigenpairs(op, 1, options).pairs.front().value;
  const double bottom =
      top_eigenpairs(negated(op), 1, options).pairs.front().value;
  return std::max(top, bottom);
}

double operator_norm_W(const GraphSample& g, const KernelSpec& spec) {
  return operator_norm_W(CenteredAdjacency(g, spec));
}

MinresResult minres(const LinearOperator& op, const VectorXd& b, double tol,
                    std::size_t max_iter) {
  const Index n = b.size();
  MinresResult result;
  result.x = VectorXd::Zero(n);
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    result.converged = true;
    return result;
  }

  // Restarted on the true residual if round-off leaves the recurrence
  // estimate optimistic.
  for (int restart = 0; restart < 3 && result.iterations < max_iter;
       ++restart) {
    const VectorXd r0 = b - op(result.x);
    const double beta1 = r0.norm();
    if (beta1 <= tol * b_norm) break;

    VectorXd v_prev = VectorXd::Zero(n);
    VectorXd v = r0 / beta1;
    VectorXd w_prev = VectorXd::Zero(n);
    VectorXd w_prev2 = VectorXd::Zero(n);
    double beta = 0.0;
    double c_prev = 1.0, s_prev = 0.0, c_prev2 = 1.0, s_prev2 = 0.0;
    double eta = beta1;
    VectorXd z(n);

    while (result.iterations < max_iter) {
      ++result.iterations;
      z = op(v) - beta * v_prev;
      const double alpha = v.dot(z);
      z -= alpha * v;
      const double beta_next = z.norm();

      const double eps = s_prev2 * beta;
      const double delta_hat = c_prev2 * beta;
      const double delta = c_prev * delta_hat + s_prev * alpha;
      const double gamma_hat = -s_prev * delta_hat + c_prev * alpha;
      const double gamma = std::hypot(gamma_hat, beta_next);
      if (gamma == 0.0) break;
      const double c = gamma_hat / gamma;
      const double s = beta_next / gamma;

      VectorXd w = (v - delta * w_prev - eps * w_prev2) / gamma;
      result.x += c * eta * w;
      eta = -s * eta;

      w_prev2 = std::move(w_prev);
      w_prev = std::move(w);
      c_prev2 = c_prev;
      s_prev2 = s_prev;
      c_prev = c;
      s_prev = s;
      if (std::abs(eta) <= 0.5 * tol * b_norm || beta_next == 0.0) break;
      v_prev = std::move(v);
      v = z / beta_next;
      beta = beta_next;
    }
  }
  result.relative_residual = (b - op(result.x)).norm() / b_norm;
  result.converged = result.relative_residual <= tol;
  return result;
}

Eigen::MatrixXd resolvent_V(const CenteredAdjacency& w, double mu,
                            std::optional<double> norm_W) {
  if (!(mu > 0.0)) throw DomainError("resolvent_V: mu must be positive");
  const double norm = norm_W ? *norm_W : operator_norm_W(w);
  if (norm >= mu) {
    throw DomainError("resolvent_V: ||W|| >= mu, (I - W/mu) not invertible "
                      "by the Neumann argument");
  }
  const LinearOperator W = as_operator(w);
  const LinearOperator shifted{
      w.size(), [&W, mu](std::span<const double> x, std::span<double> y) {
        W.apply(x, y);
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - y[i] / mu;
      }};

  const MatrixXd& e = w.e();
  const Index k = e.cols();
  MatrixXd solves(e.rows(), k);
  for (Index l = 0; l < k; ++l) {
    const VectorXd rhs = e.col(l);
    MinresResult sol = minres(shifted, rhs, 1e-10, 2000);
    if (!sol.converged) {
      // Neumann series sum_n (W/mu)^n e_l.
      VectorXd y = rhs;
      for (int term = 0; term < 200; ++term) {
        y = rhs + W(y) / mu;
      }
      sol.x = y;
    }
    solves.col(l) = sol.x;
  }

  const VectorXd& weights = w.mean_weights();  // N eps theta_j
  MatrixXd V = e.transpose() * solves;
  for (Index j = 0; j < k; ++j) {
    for (Index l = 0; l < k; ++l) {
      V(j, l) *= std::sqrt(weights(j) * weights(l));
    }
  }
  return 0.5 * (V + V.transpose());
}

Eigen::MatrixXd resolvent_V(const GraphSample& g, const KernelSpec& spec,
                            double mu) {
  const CenteredAdjacency w(g, spec);
  return resolvent_V(w, mu);
}

VectorXd descending_eigenvalues(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().reverse();
}

double overlap(const VectorXd& v, const VectorXd& e, const VectorXd* reference) {
  if (v.size() != e.size() || (reference && reference->size() != v.size())) {
    throw InvalidArgument("overlap: dimension mismatch");
  }
  const VectorXd& ref = reference ? *reference : e;
  const double sign = ref.dot(v) < 0.0 ? -1.0 : 1.0;
  return sign * e.dot(v);
}

void align_sign(EigenPair& pair, const VectorXd& reference) {
  if (reference.size() != pair.vector.size()) {
    throw InvalidArgument("align_sign: dimension mismatch");
  }
  if (reference.dot(pair.vector) < 0.0) pair.vector = -pair.vector;
}

nlohmann::json eigenpairs_to_json(std::span<const EigenPair> pairs,
                                  const MatrixXd& e) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& pair : pairs) {
    nlohmann::json overlaps = nlohmann::json::object();
    for (Index j = 0; j < e.cols(); ++j) {
      overlaps["e_" + std::to_string(j + 1)] = e.col(j).dot(pair.vector);
    }
    out.push_back({{"value", pair.value},
                   {"residual", pair.residual},
                   {"overlaps", std::move(overlaps)}});
  }
  return out;
}

}  // namespace ierg

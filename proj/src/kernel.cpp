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

#include "ierg/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numeric>
#include <utility>

#include "ierg/error.hpp"

namespace ierg {
namespace {

constexpr double kValidationGrid = 256;

class Fnv1a {
 public:
  void Add(const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= bytes[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void Add(double v) { Add(&v, sizeof v); }
  void Add(std::uint64_t v) { Add(&v, sizeof v); }
  void Add(const std::vector<double>& v) {
    Add(static_cast<std::uint64_t>(v.size()));
    for (double x : v) Add(x);
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

// Each eigenfunction re-expressed on the union of all breakpoints, so piece q
// of every refined function covers the same interval.
std::vector<PiecewisePolynomial> RefineToCommonPieces(
    const std::vector<EigenfunctionDesc>& fns) {
  std::vector<double> merged{0.0, 1.0};
  for (const auto& fn : fns) {
    std::vector<double> next;
    const auto& b = fn.function().breakpoints();
    std::set_union(merged.begin(), merged.end(), b.begin(), b.end(),
                   std::back_inserter(next));
    merged = std::move(next);
  }
  const PiecewisePolynomial ones(
      merged, std::vector<std::vector<double>>(merged.size() - 1, {1.0}));
  std::vector<PiecewisePolynomial> out;
  out.reserve(fns.size());
  for (const auto& fn : fns) out.push_back(fn.function() * ones);
  return out;
}

double LocalEval(const PiecewisePolynomial& f, std::size_t piece, double t) {
  const auto& c = f.coefficients(piece);
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
  return acc;
}

// sup f over a tensor grid containing both one-sided limits at every
// breakpoint plus interior samples of each non-constant piece.
double MeasureSupF(const std::vector<double>& thetas,
                   const std::vector<EigenfunctionDesc>& fns) {
  const auto refined = RefineToCommonPieces(fns);
  const auto& bp = refined.front().breakpoints();
  const std::size_t pieces = bp.size() - 1;
  std::size_t max_degree = 0;
  for (const auto& r : refined) max_degree = std::max(max_degree, r.degree());
  const std::size_t samples =
      max_degree == 0 ? 1
                      : std::clamp<std::size_t>(2048 / pieces, 2, 65);

  // rows: candidate points, columns: eigenfunction values there.
  std::vector<std::vector<double>> values;
  for (std::size_t q = 0; q < pieces; ++q) {
    const double h = bp[q + 1] - bp[q];
    for (std::size_t s = 0; s < samples; ++s) {
      const double t =
          samples == 1 ? 0.0 : h * static_cast<double>(s) / (samples - 1);
      std::vector<double> row(refined.size());
      for (std::size_t m = 0; m < refined.size(); ++m) {
        row[m] = LocalEval(refined[m], q, t);
      }
      values.push_back(std::move(row));
    }
  }
  double sup = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < values.size(); ++a) {
    for (std::size_t b = a; b < values.size(); ++b) {
      double f = 0.0;
      for (std::size_t m = 0; m < thetas.size(); ++m) {
        f += thetas[m] * values[a][m] * values[b][m];
      }
      sup = std::max(sup, f);
    }
  }
  return sup;
}

// Sign so that the largest-magnitude coordinate (first one on ties) is
// positive.
double DominantSign(const Eigen::VectorXd& v, Eigen::Index* dominant) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best)) * (1.0 + 1e-12)) best = i;
  }
  if (dominant != nullptr) *dominant = best;
  return v(best) < 0.0 ? -1.0 : 1.0;
}

}  // namespace

std::string to_string(EigenfunctionKind kind) {
  switch (kind) {
    case EigenfunctionKind::kPiecewiseConstant:
      return "piecewise_constant";
    case EigenfunctionKind::kPolynomial:
      return "polynomial";
    case EigenfunctionKind::kTabulated:
      return "tabulated";
  }
  return "unknown";
}

EigenfunctionDesc::EigenfunctionDesc(EigenfunctionKind kind,
                                     std::vector<double> points,
                                     std::vector<double> values,
                                     PiecewisePolynomial function)
    : kind_(kind),
      points_(std::move(points)),
      values_(std::move(values)),
      function_(std::move(function)) {}

EigenfunctionDesc EigenfunctionDesc::PiecewiseConstant(
    std::vector<double> breakpoints, std::vector<double> values) {
  auto fn = PiecewisePolynomial::Steps(breakpoints, values);
  return EigenfunctionDesc(EigenfunctionKind::kPiecewiseConstant,
                           std::move(breakpoints), std::move(values),
                           std::move(fn));
}

EigenfunctionDesc EigenfunctionDesc::Polynomial(
    std::vector<double> coefficients) {
  if (coefficients.empty()) {
    throw InvalidArgument("polynomial needs at least one coefficient");
  }
  auto fn = PiecewisePolynomial::Polynomial(coefficients);
  return EigenfunctionDesc(EigenfunctionKind::kPolynomial, {},
                           std::move(coefficients), std::move(fn));
}

EigenfunctionDesc EigenfunctionDesc::Tabulated(std::vector<double> knots,
                                               std::vector<double> values) {
  auto fn = PiecewisePolynomial::Linear(knots, values);
  return EigenfunctionDesc(EigenfunctionKind::kTabulated, std::move(knots),
                           std::move(values), std::move(fn));
}

EigenfunctionDesc EigenfunctionDesc::Tabulated(std::vector<double> values) {
  if (values.size() < 2) {
    throw InvalidArgument("tabulated function needs at least two values");
  }
  std::vector<double> knots(values.size());
  const double n = static_cast<double>(values.size() - 1);
  for (std::size_t i = 0; i < knots.size(); ++i) knots[i] = i / n;
  knots.back() = 1.0;
  return Tabulated(std::move(knots), std::move(values));
}

double EigenfunctionDesc::L2Norm() const {
  return std::sqrt((function_ * function_).Integral());
}

KernelSpec::KernelSpec(std::vector<double> thetas,
                       std::vector<EigenfunctionDesc> eigenfunctions,
                       std::optional<double> sup_bound,
                       std::optional<double> lipschitz_constant)
    : thetas_(std::move(thetas)),
      eigenfunctions_(std::move(eigenfunctions)),
      lipschitz_constant_(lipschitz_constant) {
  if (thetas_.empty()) throw InvalidArgument("kernel rank must be positive");
  if (thetas_.size() != eigenfunctions_.size()) {
    throw InvalidArgument("need one eigenfunction per eigenvalue");
  }
  for (std::size_t i = 0; i < thetas_.size(); ++i) {
    if (!(thetas_[i] > 0.0) || !std::isfinite(thetas_[i])) {
      throw InvalidArgument("kernel eigenvalues must be positive and finite");
    }
    if (i > 0 && thetas_[i] > thetas_[i - 1]) {
      throw InvalidArgument("kernel eigenvalues must be non-increasing");
    }
  }
  if (lipschitz_constant_ && !(*lipschitz_constant_ >= 0.0)) {
    throw InvalidArgument("Lipschitz constant must be non-negative");
  }

  piecewise_constant_ = true;
  envelope_ = 0.0;
  for (std::size_t i = 0; i < rank(); ++i) {
    const auto& fn = eigenfunctions_[i].function();
    piecewise_constant_ = piecewise_constant_ && fn.degree() == 0;
    const double s = fn.SupAbs();
    envelope_ += thetas_[i] * s * s;
  }

  if (sup_bound) {
    if (!(*sup_bound > 0.0) || !std::isfinite(*sup_bound)) {
      throw InvalidArgument("sup bound must be positive and finite");
    }
    sup_bound_ = *sup_bound;
  } else {
    sup_bound_ = MeasureSupF(thetas_, eigenfunctions_);
    if (!(sup_bound_ > 0.0)) {
      throw InvalidArgument("kernel has no positive values");
    }
  }

  Fnv1a h;
  h.Add(static_cast<std::uint64_t>(rank()));
  h.Add(thetas_);
  for (const auto& fn : eigenfunctions_) {
    h.Add(static_cast<std::uint64_t>(fn.kind()));
    h.Add(fn.points());
    h.Add(fn.values());
  }
  h.Add(sup_bound_);
  id_ = h.value();
}

std::string KernelSpec::id_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(id_));
  return buf;
}

KernelSpec kernel_from_sbm(const SBMParams& params) {
  const Eigen::Index k = params.p.rows();
  if (k == 0 || params.p.cols() != k) {
    throw InvalidArgument("SBM matrix must be square and non-empty");
  }
  const auto& b = params.block_boundaries;
  if (b.size() != static_cast<std::size_t>(k) + 1) {
    throw InvalidArgument("SBM needs k+1 block boundaries");
  }
  if (b.front() != 0.0 || b.back() != 1.0) {
    throw InvalidArgument("SBM block boundaries must run from 0 to 1");
  }
  std::vector<double> beta(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    beta[i] = b[i + 1] - b[i];
    if (!(beta[i] > 0.0)) throw DomainError("SBM block of zero measure");
  }
  const double scale = params.p.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      if (std::abs(params.p(i, j) - params.p(j, i)) > 1e-12 * scale) {
        throw DomainError("SBM matrix is not symmetric");
      }
    }
  }
  const Eigen::MatrixXd p = 0.5 * (params.p + params.p.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> p_eig(p);
  if (p_eig.eigenvalues().minCoeff() <= 1e-12) {
    throw DomainError("SBM matrix is not positive definite");
  }

  Eigen::MatrixXd p_tilde(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      p_tilde(i, j) = p(i, j) * std::sqrt(beta[i] * beta[j]);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p_tilde);
  const Eigen::VectorXd& values = eig.eigenvalues();
  Eigen::MatrixXd vectors = eig.eigenvectors();

  std::vector<Eigen::Index> dominant(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::VectorXd col = vectors.col(c);
    vectors.col(c) *= DominantSign(col, &dominant[c]);
  }
  std::vector<Eigen::Index> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto c) {
    if (values(a) != values(c)) return values(a) > values(c);
    return dominant[a] < dominant[c];
  });

  std::vector<double> thetas;
  std::vector<EigenfunctionDesc> fns;
  for (Eigen::Index c : order) {
    thetas.push_back(values(c));
    std::vector<double> block_values(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      block_values[a] = vectors(a, c) / std::sqrt(beta[a]);
    }
    fns.push_back(EigenfunctionDesc::PiecewiseConstant(b, block_values));
  }
  return KernelSpec(std::move(thetas), std::move(fns), p.maxCoeff());
}

KernelSpec kernel_rank_one(double theta, const EigenfunctionDesc& r) {
  if (!(theta > 0.0)) throw InvalidArgument("theta must be positive");
  if (r.function().Min() < -1e-12) {
    throw DomainError("rank-one eigenfunction takes negative values");
  }
  if (std::abs(r.L2Norm() - 1.0) > 1e-8) {
    throw DomainError("rank-one eigenfunction does not have unit L2 norm");
  }
  const double s = r.function().Max();
  return KernelSpec({theta}, {r}, theta * s * s);
}

double eval_f(const KernelSpec& spec, double x, double y) {
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
    throw InvalidArgument("eval_f: argument outside [0,1]");
  }
  double f = 0.0;
  for (std::size_t i = 0; i < spec.rank(); ++i) {
    const auto& r = spec.eigenfunction(i);
    f += spec.theta(i) * (r(x) * r(y));
  }
  return f;
}

Eigen::MatrixXd discretize(const KernelSpec& spec, std::size_t N) {
  if (N == 0) throw InvalidArgument("discretize: N must be positive");
  const auto k = static_cast<Eigen::Index>(spec.rank());
  Eigen::MatrixXd e(static_cast<Eigen::Index>(N), k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  for (std::size_t a = 1; a <= N; ++a) {
    const double x = static_cast<double>(a) / static_cast<double>(N);
    for (Eigen::Index i = 0; i < k; ++i) {
      e(static_cast<Eigen::Index>(a - 1), i) = scale * spec.eigenfunction(i)(x);
    }
  }
  return e;
}

std::vector<std::size_t> isolated_indices(std::span<const double> thetas,
                                          double relative_gap) {
  auto separated = [&](double hi, double lo) {
    return hi - lo > relative_gap * std::max(std::abs(hi), std::abs(lo));
  };
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const bool above = i == 0 || separated(thetas[i - 1], thetas[i]);
    const bool below =
        i + 1 == thetas.size() || separated(thetas[i], thetas[i + 1]);
    if (above && below) out.push_back(i);
  }
  return out;
}

bool ValidationReport::ok() const {
  return orthonormality_defect <= 1e-8 && min_f_grid >= -1e-12 &&
         declared_sup >= sup_f * (1.0 - 1e-9) && krein_rutman_ok;
}

ValidationReport validate(const KernelSpec& spec) {
  ValidationReport report;
  const std::size_t k = spec.rank();
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const double ip = (spec.eigenfunction(i).function() *
                         spec.eigenfunction(j).function())
                            .Integral();
      const double defect = std::abs(ip - (i == j ? 1.0 : 0.0));
      report.orthonormality_defect =
          std::max(report.orthonormality_defect, defect);
    }
  }

  const int n = static_cast<int>(kValidationGrid);
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = static_cast<double>(i) / (n - 1);
  std::vector<std::vector<double>> r(k, std::vector<double>(n));
  for (std::size_t m = 0; m < k; ++m) {
    for (int i = 0; i < n; ++i) r[m][i] = spec.eigenfunction(m)(grid[i]);
  }
  auto f_at = [&](int a, int b) {
    double f = 0.0;
    for (std::size_t m = 0; m < k; ++m) f += spec.theta(m) * (r[m][a] * r[m][b]);
    return f;
  };
  const double h = 1.0 / (n - 1);
  double min_f = std::numeric_limits<double>::infinity();
  double lip = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double f = f_at(a, b);
      min_f = std::min(min_f, f);
      if (a + 1 < n) lip = std::max(lip, std::abs(f_at(a + 1, b) - f) / h);
      if (b + 1 < n) lip = std::max(lip, std::abs(f_at(a, b + 1) - f) / h);
    }
  }
  report.min_f_grid = min_f;
  report.lipschitz_quotient = lip;
  report.sup_f = MeasureSupF(spec.thetas(), spec.eigenfunctions());
  report.declared_sup = spec.sup_bound();
  report.isolated = isolated_indices(spec.thetas());

  report.krein_rutman_applies = min_f > 0.0;
  if (report.krein_rutman_applies) {
    const bool top_isolated =
        !report.isolated.empty() && report.isolated.front() == 0;
    const bool all_nonneg = std::all_of(r[0].begin(), r[0].end(),
                                        [](double v) { return v >= -1e-12; });
    const bool all_nonpos = std::all_of(r[0].begin(), r[0].end(),
                                        [](double v) { return v <= 1e-12; });
    report.krein_rutman_ok = top_isolated && (all_nonneg || all_nonpos);
  }
  return report;
}

}  // namespace ierg

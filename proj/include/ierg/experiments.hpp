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

#ifndef IERG_EXPERIMENTS_HPP_
#define IERG_EXPERIMENTS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "ierg/kernel.hpp"
#include "ierg/theory.hpp"

namespace ierg {

enum class Check {
  kClt,
  kMean,
  kEigvecAlign,
  kEigvecFlac,
  kNormBound,
  kResolventIdentity,
};

std::string to_string(Check check);
// Throws InvalidArgument on an unknown name.
Check check_from_string(const std::string& name);
// "clt,mean" -> {kClt, kMean}; order and duplicates normalized.
std::vector<Check> parse_checks(const std::string& list);

// epsilon = value, or epsilon = c N^{-alpha}.
struct EpsRule {
  enum class Kind { kFixed, kPower };
  Kind kind = Kind::kFixed;
  double value = 0.0;
  double c = 0.0;
  double alpha = 0.0;

  static EpsRule Fixed(double eps);
  static EpsRule Power(double c, double alpha);
  double at(std::size_t N) const;
  bool decays() const { return kind == Kind::kPower && alpha > 0.0; }
};

struct ExperimentConfig {
  std::shared_ptr<const KernelSpec> kernel;
  std::vector<std::size_t> N_list;
  EpsRule eps_rule;
  std::size_t replicates = 0;
  std::uint64_t root_seed = 0;
  std::vector<Check> checks;
  // Limit of epsilon for the asymptotic covariance; defaults to 0 for a
  // decaying rule and to the constant epsilon otherwise.
  std::optional<double> eps_infty;
  // Worker threads; 0 means hardware concurrency. Does not affect results.
  unsigned threads = 0;

  bool has(Check check) const;
  double eps_infty_value() const;
  // Throws InvalidArgument unless R >= 2, every N >= 32, 0 < eps M <= 1 at
  // every N, alpha in [0, 1), and alpha < 2/3 when eigvec_flac is requested.
  void validate() const;
};

// {"kernel": {...} | "kernel_path": "...", "N_list": [...],
//  "eps_rule": {"fixed": e} | {"power": {"c": c, "alpha": a}} | e,
//  "replicates": R, "root_seed": s, "checks": [...],
//  "eps_infty": optional, "threads": optional}
// kernel_path is resolved against base_dir. Throws InvalidArgument (IoError
// for an unreadable kernel_path).
ExperimentConfig config_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
// Kernel in explicit form; threads omitted.
nlohmann::json config_to_json(const ExperimentConfig& config);

struct ReplicateRecord {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::vector<double> lambdas;    // lambda_1..lambda_{k+1}(A)
  std::vector<double> residuals;  // for lambda_1..lambda_k
  double norm_W = std::numeric_limits<double>::quiet_NaN();
  // Row t: e_j'v for the eigenvector v of lambda_{I[t]}(A), signed so that
  // e_{I[t]}'v >= 0.
  Eigen::MatrixXd overlaps;
  Eigen::MatrixXd bilinear;  // k x k, e_i'W e_j
  // |lambda_1(V) - lambda_1(A)| / lambda_1(A); NaN unless computed.
  double resolvent_residual = std::numeric_limits<double>::quiet_NaN();
  // ||W|| < lambda_1(A), so V is defined.
  bool resolvent_applicable = false;
};

enum class VerdictStatus { kPass, kFail, kSkipped };
std::string to_string(VerdictStatus status);

struct Verdict {
  std::string check;
  VerdictStatus status = VerdictStatus::kSkipped;
  std::string note;
  nlohmann::json thresholds = nlohmann::json::object();
  nlohmann::json stats = nlohmann::json::object();
};
nlohmann::json verdict_to_json(const Verdict& v);

// The check functions take successful records only and throw
// InsufficientData below 100 of them.
inline constexpr std::size_t kMinCheckReplicates = 100;

struct CltOptions {
  double diag_rel_tol = 0.15;
  double offdiag_abs_tol = 0.3;
  double z_max = 4.0;
  // Covariance target over I x I; defaults to predictions.sigma_G.
  std::optional<Eigen::MatrixXd> target;
};
// Empirical covariance of eps^{-1/2}(lambda_i - mean lambda_i), i in I,
// against the target; moment z-scores per coordinate.
Verdict clt_check(std::span<const ReplicateRecord> records,
                  const PredictionSet& predictions,
                  const CltOptions& options = {});

struct MeanOptions {
  double c_mean = 5.0;
};
// |mean lambda_i - lambda_i(B^(i))| <= c_mean (sqrt(eps) + 1/(N eps)) + 3 SE
// for i in I; for rank one the same bound against theta N eps + int r^3 int r.
Verdict mean_check(std::span<const ReplicateRecord> records,
                   const PredictionSet& predictions,
                   const MeanOptions& options = {});

struct EigvecOptions {
  double quantile = 0.95;
  double tight_threshold = 20.0;
  double min_correlation = 0.9;
  double z_max = 4.0;
  double var_rel_tol = 0.25;
};
// 95th percentiles of N eps (1 - e_i'v) and N eps |e_j'v|.
Verdict eigvec_align_check(std::span<const ReplicateRecord> records,
                           const PredictionSet& predictions,
                           const EigvecOptions& options = {});
// Correlation of e_j'v with the overlap law and normality and variance of
// Z_ij = N sqrt(eps)(e_j'v - z). Skipped when k = 1.
Verdict eigvec_flac_check(std::span<const ReplicateRecord> records,
                          const PredictionSet& predictions,
                          const EigvecOptions& options = {});
std::vector<Verdict> eigvec_checks(std::span<const ReplicateRecord> records,
                                   const PredictionSet& predictions,
                                   const EigvecOptions& options = {});

struct TailOptions {
  double constant = 10.0;
  double log_exponent = 2.0;
  double max_violation_fraction = 0.01;
  double var_ratio_lo = 0.5;
  double var_ratio_hi = 2.0;
  // A pair with zero exact variance passes when its empirical variance is
  // below this multiple of epsilon.
  double zero_var_tol = 1e-12;
};
// ||W|| <= 2 sqrt(M N eps) + C (N eps)^{1/4} (log N)^p in all but a small
// fraction of replicates, and Var(e_i'W e_j) within [lo, hi] of exact.
Verdict tail_checks(std::span<const ReplicateRecord> records,
                    const PredictionSet& predictions,
                    const TailOptions& options = {});

struct ResolventOptions {
  double tol = 1e-8;
};
// Every applicable record has resolvent_residual <= tol.
Verdict resolvent_check(std::span<const ReplicateRecord> records,
                        const ResolventOptions& options = {});

// One replicate: sample, spectrum, overlaps, bilinear forms and, if asked,
// ||W|| and the resolvent identity. Solver errors are caught into ok/error.
ReplicateRecord run_replicate(const KernelSpec& spec, std::size_t N,
                              double epsilon, std::size_t replicate,
                              std::uint64_t seed, bool want_norm,
                              bool want_resolvent);

struct RunResult {
  std::size_t N = 0;
  double epsilon = 0.0;
  PredictionSet predictions;
  std::vector<ReplicateRecord> records;  // replicate order
  std::size_t failed = 0;
  nlohmann::json summary;
  std::vector<Verdict> verdicts;
};

struct ExperimentReport {
  nlohmann::json config;
  std::vector<RunResult> runs;
  bool passed() const;
};

// Fails the replicate budget (a "replicates" verdict) when more than 1% of
// replicates at some N fail.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Records only the successful replicates of a run.
std::vector<ReplicateRecord> successful(const RunResult& run);

nlohmann::json record_to_json(const ReplicateRecord& r,
                              const PredictionSet& predictions);
nlohmann::json report_to_json(const ExperimentReport& report);
// One row per replicate; columns in docs/formats.md.
void write_report_csv(const ExperimentReport& report, std::ostream& out);
// Writes <stem>.json and <stem>.csv. Throws IoError.
void save_report(const ExperimentReport& report,
                 const std::filesystem::path& json_path);

}  // namespace ierg

#endif  // IERG_EXPERIMENTS_HPP_

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

#include "ierg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <thread>

#include "ierg/error.hpp"
#include "ierg/json_util.hpp"
#include "ierg/kernel_io.hpp"
#include "ierg/random.hpp"
#include "ierg/sampler.hpp"
#include "ierg/spectra.hpp"
#include "ierg/stats.hpp"

namespace ierg {
namespace {

using nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr Check kAllChecks[] = {
    Check::kClt,        Check::kMean,      Check::kEigvecAlign,
    Check::kEigvecFlac, Check::kNormBound, Check::kResolventIdentity,
};

void RequireRecords(std::span<const ReplicateRecord> records,
                    const char* what) {
  if (records.size() < kMinCheckReplicates) {
    throw InsufficientData(std::string(what) + ": needs at least " +
                           std::to_string(kMinCheckReplicates) +
                           " successful replicates, got " +
                           std::to_string(records.size()));
  }
}

std::vector<double> Column(std::span<const ReplicateRecord> records,
                           std::size_t i) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.lambdas.at(i));
  return out;
}

double Theta(const PredictionSet& p, std::size_t i) { return p.thetas.at(i); }

double NEps(const PredictionSet& p) {
  return static_cast<double>(p.N) * p.epsilon;
}

json Quantiles(const std::vector<double>& x) {
  if (x.empty()) return nullptr;
  return {{"q05", stats::quantile(x, 0.05)},
          {"q50", stats::quantile(x, 0.50)},
          {"q95", stats::quantile(x, 0.95)}};
}

json MomentJson(const stats::MomentZ& z) {
  return {{"skewness", z.skewness},
          {"excess_kurtosis", z.kurtosis},
          {"skewness_z", z.skewness_z},
          {"kurtosis_z", z.kurtosis_z}};
}

bool MomentOk(const stats::MomentZ& z, double z_max) {
  return std::abs(z.skewness_z) < z_max && std::abs(z.kurtosis_z) < z_max;
}

// Cross pairs (i, j) tracked for the overlap law: i isolated, j != i with a
// distinct theta.
struct CrossPair {
  std::size_t t;  // row of ReplicateRecord::overlaps
  std::size_t i;
  std::size_t j;
};

std::vector<CrossPair> CrossPairs(const PredictionSet& p) {
  std::vector<CrossPair> out;
  for (std::size_t t = 0; t < p.isolated.size(); ++t) {
    const std::size_t i = p.isolated[t];
    for (std::size_t j = 0; j < p.thetas.size(); ++j) {
      if (j != i && p.thetas[j] != p.thetas[i]) out.push_back({t, i, j});
    }
  }
  return out;
}

double ZShift(const PredictionSet& p, std::size_t i, std::size_t j) {
  return z_shift_law(Theta(p, i), Theta(p, j), NEps(p),
                     p.expected_W2(static_cast<Eigen::Index>(i),
                                   static_cast<Eigen::Index>(j)));
}

std::vector<double> ZValues(std::span<const ReplicateRecord> records,
                            const PredictionSet& p, const CrossPair& c) {
  const double scale = static_cast<double>(p.N) * std::sqrt(p.epsilon);
  const double z = ZShift(p, c.i, c.j);
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(scale * (r.overlaps(static_cast<Eigen::Index>(c.t),
                                      static_cast<Eigen::Index>(c.j)) -
                           z));
  }
  return out;
}

double PredictedZVariance(std::span<const ReplicateRecord> records,
                          const PredictionSet& p, const CrossPair& c) {
  const double lambda = stats::mean(Column(records, c.i));
  return z_variance_law(Theta(p, c.i), Theta(p, c.j), p.N, p.epsilon,
                        p.bilinear_var(static_cast<Eigen::Index>(c.i),
                                       static_cast<Eigen::Index>(c.j)),
                        lambda);
}

double NormEnvelope(const PredictionSet& p, const TailOptions& o) {
  const double n_eps = NEps(p);
  const double log_n = std::log(static_cast<double>(p.N));
  return 2.0 * std::sqrt(p.sup_f * n_eps) +
         o.constant * std::pow(n_eps, 0.25) * std::pow(log_n, o.log_exponent);
}

json Summarize(std::span<const ReplicateRecord> ok, const PredictionSet& p) {
  json s;
  s["replicates_ok"] = ok.size();
  s["regime_log8_over_neps"] =
      std::pow(std::log(static_cast<double>(p.N)), 8.0) / NEps(p);
  if (ok.empty()) return s;
  const std::size_t n_lambda = ok.front().lambdas.size();
  std::vector<double> means, ses;
  for (std::size_t i = 0; i < n_lambda; ++i) {
    const auto col = Column(ok, i);
    means.push_back(stats::mean(col));
    ses.push_back(ok.size() >= 2 ? stats::standard_error(col) : kNaN);
  }
  s["lambda_mean"] = means;
  s["lambda_se"] = ses;
  const auto& iso = p.isolated;
  if (ok.size() >= 2 && !iso.empty()) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(ok.size()),
                      static_cast<Eigen::Index>(iso.size()));
    const double scale = 1.0 / std::sqrt(p.epsilon);
    for (std::size_t r = 0; r < ok.size(); ++r) {
      for (std::size_t t = 0; t < iso.size(); ++t) {
        X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) =
            scale * ok[r].lambdas[iso[t]];
      }
    }
    s["scaled_lambda_cov"] = matrix_to_json(stats::covariance_matrix(X));
    if (ok.size() >= 4) {
      json moments = json::array();
      for (std::size_t t = 0; t < iso.size(); ++t) {
        json m = MomentJson(stats::moment_z(Column(ok, iso[t])));
        m["i"] = iso[t] + 1;
        moments.push_back(m);
      }
      s["lambda_moments"] = moments;
    }
  }
  json align = json::array();
  const double n_eps = NEps(p);
  for (std::size_t t = 0; t < iso.size(); ++t) {
    const std::size_t i = iso[t];
    std::vector<double> defect;
    for (const auto& r : ok) {
      defect.push_back(n_eps * (1.0 - r.overlaps(static_cast<Eigen::Index>(t),
                                                 static_cast<Eigen::Index>(i))));
    }
    align.push_back({{"i", i + 1}, {"neps_one_minus_overlap", Quantiles(defect)}});
  }
  s["alignment"] = align;
  json cross = json::array();
  for (const auto& c : CrossPairs(p)) {
    std::vector<double> scaled;
    for (const auto& r : ok) {
      scaled.push_back(n_eps * std::abs(r.overlaps(
                                   static_cast<Eigen::Index>(c.t),
                                   static_cast<Eigen::Index>(c.j))));
    }
    const auto z = ZValues(ok, p, c);
    json entry{{"i", c.i + 1},
               {"j", c.j + 1},
               {"z_shift", ZShift(p, c.i, c.j)},
               {"neps_abs_overlap", Quantiles(scaled)},
               {"Z", Quantiles(z)},
               {"Z_mean", stats::mean(z)}};
    if (ok.size() >= 2) {
      entry["Z_var"] = stats::variance(z);
      entry["Z_var_predicted"] = PredictedZVariance(ok, p, c);
    }
    cross.push_back(entry);
  }
  s["cross_overlaps"] = cross;
  std::vector<double> norms, residuals;
  std::size_t resolvent_undefined = 0;
  for (const auto& r : ok) {
    if (std::isfinite(r.norm_W)) {
      norms.push_back(r.norm_W);
      if (!r.resolvent_applicable) ++resolvent_undefined;
    }
    if (r.resolvent_applicable) residuals.push_back(r.resolvent_residual);
  }
  if (!norms.empty()) {
    s["norm_W"] = {{"mean", stats::mean(norms)},
                   {"max", *std::max_element(norms.begin(), norms.end())}};
    s["norm_W_ge_lambda1_count"] = resolvent_undefined;
  }
  if (!residuals.empty()) {
    s["resolvent_residual_max"] =
        *std::max_element(residuals.begin(), residuals.end());
  }
  return s;
}

std::string FormatDouble(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "" : (x > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json EpsRuleToJson(const EpsRule& rule) {
  if (rule.kind == EpsRule::Kind::kFixed) return {{"fixed", rule.value}};
  return {{"power", {{"c", rule.c}, {"alpha", rule.alpha}}}};
}

EpsRule EpsRuleFromJson(const json& j) {
  if (j.is_number()) return EpsRule::Fixed(j.get<double>());
  if (j.is_object() && j.contains("fixed")) {
    return EpsRule::Fixed(j.at("fixed").get<double>());
  }
  if (j.is_object() && j.contains("power")) {
    const auto& p = j.at("power");
    return EpsRule::Power(p.at("c").get<double>(), p.at("alpha").get<double>());
  }
  throw InvalidArgument("config: eps_rule must be a number, {\"fixed\"} or "
                        "{\"power\": {\"c\", \"alpha\"}}");
}

}  // namespace

std::string to_string(Check check) {
  switch (check) {
    case Check::kClt: return "clt";
    case Check::kMean: return "mean";
    case Check::kEigvecAlign: return "eigvec_align";
    case Check::kEigvecFlac: return "eigvec_flac";
    case Check::kNormBound: return "norm_bound";
    case Check::kResolventIdentity: return "resolvent_identity";
  }
  return "unknown";
}

Check check_from_string(const std::string& name) {
  for (Check c : kAllChecks) {
    if (to_string(c) == name) return c;
  }
  throw InvalidArgument("unknown check '" + name + "'");
}

std::vector<Check> parse_checks(const std::string& list) {
  std::vector<Check> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t end = std::min(list.find(',', start), list.size());
    const std::string name = list.substr(start, end - start);
    if (!name.empty()) out.push_back(check_from_string(name));
    start = end + 1;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

EpsRule EpsRule::Fixed(double eps) {
  EpsRule r;
  r.kind = Kind::kFixed;
  r.value = eps;
  return r;
}

EpsRule EpsRule::Power(double c, double alpha) {
  EpsRule r;
  r.kind = Kind::kPower;
  r.c = c;
  r.alpha = alpha;
  return r;
}

double EpsRule::at(std::size_t N) const {
  if (kind == Kind::kFixed) return value;
  return c * std::pow(static_cast<double>(N), -alpha);
}

bool ExperimentConfig::has(Check check) const {
  return std::find(checks.begin(), checks.end(), check) != checks.end();
}

double ExperimentConfig::eps_infty_value() const {
  if (eps_infty) return *eps_infty;
  if (eps_rule.decays()) return 0.0;
  return eps_rule.kind == EpsRule::Kind::kFixed ? eps_rule.value : eps_rule.c;
}

void ExperimentConfig::validate() const {
  if (!kernel) throw InvalidArgument("config: missing kernel");
  if (N_list.empty()) throw InvalidArgument("config: N_list is empty");
  if (replicates < 2) throw InvalidArgument("config: replicates must be >= 2");
  if (eps_rule.kind == EpsRule::Kind::kPower) {
    if (!(eps_rule.c > 0.0)) throw InvalidArgument("config: c must be > 0");
    if (!(eps_rule.alpha >= 0.0 && eps_rule.alpha < 1.0)) {
      throw InvalidArgument("config: alpha must lie in [0, 1)");
    }
    if (has(Check::kEigvecFlac) && !(eps_rule.alpha < 2.0 / 3.0)) {
      throw InvalidArgument("config: eigvec_flac needs alpha < 2/3");
    }
  }
  if (eps_infty && !(*eps_infty >= 0.0)) {
    throw InvalidArgument("config: eps_infty must be >= 0");
  }
  for (std::size_t N : N_list) {
    if (N < 32) throw InvalidArgument("config: every N must be >= 32");
    if (N > std::numeric_limits<std::uint32_t>::max()) {
      throw InvalidArgument("config: N too large");
    }
    const double eps = eps_rule.at(N);
    if (!(eps > 0.0)) throw InvalidArgument("config: epsilon must be > 0");
    if (eps * kernel->sup_bound() > 1.0 + 1e-12) {
      throw InvalidArgument("config: epsilon * M > 1 at N = " +
                            std::to_string(N));
    }
  }
}

ExperimentConfig config_from_json(const json& doc,
                                  const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  try {
    if (doc.contains("kernel")) {
      c.kernel = std::make_shared<const KernelSpec>(
          kernel_from_json(doc.at("kernel")));
    } else if (doc.contains("kernel_path")) {
      std::filesystem::path p = doc.at("kernel_path").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      c.kernel = std::make_shared<const KernelSpec>(load_kernel(p));
    } else {
      throw InvalidArgument("config: needs 'kernel' or 'kernel_path'");
    }
    c.N_list = doc.at("N_list").get<std::vector<std::size_t>>();
    c.eps_rule = EpsRuleFromJson(doc.at("eps_rule"));
    c.replicates = doc.at("replicates").get<std::size_t>();
    c.root_seed = doc.at("root_seed").get<std::uint64_t>();
    for (const auto& name : doc.value("checks", json::array())) {
      c.checks.push_back(check_from_string(name.get<std::string>()));
    }
    std::sort(c.checks.begin(), c.checks.end());
    c.checks.erase(std::unique(c.checks.begin(), c.checks.end()),
                   c.checks.end());
    if (doc.contains("eps_infty")) {
      c.eps_infty = doc.at("eps_infty").get<double>();
    }
    c.threads = doc.value("threads", 0u);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidArgument("config " + path.string() + ": " + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

json config_to_json(const ExperimentConfig& config) {
  json checks = json::array();
  for (Check c : config.checks) checks.push_back(to_string(c));
  json out{{"kernel", kernel_to_json(*config.kernel)},
           {"kernel_id", config.kernel->id_hex()},
           {"N_list", config.N_list},
           {"eps_rule", EpsRuleToJson(config.eps_rule)},
           {"replicates", config.replicates},
           {"root_seed", config.root_seed},
           {"checks", checks},
           {"eps_infty", config.eps_infty_value()}};
  return out;
}

std::string to_string(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::kPass: return "pass";
    case VerdictStatus::kFail: return "fail";
    case VerdictStatus::kSkipped: return "skipped";
  }
  return "unknown";
}

json verdict_to_json(const Verdict& v) {
  json out{{"check", v.check},
           {"status", to_string(v.status)},
           {"thresholds", v.thresholds},
           {"stats", v.stats}};
  if (!v.note.empty()) out["note"] = v.note;
  return out;
}

Verdict clt_check(std::span<const ReplicateRecord> records,
                  const PredictionSet& predictions,
                  const CltOptions& options) {
  RequireRecords(records, "clt_check");
  Verdict v;
  v.check = "clt";
  v.thresholds = {{"diag_rel_tol", options.diag_rel_tol},
                  {"offdiag_abs_tol", options.offdiag_abs_tol},
                  {"z_max", options.z_max}};
  const auto& iso = predictions.isolated;
  if (iso.empty()) {
    v.note = "no isolated eigenvalue";
    return v;
  }
  const auto n = static_cast<Eigen::Index>(iso.size());
  const Eigen::MatrixXd target =
      options.target ? *options.target : predictions.sigma_G;
  if (target.rows() != n || target.cols() != n) {
    throw InvalidArgument("clt_check: target must be |I| x |I|");
  }
  Eigen::MatrixXd X(static_cast<Eigen::Index>(records.size()), n);
  const double scale = 1.0 / std::sqrt(predictions.epsilon);
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (Eigen::Index t = 0; t < n; ++t) {
      X(static_cast<Eigen::Index>(r), t) =
          scale * records[r].lambdas.at(iso[static_cast<std::size_t>(t)]);
    }
  }
  const Eigen::MatrixXd cov = stats::covariance_matrix(X);
  bool pass = true;
  json entries = json::array();
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index t = s; t < n; ++t) {
      bool ok;
      if (s == t) {
        ok = target(s, s) > 0.0 &&
             std::abs(cov(s, s) / target(s, s) - 1.0) <= options.diag_rel_tol;
      } else {
        ok = std::abs(cov(s, t) - target(s, t)) <= options.offdiag_abs_tol;
      }
      pass = pass && ok;
      entries.push_back({{"i", iso[static_cast<std::size_t>(s)] + 1},
                         {"j", iso[static_cast<std::size_t>(t)] + 1},
                         {"empirical", cov(s, t)},
                         {"target", target(s, t)},
                         {"pass", ok}});
    }
  }
  json moments = json::array();
  for (Eigen::Index t = 0; t < n; ++t) {
    const std::vector<double> col(X.col(t).data(), X.col(t).data() + X.rows());
    const auto z = stats::moment_z(col);
    const bool ok = MomentOk(z, options.z_max);
    pass = pass && ok;
    json m = MomentJson(z);
    m["i"] = iso[static_cast<std::size_t>(t)] + 1;
    m["pass"] = ok;
    moments.push_back(m);
  }
  v.stats = {{"replicates", records.size()},
             {"covariance", entries},
             {"moments", moments}};
  v.status = pass ? VerdictStatus::kPass : VerdictStatus::kFail;
  return v;
}

Verdict mean_check(std::span<const ReplicateRecord> records,
                   const PredictionSet& predictions,
                   const MeanOptions& options) {
  RequireRecords(records, "mean_check");
  Verdict v;
  v.check = "mean";
  const double bound =
      options.c_mean * (std::sqrt(predictions.epsilon) + 1.0 / NEps(predictions));
  v.thresholds = {{"c_mean", options.c_mean}, {"bound_before_se", bound}};
  bool pass = true;
  json entries = json::array();
  auto add = [&](std::size_t i, double target, const char* against) {
    const auto col = Column(records, i);
    const double m = stats::mean(col);
    const double se = stats::standard_error(col);
    const double gap = std::abs(m - target);
    const bool ok = gap <= bound + 3.0 * se;
    pass = pass && ok;
    entries.push_back({{"i", i + 1},
                       {"against", against},
                       {"mean", m},
                       {"se", se},
                       {"target", target},
                       {"gap", gap},
                       {"allowed", bound + 3.0 * se},
                       {"pass", ok}});
  };
  for (std::size_t i : predictions.isolated) {
    const auto& eig = predictions.b.at(i).eigenvalues;
    add(i, eig(static_cast<Eigen::Index>(i)), "lambda_B");
  }
  if (predictions.rank_one_mean) {
    add(0, *predictions.rank_one_mean, "rank_one_mean");
  }
  if (entries.empty()) v.note = "no isolated eigenvalue";
  v.stats = {{"replicates", records.size()}, {"entries", entries}};
  v.status = entries.empty() ? VerdictStatus::kSkipped
                             : (pass ? VerdictStatus::kPass : VerdictStatus::kFail);
  return v;
}

Verdict eigvec_align_check(std::span<const ReplicateRecord> records,
                           const PredictionSet& predictions,
                           const EigvecOptions& options) {
  RequireRecords(records, "eigvec_align_check");
  Verdict v;
  v.check = "eigvec_align";
  v.thresholds = {{"quantile", options.quantile},
                  {"threshold", options.tight_threshold}};
  const double n_eps = NEps(predictions);
  bool pass = true;
  json entries = json::array();
  for (std::size_t t = 0; t < predictions.isolated.size(); ++t) {
    const std::size_t i = predictions.isolated[t];
    for (std::size_t j = 0; j < predictions.thetas.size(); ++j) {
      std::vector<double> x;
      for (const auto& r : records) {
        const double o = r.overlaps(static_cast<Eigen::Index>(t),
                                    static_cast<Eigen::Index>(j));
        x.push_back(j == i ? n_eps * (1.0 - o) : n_eps * std::abs(o));
      }
      const double q = stats::quantile(x, options.quantile);
      const bool ok = q <= options.tight_threshold;
      pass = pass && ok;
      entries.push_back({{"i", i + 1},
                         {"j", j + 1},
                         {"statistic", j == i ? "neps_one_minus_overlap"
                                              : "neps_abs_overlap"},
                         {"quantile_value", q},
                         {"quantiles", Quantiles(x)},
                         {"pass", ok}});
    }
  }
  v.stats = {{"replicates", records.size()}, {"entries", entries}};
  v.status = entries.empty() ? VerdictStatus::kSkipped
                             : (pass ? VerdictStatus::kPass : VerdictStatus::kFail);
  if (entries.empty()) v.note = "no isolated eigenvalue";
  return v;
}

Verdict eigvec_flac_check(std::span<const ReplicateRecord> records,
                          const PredictionSet& predictions,
                          const EigvecOptions& options) {
  RequireRecords(records, "eigvec_flac_check");
  Verdict v;
  v.check = "eigvec_flac";
  v.thresholds = {{"min_correlation", options.min_correlation},
                  {"z_max", options.z_max},
                  {"var_rel_tol", options.var_rel_tol}};
  const auto pairs = CrossPairs(predictions);
  if (predictions.thetas.size() < 2 || pairs.empty()) {
    v.note = "needs k >= 2 and a tracked pair with distinct thetas";
    return v;
  }
  const double n_eps = NEps(predictions);
  bool pass = true;
  json entries = json::array();
  for (const auto& c : pairs) {
    const auto ti = static_cast<Eigen::Index>(c.t);
    const auto ii = static_cast<Eigen::Index>(c.i);
    const auto jj = static_cast<Eigen::Index>(c.j);
    std::vector<double> measured, predicted;
    for (const auto& r : records) {
      measured.push_back(r.overlaps(ti, jj));
      predicted.push_back(overlap_law(
          Theta(predictions, c.i), Theta(predictions, c.j), n_eps,
          predictions.expected_W2(ii, jj), r.lambdas.at(c.i),
          r.bilinear(ii, jj)));
    }
    const double corr = stats::pearson(measured, predicted);
    const auto z = ZValues(records, predictions, c);
    const auto mz = stats::moment_z(z);
    const double var = stats::variance(z);
    const double var_pred = PredictedZVariance(records, predictions, c);
    const bool corr_ok = corr >= options.min_correlation;
    const bool z_ok = MomentOk(mz, options.z_max);
    const bool var_ok =
        var_pred > 0.0 && std::abs(var / var_pred - 1.0) <= options.var_rel_tol;
    const bool ok = corr_ok && z_ok && var_ok;
    pass = pass && ok;
    entries.push_back({{"i", c.i + 1},
                       {"j", c.j + 1},
                       {"correlation", corr},
                       {"correlation_pass", corr_ok},
                       {"Z_moments", MomentJson(mz)},
                       {"Z_moments_pass", z_ok},
                       {"Z_mean", stats::mean(z)},
                       {"Z_var", var},
                       {"Z_var_predicted", var_pred},
                       {"Z_var_pass", var_ok},
                       {"pass", ok}});
  }
  v.stats = {{"replicates", records.size()}, {"entries", entries}};
  v.status = pass ? VerdictStatus::kPass : VerdictStatus::kFail;
  return v;
}

std::vector<Verdict> eigvec_checks(std::span<const ReplicateRecord> records,
                                   const PredictionSet& predictions,
                                   const EigvecOptions& options) {
  return {eigvec_align_check(records, predictions, options),
          eigvec_flac_check(records, predictions, options)};
}

Verdict tail_checks(std::span<const ReplicateRecord> records,
                    const PredictionSet& predictions,
                    const TailOptions& options) {
  RequireRecords(records, "tail_checks");
  Verdict v;
  v.check = "norm_bound";
  const double envelope = NormEnvelope(predictions, options);
  v.thresholds = {{"constant", options.constant},
                  {"log_exponent", options.log_exponent},
                  {"envelope", envelope},
                  {"max_violation_fraction", options.max_violation_fraction},
                  {"var_ratio", {options.var_ratio_lo, options.var_ratio_hi}},
                  {"zero_var_tol", options.zero_var_tol}};
  bool pass = true;
  std::size_t measured = 0, violations = 0;
  double max_norm = 0.0;
  for (const auto& r : records) {
    if (!std::isfinite(r.norm_W)) continue;
    ++measured;
    max_norm = std::max(max_norm, r.norm_W);
    if (r.norm_W > envelope) ++violations;
  }
  json norm{{"measured", measured}, {"violations", violations}};
  if (measured > 0) {
    const double fraction =
        static_cast<double>(violations) / static_cast<double>(measured);
    const bool ok = fraction <= options.max_violation_fraction;
    pass = pass && ok;
    norm["fraction"] = fraction;
    norm["max_norm_W"] = max_norm;
    norm["pass"] = ok;
  } else {
    v.note = "norm_W not measured; envelope part skipped";
  }
  json vars = json::array();
  const auto k = predictions.bilinear_var.rows();
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      std::vector<double> x;
      for (const auto& r : records) x.push_back(r.bilinear(i, j));
      const double emp = stats::variance(x);
      const double exact = predictions.bilinear_var(i, j);
      json entry{{"i", i + 1},
                 {"j", j + 1},
                 {"empirical_over_eps", emp / predictions.epsilon},
                 {"exact_over_eps", exact / predictions.epsilon}};
      bool ok;
      if (exact > 0.0) {
        const double ratio = emp / exact;
        entry["ratio"] = ratio;
        ok = ratio >= options.var_ratio_lo && ratio <= options.var_ratio_hi;
      } else {
        ok = emp <= options.zero_var_tol * predictions.epsilon;
      }
      entry["pass"] = ok;
      pass = pass && ok;
      vars.push_back(entry);
    }
  }
  v.stats = {{"replicates", records.size()},
             {"norm_W", norm},
             {"bilinear_variance", vars}};
  v.status = pass ? VerdictStatus::kPass : VerdictStatus::kFail;
  return v;
}

Verdict resolvent_check(std::span<const ReplicateRecord> records,
                        const ResolventOptions& options) {
  Verdict v;
  v.check = "resolvent_identity";
  v.thresholds = {{"tol", options.tol}};
  std::size_t applicable = 0, measured = 0, violations = 0;
  double worst = 0.0;
  for (const auto& r : records) {
    if (!std::isfinite(r.norm_W)) continue;
    ++measured;
    if (!r.resolvent_applicable) continue;
    ++applicable;
    worst = std::max(worst, r.resolvent_residual);
    if (!(r.resolvent_residual <= options.tol)) ++violations;
  }
  v.stats = {{"measured", measured},
             {"applicable", applicable},
             {"norm_W_ge_lambda1", measured - applicable},
             {"violations", violations},
             {"max_residual", worst}};
  if (applicable == 0) {
    v.note = "no replicate with ||W|| < lambda_1(A)";
    return v;
  }
  v.status = violations == 0 ? VerdictStatus::kPass : VerdictStatus::kFail;
  return v;
}

ReplicateRecord run_replicate(const KernelSpec& spec, std::size_t N,
                              double epsilon, std::size_t replicate,
                              std::uint64_t seed, bool want_norm,
                              bool want_resolvent) {
  ReplicateRecord rec;
  rec.replicate = replicate;
  rec.seed = seed;
  const std::size_t k = spec.rank();
  const auto iso = isolated_indices(spec.thetas());
  try {
    const GraphSample g = sample_graph(spec, N, epsilon, seed);
    EigenOptions options;
    options.extra_values = k < N ? 1 : 0;
    const EigenResult eig = top_eigenpairs(as_operator(g), k, options);
    for (const auto& p : eig.pairs) {
      rec.lambdas.push_back(p.value);
      rec.residuals.push_back(p.residual);
    }
    for (double x : eig.extra_values) rec.lambdas.push_back(x);

    const CenteredAdjacency w(g, spec);
    const Eigen::MatrixXd& e = w.e();
    const auto kk = static_cast<Eigen::Index>(k);
    rec.overlaps.resize(static_cast<Eigen::Index>(iso.size()), kk);
    for (std::size_t t = 0; t < iso.size(); ++t) {
      const Eigen::VectorXd& vec = eig.pairs[iso[t]].vector;
      const Eigen::VectorXd proj = e.transpose() * vec;
      const double sign =
          proj(static_cast<Eigen::Index>(iso[t])) < 0.0 ? -1.0 : 1.0;
      rec.overlaps.row(static_cast<Eigen::Index>(t)) = sign * proj.transpose();
    }
    Eigen::MatrixXd We(static_cast<Eigen::Index>(N), kk);
    for (Eigen::Index j = 0; j < kk; ++j) We.col(j) = w.apply(Eigen::VectorXd(e.col(j)));
    const Eigen::MatrixXd bl = e.transpose() * We;
    rec.bilinear = 0.5 * (bl + bl.transpose());

    if (want_norm || want_resolvent) rec.norm_W = operator_norm_W(w);
    if (want_resolvent) {
      const double mu = rec.lambdas.front();
      rec.resolvent_applicable = rec.norm_W < mu;
      if (rec.resolvent_applicable) {
        const Eigen::MatrixXd V = resolvent_V(w, mu, rec.norm_W);
        rec.resolvent_residual =
            std::abs(descending_eigenvalues(V)(0) - mu) / mu;
      }
    }
  } catch (const std::exception& ex) {
    rec.ok = false;
    rec.error = ex.what();
  }
  return rec;
}

bool ExperimentReport::passed() const {
  for (const auto& run : runs) {
    for (const auto& v : run.verdicts) {
      if (v.status == VerdictStatus::kFail) return false;
    }
  }
  return true;
}

std::vector<ReplicateRecord> successful(const RunResult& run) {
  std::vector<ReplicateRecord> out;
  for (const auto& r : run.records) {
    if (r.ok) out.push_back(r);
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const KernelSpec& spec = *config.kernel;
  ExperimentReport report;
  report.config = config_to_json(config);
  const bool want_norm = config.has(Check::kNormBound);
  const bool want_resolvent = config.has(Check::kResolventIdentity);
  unsigned threads = config.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, config.replicates));

  for (std::size_t N : config.N_list) {
    RunResult run;
    run.N = N;
    run.epsilon = config.eps_rule.at(N);
    run.predictions = make_predictions(spec, N, run.epsilon,
                                       config.eps_infty_value());
    run.records.resize(config.replicates);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t r = next++; r < config.replicates; r = next++) {
        run.records[r] =
            run_replicate(spec, N, run.epsilon, r,
                          seed_derive(config.root_seed, N, r), want_norm,
                          want_resolvent);
      }
    };
    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    const auto ok = successful(run);
    run.failed = run.records.size() - ok.size();
    Verdict budget;
    budget.check = "replicates";
    budget.thresholds = {{"max_failed_fraction", 0.01}};
    budget.stats = {{"total", run.records.size()}, {"failed", run.failed}};
    budget.status = static_cast<double>(run.failed) <=
                            0.01 * static_cast<double>(run.records.size())
                        ? VerdictStatus::kPass
                        : VerdictStatus::kFail;
    run.verdicts.push_back(budget);

    for (Check check : config.checks) {
      try {
        switch (check) {
          case Check::kClt:
            run.verdicts.push_back(clt_check(ok, run.predictions));
            break;
          case Check::kMean:
            run.verdicts.push_back(mean_check(ok, run.predictions));
            break;
          case Check::kEigvecAlign:
            run.verdicts.push_back(eigvec_align_check(ok, run.predictions));
            break;
          case Check::kEigvecFlac:
            run.verdicts.push_back(eigvec_flac_check(ok, run.predictions));
            break;
          case Check::kNormBound:
            run.verdicts.push_back(tail_checks(ok, run.predictions));
            break;
          case Check::kResolventIdentity:
            run.verdicts.push_back(resolvent_check(ok));
            break;
        }
      } catch (const InsufficientData& ex) {
        Verdict skipped;
        skipped.check = to_string(check);
        skipped.note = ex.what();
        run.verdicts.push_back(skipped);
      }
    }
    run.summary = Summarize(ok, run.predictions);
    report.runs.push_back(std::move(run));
  }
  return report;
}

json record_to_json(const ReplicateRecord& r, const PredictionSet& p) {
  json out{{"replicate", r.replicate}, {"seed", r.seed}, {"ok", r.ok}};
  if (!r.ok) {
    out["error"] = r.error;
    return out;
  }
  out["lambdas"] = r.lambdas;
  out["residuals"] = r.residuals;
  out["norm_W"] = r.norm_W;
  json overlaps = json::array();
  for (std::size_t t = 0; t < p.isolated.size(); ++t) {
    overlaps.push_back(
        {{"i", p.isolated[t] + 1},
         {"values", to_std(r.overlaps.row(static_cast<Eigen::Index>(t)))}});
  }
  out["overlaps"] = overlaps;
  out["bilinear"] = matrix_to_json(r.bilinear);
  out["resolvent_residual"] = r.resolvent_residual;
  out["resolvent_applicable"] = r.resolvent_applicable;
  return out;
}

json report_to_json(const ExperimentReport& report) {
  json runs = json::array();
  for (const auto& run : report.runs) {
    json verdicts = json::array();
    for (const auto& v : run.verdicts) verdicts.push_back(verdict_to_json(v));
    json records = json::array();
    for (const auto& r : run.records) {
      records.push_back(record_to_json(r, run.predictions));
    }
    runs.push_back({{"N", run.N},
                    {"epsilon", run.epsilon},
                    {"predictions", predictions_to_json(run.predictions)},
                    {"failed_replicates", run.failed},
                    {"summary", run.summary},
                    {"verdicts", verdicts},
                    {"records", records}});
  }
  return {{"format", "ierg-report"},
          {"version", 1},
          {"passed", report.passed()},
          {"config", report.config},
          {"runs", runs}};
}

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
  if (report.runs.empty()) return;
  const auto& first = report.runs.front().predictions;
  const std::size_t k = first.thetas.size();
  const auto& iso = first.isolated;
  out << "N,epsilon,replicate,seed,ok";
  for (std::size_t i = 0; i <= k; ++i) out << ",lambda_" << i + 1;
  for (std::size_t i = 0; i < k; ++i) out << ",residual_" << i + 1;
  out << ",norm_W";
  for (std::size_t i : iso) {
    for (std::size_t j = 0; j < k; ++j) {
      out << ",overlap_v" << i + 1 << "_e" << j + 1;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) out << ",bilinear_" << i + 1 << "_" << j + 1;
  }
  out << ",resolvent_residual,resolvent_applicable\n";
  for (const auto& run : report.runs) {
    for (const auto& r : run.records) {
      out << run.N << ',' << FormatDouble(run.epsilon) << ',' << r.replicate
          << ',' << r.seed << ',' << (r.ok ? 1 : 0);
      auto cell = [&](auto&& get, std::size_t count) {
        for (std::size_t c = 0; c < count; ++c) {
          out << ',' << (r.ok ? FormatDouble(get(c)) : "");
        }
      };
      cell([&](std::size_t i) { return i < r.lambdas.size() ? r.lambdas[i] : kNaN; },
           k + 1);
      cell([&](std::size_t i) { return r.residuals.at(i); }, k);
      cell([&](std::size_t) { return r.norm_W; }, 1);
      cell([&](std::size_t c) {
             return r.overlaps(static_cast<Eigen::Index>(c / k),
                               static_cast<Eigen::Index>(c % k));
           },
           iso.size() * k);
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
          out << ',' << (r.ok ? FormatDouble(r.bilinear(
                                    static_cast<Eigen::Index>(i),
                                    static_cast<Eigen::Index>(j)))
                              : "");
        }
      }
      out << ',' << (r.ok ? FormatDouble(r.resolvent_residual) : "") << ','
          << (r.resolvent_applicable ? 1 : 0) << '\n';
    }
  }
}

void save_report(const ExperimentReport& report,
                 const std::filesystem::path& json_path) {
  std::filesystem::path csv_path = json_path;
  csv_path.replace_extension(".csv");
  if (json_path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(json_path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + json_path.parent_path().string());
  }
  std::ofstream js(json_path);
  if (!js) throw IoError("cannot write " + json_path.string());
  js << report_to_json(report).dump(2) << '\n';
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write " + csv_path.string());
  write_report_csv(report, csv);
  if (!js || !csv) throw IoError("write failed for " + json_path.string());
}

}  // namespace ierg

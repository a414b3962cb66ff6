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

#include "ierg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "ierg/error.hpp"
#include "ierg/experiments.hpp"
#include "ierg/graph_io.hpp"
#include "ierg/json_util.hpp"
#include "ierg/kernel_io.hpp"
#include "ierg/sampler.hpp"
#include "ierg/spectra.hpp"
#include "ierg/stats.hpp"
#include "ierg/theory.hpp"

namespace ierg {
namespace {

using nlohmann::json;

// Writes to path, or to out when path is empty.
void Emit(const json& doc, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << doc.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << doc.dump(2) << '\n';
  if (!f) throw IoError("write failed for " + path);
}

json LoadJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

std::string Fmt(double x, int precision = 6) {
  if (!std::isfinite(x)) return "nan";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", precision, x);
  return buf;
}

double Num(const json& j) {
  return j.is_number() ? j.get<double>() : std::nan("");
}

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

Histogram Bin(const std::vector<double>& x, double half_width,
              std::size_t bins) {
  Histogram h;
  h.counts.assign(bins, 0);
  for (std::size_t b = 0; b <= bins; ++b) {
    h.edges.push_back(-half_width + 2.0 * half_width * static_cast<double>(b) /
                                        static_cast<double>(bins));
  }
  for (double v : x) {
    if (!(std::abs(v) <= half_width)) continue;
    auto b = static_cast<std::size_t>((v + half_width) / (2.0 * half_width) *
                                      static_cast<double>(bins));
    h.counts[std::min(b, bins - 1)]++;
  }
  return h;
}

void WriteHistogram(const std::filesystem::path& path,
                    const std::vector<double>& x, double variance,
                    std::size_t bins) {
  double half = 4.0 * std::sqrt(std::max(variance, 0.0));
  for (double v : x) half = std::max(half, std::abs(v));
  if (!(half > 0.0)) half = 1.0;
  const Histogram h = Bin(x, half, bins);
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << "bin_left,bin_right,bin_center,count,empirical_density,"
       "predicted_density\n";
  const double width = h.edges[1] - h.edges[0];
  for (std::size_t b = 0; b < bins; ++b) {
    const double center = 0.5 * (h.edges[b] + h.edges[b + 1]);
    const double density = static_cast<double>(h.counts[b]) /
                           (static_cast<double>(x.size()) * width);
    f << Fmt(h.edges[b], 10) << ',' << Fmt(h.edges[b + 1], 10) << ','
      << Fmt(center, 10) << ',' << h.counts[b] << ',' << Fmt(density, 10)
      << ',' << Fmt(stats::normal_pdf(center, variance), 10) << '\n';
  }
  if (!f) throw IoError("write failed for " + path.string());
}

std::vector<std::size_t> Isolated(const json& predictions) {
  std::vector<std::size_t> out;
  for (const auto& i : predictions.at("isolated")) {
    out.push_back(i.get<std::size_t>() - 1);
  }
  return out;
}

std::vector<const json*> OkRecords(const json& run) {
  std::vector<const json*> out;
  for (const auto& r : run.at("records")) {
    if (r.value("ok", false)) out.push_back(&r);
  }
  return out;
}

int CmdValidate(const std::string& kernel_path, const std::string& out_path,
                std::ostream& out) {
  const KernelSpec spec = load_kernel(kernel_path);
  const ValidationReport report = validate(spec);
  Emit(validation_to_json(spec, report), out_path, out);
  return report.ok() ? kExitOk : kExitFailed;
}

int CmdSample(const std::string& kernel_path, std::size_t N, double eps,
              std::uint64_t seed, const std::string& out_path,
              std::ostream& out) {
  if (out_path.empty()) throw InvalidArgument("sample: --out is required");
  const KernelSpec spec = load_kernel(kernel_path);
  const GraphSample g = sample_graph(spec, N, eps, seed);
  save_graph(g, out_path);
  out << "wrote " << out_path << ": N=" << g.N() << " edges=" << g.edge_count()
      << '\n';
  return kExitOk;
}

int CmdSpectrum(const std::string& sample_path, const std::string& kernel_path,
                std::size_t top, const std::string& out_path,
                std::ostream& out) {
  const GraphSample g = load_graph(sample_path);
  std::optional<KernelSpec> spec;
  if (!kernel_path.empty()) spec.emplace(load_kernel(kernel_path));
  if (top == 0) top = spec ? spec->rank() + 1 : 4;
  top = std::min(top, g.N());
  EigenResult eig = top_eigenpairs(as_operator(g), top, EigenOptions{});
  Eigen::MatrixXd e;
  json doc{{"N", g.N()}, {"epsilon", g.epsilon()}, {"seed", g.seed()}};
  if (spec) {
    const CenteredAdjacency w(g, *spec);
    e = w.e();
    for (std::size_t i = 0; i < eig.pairs.size() && i < spec->rank(); ++i) {
      align_sign(eig.pairs[i], e.col(static_cast<Eigen::Index>(i)));
    }
    doc["norm_W"] = operator_norm_W(w);
  } else {
    e.resize(static_cast<Eigen::Index>(g.N()), 0);
  }
  doc["eigenpairs"] = eigenpairs_to_json(eig.pairs, e);
  Emit(doc, out_path, out);
  return kExitOk;
}

int CmdPredict(const std::string& kernel_path, std::size_t N, double eps,
               std::optional<double> eps_infty, const std::string& out_path,
               std::ostream& out) {
  const KernelSpec spec = load_kernel(kernel_path);
  const PredictionSet p =
      make_predictions(spec, N, eps, eps_infty.value_or(eps));
  Emit(predictions_to_json(p), out_path, out);
  return kExitOk;
}

int CmdRun(const std::string& config_path, const std::string& out_path,
           std::optional<std::size_t> replicates,
           std::optional<std::string> checks, std::optional<std::uint64_t> seed,
           std::optional<unsigned> threads, std::ostream& out) {
  json doc = LoadJson(config_path);
  if (replicates) doc["replicates"] = *replicates;
  if (seed) doc["root_seed"] = *seed;
  if (threads) doc["threads"] = *threads;
  if (checks) {
    json names = json::array();
    for (Check c : parse_checks(*checks)) names.push_back(to_string(c));
    doc["checks"] = names;
  }
  const ExperimentConfig config =
      config_from_json(doc, std::filesystem::path(config_path).parent_path());
  const ExperimentReport report = run_experiment(config);
  const std::filesystem::path target = out_path.empty() ? "report.json" : out_path;
  save_report(report, target);
  out << render_report_text(report_to_json(report));
  return report.passed() ? kExitOk : kExitFailed;
}

int CmdReport(const std::string& report_path, const std::string& out_dir,
              std::ostream& out) {
  const json report = LoadJson(report_path);
  if (report.value("format", "") != "ierg-report") {
    throw InvalidArgument(report_path + " is not an experiment report");
  }
  out << render_report_text(report);
  const std::filesystem::path dir =
      out_dir.empty() ? std::filesystem::path(report_path).parent_path()
                      : std::filesystem::path(out_dir);
  if (!dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string());
  }
  for (const auto& p : write_histograms(report, dir)) {
    out << "wrote " << p.string() << '\n';
  }
  return report.value("passed", false) ? kExitOk : kExitFailed;
}

}  // namespace

std::string render_report_text(const json& report) {
  std::ostringstream s;
  const json& cfg = report.at("config");
  s << "experiment: kernel " << cfg.value("kernel_id", "?") << ", R="
    << cfg.at("replicates") << ", root_seed=" << cfg.at("root_seed") << '\n';
  for (const auto& run : report.at("runs")) {
    const auto& sum = run.at("summary");
    s << "\nN=" << run.at("N") << " eps=" << Fmt(Num(run.at("epsilon")))
      << "  ok replicates=" << sum.value("replicates_ok", 0)
      << " failed=" << run.value("failed_replicates", 0) << '\n';
    if (sum.contains("lambda_mean")) {
      s << "  mean lambda:";
      for (const auto& v : sum.at("lambda_mean")) s << ' ' << Fmt(Num(v));
      s << '\n';
    }
    const auto& b = run.at("predictions").at("b_matrices");
    if (!b.empty()) {
      s << "  lambda_i(B):";
      for (const auto& entry : b) {
        const auto i = entry.at("i").get<std::size_t>();
        s << ' ' << Fmt(Num(entry.at("lambda_B").at(i - 1)));
      }
      s << '\n';
    }
    for (const auto& v : run.at("verdicts")) {
      s << "  [" << v.at("status").get<std::string>() << "] "
        << v.at("check").get<std::string>();
      if (v.contains("note")) s << " (" << v.at("note").get<std::string>() << ')';
      s << '\n';
    }
  }
  s << "\noverall: " << (report.value("passed", false) ? "PASS" : "FAIL")
    << '\n';
  return s.str();
}

std::vector<std::filesystem::path> write_histograms(
    const json& report, const std::filesystem::path& dir, std::size_t bins) {
  std::vector<std::filesystem::path> written;
  for (const auto& run : report.at("runs")) {
    const auto N = run.at("N").get<std::size_t>();
    const double eps = run.at("epsilon").get<double>();
    const auto& pred = run.at("predictions");
    const auto iso = Isolated(pred);
    const auto records = OkRecords(run);
    if (records.size() < 2) continue;
    const Eigen::MatrixXd sigma = matrix_from_json(pred.at("sigma_G"));
    for (std::size_t t = 0; t < iso.size(); ++t) {
      std::vector<double> x;
      for (const json* r : records) x.push_back(r->at("lambdas").at(iso[t]).get<double>());
      const double m = stats::mean(x);
      for (double& v : x) v = (v - m) / std::sqrt(eps);
      const auto path = dir / ("hist_N" + std::to_string(N) + "_lambda" +
                               std::to_string(iso[t] + 1) + ".csv");
      WriteHistogram(path, x, sigma(static_cast<Eigen::Index>(t),
                                    static_cast<Eigen::Index>(t)),
                     bins);
      written.push_back(path);
    }
    for (const auto& cross : run.at("summary").value("cross_overlaps", json::array())) {
      const auto i = cross.at("i").get<std::size_t>() - 1;
      const auto j = cross.at("j").get<std::size_t>() - 1;
      const double z = cross.at("z_shift").get<double>();
      const double var = Num(cross.value("Z_var_predicted", json()));
      const auto t = static_cast<std::size_t>(
          std::find(iso.begin(), iso.end(), i) - iso.begin());
      std::vector<double> x;
      for (const json* r : records) {
        const double o = r->at("overlaps").at(t).at("values").at(j).get<double>();
        x.push_back(static_cast<double>(N) * std::sqrt(eps) * (o - z));
      }
      const auto path = dir / ("hist_N" + std::to_string(N) + "_Z" +
                               std::to_string(i + 1) + "_" +
                               std::to_string(j + 1) + ".csv");
      WriteHistogram(path, x, var, bins);
      written.push_back(path);
    }
  }
  return written;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Inhomogeneous random graph spectra: sampling, predictions "
               "and Monte Carlo checks"};
  app.require_subcommand(1);
  std::string kernel, out_path, input;
  std::size_t N = 0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::size_t top = 0;
  std::optional<double> eps_infty;
  std::optional<std::size_t> replicates;
  std::optional<std::string> checks;
  std::optional<std::uint64_t> run_seed;
  std::optional<unsigned> threads;

  auto* validate_cmd = app.add_subcommand("validate-kernel", "Validate a kernel file");
  validate_cmd->add_option("kernel", input, "Kernel JSON")->required();
  validate_cmd->add_option("--out", out_path, "Output JSON (default stdout)");

  auto* sample_cmd = app.add_subcommand("sample", "Sample one graph");
  sample_cmd->add_option("--kernel", kernel, "Kernel JSON")->required();
  sample_cmd->add_option("--N", N, "Number of vertices")->required();
  sample_cmd->add_option("--eps", eps, "Sparsity epsilon")->required();
  sample_cmd->add_option("--seed", seed, "64-bit seed")->required();
  sample_cmd->add_option("--out", out_path,
                         "Output file (.txt/.edges text, else binary)")
      ->required();

  auto* spectrum_cmd = app.add_subcommand("spectrum", "Top eigenpairs of a sample");
  spectrum_cmd->add_option("sample", input, "Sample file")->required();
  spectrum_cmd->add_option("--kernel", kernel, "Kernel JSON, enables overlaps and ||W||");
  spectrum_cmd->add_option("--top", top, "Number of eigenpairs (default k+1)");
  spectrum_cmd->add_option("--out", out_path, "Output JSON (default stdout)");

  auto* predict_cmd = app.add_subcommand("predict", "Finite-N predictions");
  predict_cmd->add_option("--kernel", kernel, "Kernel JSON")->required();
  predict_cmd->add_option("--N", N, "Number of vertices")->required();
  predict_cmd->add_option("--eps", eps, "Sparsity epsilon")->required();
  predict_cmd->add_option("--eps-infty", eps_infty,
                          "Limit of epsilon for Sigma_G (default --eps)");
  predict_cmd->add_option("--out", out_path, "Output JSON (default stdout)");

  auto* run_cmd = app.add_subcommand("run", "Run an experiment config");
  run_cmd->add_option("config", input, "Experiment config JSON")->required();
  run_cmd->add_option("--out", out_path,
                      "Report JSON path; CSV written alongside "
                      "(default report.json)");
  run_cmd->add_option("--replicates", replicates, "Override replicates");
  run_cmd->add_option("--checks", checks, "Override checks, comma separated");
  run_cmd->add_option("--seed", run_seed, "Override root seed");
  run_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");

  auto* report_cmd = app.add_subcommand("report", "Summarize a report");
  report_cmd->add_option("report", input, "Report JSON")->required();
  report_cmd->add_option("--out", out_path,
                         "Directory for histogram CSVs (default: report's)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*validate_cmd) return CmdValidate(input, out_path, out);
    if (*sample_cmd) return CmdSample(kernel, N, eps, seed, out_path, out);
    if (*spectrum_cmd) return CmdSpectrum(input, kernel, top, out_path, out);
    if (*predict_cmd) return CmdPredict(kernel, N, eps, eps_infty, out_path, out);
    if (*run_cmd) {
      return CmdRun(input, out_path, replicates, checks, run_seed, threads, out);
    }
    if (*report_cmd) return CmdReport(input, out_path, out);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace ierg

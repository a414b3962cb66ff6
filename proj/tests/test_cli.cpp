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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "ierg/cli.hpp"

using namespace ierg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(IERG_SOURCE_DIR) / "data";

struct Result {
  int code;
  std::string out, err;
};

Result Run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("validate-kernel") {
  const Result r = Run({"validate-kernel", (kData / "kernels" / "two_block.json").string()});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  CHECK(j.at("thetas") == json::array({1.0, 0.5}));
  CHECK(j.at("isolated") == json::array({1, 2}));

  TempDir tmp("ierg_cli_validate");
  const json bad = {{"type", "explicit"},
                    {"thetas", {1.0}},
                    {"eigenfunctions", {{{"kind", "polynomial"}, {"coefficients", {2.0}}}}}};
  std::ofstream(tmp.path / "bad.json") << bad.dump();
  CHECK(Run({"validate-kernel", (tmp.path / "bad.json").string()}).code == kExitFailed);
}

TEST_CASE("predict") {
  const Result r = Run({"predict", "--kernel", (kData / "kernels" / "ones.json").string(),
                        "--N", "4000", "--eps", "0.02"});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  CHECK(j.at("lambda_B").at(0).get<double>() == doctest::Approx(80.98).epsilon(1e-12));
  CHECK(j.at("eps_infty").get<double>() == 0.02);
}

TEST_CASE("sample then spectrum") {
  TempDir tmp("ierg_cli_sample");
  const std::string kernel = (kData / "kernels" / "two_block.json").string();
  for (const std::string name : {"g.bin", "g.txt"}) {
    const fs::path g = tmp.path / name;
    REQUIRE(Run({"sample", "--kernel", kernel, "--N", "300", "--eps", "0.2", "--seed", "7",
                 "--out", g.string()})
                .code == kExitOk);
    const Result s = Run({"spectrum", g.string(), "--kernel", kernel});
    REQUIRE(s.code == kExitOk);
    const json j = json::parse(s.out);
    CHECK(j.at("N") == 300);
    CHECK(j.at("eigenpairs").size() == 3);
    CHECK(j.contains("norm_W"));
    const Result plain = Run({"spectrum", g.string(), "--top", "2"});
    CHECK(json::parse(plain.out).at("eigenpairs").size() == 2);
  }
  CHECK(Slurp(tmp.path / "g.bin") != Slurp(tmp.path / "g.txt"));
}

TEST_CASE("run is reproducible and report renders") {
  TempDir tmp("ierg_cli_run");
  const std::string cfg = (kData / "configs" / "smoke.json").string();
  const Result a = Run({"run", cfg, "--out", (tmp.path / "a" / "r.json").string()});
  const Result b = Run({"run", cfg, "--out", (tmp.path / "b" / "r.json").string(),
                        "--threads", "2"});
  REQUIRE(a.code == kExitOk);
  REQUIRE(b.code == kExitOk);
  CHECK(Slurp(tmp.path / "a" / "r.json") == Slurp(tmp.path / "b" / "r.json"));
  CHECK(Slurp(tmp.path / "a" / "r.csv") == Slurp(tmp.path / "b" / "r.csv"));
  const Result c = Run({"run", cfg, "--out", (tmp.path / "c.json").string(), "--seed", "1"});
  CHECK(Slurp(tmp.path / "c.json") != Slurp(tmp.path / "a" / "r.json"));

  const Result rep = Run({"report", (tmp.path / "a" / "r.json").string(), "--out",
                          (tmp.path / "h").string()});
  REQUIRE(rep.code == kExitOk);
  CHECK(rep.out.find("N=64") != std::string::npos);
  CHECK(fs::exists(tmp.path / "h" / "hist_N64_lambda1.csv"));
}

TEST_CASE("exit codes") {
  CHECK(Run({}).code == kExitUsage);
  CHECK(Run({"frobnicate"}).code == kExitUsage);
  CHECK(Run({"predict", "--kernel", "x.json"}).code == kExitUsage);
  CHECK(Run({"predict", "--kernel", (kData / "kernels" / "ones.json").string(), "--N",
             "0", "--eps", "0.1"})
            .code == kExitUsage);
  CHECK(Run({"validate-kernel", "/nonexistent/k.json"}).code == kExitIo);
  CHECK(Run({"run", "/nonexistent/c.json"}).code == kExitIo);
  CHECK(Run({"run", (kData / "configs" / "smoke.json").string(), "--checks", "nope"}).code ==
        kExitUsage);
  const Result h = Run({"--help"});
  CHECK(h.code == kExitOk);
  CHECK(h.out.find("validate-kernel") != std::string::npos);
}

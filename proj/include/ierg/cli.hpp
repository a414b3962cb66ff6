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

#ifndef IERG_CLI_HPP_
#define IERG_CLI_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace ierg {

// Exit status: 0 success, 1 failed verdicts or solver failure, 2 bad
// arguments, 3 I/O failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

// args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);
int cli_main(int argc, char** argv);

// Human-readable summary of a report document.
std::string render_report_text(const nlohmann::json& report);

// Histogram tables of the standardized fluctuations in a report, one CSV per
// (N, statistic), with the predicted normal density at each bin center:
//   lambda: eps^{-1/2}(lambda_i - mean) against N(0, sigma_G(i,i));
//   Z:      N sqrt(eps)(e_j'v - z) against N(0, predicted Var Z_ij).
// Returns the files written.
std::vector<std::filesystem::path> write_histograms(
    const nlohmann::json& report, const std::filesystem::path& dir,
    std::size_t bins = 30);

}  // namespace ierg

#endif  // IERG_CLI_HPP_

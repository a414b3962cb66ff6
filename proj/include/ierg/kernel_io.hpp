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

#ifndef IERG_KERNEL_IO_HPP_
#define IERG_KERNEL_IO_HPP_

#include <filesystem>

#include "json.hpp"

#include "ierg/kernel.hpp"

namespace ierg {

// Kernel documents (see docs/formats.md):
//   {"type": "sbm", "p": [[...], ...], "boundaries": [0, ..., 1]}
//   {"type": "rank_one", "theta": 1.0, "r": <eigenfunction>}
//   {"type": "explicit", "thetas": [...], "eigenfunctions": [...],
//    "sup_bound": 3.0, "lipschitz_constant": 1.0}      (last two optional)
// with eigenfunctions
//   {"kind": "piecewise_constant", "breakpoints": [...], "values": [...]}
//   {"kind": "polynomial", "coefficients": [c0, c1, ...]}
//   {"kind": "tabulated", "knots": [...], "values": [...]}  (knots optional)
KernelSpec kernel_from_json(const nlohmann::json& doc);
KernelSpec load_kernel(const std::filesystem::path& path);

nlohmann::json eigenfunction_to_json(const EigenfunctionDesc& r);
EigenfunctionDesc eigenfunction_from_json(const nlohmann::json& doc);

// Always the "explicit" form, so kernel_from_json(kernel_to_json(s)) has the
// same id() as s.
nlohmann::json kernel_to_json(const KernelSpec& spec);

nlohmann::json validation_to_json(const KernelSpec& spec,
                                  const ValidationReport& report);

}  // namespace ierg

#endif  // IERG_KERNEL_IO_HPP_

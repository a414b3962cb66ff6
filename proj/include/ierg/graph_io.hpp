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

#ifndef IERG_GRAPH_IO_HPP_
#define IERG_GRAPH_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "ierg/sampler.hpp"

namespace ierg {

// Binary layout, little-endian:
//   magic "IERGRAPH" | u32 version (1) | u32 reserved (0) | u64 N |
//   f64 epsilon | u64 kernel_id | u64 seed | u64 edge_count |
//   per row i: varint degree, then varint column gaps (first column - i,
//   then column - previous - 1).
void write_graph_binary(const GraphSample& g, std::ostream& out);
GraphSample read_graph_binary(std::istream& in);

// One "i j" pair per line, 1-indexed, i <= j, preceded by "# key=value"
// header lines carrying N, epsilon, kernel_id and seed.
void write_graph_text(const GraphSample& g, std::ostream& out);
// Header lines are optional when N is supplied; missing metadata defaults to
// epsilon 0, kernel_id 0, seed 0.
GraphSample read_graph_text(std::istream& in,
                            std::optional<std::size_t> N = std::nullopt);

void save_graph(const GraphSample& g, const std::filesystem::path& path);
// Detects the format from the magic bytes.
GraphSample load_graph(const std::filesystem::path& path);

}  // namespace ierg

#endif  // IERG_GRAPH_IO_HPP_

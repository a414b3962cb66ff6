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

#include "ierg/graph_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "ierg/error.hpp"

namespace ierg {
namespace {

constexpr char kMagic[8] = {'I', 'E', 'R', 'G', 'R', 'A', 'P', 'H'};
constexpr std::uint32_t kVersion = 1;

void PutU64(std::ostream& out, std::uint64_t v, int bytes = 8) {
  std::array<char, 8> buf{};
  for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf.data(), bytes);
}

std::uint64_t GetU64(std::istream& in, int bytes = 8) {
  std::array<unsigned char, 8> buf{};
  if (!in.read(reinterpret_cast<char*>(buf.data()), bytes)) {
    throw IoError("graph file truncated in header");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint64_t{buf[i]} << (8 * i);
  return v;
}

void PutVarint(std::ostream& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.put(static_cast<char>((v & 0x7F) | 0x80));
    v >>= 7;
  }
  out.put(static_cast<char>(v));
}

std::uint64_t GetVarint(std::istream& in) {
  std::uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) {
      throw IoError("graph file truncated in edge list");
    }
    v |= std::uint64_t(c & 0x7F) << shift;
    if ((c & 0x80) == 0) return v;
  }
  throw IoError("graph file has malformed varint");
}

}  // namespace

void write_graph_binary(const GraphSample& g, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  PutU64(out, kVersion, 4);
  PutU64(out, 0, 4);
  PutU64(out, g.N());
  PutU64(out, std::bit_cast<std::uint64_t>(g.epsilon()));
  PutU64(out, g.kernel_id());
  PutU64(out, g.seed());
  PutU64(out, g.edge_count());
  for (std::size_t i = 0; i < g.N(); ++i) {
    const auto row = g.row(i);
    PutVarint(out, row.size());
    std::uint64_t prev = i;
    bool first = true;
    for (std::uint32_t j : row) {
      PutVarint(out, first ? j - prev : j - prev - 1);
      prev = j;
      first = false;
    }
  }
  if (!out) throw IoError("failed writing graph");
}

GraphSample read_graph_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) ||
      std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw IoError("not a binary graph file (bad magic)");
  }
  if (GetU64(in, 4) != kVersion) throw IoError("unsupported graph version");
  GetU64(in, 4);
  const std::uint64_t N = GetU64(in);
  const double epsilon = std::bit_cast<double>(GetU64(in));
  const std::uint64_t kernel_id = GetU64(in);
  const std::uint64_t seed = GetU64(in);
  const std::uint64_t edges = GetU64(in);
  if (N > 0xFFFFFFFFull) throw IoError("graph file: N too large");

  std::vector<std::uint64_t> offsets{0};
  offsets.reserve(N + 1);
  std::vector<std::uint32_t> columns;
  columns.reserve(edges);
  for (std::uint64_t i = 0; i < N; ++i) {
    const std::uint64_t degree = GetVarint(in);
    std::uint64_t col = i;
    for (std::uint64_t t = 0; t < degree; ++t) {
      col += GetVarint(in) + (t == 0 ? 0 : 1);
      if (col >= N) throw IoError("graph file: column out of range");
      columns.push_back(static_cast<std::uint32_t>(col));
    }
    offsets.push_back(columns.size());
  }
  if (columns.size() != edges) throw IoError("graph file: edge count mismatch");
  try {
    return GraphSample(N, epsilon, kernel_id, seed, std::move(offsets),
                       std::move(columns));
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("graph file: ") + e.what());
  }
}

void write_graph_text(const GraphSample& g, std::ostream& out) {
  char eps[40];
  std::snprintf(eps, sizeof eps, "%.17g", g.epsilon());
  out << "# N=" << g.N() << "\n# epsilon=" << eps
      << "\n# kernel_id=" << g.kernel_id() << "\n# seed=" << g.seed() << "\n";
  for (std::size_t i = 0; i < g.N(); ++i) {
    for (std::uint32_t j : g.row(i)) out << i + 1 << ' ' << j + 1 << '\n';
  }
  if (!out) throw IoError("failed writing graph");
}

GraphSample read_graph_text(std::istream& in, std::optional<std::size_t> N) {
  double epsilon = 0.0;
  std::uint64_t kernel_id = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      const std::string value = line.substr(eq + 1);
      try {
        if (key == "N") N = std::stoull(value);
        if (key == "epsilon") epsilon = std::stod(value);
        if (key == "kernel_id") kernel_id = std::stoull(value);
        if (key == "seed") seed = std::stoull(value);
      } catch (const std::exception&) {
        throw IoError("edge list: bad header line '" + line + "'");
      }
      continue;
    }
    std::istringstream fields(line);
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    if (!(fields >> a >> b) || a == 0 || b == 0) {
      throw IoError("edge list: bad line '" + line + "'");
    }
    if (a > b) std::swap(a, b);
    edges.emplace_back(a - 1, b - 1);
  }
  if (!N) throw IoError("edge list: vertex count unknown (no '# N=' header)");
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::vector<std::uint64_t> offsets(*N + 1, 0);
  std::vector<std::uint32_t> columns;
  columns.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    if (b >= *N) throw IoError("edge list: vertex out of range");
    ++offsets[a + 1];
    columns.push_back(static_cast<std::uint32_t>(b));
  }
  for (std::size_t i = 0; i < *N; ++i) offsets[i + 1] += offsets[i];
  return GraphSample(*N, epsilon, kernel_id, seed, std::move(offsets),
                     std::move(columns));
}

void save_graph(const GraphSample& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  if (path.extension() == ".txt" || path.extension() == ".edges") {
    write_graph_text(g, out);
  } else {
    write_graph_binary(g, out);
  }
}

GraphSample load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open graph file " + path.string());
  char magic[8] = {};
  in.read(magic, sizeof magic);
  in.clear();
  in.seekg(0);
  if (std::memcmp(magic, kMagic, sizeof magic) == 0) {
    return read_graph_binary(in);
  }
  return read_graph_text(in);
}

}  // namespace ierg

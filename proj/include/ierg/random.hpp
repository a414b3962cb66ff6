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

#ifndef IERG_RANDOM_HPP_
#define IERG_RANDOM_HPP_

#include <array>
#include <cmath>
#include <cstdint>

namespace ierg {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Output is a
// pure function of (key, counter), which is what lets every graph row and
// every replicate own an independent stream without shared state.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter Generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
};

// Sequential 64-bit draws from the Philox stream identified by (seed,
// stream). Two draws are produced per block.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  std::uint64_t NextU64() {
    if (buffered_ == 0) {
      const Philox4x32::Counter ctr{
          static_cast<std::uint32_t>(block_),
          static_cast<std::uint32_t>(block_ >> 32),
          static_cast<std::uint32_t>(stream_),
          static_cast<std::uint32_t>(stream_ >> 32)};
      out_ = Philox4x32::Generate(ctr, key_);
      ++block_;
      buffered_ = 2;
    }
    const int at = 2 - buffered_;
    --buffered_;
    return (std::uint64_t{out_[2 * at]} << 32) | out_[2 * at + 1];
  }

  // Uniform on (0, 1].
  double NextOpenClosed() {
    return static_cast<double>((NextU64() >> 11) + 1) * 0x1.0p-53;
  }
  // Uniform on [0, 1).
  double NextUnit() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  std::uint64_t draws() const { return 2 * block_ - buffered_; }

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  int buffered_ = 0;
  Philox4x32::Counter out_{};
};

// Seed for replicate `replicate` of an experiment at size N. Distinct
// (N, replicate) pairs map to distinct Philox counters under the root key.
inline std::uint64_t seed_derive(std::uint64_t root_seed, std::uint64_t N,
                                 std::uint64_t replicate) {
  const Philox4x32::Counter ctr{
      static_cast<std::uint32_t>(replicate),
      static_cast<std::uint32_t>(replicate >> 32), static_cast<std::uint32_t>(N),
      static_cast<std::uint32_t>(N >> 32) ^ 0x5EEDu};
  const auto out = Philox4x32::Generate(
      ctr, {static_cast<std::uint32_t>(root_seed),
            static_cast<std::uint32_t>(root_seed >> 32)});
  return (std::uint64_t{out[0]} << 32) | out[1];
}

}  // namespace ierg

#endif  // IERG_RANDOM_HPP_

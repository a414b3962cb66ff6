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

#include <array>
#include <cstdint>
#include <set>

#include "doctest.h"

#include "ierg/random.hpp"

using ierg::CounterStream;
using ierg::Philox4x32;

TEST_CASE("philox4x32-10 known answers") {
  // Reference vectors of the Random123 distribution (kat_vectors).
  const auto zero = Philox4x32::Generate({0, 0, 0, 0}, {0, 0});
  CHECK(zero == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  const auto ones = Philox4x32::Generate(
      {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
      {0xffffffffu, 0xffffffffu});
  CHECK(ones == Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  const auto pi = Philox4x32::Generate(
      {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
      {0xa4093822u, 0x299f31d0u});
  CHECK(pi == Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("counter streams are reproducible and distinct") {
  CounterStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.NextU64();
    CHECK(x == b.NextU64());
    seen.insert(x);
    seen.insert(c.NextU64());
    seen.insert(d.NextU64());
  }
  CHECK(seen.size() == 300);
  CHECK(a.draws() == 100);
}

TEST_CASE("uniform draws lie in their intervals with the right mean") {
  CounterStream s(1, 2);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.NextOpenClosed();
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
    sum += u;
  }
  // mean 1/2, sd of the mean sqrt(1/12/n)
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("seed_derive separates N and replicate") {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t N : {100u, 1000u, 4000u}) {
    for (std::uint64_t r = 0; r < 500; ++r) seeds.insert(ierg::seed_derive(9, N, r));
  }
  CHECK(seeds.size() == 1500);
  CHECK(ierg::seed_derive(9, 100, 3) == ierg::seed_derive(9, 100, 3));
  CHECK(ierg::seed_derive(9, 100, 3) != ierg::seed_derive(10, 100, 3));
}

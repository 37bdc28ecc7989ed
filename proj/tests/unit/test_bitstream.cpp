// Copyright 2026 The cqrng Authors
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

#include "doctest.h"

#include <random>
#include <sstream>

#include "cqrng/bitstream.hpp"
#include "cqrng/error.hpp"

using namespace cqrng;

TEST_CASE("BitStream packing is MSB first") {
  const BitStream b = BitStream::from_bits({1, 0, 1, 1, 0, 0, 0, 0, 1});
  REQUIRE(b.size() == 9);
  REQUIRE(b.bytes().size() == 2);
  CHECK(b.bytes()[0] == 0xB0);
  CHECK(b.bytes()[1] == 0x80);
  CHECK(b[0]);
  CHECK_FALSE(b[1]);
  CHECK(b[8]);
  CHECK(b.count_ones() == 4);
  CHECK(b.unpack(2, 3) == std::vector<std::uint8_t>{1, 1, 0});
  CHECK_THROWS_AS(b.unpack(8, 2), InvalidArgument);
  CHECK_THROWS_AS(BitStream::from_bits({2}), InvalidArgument);
  CHECK_THROWS_AS(BitStream(std::vector<std::uint8_t>{0, 0}, 3), DimensionError);
}

TEST_CASE("pad bits are cleared") {
  const BitStream b(std::vector<std::uint8_t>{0xff}, 3);
  CHECK(b.bytes()[0] == 0xE0);
  CHECK(b.count_ones() == 3);
}

TEST_CASE("BitWriter append at aligned and unaligned offsets") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint8_t> a(rng() % 40), c(rng() % 40);
    for (auto& x : a) x = rng() & 1;
    for (auto& x : c) x = rng() & 1;
    BitWriter w;
    for (auto x : a) w.push(x);
    w.append(BitStream::from_bits(c));
    std::vector<std::uint8_t> both = a;
    both.insert(both.end(), c.begin(), c.end());
    CHECK(std::move(w).finish() == BitStream::from_bits(both));
  }
}

TEST_CASE("CQRN file round trip and header layout") {
  const BitStream b = BitStream::from_bits({1, 1, 0, 1, 0, 1, 1, 1, 0, 0, 1});
  std::stringstream ss;
  write_cqrn(ss, b);
  const std::string raw = ss.str();
  REQUIRE(raw.size() == 4 + 1 + 8 + 2);
  CHECK(raw.substr(0, 4) == "CQRN");
  CHECK(raw[4] == 1);
  CHECK(static_cast<unsigned char>(raw[5]) == 11);
  for (int k = 6; k < 13; ++k) CHECK(raw[k] == 0);
  CHECK(static_cast<unsigned char>(raw[13]) == 0xD7);
  CHECK(static_cast<unsigned char>(raw[14]) == 0x20);
  CHECK(read_cqrn(ss) == b);

  std::stringstream empty;
  write_cqrn(empty, BitStream{});
  CHECK(read_cqrn(empty).size() == 0);
}

TEST_CASE("CQRN rejects malformed input") {
  std::stringstream bad_magic("CQRX\x01");
  CHECK_THROWS_AS(read_cqrn(bad_magic), InvalidArgument);
  std::stringstream bad_version(std::string("CQRN\x02", 5) + std::string(8, '\0'));
  CHECK_THROWS_AS(read_cqrn(bad_version), InvalidArgument);
  std::string truncated = std::string("CQRN\x01", 5) + std::string("\x10", 1) + std::string(7, '\0');
  truncated += "\x01";
  std::stringstream t(truncated);
  CHECK_THROWS_AS(read_cqrn(t), InvalidArgument);
}

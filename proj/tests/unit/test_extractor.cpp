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

#include <cmath>
#include <random>

#include "cqrng/error.hpp"
#include "cqrng/extractor.hpp"

using namespace cqrng;
using namespace cqrng::extractor;

namespace {

// Straight GF(2) matrix-vector product with T[i][j] = s[i - j + n - 1].
std::vector<std::uint8_t> naive(const std::vector<std::uint8_t>& x,
                                const std::vector<std::uint8_t>& s, std::size_t m) {
  const std::size_t n = x.size();
  std::vector<std::uint8_t> y(m, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i] ^= s[i + n - 1 - j] & x[j];
  return y;
}

std::vector<std::uint8_t> random_bits(std::mt19937_64& g, std::size_t n) {
  std::vector<std::uint8_t> b(n);
  for (auto& v : b) v = g() & 1U;
  return b;
}

ExtractorParams params(std::size_t n, std::size_t m, const std::vector<std::uint8_t>& s) {
  return {n, m, kDefaultEpsSec, BitStream::from_bits(s)};
}

}  // namespace

TEST_CASE("output length") {
  CHECK(output_length(1000000, 0.077) == 76872);
  CHECK(output_length(1000000, 0.0) == 0);
  CHECK(output_length(1000, 0.128) == 0);
  CHECK(output_length(1000, 0.1) == 0);
  CHECK(output_length(65536, 0.077) == 4918);
  CHECK(output_length(1024, 1.0, 0.5) == 1022);
  CHECK_THROWS_AS(output_length(10, 1.5), InvalidArgument);
  CHECK_THROWS_AS(output_length(10, 0.5, 0.0), InvalidArgument);
}

TEST_CASE("hand-computed Toeplitz example") {
  const std::vector<std::uint8_t> s{1, 0, 1, 1, 0}, x{1, 1, 0, 1};
  CHECK(naive(x, s, 2) == std::vector<std::uint8_t>{1, 1});
  const BitStream y = toeplitz_extract(BitStream::from_bits(x), params(4, 2, s));
  CHECK(y.unpack() == std::vector<std::uint8_t>{1, 1});
}

TEST_CASE("optimized hash equals the naive product") {
  std::mt19937_64 g(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + g() % 64;
    const std::size_t m = 1 + g() % std::min<std::size_t>(32, n);
    const auto x = random_bits(g, n);
    const auto s = random_bits(g, n + m - 1);
    const auto y = toeplitz_extract(BitStream::from_bits(x), params(n, m, s)).unpack();
    REQUIRE(y == naive(x, s, m));
  }
  // long blocks cross many word boundaries
  for (std::size_t n : {200, 1000, 4099}) {
    const std::size_t m = n / 3;
    const auto x = random_bits(g, n);
    const auto s = random_bits(g, n + m - 1);
    CHECK(toeplitz_extract(BitStream::from_bits(x), params(n, m, s)).unpack() ==
          naive(x, s, m));
  }
}

TEST_CASE("zero seed and linearity") {
  std::mt19937_64 g(11);
  const std::size_t n = 100, m = 40;
  const std::vector<std::uint8_t> zero(n + m - 1, 0);
  const auto x = random_bits(g, n), x2 = random_bits(g, n), s = random_bits(g, n + m - 1);
  CHECK(toeplitz_extract(BitStream::from_bits(x), params(n, m, zero)).count_ones() == 0);
  std::vector<std::uint8_t> sum(n);
  for (std::size_t i = 0; i < n; ++i) sum[i] = x[i] ^ x2[i];
  const auto a = toeplitz_extract(BitStream::from_bits(x), params(n, m, s)).unpack();
  const auto b = toeplitz_extract(BitStream::from_bits(x2), params(n, m, s)).unpack();
  const auto c = toeplitz_extract(BitStream::from_bits(sum), params(n, m, s)).unpack();
  for (std::size_t i = 0; i < m; ++i) CHECK(c[i] == (a[i] ^ b[i]));
}

TEST_CASE("parameter errors") {
  const std::vector<std::uint8_t> s(5, 1), x(4, 1);
  CHECK_THROWS_AS(toeplitz_extract(BitStream::from_bits(x), params(4, 2, {1, 0, 1})),
                  DimensionError);
  CHECK_THROWS_AS(toeplitz_extract(BitStream::from_bits(x), params(4, 0, s)), InvalidArgument);
  CHECK_THROWS_AS(toeplitz_extract(BitStream::from_bits(x), params(4, 5, std::vector<std::uint8_t>(8))),
                  InvalidArgument);
  CHECK_THROWS_AS(toeplitz_extract(BitStream::from_bits({1, 0}), params(4, 2, s)),
                  DimensionError);
}

TEST_CASE("output bits are unbiased over seeds") {
  std::mt19937_64 g(3);
  const std::size_t n = 64, m = 8, draws = 100000;
  auto x = random_bits(g, n);
  x[0] = 1;  // nonzero input
  std::vector<std::size_t> ones(m, 0);
  for (std::size_t d = 0; d < draws; ++d) {
    const auto y = toeplitz_extract(BitStream::from_bits(x), params(n, m, random_bits(g, n + m - 1)));
    for (std::size_t i = 0; i < m; ++i) ones[i] += y[i];
  }
  const double sigma = std::sqrt(draws * 0.25);
  for (std::size_t i = 0; i < m; ++i)
    CHECK(std::abs(static_cast<double>(ones[i]) - draws / 2.0) < 4 * sigma);
}

TEST_CASE("seed expansion and fingerprint") {
  const std::vector<std::uint8_t> master{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto a = expand_seed(master, 0, 1000);
  CHECK(a.size() == 1000);
  CHECK(a == expand_seed(master, 0, 1000));
  CHECK(a != expand_seed(master, 1, 1000));
  auto other = master;
  other[9] ^= 1;
  CHECK(a != expand_seed(other, 0, 1000));
  CHECK(seed_fingerprint(master) == seed_fingerprint(master));
  CHECK(seed_fingerprint(master) != seed_fingerprint(other));
  CHECK_THROWS_AS(seed_fingerprint({1, 2, 3}), InvalidArgument);
  CHECK(os_seed().size() == 32);

  // fingerprint oracle: naive self-hash keyed by the reserved expansion
  const BitStream mb(master, master.size() * 8);
  const auto bits = mb.unpack();
  const auto key = expand_seed(master, ~std::uint64_t{0}, bits.size() + 63).unpack();
  const auto y = naive(bits, key, 64);
  std::uint64_t fp = 0;
  for (auto b : y) fp = (fp << 1) | b;
  CHECK(seed_fingerprint(master) == fp);
}

TEST_CASE("stream extraction") {
  std::mt19937_64 g(5);
  const BitStream raw = BitStream::from_bits(random_bits(g, 1000000));
  const std::vector<std::uint8_t> master(32, 0x5a);
  const auto r = extract_stream(raw, 0.077, kDefaultEpsSec, master);
  CHECK(r.blocks == 15);
  CHECK(r.output_per_block == output_length(65536, 0.077));
  CHECK(r.bits.size() == 15 * r.output_per_block);
  CHECK(r.dropped_bits == 1000000 - 15 * 65536);
  CHECK(static_cast<double>(r.output_per_block) <= 65536 * 0.077 - 128.0);
  CHECK(r.bits.meta().h_min == 0.077);
  CHECK(r.bits.meta().seed_fingerprint == seed_fingerprint(master));
  CHECK(r.bits.meta().origin == "extract");

  const auto again = extract_stream(raw, 0.077, kDefaultEpsSec, master, kDefaultBlockBits, 3);
  CHECK(again.bits == r.bits);

  // block 2 by hand
  const auto x = BitStream::from_bits(raw.unpack(2 * 65536, 65536));
  const auto seed = expand_seed(master, 2, 65536 + r.output_per_block - 1);
  const auto y = toeplitz_extract(x, {65536, r.output_per_block, kDefaultEpsSec, seed});
  CHECK(y.unpack() == r.bits.unpack(2 * r.output_per_block, r.output_per_block));

  CHECK_THROWS_AS(extract_stream(raw, 0.0, kDefaultEpsSec, master), UndersizedDataError);
  CHECK_THROWS_AS(extract_stream(BitStream::from_bits(random_bits(g, 1000)), 0.5,
                                 kDefaultEpsSec, master),
                  UndersizedDataError);
}

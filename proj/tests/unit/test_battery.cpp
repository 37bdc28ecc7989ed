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

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cqrng/battery.hpp"
#include "cqrng/error.hpp"

using namespace cqrng;
using namespace cqrng::battery;

namespace {

// First 100 bits of the binary expansion of pi, the worked example of the
// NIST suite documentation.
const std::string kPiBits =
    "11001001000011111101101010100010001000010110100011"
    "00001000110100110001001100011001100010100010111000";

BitStream from_string(const std::string& s) {
  std::vector<std::uint8_t> b;
  for (char c : s) b.push_back(c == '1');
  return BitStream::from_bits(b);
}

BitStream random_stream(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 g(seed);
  std::vector<std::uint8_t> b(n);
  for (auto& v : b) v = g() & 1U;
  return BitStream::from_bits(b);
}

// Q(k, x) for integer k: e^-x sum_{i<k} x^i / i!
double igamc_integer(int k, double x) {
  double term = 1.0, sum = 0.0;
  for (int i = 0; i < k; ++i) {
    sum += term;
    term *= x / (i + 1);
  }
  return std::exp(-x) * sum;
}

}  // namespace

TEST_CASE("worked examples on the binary expansion of pi") {
  const BitStream e = from_string(kPiBits);
  REQUIRE(e.size() == 100);
  CHECK(monobit(e).p_value == doctest::Approx(0.109599).epsilon(1e-5));
  const auto r = runs(e);
  CHECK(r.statistic == 52);
  CHECK(r.p_value == doctest::Approx(0.500798).epsilon(1e-5));
  CHECK(approx_entropy(e, 2).p_value == doctest::Approx(0.235301).epsilon(1e-5));
}

TEST_CASE("monobit limits") {
  CHECK(monobit(BitStream::from_bits(std::vector<std::uint8_t>(100, 0))).p_value < 1e-20);
  CHECK_FALSE(monobit(BitStream::from_bits(std::vector<std::uint8_t>(100, 0))).pass);
  std::string alt;
  for (int i = 0; i < 50; ++i) alt += "01";
  CHECK(monobit(from_string(alt)).p_value == 1.0);
  CHECK_THROWS_AS(monobit(from_string("0101")), UndersizedDataError);
}

TEST_CASE("runs on perfect alternation") {
  std::string alt;
  for (int i = 0; i < 50; ++i) alt += "01";
  const auto r = runs(from_string(alt));
  CHECK(r.statistic == 100);
  CHECK(r.p_value < 1e-20);
  CHECK_FALSE(r.pass);
  // frequency prerequisite
  std::string biased(75, '1');
  biased += std::string(25, '0');
  CHECK(runs(from_string(biased)).p_value == 0.0);
}

TEST_CASE("block frequency against a closed-form tail") {
  const BitStream b = random_stream(9, 2560);  // N = 20 blocks of 128
  const auto r = block_frequency(b);
  double chi2 = 0.0;
  for (int blk = 0; blk < 20; ++blk) {
    int ones = 0;
    for (int k = 0; k < 128; ++k) ones += b[blk * 128 + k];
    chi2 += 4.0 * 128 * std::pow(ones / 128.0 - 0.5, 2);
  }
  CHECK(r.statistic == doctest::Approx(chi2));
  CHECK(r.p_value == doctest::Approx(igamc_integer(10, chi2 / 2)).epsilon(1e-10));
  CHECK_THROWS_AS(block_frequency(random_stream(1, 2559)), UndersizedDataError);
  CHECK(block_frequency(BitStream::from_bits(std::vector<std::uint8_t>(2560, 1))).p_value <
        1e-20);
}

TEST_CASE("approximate entropy on a constant stream") {
  // phi(m) = phi(m+1) = 0 so ApEn = 0 and chi2 = 2n ln 2
  const auto r = approx_entropy(BitStream::from_bits(std::vector<std::uint8_t>(1000, 0)));
  CHECK(r.statistic == doctest::Approx(2000 * std::log(2.0)));
  CHECK(r.p_value == doctest::Approx(igamc_integer(2, 1000 * std::log(2.0))));
  CHECK_THROWS_AS(approx_entropy(random_stream(1, 99), 2), UndersizedDataError);
  CHECK_THROWS_AS(approx_entropy(random_stream(1, 1000), 0), InvalidArgument);
}

TEST_CASE("p-values from a good generator are uniform") {
  std::vector<double> p;
  for (std::uint64_t s = 0; s < 100; ++s) p.push_back(monobit(random_stream(1000 + s, 10000)).p_value);
  std::sort(p.begin(), p.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double lo = static_cast<double>(i) / p.size(), hi = static_cast<double>(i + 1) / p.size();
    ks = std::max({ks, std::abs(p[i] - lo), std::abs(hi - p[i])});
  }
  CHECK(ks < 0.2);
}

TEST_CASE("battery report") {
  const BitStream b = random_stream(42, 100000);
  const auto serial = run_battery(b);
  const auto parallel = run_battery(b, 4);
  REQUIRE(serial.tests.size() == 4);
  CHECK(serial.bits == 100000);
  const char* names[] = {"monobit", "block_frequency", "runs", "approx_entropy"};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(serial.tests[i].name == names[i]);
    CHECK(serial.tests[i].p_value >= 0.0);
    CHECK(serial.tests[i].p_value <= 1.0);
    CHECK(serial.tests[i].pass == (serial.tests[i].p_value >= kAlpha));
    CHECK(serial.tests[i].p_value == parallel.tests[i].p_value);
  }
  CHECK(serial.passed == parallel.passed);
  CHECK_THROWS_AS(run_battery(random_stream(1, 50), 4), UndersizedDataError);
}

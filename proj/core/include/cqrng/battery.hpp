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

#pragma once

// Four tests from the NIST SP 800-22 statistical suite. The battery
// validates output; it never certifies anything.

#include <cstdint>
#include <string>
#include <vector>

#include "cqrng/bitstream.hpp"

namespace cqrng::battery {

inline constexpr double kAlpha = 0.01;
inline constexpr std::uint64_t kBlockFrequencyM = 128;
inline constexpr unsigned kApproxEntropyM = 2;

struct TestResult {
  std::string name;
  double statistic = 0.0;
  double p_value = 0.0;
  bool pass = false;  // p_value >= kAlpha

  friend bool operator==(const TestResult&, const TestResult&) = default;
};

/// p = erfc(|S_n| / sqrt(2n)). Needs n >= 100.
TestResult monobit(const BitStream& bits);
/// Chi-square over N = floor(n/M) block proportions. Needs n >= 20 M.
TestResult block_frequency(const BitStream& bits, std::uint64_t M = kBlockFrequencyM);
/// Total number of runs; p = 0 when the frequency prerequisite fails.
/// Needs n >= 100.
TestResult runs(const BitStream& bits);
/// Approximate entropy with overlapping wrap-around m-bit patterns.
/// Needs n >= 100; m in [1, 20].
TestResult approx_entropy(const BitStream& bits, unsigned m = kApproxEntropyM);

struct BatteryReport {
  std::vector<TestResult> tests;
  std::uint64_t bits = 0;
  std::size_t passed = 0;
  bool all_passed() const { return passed == tests.size(); }

  friend bool operator==(const BatteryReport&, const BatteryReport&) = default;
};

/// All four tests, in the order above.
BatteryReport run_battery(const BitStream& bits, unsigned threads = 1);

}  // namespace cqrng::battery

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


#include "cqrng/battery.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <thread>

#include "cqrng/error.hpp"

namespace cqrng::battery {

namespace {

TestResult make(std::string name, double stat, double p) {
  p = std::clamp(p, 0.0, 1.0);
  return {std::move(name), stat, p, p >= kAlpha};
}

void need(bool ok, const char* what) {
  if (!ok) throw UndersizedDataError(what);
}

double igamc(double a, double x) { return x <= 0.0 ? 1.0 : boost::math::gamma_q(a, x); }

}  // namespace

TestResult monobit(const BitStream& bits) {
  const std::uint64_t n = bits.size();
  need(n >= 100, "monobit: needs at least 100 bits");
  const double s = 2.0 * static_cast<double>(bits.count_ones()) - static_cast<double>(n);
  const double stat = std::abs(s) / std::sqrt(static_cast<double>(n));
  return make("monobit", stat, std::erfc(stat / std::sqrt(2.0)));
}

TestResult block_frequency(const BitStream& bits, std::uint64_t M) {
  need(M > 0 && bits.size() >= 20 * M, "block_frequency: needs at least 20 blocks");
  const std::uint64_t N = bits.size() / M;
  double chi2 = 0.0;
  for (std::uint64_t b = 0; b < N; ++b) {
    std::uint64_t ones = 0;
    for (std::uint64_t k = 0; k < M; ++k) ones += bits[b * M + k];
    const double pi = static_cast<double>(ones) / static_cast<double>(M) - 0.5;
    chi2 += pi * pi;
  }
  chi2 *= 4.0 * static_cast<double>(M);
  return make("block_frequency", chi2, igamc(static_cast<double>(N) / 2.0, chi2 / 2.0));
}

TestResult runs(const BitStream& bits) {
  const std::uint64_t n = bits.size();
  need(n >= 100, "runs: needs at least 100 bits");
  const double nd = static_cast<double>(n);
  const double pi = static_cast<double>(bits.count_ones()) / nd;
  std::uint64_t v = 1;
  for (std::uint64_t k = 0; k + 1 < n; ++k) v += bits[k] != bits[k + 1];
  const double vd = static_cast<double>(v);
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(nd)) return make("runs", vd, 0.0);
  const double q = pi * (1.0 - pi);
  const double p = std::erfc(std::abs(vd - 2.0 * nd * q) / (2.0 * std::sqrt(2.0 * nd) * q));
  return make("runs", vd, p);
}

TestResult approx_entropy(const BitStream& bits, unsigned m) {
  const std::uint64_t n = bits.size();
  need(n >= 100, "approx_entropy: needs at least 100 bits");
  if (m == 0 || m > 20) throw InvalidArgument("approx_entropy: m must lie in [1, 20]");
  auto phi = [&](unsigned len) {
    std::vector<std::uint64_t> counts(std::size_t{1} << len, 0);
    std::uint64_t pattern = 0;
    const std::uint64_t mask = (std::uint64_t{1} << len) - 1;
    for (unsigned k = 0; k + 1 < len; ++k) pattern = (pattern << 1) | bits[k];
    for (std::uint64_t i = 0; i < n; ++i) {
      pattern = ((pattern << 1) | bits[(i + len - 1) % n]) & mask;
      ++counts[pattern];
    }
    double s = 0.0;
    for (auto c : counts)
      if (c) {
        const double f = static_cast<double>(c) / static_cast<double>(n);
        s += f * std::log(f);
      }
    return s;
  };
  const double apen = phi(m) - phi(m + 1);
  const double chi2 = 2.0 * static_cast<double>(n) * (std::log(2.0) - apen);
  return make("approx_entropy", chi2, igamc(std::ldexp(1.0, static_cast<int>(m) - 1), chi2 / 2.0));
}

BatteryReport run_battery(const BitStream& bits, unsigned threads) {
  const std::array<std::function<TestResult()>, 4> jobs{
      [&] { return monobit(bits); }, [&] { return block_frequency(bits); },
      [&] { return runs(bits); }, [&] { return approx_entropy(bits); }};
  BatteryReport report;
  report.bits = bits.size();
  report.tests.resize(jobs.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) report.tests[i] = jobs[i]();
  } else {
    std::array<std::exception_ptr, 4> errors{};
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < jobs.size(); ++i)
      pool.emplace_back([&, i] {
        try {
          report.tests[i] = jobs[i]();
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  for (const auto& t : report.tests) report.passed += t.pass;
  return report;
}

}  // namespace cqrng::battery

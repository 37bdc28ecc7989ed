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


#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cqrng/battery.hpp"
#include "cqrng/certifier.hpp"
#include "cqrng/extractor.hpp"
#include "cqrng/kcbs.hpp"
#include "cqrng/linalg.hpp"
#include "cqrng/photonics.hpp"
#include "cqrng/tomography.hpp"

using namespace cqrng;

namespace {

BitStream random_stream(std::uint64_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::vector<std::uint8_t> b(n);
  for (auto& x : b) x = g() & 1;
  return BitStream::from_bits(b);
}

void BM_KcbsValue(benchmark::State& st) {
  const auto set = kcbs::pentagram();
  const auto psi = kcbs::optimal_state();
  for (auto _ : st) benchmark::DoNotOptimize(kcbs::kcbs_value(psi, set));
}
BENCHMARK(BM_KcbsValue);

void BM_ProjectPsd7(benchmark::State& st) {
  std::mt19937_64 g(1);
  std::normal_distribution<double> n;
  std::vector<double> a(49), work(49);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j <= i; ++j) a[i * 7 + j] = a[j * 7 + i] = n(g);
  for (auto _ : st) {
    work = a;
    benchmark::DoNotOptimize(linalg::project_psd_inplace(work, 7));
  }
}
BENCHMARK(BM_ProjectPsd7);

void BM_Simulate(benchmark::State& st) {
  photonics::RunOptions opt;
  opt.rounds = static_cast<std::uint64_t>(st.range(0));
  opt.unit = photonics::RoundUnit::detected;
  const auto plan = photonics::default_plan({});
  for (auto _ : st)
    benchmark::DoNotOptimize(photonics::run_simulation(plan, {}, {}, {}, opt, 3).tally.bits.size());
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_Simulate)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_ToeplitzBlock(benchmark::State& st) {
  const std::uint64_t n = static_cast<std::uint64_t>(st.range(0));
  extractor::ExtractorParams p;
  p.n = n;
  p.m = extractor::output_length(n, 0.08);
  p.seed = random_stream(n + p.m - 1, 2);
  const BitStream x = random_stream(n, 3);
  for (auto _ : st) benchmark::DoNotOptimize(extractor::toeplitz_extract(x, p).size());
  st.SetBytesProcessed(st.iterations() * static_cast<std::int64_t>(n / 8));
}
BENCHMARK(BM_ToeplitzBlock)->Arg(65536)->Unit(benchmark::kMillisecond);

void BM_Battery(benchmark::State& st) {
  const BitStream bits = random_stream(100000, 4);
  for (auto _ : st) benchmark::DoNotOptimize(battery::run_battery(bits).passed);
}
BENCHMARK(BM_Battery)->Unit(benchmark::kMillisecond);

void BM_Mle(benchmark::State& st) {
  const auto mubs = tomography::mub_set();
  const auto rho = linalg::projector(kcbs::optimal_state());
  const auto data = tomography::simulate_counts(rho, mubs, 10000, 5);
  for (auto _ : st) benchmark::DoNotOptimize(tomography::mle_reconstruct(data, mubs).iterations);
}
BENCHMARK(BM_Mle)->Unit(benchmark::kMillisecond);

void BM_FeasibilityTest(benchmark::State& st) {
  const certifier::CertificationProblem prob;
  const double chi = certifier::worst_case_chi(prob);
  for (auto _ : st) {
    std::vector<double> warm;
    benchmark::DoNotOptimize(certifier::relaxation_feasible(prob, chi, 1.0, 0.9, warm).sweeps);
  }
}
BENCHMARK(BM_FeasibilityTest)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

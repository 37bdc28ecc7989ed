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


// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero
// when a hard criterion fails; criterion 6 is reported but never fails the
// run.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "cqrng/battery.hpp"
#include "cqrng/bitstream.hpp"
#include "cqrng/certifier.hpp"
#include "cqrng/cli/artifacts.hpp"
#include "cqrng/cli/commands.hpp"
#include "cqrng/cli/config.hpp"
#include "cqrng/cli/fsutil.hpp"
#include "cqrng/error.hpp"
#include "cqrng/extractor.hpp"
#include "cqrng/kcbs.hpp"
#include "cqrng/photonics.hpp"
#include "cqrng/tomography.hpp"

using namespace cqrng;
using Clock = std::chrono::steady_clock;

namespace {

// ---- pinned tolerances and budgets ------------------------------------------
constexpr double kC1Tol = 1e-9;
constexpr double kC1BudgetS = 1e-3;
constexpr double kC2BudgetS = 1e-3;
constexpr std::uint64_t kC3Rounds = 100000;
constexpr std::array<double, 5> kC3Terms{-0.78, -0.80, -0.77, -0.78, -0.79};
constexpr double kC3TermTol = 0.04;
constexpr double kC3Chi = -3.84;
constexpr double kC3ChiTol = 0.16;
constexpr double kC3BudgetS = 60.0;
constexpr double kC4Sigmas = 3.0;
constexpr double kC4BudgetS = 30.0;
constexpr double kC5HTol = 3e-4;
constexpr int kC5Instances = 20;
constexpr std::size_t kC5GridPoints = 11;
constexpr double kC5BudgetS = 600.0;
constexpr double kC6Lo = 0.047;
constexpr double kC6Hi = 0.107;
constexpr double kC7Rate = 21.7;
constexpr double kC7RateTol = 0.1;
constexpr double kC7Upgraded = 5e4;
constexpr double kC7BudgetS = 1.0;
constexpr std::uint64_t kC8Shots = 10000;
constexpr int kC8Trials = 100;
constexpr double kC8Fidelity = 0.98;
constexpr int kC8Needed = 95;
constexpr double kC8BudgetS = 120.0;
constexpr std::uint64_t kC9Length = 76872;
constexpr double kC9BudgetS = 10.0;
constexpr double kC10ZeroP = 1e-10;
constexpr std::uint64_t kC10Bits = 100000;
constexpr int kC10Runs = 10;
constexpr int kC10Needed = 9;
constexpr std::uint64_t kC10Rounds = 300000;  // per context, ~1.3M raw bits
constexpr double kC10BudgetS = 120.0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool hard_failed = false;

void report(int id, bool pass, const std::string& detail, double secs, bool soft = false) {
  std::printf("Criterion %2d: %s  %s [%.3f s]\n", id, pass ? "PASS" : (soft ? "FAIL (soft)" : "FAIL"),
              detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass && !soft) hard_failed = true;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

cli::fs::path scratch(const std::string& name) {
  const auto p = cli::fs::temp_directory_path() /
                 ("qrng_accept_" + name + "_" + std::to_string(::getpid()));
  cli::fs::remove_all(p);
  cli::fs::create_directories(p);
  return p;
}

int qrng(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  if (code != 0) std::fprintf(stderr, "qrng %s: %s", args[0].c_str(), err.str().c_str());
  return code;
}

cli::json load(const cli::fs::path& p) { return cli::json::parse(cli::read_text(p)); }

// ---- criteria ----------------------------------------------------------------

void criterion1() {
  const auto t0 = Clock::now();
  const double v = kcbs::kcbs_value(kcbs::optimal_state(), kcbs::pentagram());
  const double secs = seconds_since(t0);
  const double expect = 5.0 - 4.0 * std::sqrt(5.0);
  const double err = std::abs(v - expect);
  report(1, err <= kC1Tol && secs < kC1BudgetS, fmt("value %.12f, |err| %.2e", v, err), secs);
}

void criterion2() {
  const auto t0 = Clock::now();
  int best = 100;
  for (unsigned mask = 0; mask < 32; ++mask) {
    int sum = 0;
    for (unsigned i = 0; i < 5; ++i) {
      const int a = (mask >> i) & 1u ? -1 : 1;
      const int b = (mask >> ((i + 1) % 5)) & 1u ? -1 : 1;
      sum += a * b;
    }
    best = std::min(best, sum);
  }
  const double secs = seconds_since(t0);
  report(2, best == -3 && static_cast<double>(best) == kcbs::kClassicalBound && secs < kC2BudgetS,
         fmt("min over 32 assignments = %d", best), secs);
}

void criterion3() {
  const auto t0 = Clock::now();
  cli::RunConfig cfg = cli::preset("reference");
  cfg.run.rounds = kC3Rounds;
  const auto run = photonics::run_simulation(cli::resolve_plan(cfg), cfg.source, cfg.channel,
                                             cfg.noise, cfg.run, 2024);
  const auto res = kcbs::analyze_table(run.joint_tables, run.model.R);
  bool ok = std::abs(res.chi_mod - kC3Chi) <= kC3ChiTol;
  double worst = 0.0;
  for (std::size_t c = 0; c < 5; ++c) {
    worst = std::max(worst, std::abs(res.terms[c] - kC3Terms[c]));
    ok = ok && std::abs(res.terms[c] - kC3Terms[c]) <= kC3TermTol;
  }
  const double secs = seconds_since(t0);
  report(3, ok && secs < kC3BudgetS,
         fmt("terms %.3f %.3f %.3f %.3f %.3f (max dev %.3f), chi' %.4f at R %.4f", res.terms[0],
             res.terms[1], res.terms[2], res.terms[3], res.terms[4], worst, res.chi_mod, res.R),
         secs);
}

void criterion4() {
  const auto t0 = Clock::now();
  cli::RunConfig cfg = cli::preset("ideal");
  cfg.run.rounds = kC3Rounds;
  const auto run = photonics::run_simulation(cli::resolve_plan(cfg), cfg.source, cfg.channel,
                                             cfg.noise, cfg.run, 77);
  const double ideal = 1.0 - 4.0 / std::sqrt(5.0);
  const double q = 2.0 / std::sqrt(5.0);
  bool ok = true;
  double worst = 0.0;
  for (std::size_t c = 0; c < 5; ++c) {
    const double n = static_cast<double>(run.tally.events[c]);
    const double sigma = 2.0 * std::sqrt(q * (1.0 - q) / n);
    const double z = std::abs(kcbs::expectation_from_joint(run.joint_tables[c]) - ideal) / sigma;
    worst = std::max(worst, z);
    ok = ok && z <= kC4Sigmas;
  }
  const double secs = seconds_since(t0);
  report(4, ok && secs < kC4BudgetS, fmt("largest deviation %.2f sigma", worst), secs);
}

void criterion5() {
  const auto t0 = Clock::now();
  certifier::CertificationProblem ref;
  const auto at3 = certifier::relaxation_bound(ref, -3.0);
  const double h3 = certifier::min_entropy(at3.p_guess);
  bool ok = h3 <= kC5HTol;

  std::mt19937_64 g(20260601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int evaluated = 0, attacked = 0, violations = 0, infeasible = 0;
  double worst_gap = 1.0;
  certifier::SolverOptions quick;
  quick.bisect_tol = 1e-3;  // lo + tol is still an upper bound
  while (evaluated < kC5Instances) {
    certifier::CertificationProblem p;
    p.R_lo = 0.88 + 0.09 * u(g);
    p.R_hi = std::min(1.0, p.R_lo + 0.03 * u(g));
    p.eps_com = 0.02 + 0.06 * u(g);
    for (auto& e : p.eta) e = 0.8 + 0.15 * u(g);
    const double chi = -3.93 + 0.63 * u(g);
    certifier::AttackOptions ao;
    ao.restarts = 3;
    ao.rounds = 3;
    ao.seed = g();
    const auto attack = certifier::attack_search(p, chi, ao);
    try {
      const auto bound = certifier::relaxation_bound(p, chi, quick);
      ++evaluated;
      if (attack.feasible) {
        ++attacked;
        worst_gap = std::min(worst_gap, bound.p_guess - attack.p_guess);
        if (attack.p_guess > bound.p_guess) ++violations;
      }
    } catch (const InfeasibleError&) {
      ++infeasible;
      if (attack.feasible) ++violations;  // an explicit model contradicts infeasibility
    }
  }
  ok = ok && violations == 0;

  const auto curve = certifier::rate_curve(ref, certifier::default_grid(kC5GridPoints),
                                           cli::kReferenceRoundRate);
  bool solved = true;
  for (const auto& pt : curve.points) solved = solved && pt.ok;
  ok = ok && curve.monotone && solved;
  const double secs = seconds_since(t0);
  report(5, ok && secs < kC5BudgetS,
         fmt("h(-3) = %.2e; %d instances (%d with explicit models, %d infeasible skipped), "
             "violations %d, min gap %.4f; curve monotone %s, h(%.4f) = %.4f",
             h3, evaluated, attacked, infeasible, violations, worst_gap,
             curve.monotone ? "yes" : "no", curve.points.back().chi, curve.points.back().h_min),
         secs);
}

double criterion6() {
  const auto t0 = Clock::now();
  certifier::CertificationProblem p;
  p.chi_hat = -3.92;
  p.delta = 0.056;
  const auto res = certifier::certify(p, 282.0);
  const double secs = seconds_since(t0);
  report(6, res.h_min >= kC6Lo && res.h_min <= kC6Hi,
         fmt("h_min %.4f (P_guess <= %.5f, explicit model %.5f) at worst-case chi %.4f", res.h_min,
             res.p_guess_upper, res.p_guess_attack, res.chi_worst),
         secs, true);
  return secs;
}

void criterion7() {
  auto t0 = Clock::now();
  const double r = certifier::certified_rate(0.077, 282.0);
  double arith = seconds_since(t0);
  const auto dir = scratch("upgraded");
  const std::string out = dir.string();
  bool ran = qrng({"simulate", "--preset", "upgraded", "--out", out}) == 0 &&
             qrng({"analyze", "--preset", "upgraded", "--out", out}) == 0;
  double cert_secs = 0.0;
  double rate = 0.0, h = 0.0, raw = 0.0;
  if (ran) {
    const auto tc = Clock::now();
    ran = qrng({"certify", "--preset", "upgraded", "--out", out}) == 0;
    cert_secs = seconds_since(tc);
  }
  if (ran) {
    const auto c = cli::certification_from_json(load(dir / cli::files::kCertification));
    rate = c.result.rate;
    h = c.result.h_min;
    raw = c.result.round_rate;
    // The rate itself is one multiplication on top of certification.
    t0 = Clock::now();
    volatile double again = certifier::certified_rate(c.result, c.result.round_rate);
    (void)again;
    arith += seconds_since(t0);
  }
  cli::fs::remove_all(dir);
  const bool ok = ran && std::abs(r - kC7Rate) <= kC7RateTol && rate >= kC7Upgraded && arith < kC7BudgetS;
  report(7, ok,
         fmt("certified_rate(0.077, 282) = %.3f bit/s; upgraded: %.4g raw bit/s x h %.4f = %.4g bit/s",
             r, raw, h, rate),
         arith + cert_secs);
}

void criterion8() {
  const auto t0 = Clock::now();
  const auto mubs = tomography::mub_set();
  const auto target = linalg::projector(kcbs::optimal_state());
  int good = 0;
  double fmin = 1.0;
  for (int trial = 0; trial < kC8Trials; ++trial) {
    const auto data = tomography::simulate_counts(target, mubs, kC8Shots, 9000 + trial);
    const auto mle = tomography::mle_reconstruct(data, mubs);
    const double f = tomography::fidelity(mle.rho, target);
    fmin = std::min(fmin, f);
    if (f >= kC8Fidelity) ++good;
  }
  const double secs = seconds_since(t0);
  report(8, good >= kC8Needed && secs < kC8BudgetS,
         fmt("%d/%d trials with F >= %.2f (min F %.5f)", good, kC8Trials, kC8Fidelity, fmin), secs);
}

std::vector<std::uint8_t> naive_toeplitz(const std::vector<std::uint8_t>& x,
                                         const std::vector<std::uint8_t>& s, std::size_t m) {
  const std::size_t n = x.size();
  std::vector<std::uint8_t> y(m, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i] ^= s[i + n - 1 - j] & x[j];
  return y;
}

void criterion9() {
  const auto t0 = Clock::now();
  auto params = [](std::size_t n, std::size_t m, const std::vector<std::uint8_t>& s) {
    extractor::ExtractorParams p;
    p.n = n;
    p.m = m;
    p.seed = BitStream::from_bits(s);
    return p;
  };
  // T = [[s3 s2 s1 s0], [s4 s3 s2 s1]] = [[1 1 0 1], [0 1 1 0]]; T x = (1, 1).
  const std::vector<std::uint8_t> s{1, 0, 1, 1, 0}, x{1, 1, 0, 1};
  const bool golden = extractor::toeplitz_extract(BitStream::from_bits(x), params(4, 2, s)).unpack() ==
                      std::vector<std::uint8_t>{1, 1};
  std::mt19937_64 g(99);
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + g() % 96;
    const std::size_t m = 1 + g() % n;
    std::vector<std::uint8_t> xs(n), ss(n + m - 1);
    for (auto& b : xs) b = g() & 1;
    for (auto& b : ss) b = g() & 1;
    if (extractor::toeplitz_extract(BitStream::from_bits(xs), params(n, m, ss)).unpack() !=
        naive_toeplitz(xs, ss, m))
      ++mismatches;
  }
  const auto len = extractor::output_length(1000000, 0.077, 0x1.0p-64);
  const double secs = seconds_since(t0);
  report(9, golden && mismatches == 0 && len == kC9Length && secs < kC9BudgetS,
         fmt("golden %s, %d/1000 oracle mismatches, output_length = %llu", golden ? "ok" : "wrong",
             mismatches, static_cast<unsigned long long>(len)),
         secs);
}

void criterion10() {
  const auto t0 = Clock::now();
  const BitStream zeros = BitStream::from_bits(std::vector<std::uint8_t>(kC10Bits, 0));
  std::vector<std::uint8_t> alt(kC10Bits);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i & 1;
  const double pz = battery::monobit(zeros).p_value;
  const bool alt_fails = !battery::runs(BitStream::from_bits(alt)).pass;

  const auto base = scratch("battery");
  cli::RunConfig cfg = cli::preset("reference");
  cfg.run.rounds = kC10Rounds;
  cfg.certifier.solver.bisect_tol = 1e-3;
  cfg.certifier.attack.restarts = 1;
  cfg.certifier.attack.rounds = 1;
  cli::atomic_write(base / "cfg.json", cli::dump(cli::to_json(cfg)));
  int passed = 0;
  std::string fails;
  for (int run = 0; run < kC10Runs; ++run) {
    const std::string seed = std::to_string(run + 1);
    const std::string out = (base / seed).string();
    bool ok = true;
    for (const char* cmd : {"simulate", "analyze", "certify", "extract"})
      ok = ok && qrng({cmd, "--config", (base / "cfg.json").string(), "--seed", seed, "--out", out}) == 0;
    if (!ok) {
      fails += " run" + seed + ":pipeline";
      continue;
    }
    std::ifstream in(base / seed / cli::files::kExtracted, std::ios::binary);
    const BitStream bits = read_cqrn(in);
    if (bits.size() < kC10Bits) {
      fails += " run" + seed + ":short(" + std::to_string(bits.size()) + ")";
      continue;
    }
    const auto rep = battery::run_battery(BitStream::from_bits(bits.unpack(0, kC10Bits)));
    if (rep.all_passed()) {
      ++passed;
    } else {
      fails += " run" + seed + ":";
      for (const auto& t : rep.tests)
        if (!t.pass) fails += t.name + "(p=" + fmt("%.4f", t.p_value) + ")";
    }
  }
  cli::fs::remove_all(base);
  const double secs = seconds_since(t0);
  report(10, pz < kC10ZeroP && alt_fails && passed >= kC10Needed && secs < kC10BudgetS,
         fmt("zeros monobit p = %.2e, alternating runs %s, pipeline %d/%d passed all four%s", pz,
             alt_fails ? "fails" : "passes", passed, kC10Runs, fails.empty() ? "" : (";" + fails).c_str()),
         secs);
}

void criterion11() {
  const auto t0 = Clock::now();
  const auto base = scratch("determinism");
  cli::RunConfig cfg = cli::preset("reference");
  cfg.run.rounds = 20000;
  cfg.run.keep_events = true;
  cfg.curve.grid = std::vector<double>{-3.0, -3.5, -3.9};
  cli::atomic_write(base / "cfg.json", cli::dump(cli::to_json(cfg)));
  bool ran = true;
  for (const char* dir : {"a", "b"})
    for (const char* cmd :
         {"simulate", "analyze", "certify", "extract", "battery", "tomo", "curve", "report"})
      ran = ran && qrng({cmd, "--config", (base / "cfg.json").string(), "--seed", "31337", "--out",
                         (base / dir).string()}) == 0;
  int compared = 0, differing = 0;
  std::string which;
  if (ran) {
    for (const auto& e : cli::fs::directory_iterator(base / "a")) {
      const auto name = e.path().filename().string();
      const auto ext = e.path().extension().string();
      if (ext != ".csv" && ext != ".json" && ext != ".jsonl" && ext != ".cqrn" && ext != ".md") continue;
      ++compared;
      if (!cli::fs::exists(base / "b" / name) ||
          cli::read_text(e.path()) != cli::read_text(base / "b" / name)) {
        ++differing;
        which += " " + name;
      }
    }
  }
  cli::fs::remove_all(base);
  const double secs = seconds_since(t0);
  report(11, ran && compared >= 14 && differing == 0,
         fmt("%d artifacts compared, %d differ%s", compared, differing, which.c_str()), secs);
}

}  // namespace

int main() {
  std::printf("qrng acceptance run\n");
  const std::vector<std::function<void()>> criteria{
      criterion1, criterion2, criterion3, criterion4, criterion5, [] { criterion6(); },
      criterion7, criterion8, criterion9, criterion10, criterion11};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, std::string("exception: ") + e.what(), 0.0, i == 5);
    }
  }
  std::printf("%s\n", hard_failed ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED");
  return hard_failed ? 1 : 0;
}

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

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "cqrng/error.hpp"
#include "cqrng/kcbs.hpp"
#include "unit/helpers.hpp"

using namespace cqrng;
using namespace cqrng::kcbs;
using linalg::Complex;
using linalg::Matrix;
using linalg::Vector;

namespace {

const double kQuantum = 5.0 - 4.0 * std::sqrt(5.0);
const double kIdealTerm = 1.0 - 4.0 / std::sqrt(5.0);

// Born-rule oracle written from scratch: <A_i A_j> for orthogonal pairs is
// 1 - 2 p_i - 2 p_j with p = |<v|psi>|^2.
double pair_oracle(const Vector& a, const Vector& b, const Vector& psi) {
  const double pa = std::norm(linalg::inner(a, psi));
  const double pb = std::norm(linalg::inner(b, psi));
  return 1.0 - 2.0 * pa - 2.0 * pb;
}

}  // namespace

TEST_CASE("pentagram geometry") {
  const PentagramSet set = pentagram();
  const Vector psi = optimal_state();
  for (std::size_t i = 0; i < kContexts; ++i) {
    CHECK(std::abs(set.vectors[i].norm() - 1.0) < 1e-12);
    CHECK(std::abs(linalg::inner(set.vectors[i], set.vectors[(i + 1) % 5])) < 1e-12);
    CHECK(std::norm(linalg::inner(psi, set.vectors[i])) ==
          doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-9));
  }
  CHECK(std::norm(linalg::inner(set.vectors[0], set.vectors[2])) > 0.1);
  CHECK(linalg::max_abs(linalg::projector(set.vprime) - linalg::projector(set.vectors[0])) <
        1e-15);
  CHECK(linalg::is_unitary(set.rotation));
  const Vector mapped = set.rotation * Vector::basis(3, 2);
  CHECK(linalg::max_abs(linalg::projector(mapped) - linalg::projector(psi)) < 1e-12);

  // Context accessors: 1-based, context 5 uses |v1'>.
  CHECK(&set.first(1) == &set.vectors[0]);
  CHECK(&set.second(1) == &set.vectors[1]);
  CHECK(&set.second(5) == &set.vprime);
  CHECK_THROWS_AS(set.first(0), InvalidArgument);
  CHECK_THROWS_AS(set.first(6), InvalidArgument);
}

TEST_CASE("optimal state amplitudes") {
  const Vector psi = optimal_state();
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(psi[0].real() == doctest::Approx(0.66874).epsilon(1e-5));
  CHECK(psi[1].real() == doctest::Approx(0.66874).epsilon(1e-5));
  CHECK(psi[2].real() == doctest::Approx(0.32492).epsilon(1e-4));
}

TEST_CASE("quantum bound at the optimal state") {
  CHECK(quantum_bound() == doctest::Approx(-3.94427191).epsilon(1e-9));
  const double v = kcbs_value(optimal_state(), pentagram());
  CHECK(std::abs(v - kQuantum) < 1e-9);
  const auto terms = term_values(linalg::projector(optimal_state()), pentagram(), false);
  for (double t : terms) CHECK(std::abs(t - kIdealTerm) < 1e-12);
}

TEST_CASE("kcbs_value matches the Born-rule oracle") {
  const PentagramSet set = pentagram();
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector psi = testing::random_state(rng);
    double oracle = 0.0;
    for (std::size_t i = 0; i < 5; ++i)
      oracle += pair_oracle(set.vectors[i], set.vectors[(i + 1) % 5], psi);
    CHECK(std::abs(kcbs_value(psi, set) - oracle) < 1e-12);
    CHECK(std::abs(kcbs_value(linalg::projector(psi), set) - oracle) < 1e-12);
  }
}

TEST_CASE("maximally mixed state") {
  const Matrix rho = Complex(1.0 / 3.0) * Matrix::identity(3);
  CHECK(kcbs_value(rho, pentagram()) == doctest::Approx(5.0 - 20.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("no random state beats the quantum bound") {
  const PentagramSet set = pentagram();
  std::mt19937_64 rng(2024);
  double best = 1e9;
  Vector best_state;
  for (int trial = 0; trial < 10000; ++trial) {
    const Vector psi = testing::random_state(rng);
    const double v = kcbs_value(psi, set);
    CHECK(v >= kQuantum - 1e-9);
    if (v < best) best = v, best_state = psi;
  }
  // Local refinement from the best sample: random-walk descent.
  std::normal_distribution<double> g;
  double step = 0.05;
  for (int it = 0; it < 20000 && step > 1e-9; ++it) {
    Vector cand = best_state;
    for (std::size_t k = 0; k < 3; ++k) cand[k] += Complex(step * g(rng), step * g(rng));
    cand = cand.normalized();
    const double v = kcbs_value(cand, set);
    if (v < best) {
      best = v, best_state = cand;
    } else if (it % 50 == 0) {
      step *= 0.7;
    }
  }
  CHECK(best >= kQuantum - 1e-9);
  CHECK(best - kQuantum < 1e-8);
  CHECK(std::norm(linalg::inner(best_state, optimal_state())) > 1.0 - 1e-6);
}

TEST_CASE("classical bound by exhaustive assignment") {
  int minimum = 100;
  int attained = 0;
  for (unsigned mask = 0; mask < 32; ++mask) {
    std::array<int, 5> a{};
    for (int i = 0; i < 5; ++i) a[i] = (mask >> i) & 1u ? -1 : 1;
    int sum = 0;
    for (int i = 0; i < 5; ++i) sum += a[i] * a[(i + 1) % 5];
    CHECK(sum >= static_cast<int>(kClassicalBound));
    if (sum < minimum) minimum = sum, attained = 0;
    if (sum == minimum) ++attained;
  }
  CHECK(minimum == -3);
  CHECK(attained > 0);
}

TEST_CASE("expectation_from_joint") {
  JointRow row{.p_minus_plus = 0.42, .p_plus_plus = 0.11, .p_plus_minus = 0.47};
  CHECK(expectation_from_joint(row) == doctest::Approx(-0.78).epsilon(1e-12));
  CHECK(expectation_from_joint(JointRow{.p_plus_plus = 1.0}) == 1.0);
  const double p = 1.0 / std::sqrt(5.0);
  JointRow ideal{.p_minus_plus = p, .p_plus_plus = 1.0 - 2.0 * p, .p_plus_minus = p};
  CHECK(expectation_from_joint(ideal) == doctest::Approx(kIdealTerm).epsilon(1e-12));
  CHECK_THROWS_AS(expectation_from_joint(JointRow{.p_plus_plus = 1.2}), InvalidArgument);
  CHECK_THROWS_AS(expectation_from_joint(JointRow{.p_minus_plus = -0.1}), InvalidArgument);
}

TEST_CASE("expectation_sigma") {
  JointRow row{.p_minus_plus = 0.4, .p_plus_plus = 0.2, .p_plus_minus = 0.4,
               .sigma_minus_plus = 0.03, .sigma_plus_plus = 0.04};
  CHECK(expectation_sigma(row) == doctest::Approx(0.05).epsilon(1e-12));
  row.term_sigma = 0.08;
  CHECK(expectation_sigma(row) == 0.08);
}

TEST_CASE("modified_kcbs") {
  const std::array<double, 5> table{-0.78, -0.80, -0.77, -0.78, -0.79};
  CHECK(std::abs(modified_kcbs(table, 0.93) - -3.85) < 0.02);
  CHECK(std::abs(modified_kcbs(table, 0.93) - -3.84) <= 0.02);
  CHECK(modified_kcbs(table, 1.0) == doctest::Approx(-3.92).epsilon(1e-12));
  const std::array<double, 5> boundary{-0.6, -0.6, -0.6, -0.6, -0.6};
  CHECK(modified_kcbs(boundary, 1.0) == doctest::Approx(-3.0).epsilon(1e-12));

  // Monotone decreasing in R.
  double prev = 1e9;
  for (int k = 0; k <= 40; ++k) {
    const double r = -1.0 + 0.05 * k;
    const double v = modified_kcbs(table, r);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("overlap_R") {
  const PentagramSet ideal = pentagram();
  const Vector psi = optimal_state();
  CHECK(overlap_R(ideal, psi) == doctest::Approx(1.0).epsilon(1e-12));

  // Orthogonal v1' (v1' = v2 is orthogonal to v1): brute-force operator oracle.
  PentagramSet ortho = ideal;
  ortho.vprime = ideal.vectors[1];
  const Matrix p1 = linalg::projector(ideal.vectors[0]);
  const Matrix pp = linalg::projector(ortho.vprime);
  const double p1v = std::norm(linalg::inner(ideal.vectors[0], psi));
  const double ppv = std::norm(linalg::inner(ortho.vprime, psi));
  const Matrix sym = Complex(0.5) * (p1 * pp + pp * p1);
  const double oracle = 1.0 - 2.0 * p1v - 2.0 * ppv + 4.0 * linalg::expectation(sym, psi);
  CHECK(overlap_R(ortho, psi) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(overlap_R(ortho, psi) == doctest::Approx(1.0 - 4.0 / std::sqrt(5.0)).epsilon(1e-12));

  // Non-commuting case: stays real and inside [-1, 1].
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    PentagramSet s = ideal;
    s.vprime = testing::random_state(rng);
    const Vector state = testing::random_state(rng);
    const double r = overlap_R(s, state);
    CHECK(r >= -1.0 - 1e-12);
    CHECK(r <= 1.0 + 1e-12);
    CHECK(r == doctest::Approx(overlap_R(s, linalg::projector(state))).epsilon(1e-12));
  }
}

TEST_CASE("misaligned v1' at the reference operating point") {
  const PentagramSet ideal = pentagram();
  const Vector psi = optimal_state();
  const double angle = misalignment_for_overlap(ideal, psi, 0.93);
  CHECK(angle > 0.0);
  CHECK(angle < std::numbers::pi / 2);
  const PentagramSet set = misalign_prime(ideal, angle, psi);
  CHECK(overlap_R(set, psi) == doctest::Approx(0.93).epsilon(1e-9));
  // Context 5 remains an orthogonal pair and the Born weight of v1' is kept.
  CHECK(std::abs(linalg::inner(set.vectors[4], set.vprime)) < 1e-12);
  CHECK(std::abs(set.vprime.norm() - 1.0) < 1e-12);
  CHECK(std::norm(linalg::inner(set.vprime, psi)) ==
        doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-9));
  const auto terms = term_values(linalg::projector(psi), set, true);
  for (double t : terms) CHECK(t == doctest::Approx(kIdealTerm).epsilon(1e-9));
  CHECK(modified_kcbs(terms, 0.93) == doctest::Approx(kQuantum + 0.07).epsilon(1e-9));

  CHECK(misalignment_for_overlap(ideal, psi, 1.0) == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(misalignment_for_overlap(ideal, psi, 1.5), InvalidArgument);
}

TEST_CASE("efficiency_correct") {
  SUBCASE("equal counts and efficiencies") {
    const std::array<std::uint64_t, 3> c{100, 100, 100};
    const std::array<double, 3> eta{0.5, 0.5, 0.5};
    const JointRow row = efficiency_correct(c, eta);
    CHECK(row.p_minus_plus == doctest::Approx(1.0 / 3.0));
    CHECK(row.p_plus_minus == doctest::Approx(1.0 / 3.0));
    CHECK(row.p_plus_plus == doctest::Approx(1.0 / 3.0));
    CHECK(row.p_minus_minus == 0.0);
  }
  SUBCASE("ideal Born weights at 1e4") {
    const std::array<std::uint64_t, 3> c{4472, 4472, 1056};
    const std::array<double, 3> eta{1, 1, 1};
    const JointRow row = efficiency_correct(c, eta);
    CHECK(row.p_minus_plus == doctest::Approx(0.4472));
    CHECK(row.p_plus_minus == doctest::Approx(0.4472));
    CHECK(row.p_plus_plus == doctest::Approx(0.1056));
    CHECK(row.sigma_minus_plus > 0.0);
  }
  SUBCASE("mode roles follow the map") {
    const std::array<std::uint64_t, 3> c{10, 20, 70};
    const std::array<double, 3> eta{1, 1, 1};
    const JointRow row = efficiency_correct(c, eta, ContextModes{2, 0, 1});
    CHECK(row.p_minus_plus == doctest::Approx(0.7));
    CHECK(row.p_plus_minus == doctest::Approx(0.1));
    CHECK(row.p_plus_plus == doctest::Approx(0.2));
  }
  SUBCASE("unit efficiency is the identity on fractions") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::uint64_t> d(0, 5000);
    for (int trial = 0; trial < 100; ++trial) {
      const std::array<std::uint64_t, 3> c{d(rng) + 1, d(rng), d(rng)};
      const double n = static_cast<double>(c[0] + c[1] + c[2]);
      const JointRow row = efficiency_correct(c, std::array<double, 3>{1, 1, 1});
      CHECK(row.p_minus_plus == doctest::Approx(c[0] / n).epsilon(1e-14));
      CHECK(row.p_plus_minus == doctest::Approx(c[1] / n).epsilon(1e-14));
      CHECK(row.p_plus_plus == doctest::Approx(c[2] / n).epsilon(1e-14));
    }
  }
  SUBCASE("Monte Carlo unbiasedness under unequal efficiencies") {
    const std::array<double, 3> eta{0.85, 0.83, 0.86};
    const std::array<double, 3> p{0.4472, 0.4472, 0.1056};
    std::mt19937_64 rng(99);
    std::array<double, 3> mean{};
    const int runs = 200;
    for (int r = 0; r < runs; ++r) {
      std::discrete_distribution<int> pick({eta[0] * p[0], eta[1] * p[1], eta[2] * p[2]});
      std::array<std::uint64_t, 3> c{};
      for (int k = 0; k < 10000; ++k) ++c[pick(rng)];
      const JointRow row = efficiency_correct(c, eta);
      mean[0] += row.p_minus_plus / runs;
      mean[1] += row.p_plus_minus / runs;
      mean[2] += row.p_plus_plus / runs;
    }
    // Standard error of the mean is about 3.5e-4; allow 4 of them.
    for (int k = 0; k < 3; ++k) CHECK(std::abs(mean[k] - p[k]) < 1.4e-3);
  }
  SUBCASE("errors") {
    const std::array<std::uint64_t, 3> zero{0, 0, 0};
    CHECK_THROWS_AS(efficiency_correct(zero, std::array<double, 3>{1, 1, 1}), InvalidArgument);
    const std::array<std::uint64_t, 3> c{1, 1, 1};
    CHECK_THROWS_AS(efficiency_correct(c, std::array<double, 3>{0.0, 1, 1}), InvalidArgument);
    CHECK_THROWS_AS(efficiency_correct(c, std::array<double, 3>{1.1, 1, 1}), InvalidArgument);
  }
}

TEST_CASE("analyze_table on the published joint table") {
  // Efficiency-corrected probabilities as printed, with row 2's aux entry
  // placed under P(+,+).
  JointProbTable t{};
  const std::array<std::array<double, 3>, 5> probs{{{0.42, 0.11, 0.47},
                                                     {0.45, 0.10, 0.45},
                                                     {0.47, 0.11, 0.42},
                                                     {0.42, 0.11, 0.47},
                                                     {0.46, 0.11, 0.44}}};
  const std::array<double, 5> sig{0.04, 0.04, 0.03, 0.04, 0.04};
  for (std::size_t i = 0; i < 5; ++i) {
    t[i].p_minus_plus = probs[i][0];
    t[i].p_plus_plus = probs[i][1];
    t[i].p_plus_minus = probs[i][2];
    t[i].term_sigma = sig[i];
  }
  const KCBSResult r = analyze_table(t, 0.93, 0.0);
  CHECK(r.chi_mod == doctest::Approx(r.chi + 0.07).epsilon(1e-12));
  CHECK(std::abs(r.chi_mod - -3.84) <= 0.03);
  CHECK(r.sigma == doctest::Approx(std::sqrt(0.0073)).epsilon(1e-9));
  CHECK(std::abs(r.sigma - 0.08) < 0.01);
  CHECK(r.R == 0.93);
  for (double term : r.terms) {
    CHECK(term >= -1.0);
    CHECK(term <= 1.0);
  }
}

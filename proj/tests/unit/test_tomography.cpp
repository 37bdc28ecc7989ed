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
#include "cqrng/kcbs.hpp"
#include "cqrng/tomography.hpp"
#include "unit/helpers.hpp"

using namespace cqrng;
using namespace cqrng::tomography;
using linalg::Complex;
using linalg::Matrix;
using linalg::Vector;

namespace {

Matrix random_mixed(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) a(i, j) = {g(rng), g(rng)};
  Matrix r = a * linalg::dagger(a);
  return Complex(1.0 / linalg::trace(r).real()) * r;
}

const Matrix& psi0() {
  static const Matrix p = linalg::projector(kcbs::optimal_state());
  return p;
}

const MUBSet& mubs() {
  static const MUBSet m = mub_set();
  return m;
}

}  // namespace

TEST_CASE("mutually unbiased bases") {
  for (const auto& b : mubs().bases) CHECK(linalg::is_unitary(b, 1e-12));
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b)
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k) {
          const double o =
              std::norm(linalg::inner(mubs().bases[a].column(j), mubs().bases[b].column(k)));
          CHECK(std::abs(o - 1.0 / 3.0) < 1e-12);
        }
}

TEST_CASE("validate_density") {
  CHECK_NOTHROW(validate_density(psi0()));
  CHECK_THROWS_AS(validate_density(Matrix::diagonal({0.5, 0.6, -0.1})), InvalidArgument);
  CHECK_THROWS_AS(validate_density(Matrix::diagonal({0.5, 0.6, 0.1})), InvalidArgument);
  CHECK_THROWS_AS(validate_density(Matrix::identity(2)), DimensionError);
}

TEST_CASE("simulate_counts") {
  SUBCASE("maximally mixed is flat") {
    const Matrix mixed = Complex(1.0 / 3.0) * Matrix::identity(3);
    const auto d = simulate_counts(mixed, mubs(), 30000, 1);
    const double sd = std::sqrt(30000.0 * (1.0 / 3.0) * (2.0 / 3.0));
    for (const auto& basis : d.counts) {
      CHECK(basis[0] + basis[1] + basis[2] == 30000);
      for (auto n : basis) CHECK(std::abs(static_cast<double>(n) - 10000.0) < 4.0 * sd);
    }
  }
  SUBCASE("optimal state in the computational basis") {
    const auto p = born_table(psi0(), mubs());
    CHECK(p[0][0] == doctest::Approx(0.4472136).epsilon(1e-6));
    CHECK(p[0][1] == doctest::Approx(0.4472136).epsilon(1e-6));
    CHECK(p[0][2] == doctest::Approx(0.1055728).epsilon(1e-6));
    const auto d = simulate_counts(psi0(), mubs(), 100000, 2);
    for (std::size_t k = 0; k < 3; ++k) {
      const double sd = std::sqrt(1e5 * p[0][k] * (1 - p[0][k]));
      CHECK(std::abs(static_cast<double>(d.counts[0][k]) - 1e5 * p[0][k]) < 4.0 * sd);
    }
  }
  SUBCASE("efficiencies weight the outcomes") {
    const Matrix mixed = Complex(1.0 / 3.0) * Matrix::identity(3);
    const auto d = simulate_counts(mixed, mubs(), 200000, 3, {1.0, 0.5, 0.5});
    const double f0 = static_cast<double>(d.counts[1][0]) / 2e5;
    CHECK(std::abs(f0 - 0.5) < 0.005);
    CHECK(d.eta == std::array<double, 3>{1.0, 0.5, 0.5});
  }
  CHECK(simulate_counts(psi0(), mubs(), 500, 9) == simulate_counts(psi0(), mubs(), 500, 9));
  CHECK_THROWS_AS(simulate_counts(psi0(), mubs(), 0, 1), InvalidArgument);
}

TEST_CASE("fidelity") {
  CHECK(fidelity(psi0(), psi0()) == doctest::Approx(1.0).epsilon(1e-9));
  const Matrix e0 = linalg::projector(Vector::basis(3, 0));
  const Matrix e1 = linalg::projector(Vector::basis(3, 1));
  CHECK(fidelity(e0, e1) < 1e-12);

  // Commuting states: classical fidelity (sum sqrt(p q))^2.
  const Matrix a = Matrix::diagonal({0.5, 0.3, 0.2}), b = Matrix::diagonal({0.2, 0.2, 0.6});
  const double bc = std::sqrt(0.1) + std::sqrt(0.06) + std::sqrt(0.12);
  CHECK(fidelity(a, b) == doctest::Approx(bc * bc).epsilon(1e-12));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix r = random_mixed(rng), s = random_mixed(rng);
    const Vector psi = testing::random_state(rng);
    // Pure target: F = <psi|rho|psi>.
    CHECK(std::abs(fidelity(r, linalg::projector(psi)) - linalg::expectation(r, psi)) < 1e-9);
    CHECK(std::abs(fidelity(r, s) - fidelity(s, r)) < 1e-9);
    const double f = fidelity(r, s);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }
  CHECK_THROWS_AS(fidelity(Matrix::diagonal({1.2, 0.0, -0.2}), psi0()), InvalidArgument);
}

TEST_CASE("MLE on noiseless large data") {
  const auto p = born_table(psi0(), mubs());
  TomographyData d;
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t k = 0; k < 3; ++k) d.counts[b][k] = std::llround(p[b][k] * 1e6);
  const MLEResult r = mle_reconstruct(d, mubs());
  CHECK(fidelity(r.rho, psi0()) >= 0.999);
  CHECK_NOTHROW(validate_density(r.rho, 1e-10));
}

TEST_CASE("MLE on flat data is the maximally mixed state") {
  TomographyData d;
  for (auto& basis : d.counts) basis = {1000, 1000, 1000};
  const MLEResult r = mle_reconstruct(d, mubs());
  CHECK(linalg::max_abs(r.rho - Complex(1.0 / 3.0) * Matrix::identity(3)) < 1e-3);
}

TEST_CASE("MLE output is always a density matrix") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::uint64_t> n(0, 50);
  for (int trial = 0; trial < 40; ++trial) {
    TomographyData d;
    for (auto& basis : d.counts) {
      for (auto& c : basis) c = n(rng);
      if (basis[0] + basis[1] + basis[2] == 0) basis[0] = 1;
    }
    const MLEResult r = mle_reconstruct(d, mubs());
    CHECK_NOTHROW(validate_density(r.rho, 1e-10));
    CHECK(std::isfinite(r.log_likelihood));
  }
}

TEST_CASE("likelihood never decreases across iterations") {
  const auto d = simulate_counts(psi0(), mubs(), 2000, 4, {0.85, 0.83, 0.86});
  double prev = -1e300;
  for (int cap = 1; cap <= 60; ++cap) {
    MLEOptions opt;
    opt.max_iterations = cap;
    const double f = mle_reconstruct(d, mubs(), opt).log_likelihood;
    CHECK(f >= prev);
    prev = f;
  }
}

TEST_CASE("reconstruction reproduces count fractions") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix truth = random_mixed(rng);
    const auto d = simulate_counts(truth, mubs(), 20000, 100 + trial);
    const auto p = born_table(mle_reconstruct(d, mubs()).rho, mubs());
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t k = 0; k < 3; ++k) {
        const double f = static_cast<double>(d.counts[b][k]) / 20000.0;
        const double sd = std::sqrt(std::max(f * (1 - f), 1e-6) / 20000.0);
        CHECK(std::abs(p[b][k] - f) < 3.0 * sd);
      }
  }
}

TEST_CASE("efficiency-weighted data at ten thousand counts per basis") {
  const std::array<double, 3> eta{0.85, 0.83, 0.86};
  double mean = 0.0;
  for (int s = 0; s < 20; ++s) {
    const auto d = simulate_counts(psi0(), mubs(), 10000, 1000 + s, eta);
    mean += fidelity(mle_reconstruct(d, mubs()).rho, psi0()) / 20.0;
  }
  CHECK(mean >= 0.98);
  CHECK(mean <= 1.0);
}

TEST_CASE("empty basis is rejected") {
  TomographyData d;
  d.counts[0] = {10, 0, 0};
  d.counts[1] = {0, 0, 0};
  d.counts[2] = {1, 1, 1};
  CHECK_THROWS_AS(mle_reconstruct(d, mubs()), UndersizedDataError);
}

TEST_CASE("bootstrap uncertainty") {
  const auto d = simulate_counts(psi0(), mubs(), 10000, 5, {0.85, 0.83, 0.86});
  const BootstrapResult b = bootstrap_uncertainty(d, mubs(), psi0(), 200, 77);
  CHECK(b.resamples == 200);
  CHECK(b.fidelity_std > 1e-4);
  CHECK(b.fidelity_std < 0.03);
  CHECK(b.fidelity_mean > 0.97);
  for (std::size_t i = 0; i < 3; ++i) CHECK(b.rho_std(i, i).real() > 0.0);

  const BootstrapResult again = bootstrap_uncertainty(d, mubs(), psi0(), 200, 77, 3);
  CHECK(again.fidelity_std == b.fidelity_std);
  CHECK(linalg::max_abs(again.rho_std - b.rho_std) == 0.0);

  TomographyData giant;
  for (auto& basis : giant.counts) basis = {100000000, 100000000, 100000000};
  const BootstrapResult g = bootstrap_uncertainty(giant, mubs(), psi0(), 100, 1);
  CHECK(linalg::max_abs(g.rho_std) < 1e-3);

  CHECK_THROWS_AS(bootstrap_uncertainty(d, mubs(), psi0(), 99, 1), InvalidArgument);
}

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

#include "cqrng/tomography.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

#include "cqrng/error.hpp"
#include "cqrng/rng.hpp"

namespace cqrng::tomography {

using linalg::Complex;
using linalg::Matrix;
using linalg::Vector;

namespace {

using Weights = std::array<std::array<double, 3>, 3>;

Weights corrected(const TomographyData& data) {
  Weights w{};
  for (std::size_t b = 0; b < 3; ++b) {
    std::uint64_t total = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      total += data.counts[b][k];
      w[b][k] = static_cast<double>(data.counts[b][k]) / data.eta[k];
    }
    if (total == 0) throw UndersizedDataError("tomography: a basis has no counts");
  }
  return w;
}

double log_likelihood(const Weights& w, const std::array<std::array<double, 3>, 3>& p) {
  double f = 0.0;
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t k = 0; k < 3; ++k) {
      if (w[b][k] == 0.0) continue;
      if (!(p[b][k] > 0.0)) return -std::numeric_limits<double>::infinity();
      f += w[b][k] * std::log(p[b][k]);
    }
  return f;
}

Matrix rho_from(const Matrix& l) {
  Matrix a = linalg::hermitize(linalg::dagger(l) * l);
  return Complex(1.0 / linalg::trace(a).real()) * a;
}

}  // namespace

MUBSet mub_set() {
  const Complex w = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
  const double s = 1.0 / std::sqrt(3.0);
  MUBSet m{Matrix::identity(3), Matrix(3), Matrix(3)};
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t k = 0; k < 3; ++k) {
      m.bases[1](j, k) = s * std::pow(w, static_cast<double>((j * k) % 3));
      m.bases[2](j, k) = s * std::pow(w, static_cast<double>((j * j + j * k) % 3));
    }
  return m;
}

void validate_density(const Matrix& rho, double tol) {
  if (rho.dim() != 3) throw DimensionError("density matrix must be 3x3");
  if (!linalg::is_hermitian(rho, tol)) throw InvalidArgument("density matrix is not Hermitian");
  if (std::abs(linalg::trace(rho).real() - 1.0) > tol)
    throw InvalidArgument("density matrix trace differs from 1");
  if (linalg::eig_hermitian(linalg::hermitize(rho)).values.back() < -tol)
    throw InvalidArgument("density matrix is not positive semidefinite");
}

std::array<std::array<double, 3>, 3> born_table(const Matrix& rho, const MUBSet& mubs) {
  std::array<std::array<double, 3>, 3> p{};
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t k = 0; k < 3; ++k) {
      const Vector v = mubs.bases[b].column(k);
      p[b][k] = std::max(0.0, linalg::inner(v, rho * v).real());
    }
  return p;
}

TomographyData simulate_counts(const Matrix& rho, const MUBSet& mubs,
                               std::uint64_t shots_per_basis, std::uint64_t seed,
                               const std::array<double, 3>& eta) {
  if (shots_per_basis < 1) throw InvalidArgument("simulate_counts: shots must be at least 1");
  validate_density(rho);
  for (double e : eta)
    if (!(e > 0.0 && e <= 1.0)) throw InvalidArgument("simulate_counts: eta must lie in (0, 1]");
  const auto p = born_table(rho, mubs);
  std::mt19937_64 g = rng::stream(seed, 0);
  TomographyData d;
  d.eta = eta;
  for (std::size_t b = 0; b < 3; ++b) {
    std::array<double, 3> w{};
    double total = 0.0;
    for (std::size_t k = 0; k < 3; ++k) total += w[k] = eta[k] * p[b][k];
    // Multinomial as a chain of conditional binomials.
    std::uint64_t left = shots_per_basis;
    double mass = total;
    for (std::size_t k = 0; k < 2; ++k) {
      const double q = mass > 0.0 ? std::clamp(w[k] / mass, 0.0, 1.0) : 0.0;
      std::binomial_distribution<std::uint64_t> bin(left, q);
      d.counts[b][k] = bin(g);
      left -= d.counts[b][k];
      mass -= w[k];
    }
    d.counts[b][2] = left;
  }
  return d;
}

MLEResult mle_reconstruct(const TomographyData& data, const MUBSet& mubs, const MLEOptions& opt) {
  const Weights w = corrected(data);
  std::array<std::array<Matrix, 3>, 3> proj;
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t k = 0; k < 3; ++k) proj[b][k] = linalg::projector(mubs.bases[b].column(k));

  Matrix l = Matrix::identity(3);
  Matrix rho = rho_from(l);
  double f = log_likelihood(w, born_table(rho, mubs));
  double step = 1.0;
  MLEResult res;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    res.iterations = it;
    const auto p = born_table(rho, mubs);
    double total = 0.0;
    Matrix g(3);
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t k = 0; k < 3; ++k) {
        total += w[b][k];
        if (w[b][k] > 0.0) g += Complex(w[b][k] / p[b][k]) * proj[b][k];
      }
    const double t = linalg::trace(linalg::dagger(l) * l).real();
    // d f / d rho projected on trace-preserving directions, pulled back to L.
    const Matrix h = Complex(1.0 / (t * total)) * (g - Complex(total) * Matrix::identity(3));
    // Any complex L parametrizes a valid state; the full matrix conditions
    // the ascent better than its triangular part.
    const Matrix dir = l * h;
    const double slope = 2.0 * total * std::pow(linalg::frobenius_norm(dir), 2);

    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Matrix cand = l + Complex(step) * dir;
      const Matrix rc = rho_from(cand);
      const double fc = log_likelihood(w, born_table(rc, mubs));
      if (fc >= f + 1e-4 * step * slope) {
        const double gain = fc - f;
        l = cand;
        rho = rc;
        f = fc;
        accepted = true;
        step *= 1.5;
        if (gain < opt.tolerance) res.converged = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) res.converged = true;  // no ascent direction left at machine precision
    if (res.converged) break;
  }
  res.rho = rho;
  res.log_likelihood = f;
  return res;
}

double fidelity(const Matrix& rho, const Matrix& sigma) {
  validate_density(rho, 1e-8);
  validate_density(sigma, 1e-8);
  const Matrix s = linalg::sqrt_psd(linalg::hermitize(rho));
  const auto es = linalg::eig_hermitian(linalg::hermitize(s * sigma * s));
  // Eigenvalues under the round-off floor of the product are zero; their
  // square roots would otherwise add ~1e-8 for pure arguments.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1e-300, es.values[0]);
  double tr = 0.0;
  for (double v : es.values)
    if (v > floor) tr += std::sqrt(v);
  return std::clamp(tr * tr, 0.0, 1.0);
}

BootstrapResult bootstrap_uncertainty(const TomographyData& data, const MUBSet& mubs,
                                      const Matrix& target, int resamples, std::uint64_t seed,
                                      unsigned threads) {
  if (resamples < 100) throw InvalidArgument("bootstrap: at least 100 resamples required");
  corrected(data);
  std::vector<Matrix> rhos(static_cast<std::size_t>(resamples));
  std::vector<double> fids(rhos.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t r; (r = next.fetch_add(1)) < rhos.size();) {
      std::mt19937_64 g = rng::stream(seed, r);
      TomographyData d = data;
      bool ok;
      do {
        ok = true;
        for (std::size_t b = 0; b < 3; ++b) {
          std::uint64_t total = 0;
          for (std::size_t k = 0; k < 3; ++k) {
            const auto n = data.counts[b][k];
            d.counts[b][k] = n == 0 ? 0 : std::poisson_distribution<std::uint64_t>(
                                              static_cast<double>(n))(g);
            total += d.counts[b][k];
          }
          ok = ok && total > 0;
        }
      } while (!ok);
      rhos[r] = mle_reconstruct(d, mubs).rho;
      fids[r] = fidelity(rhos[r], target);
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, rhos.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }

  const double n = static_cast<double>(rhos.size());
  BootstrapResult out;
  out.resamples = resamples;
  out.rho_std = Matrix(3);
  Matrix mean(3);
  for (const auto& r : rhos) mean += Complex(1.0 / n) * r;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double vr = 0.0, vi = 0.0;
      for (const auto& r : rhos) {
        vr += std::pow(r(i, j).real() - mean(i, j).real(), 2);
        vi += std::pow(r(i, j).imag() - mean(i, j).imag(), 2);
      }
      out.rho_std(i, j) = Complex(std::sqrt(vr / (n - 1)), std::sqrt(vi / (n - 1)));
    }
  for (double f : fids) out.fidelity_mean += f / n;
  double vf = 0.0;
  for (double f : fids) vf += std::pow(f - out.fidelity_mean, 2);
  out.fidelity_std = std::sqrt(vf / (n - 1));
  return out;
}

}  // namespace cqrng::tomography

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

#include "cqrng/kcbs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cqrng/error.hpp"

namespace cqrng::kcbs {

using linalg::Complex;
using linalg::Matrix;
using linalg::Vector;

namespace {

constexpr double kPi = std::numbers::pi;

Vector cross(const Vector& a, const Vector& b) {
  return Vector{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0]};
}

void require_context(std::size_t context) {
  if (context < 1 || context > kContexts)
    throw InvalidArgument("context index must be in 1..5");
}

// Re <A B> on rho, i.e. Tr[rho (AB + BA)/2].
double symmetrized(const Matrix& rho, const Matrix& a, const Matrix& b) {
  return linalg::trace(rho * (a * b)).real();
}

}  // namespace

double quantum_bound() { return 5.0 - 4.0 * std::sqrt(5.0); }

const Vector& PentagramSet::first(std::size_t context) const {
  require_context(context);
  return vectors[context - 1];
}

const Vector& PentagramSet::second(std::size_t context) const {
  require_context(context);
  return context == kContexts ? vprime : vectors[context];
}

Matrix observable(const Vector& v) {
  return Matrix::identity(v.dim()) - 2.0 * linalg::projector(v);
}

Vector optimal_state() {
  const double a = std::pow(5.0, -0.25);
  return Vector{a, a, std::sqrt(1.0 - 2.0 / std::sqrt(5.0))};
}

PentagramSet pentagram() {
  const double c5 = std::cos(kPi / 5.0);
  const double cos_t = std::sqrt(c5 / (1.0 + c5));
  const double sin_t = std::sqrt(1.0 - cos_t * cos_t);

  // Householder reflection exchanging e_z and psi0.
  const Vector psi0 = optimal_state();
  const Vector u = Vector::basis(3, 2) - psi0;
  const double uu = inner(u, u).real();
  const Matrix w = Matrix::identity(3) - (2.0 / uu) * linalg::outer(u, u);

  PentagramSet set;
  for (std::size_t j = 0; j < kContexts; ++j) {
    const double phi = 4.0 * kPi * static_cast<double>(j) / 5.0;
    const Vector uj{sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t};
    set.vectors[j] = w * uj;
  }
  set.vprime = set.vectors[0];
  set.rotation = w;
  return set;
}

double expectation_from_joint(const JointRow& row) {
  for (double p : {row.p_minus_plus, row.p_plus_plus, row.p_plus_minus, row.p_minus_minus})
    if (!(p >= 0.0 && p <= 1.0))
      throw InvalidArgument("expectation_from_joint: probability outside [0,1]");
  return row.p_plus_plus + row.p_minus_minus - row.p_plus_minus - row.p_minus_plus;
}

double expectation_sigma(const JointRow& row) {
  if (row.term_sigma > 0.0) return row.term_sigma;
  return std::sqrt(row.sigma_minus_plus * row.sigma_minus_plus +
                   row.sigma_plus_plus * row.sigma_plus_plus +
                   row.sigma_plus_minus * row.sigma_plus_minus +
                   row.sigma_minus_minus * row.sigma_minus_minus);
}

std::array<double, kContexts> term_values(const Matrix& rho, const PentagramSet& set,
                                          bool use_prime) {
  std::array<Matrix, kContexts> a;
  for (std::size_t k = 0; k < kContexts; ++k) a[k] = observable(set.vectors[k]);
  const Matrix a1p = observable(set.vprime);
  std::array<double, kContexts> terms{};
  for (std::size_t k = 0; k < kContexts; ++k) {
    const Matrix& next = (k + 1 == kContexts) ? (use_prime ? a1p : a[0]) : a[k + 1];
    terms[k] = symmetrized(rho, a[k], next);
  }
  return terms;
}

double kcbs_value(const Matrix& rho, const PentagramSet& set) {
  const auto t = term_values(rho, set, false);
  double s = 0.0;
  for (double x : t) s += x;
  return s;
}

double kcbs_value(const Vector& state, const PentagramSet& set) {
  return kcbs_value(linalg::projector(state), set);
}

double modified_kcbs(std::span<const double, kContexts> terms, double overlap) {
  double s = 0.0;
  for (double x : terms) s += x;
  return s + (1.0 - overlap);
}

double overlap_R(const PentagramSet& set, const Matrix& rho) {
  return symmetrized(rho, observable(set.vectors[0]), observable(set.vprime));
}

double overlap_R(const PentagramSet& set, const Vector& state) {
  return overlap_R(set, linalg::projector(state));
}

PentagramSet misalign_prime(const PentagramSet& set, double angle, const Vector& state) {
  const Vector& v1 = set.vectors[0];
  const Vector& v5 = set.vectors[4];
  // Unit vector orthogonal to both v1 and v5.
  Vector w = cross(v5, v1);
  for (std::size_t k = 0; k < 3; ++k) w[k] = std::conj(w[k]);
  w = w.normalized();

  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Complex a = inner(v1, state);
  const Complex b = inner(w, state);
  // |<v1'|state>|^2 = |a|^2 requires Re(conj(a) b e^{-i phi}) = K.
  double phase = 0.0;
  const Complex ab = std::conj(a) * b;
  const double r = std::abs(ab);
  if (r > 1e-15 && std::abs(s) > 0.0) {
    const double k = std::abs(c) > 1e-15
                         ? s * (std::norm(a) - std::norm(b)) / (2.0 * c)
                         : (std::norm(a) - std::norm(b)) * 1e15;
    const double ratio = std::clamp(k / r, -1.0, 1.0);
    phase = std::arg(ab) - std::acos(ratio);
  }

  PentagramSet out = set;
  out.vprime = (Complex(c) * v1 + (s * std::polar(1.0, phase)) * w).normalized();
  return out;
}

double misalignment_for_overlap(const PentagramSet& set, const Vector& state, double target) {
  auto overlap_at = [&](double angle) {
    return overlap_R(misalign_prime(set, angle, state), state);
  };
  const double r_max = overlap_at(0.0);
  const double r_min = overlap_at(kPi / 2.0);
  if (target > r_max + 1e-12 || target < r_min)
    throw InvalidArgument("misalignment_for_overlap: target overlap not reachable");
  double lo = 0.0;
  double hi = kPi / 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (overlap_at(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

JointRow efficiency_correct(std::span<const std::uint64_t, 3> counts,
                            std::span<const double, 3> eta, const ContextModes& modes) {
  for (double e : eta)
    if (!(e > 0.0 && e <= 1.0)) throw InvalidArgument("efficiency_correct: eta outside (0,1]");
  if (modes.first > 2 || modes.second > 2 || modes.aux > 2 || modes.first == modes.second ||
      modes.first == modes.aux || modes.second == modes.aux)
    throw InvalidArgument("efficiency_correct: invalid mode assignment");

  std::array<double, 3> w{};
  double total = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    w[k] = static_cast<double>(counts[k]) / eta[k];
    total += w[k];
  }
  if (total <= 0.0) throw InvalidArgument("efficiency_correct: all counts are zero");

  std::array<double, 3> p{}, sigma{};
  for (std::size_t k = 0; k < 3; ++k) p[k] = w[k] / total;
  // dP_k/dc_j = (delta_kj - P_k) / (W eta_j), var(c_j) = c_j.
  for (std::size_t k = 0; k < 3; ++k) {
    double var = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      const double d = ((k == j ? 1.0 : 0.0) - p[k]) / (total * eta[j]);
      var += d * d * static_cast<double>(counts[j]);
    }
    sigma[k] = std::sqrt(var);
  }
  // Correlator t = sum_k s_k P_k with s = -1 on clicks, +1 on aux.
  double t = 0.0;
  std::array<double, 3> sign{};
  sign[modes.first] = -1.0;
  sign[modes.second] = -1.0;
  sign[modes.aux] = 1.0;
  for (std::size_t k = 0; k < 3; ++k) t += sign[k] * p[k];
  double t_var = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    const double d = (sign[j] - t) / (total * eta[j]);
    t_var += d * d * static_cast<double>(counts[j]);
  }

  JointRow row;
  row.p_minus_plus = p[modes.first];
  row.p_plus_minus = p[modes.second];
  row.p_plus_plus = p[modes.aux];
  row.p_minus_minus = 0.0;
  row.sigma_minus_plus = sigma[modes.first];
  row.sigma_plus_minus = sigma[modes.second];
  row.sigma_plus_plus = sigma[modes.aux];
  row.term_sigma = std::sqrt(t_var);
  return row;
}

KCBSResult analyze_table(const JointProbTable& table, double overlap, double overlap_sigma) {
  if (!(overlap >= -1.0 && overlap <= 1.0))
    throw InvalidArgument("analyze_table: overlap outside [-1,1]");
  KCBSResult result;
  double var = 0.0;
  for (std::size_t k = 0; k < kContexts; ++k) {
    result.terms[k] = expectation_from_joint(table[k]);
    result.term_sigmas[k] = expectation_sigma(table[k]);
    var += result.term_sigmas[k] * result.term_sigmas[k];
    result.chi += result.terms[k];
  }
  result.R = overlap;
  result.R_sigma = overlap_sigma;
  result.chi_mod = modified_kcbs(result.terms, overlap);
  result.sigma = std::sqrt(var + overlap_sigma * overlap_sigma);
  return result;
}

}  // namespace cqrng::kcbs

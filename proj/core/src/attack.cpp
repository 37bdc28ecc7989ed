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


// Explicit attack: column generation over single-member models.
//
// A member is a qutrit state with its own chain v1 -> v2 -> ... -> v5 -> v1'
// in which each link has overlap at most max_overlap(eps_com), so the
// commutator bound holds by construction. For a fixed pool of members the
// best ensemble is a linear-fractional program whose optimum sits on a
// vertex with at most three members; vertices are enumerated exactly. Dual
// prices from the best vertex then steer gradient ascent for new members.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cqrng/certifier.hpp"
#include "cqrng/error.hpp"
#include "cqrng/kcbs.hpp"
#include "cqrng/rng.hpp"

namespace cqrng::certifier {

namespace {

using linalg::Complex;
using linalg::Vector;

constexpr std::size_t kParams = 6 + 6 + 5 * 8;
constexpr int kAscentSteps = 250;
constexpr double kFdStep = 1e-6;
constexpr double kCheckTol = 1e-10;

struct Stats {
  std::array<double, 6> p{};
  std::array<double, 5> pair{};
  double x11 = 0.0;  // Re <Pi1 Pi1'>

  double chi() const {
    double s = 0.0;
    for (std::size_t c = 0; c < 5; ++c) s += 1.0 - 2.0 * p[c] - 2.0 * p[c + 1] + 4.0 * pair[c];
    return s;
  }
  double R() const { return 1.0 - 2.0 * p[0] - 2.0 * p[5] + 4.0 * x11; }
  double n(double w) const {
    double s = 0.0;
    for (std::size_t c = 0; c < 5; ++c) s += std::max(w * p[c], p[c + 1]);
    return s;
  }
  double d(double w) const {
    double s = 0.0;
    for (std::size_t c = 0; c < 5; ++c) s += w * p[c] + p[c + 1];
    return s;
  }
};

struct Member {
  Vector psi;
  std::array<Vector, 6> v;
  Stats s;
  std::vector<double> params;  // empty for hand-built members
};

Stats stats_of(const Vector& psi, const std::array<Vector, 6>& v) {
  Stats s;
  std::array<Complex, 6> amp;
  for (std::size_t i = 0; i < 6; ++i) {
    amp[i] = linalg::inner(v[i], psi);
    s.p[i] = std::norm(amp[i]);
  }
  auto mixed = [&](std::size_t a, std::size_t b) {
    return (std::conj(amp[a]) * linalg::inner(v[a], v[b]) * amp[b]).real();
  };
  for (std::size_t c = 0; c < 5; ++c) s.pair[c] = mixed(c, c + 1);
  s.x11 = mixed(0, 5);
  return s;
}

Vector cvec(const double* x) {
  return Vector{Complex(x[0], x[1]), Complex(x[2], x[3]), Complex(x[4], x[5])};
}

Vector safe_normalized(const Vector& v) {
  return v.norm() > 1e-12 ? v.normalized() : Vector::basis(3, 0);
}

Member build(const std::vector<double>& x, double t_max) {
  Member m;
  m.psi = safe_normalized(cvec(&x[0]));
  m.v[0] = safe_normalized(cvec(&x[6]));
  for (std::size_t j = 1; j < 6; ++j) {
    const double* blk = &x[12 + 8 * (j - 1)];
    const Vector& prev = m.v[j - 1];
    Vector u = cvec(blk);
    u -= linalg::inner(prev, u) * prev;
    if (u.norm() < 1e-9) {  // pick any direction orthogonal to prev
      for (std::size_t k = 0; k < 3 && u.norm() < 1e-3; ++k) {
        u = Vector::basis(3, k);
        u -= linalg::inner(prev, u) * prev;
      }
    }
    u = u.normalized();
    const double t = t_max / (1.0 + std::exp(-blk[6]));
    m.v[j] = std::sqrt(1.0 - t * t) * u + std::polar(t, blk[7]) * prev;
  }
  m.s = stats_of(m.psi, m.v);
  m.params = x;
  return m;
}

std::vector<double> params_of(const Member& m) {
  std::vector<double> x(kParams, 0.0);
  auto put = [&](double* dst, const Vector& v) {
    for (std::size_t i = 0; i < 3; ++i) {
      dst[2 * i] = v[i].real();
      dst[2 * i + 1] = v[i].imag();
    }
  };
  put(&x[0], m.psi);
  put(&x[6], m.v[0]);
  for (std::size_t j = 1; j < 6; ++j) {
    put(&x[12 + 8 * (j - 1)], m.v[j]);
    x[12 + 8 * (j - 1) + 6] = -8.0;
  }
  return x;
}

Member hand_built(const Vector& psi, const std::array<Vector, 6>& v) {
  Member m{psi, v, stats_of(psi, v), {}};
  m.params = params_of(m);
  return m;
}

// Deterministic members: every 0/1 assignment on the path 1-2-3-4-5-1' with
// no two adjacent ones.
void add_deterministic(std::vector<Member>& pool) {
  const Vector e0 = Vector::basis(3, 0), e1 = Vector::basis(3, 1), e2 = Vector::basis(3, 2);
  for (unsigned bits = 0; bits < 64; ++bits) {
    if (bits & (bits >> 1)) continue;
    std::array<Vector, 6> v;
    for (std::size_t j = 0; j < 6; ++j)
      v[j] = (bits >> j) & 1U ? e0 : (j % 2 == 0 ? e1 : e2);
    pool.push_back(hand_built(e0, v));
  }
}

void add_anchors(std::vector<Member>& pool, const CertificationProblem& prob) {
  const auto set = kcbs::pentagram();
  const Vector psi = kcbs::optimal_state();
  auto push = [&](const kcbs::PentagramSet& s) {
    std::array<Vector, 6> v;
    for (std::size_t j = 0; j < 5; ++j) v[j] = s.vectors[j];
    v[5] = s.vprime;
    pool.push_back(hand_built(psi, v));
  };
  push(set);
  for (double target : {prob.R_lo, prob.R_hi, 0.5 * (prob.R_lo + prob.R_hi)}) {
    try {
      push(kcbs::misalign_prime(set, kcbs::misalignment_for_overlap(set, psi, target), psi));
    } catch (const InvalidArgument&) {
    }
  }
}

struct Vertex {
  bool found = false;
  double value = 0.0;
  std::vector<std::size_t> support;
  std::vector<double> q;
  double lambda = 0.0;  // price of the chi constraint
  double kappa = 0.0;   // price of R (positive pushes R up)
};

// Solves a k x k system in place; false when singular.
bool solve(std::vector<double>& a, std::vector<double>& b, std::size_t k) {
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::abs(a[r * k + c]) > std::abs(a[piv * k + c])) piv = r;
    if (std::abs(a[piv * k + c]) < 1e-13) return false;
    for (std::size_t j = 0; j < k; ++j) std::swap(a[c * k + j], a[piv * k + j]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const double f = a[r * k + c] / a[c * k + c];
      for (std::size_t j = 0; j < k; ++j) a[r * k + j] -= f * a[c * k + j];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = 0; c < k; ++c) b[c] /= a[c * k + c];
  return true;
}

class Enumerator {
 public:
  Enumerator(const std::vector<Member>& pool, double w, double chi_wc, double R_lo, double R_hi,
             std::size_t max_support)
      : w_(w), X_(chi_wc), lo_(R_lo), hi_(R_hi), cap_(std::min<std::size_t>(3, max_support)) {
    for (const auto& m : pool) {
      chi_.push_back(m.s.chi());
      r_.push_back(m.s.R());
      n_.push_back(m.s.n(w));
      d_.push_back(m.s.d(w));
    }
  }

  Vertex best() {
    const std::size_t P = chi_.size();
    for (std::size_t i = 0; i < P; ++i) {
      try_support({i}, {});
      if (cap_ < 2) continue;
      for (std::size_t j = i + 1; j < P; ++j) {
        for (int c = 0; c < 3; ++c) try_support({i, j}, {c});
        if (cap_ < 3) continue;
        for (std::size_t k = j + 1; k < P; ++k) {
          try_support({i, j, k}, {0, 1});
          try_support({i, j, k}, {0, 2});
        }
      }
    }
    if (best_.found) prices();
    return best_;
  }

 private:
  // Constraint rows: 0 chi <= X, 1 R >= lo, 2 R <= hi.
  double coef(int c, std::size_t i) const { return c == 0 ? chi_[i] : r_[i]; }
  double bound(int c) const { return c == 0 ? X_ : (c == 1 ? lo_ : hi_); }

  void try_support(const std::vector<std::size_t>& s, const std::vector<int>& active) {
    const std::size_t k = s.size();
    std::vector<double> a(k * k), q(k);
    for (std::size_t j = 0; j < k; ++j) a[j] = 1.0;
    q[0] = 1.0;
    for (std::size_t r = 0; r < active.size(); ++r) {
      for (std::size_t j = 0; j < k; ++j) a[(r + 1) * k + j] = coef(active[r], s[j]);
      q[r + 1] = bound(active[r]);
    }
    if (k > 1 && !solve(a, q, k)) return;
    double chi = 0, r = 0, n = 0, d = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (q[j] < -1e-14) return;
      q[j] = std::max(0.0, q[j]);
      chi += q[j] * chi_[s[j]];
      r += q[j] * r_[s[j]];
      n += q[j] * n_[s[j]];
      d += q[j] * d_[s[j]];
    }
    if (chi > X_ + 1e-12 || r < lo_ - 1e-12 || r > hi_ + 1e-12 || d < 1e-12) return;
    const double value = n / d;
    if (!best_.found || value > best_.value + 1e-15) {
      best_ = {true, value, s, q, 0.0, 0.0};
      active_ = active;
    }
  }

  // Multipliers making every support member's reduced cost zero.
  void prices() {
    const auto& s = best_.support;
    const std::size_t k = s.size();
    if (k == 1) return;
    std::vector<double> a(k * k), b(k);
    for (std::size_t i = 0; i < k; ++i) {
      b[i] = n_[s[i]] - best_.value * d_[s[i]];
      a[i * k] = 1.0;  // nu
      for (std::size_t r = 0; r < active_.size(); ++r) {
        const int c = active_[r];
        // chi enters as -lambda chi_i; R as +kappa r_i
        a[i * k + r + 1] = c == 0 ? chi_[s[i]] : -r_[s[i]];
      }
    }
    if (!solve(a, b, k)) return;
    for (std::size_t r = 0; r < active_.size(); ++r) {
      if (active_[r] == 0) best_.lambda = std::max(0.0, b[r + 1]);
      else best_.kappa = b[r + 1];
    }
  }

  double w_, X_, lo_, hi_;
  std::size_t cap_;
  std::vector<double> chi_, r_, n_, d_;
  Vertex best_;
  std::vector<int> active_;
};

// Gradient ascent on n - p d - lambda chi + kappa R (Adam, finite differences).
Member improve(std::vector<double> x, double w, double p, double lambda, double kappa,
               double t_max) {
  auto f = [&](const std::vector<double>& y) {
    const Stats s = build(y, t_max).s;
    return s.n(w) - p * s.d(w) - lambda * s.chi() + kappa * s.R();
  };
  std::vector<double> m1(kParams, 0.0), m2(kParams, 0.0), g(kParams);
  std::vector<double> best = x;
  double fbest = f(x);
  constexpr double kRate = 0.03, kB1 = 0.9, kB2 = 0.999;
  for (int it = 1; it <= kAscentSteps; ++it) {
    const double f0 = f(x);
    if (f0 > fbest) {
      fbest = f0;
      best = x;
    }
    for (std::size_t k = 0; k < kParams; ++k) {
      const double keep = x[k];
      x[k] = keep + kFdStep;
      g[k] = (f(x) - f0) / kFdStep;
      x[k] = keep;
    }
    const double c1 = 1.0 - std::pow(kB1, it), c2 = 1.0 - std::pow(kB2, it);
    for (std::size_t k = 0; k < kParams; ++k) {
      m1[k] = kB1 * m1[k] + (1 - kB1) * g[k];
      m2[k] = kB2 * m2[k] + (1 - kB2) * g[k] * g[k];
      x[k] += kRate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + 1e-12);
    }
  }
  if (f(x) > fbest) best = x;
  return build(best, t_max);
}

struct Checked {
  bool ok = false;
  double p = 0.0, chi = 0.0, R = 0.0, commutator = 0.0;
};

// Independent re-verification of a candidate ensemble.
Checked verify(const std::vector<Member>& pool, const Vertex& v, double w, double chi_wc,
               const CertificationProblem& prob, double t_max) {
  Checked c;
  double n = 0, d = 0, total = 0;
  for (std::size_t j = 0; j < v.support.size(); ++j) {
    const Member& m = pool[v.support[j]];
    const double q = v.q[j];
    for (std::size_t l = 0; l < 5; ++l) {
      const Vector& a = m.v[l];
      const Vector& b = m.v[l + 1];
      if (std::abs(linalg::inner(a, b)) > t_max + 1e-12) return c;
      const double nrm = linalg::spectral_norm(
          linalg::commutator(kcbs::observable(a), kcbs::observable(b)));
      c.commutator = std::max(c.commutator, nrm);
    }
    const Stats s = stats_of(m.psi, m.v);
    total += q;
    c.chi += q * s.chi();
    c.R += q * s.R();
    n += q * s.n(w);
    d += q * s.d(w);
  }
  if (std::abs(total - 1.0) > kCheckTol) return c;
  if (c.commutator > prob.eps_com + 1e-10) return c;
  if (c.chi > chi_wc + kCheckTol) return c;
  if (c.R < prob.R_lo - kCheckTol || c.R > prob.R_hi + kCheckTol) return c;
  c.p = n / d;
  c.ok = true;
  return c;
}

}  // namespace

AttackResult attack_search(const CertificationProblem& prob, double chi_wc,
                           const AttackOptions& opt) {
  validate(prob);
  if (opt.ensemble_size == 0) throw InvalidArgument("ensemble_size must be positive");
  const double t_max = max_overlap(prob.eps_com);
  const auto [w_lo, w_hi] = weight_interval(prob.eta);
  std::vector<double> weights{w_hi};
  if (w_lo != w_hi) weights.push_back(w_lo);

  AttackResult result;
  std::uint64_t stream_index = 0;
  for (double w : weights) {
    auto rng = rng::stream(opt.seed, stream_index++);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit;
    std::vector<Member> pool;
    add_deterministic(pool);
    add_anchors(pool, prob);

    Vertex v;
    for (int round = 0; round <= opt.rounds; ++round) {
      v = Enumerator(pool, w, chi_wc, prob.R_lo, prob.R_hi, opt.ensemble_size).best();
      if (round == opt.rounds) break;
      const double p = v.found ? v.value : 0.5;
      for (int r = 0; r < opt.restarts; ++r) {
        std::vector<double> x(kParams);
        if (v.found && r % 2 == 1) {
          x = pool[v.support[static_cast<std::size_t>(r / 2) % v.support.size()]].params;
          for (double& e : x) e += 0.1 * gauss(rng);
        } else {
          for (double& e : x) e = gauss(rng);
        }
        double lambda = v.lambda, kappa = v.kappa;
        if (r >= 2 || !v.found) {  // explore other prices
          lambda = 2.0 * unit(rng);
          kappa = 4.0 * unit(rng) - 1.0;
        }
        pool.push_back(improve(std::move(x), w, p, lambda, kappa, t_max));
      }
    }
    if (!v.found) continue;
    const Checked c = verify(pool, v, w, chi_wc, prob, t_max);
    if (!c.ok) continue;
    if (!result.feasible || c.p > result.p_guess) {
      result.feasible = true;
      result.p_guess = c.p;
      result.weight = w;
      result.chi = c.chi;
      result.R = c.R;
      result.max_commutator = c.commutator;
      result.members.clear();
      for (std::size_t j = 0; j < v.support.size(); ++j) {
        const Member& m = pool[v.support[j]];
        result.members.push_back({v.q[j], m.psi, m.v});
      }
    }
  }
  return result;
}

}  // namespace cqrng::certifier

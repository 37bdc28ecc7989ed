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

#include "cqrng/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <random>

#include "cqrng/error.hpp"

namespace cqrng::mesh {

using linalg::Complex;
using linalg::Matrix;
using linalg::Vector;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSynthesisTol = 1e-8;

double wrap(double phi) {
  double r = std::fmod(phi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

// Target rows (<v| as a row vector) for the two detected outcomes.
std::pair<Vector, Vector> target_rows(const kcbs::PentagramSet& set, std::size_t context) {
  auto bra = [](const Vector& v) {
    Vector out(v.dim());
    for (std::size_t k = 0; k < v.dim(); ++k) out[k] = std::conj(v[k]);
    return out;
  };
  return {bra(set.first(context)), bra(set.second(context))};
}

Vector third_row(const Vector& a, const Vector& b) {
  // Orthogonal complement of two orthonormal rows.
  Vector c{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  for (std::size_t k = 0; k < 3; ++k) c[k] = std::conj(c[k]);
  return c.normalized();
}

double phase_aligned_deviation(const Vector& row, const Vector& target) {
  const Complex o = inner(target, row);
  const Complex ph = std::abs(o) > 0.0 ? o / std::abs(o) : Complex{1.0};
  double worst = 0.0;
  for (std::size_t k = 0; k < row.dim(); ++k)
    worst = std::max(worst, std::abs(row[k] - ph * target[k]));
  return worst;
}

std::pair<std::size_t, std::size_t> cascade_pair(std::size_t k) {
  return k % 2 == 0 ? std::pair<std::size_t, std::size_t>{0, 1}
                    : std::pair<std::size_t, std::size_t>{1, 2};
}

MeshConfig cascade_config(const std::vector<double>& params, std::size_t context) {
  MeshConfig cfg;
  cfg.label = "context" + std::to_string(context);
  const std::size_t cells = params.size() / 2;
  for (std::size_t k = 0; k < cells; ++k) {
    cfg.settings.push_back({"C" + std::to_string(context) + ".T" + std::to_string(k + 1),
                            MZISetting::from_delta(params[2 * k], params[2 * k + 1]),
                            cascade_pair(k), static_cast<int>(k)});
  }
  return cfg;
}

// Real-orthogonal target: O T1 T2 T3 = D with reflections on (0,1), (1,2),
// (0,1). Returns the three half-angles.
std::array<double, 3> real_elimination(std::array<std::array<double, 3>, 3> m) {
  auto reflect = [&m](std::size_t j, std::size_t k, double h) {
    const double s = std::sin(h), c = std::cos(h);
    for (auto& row : m) {
      const double a = row[j], b = row[k];
      row[j] = a * s + b * c;
      row[k] = a * c - b * s;
    }
  };
  const double h1 = std::atan2(-m[2][1], m[2][0]);
  reflect(0, 1, h1);
  const double h2 = std::atan2(-m[2][2], m[2][1]);
  reflect(1, 2, h2);
  const double h3 = std::atan2(m[0][0], m[0][1]);
  reflect(0, 1, h3);
  return {h1, h2, h3};
}

// Solves a small dense system in place by Gaussian elimination with partial
// pivoting. Returns false if singular.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-300) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * b[c];
    b[i] = s / a[i * n + i];
  }
  return true;
}

std::vector<double> cascade_residual(const std::vector<double>& params, std::size_t first,
                                     std::size_t second, const Vector& t1, const Vector& t2) {
  Matrix u = Matrix::identity(3);
  for (std::size_t k = 0; k < params.size() / 2; ++k) {
    const auto pair = cascade_pair(k);
    u = linalg::embed_two_mode(mzi_transfer(MZISetting{params[2 * k + 1] - 0.5 * params[2 * k],
                                                       params[2 * k + 1] + 0.5 * params[2 * k]}),
                               pair, 3) *
        u;
  }
  std::vector<double> r;
  r.reserve(12);
  for (auto [row, target] : {std::pair{first, &t1}, std::pair{second, &t2}}) {
    const Vector v = u.row(row);
    const Complex o = inner(*target, v);
    const Complex ph = std::abs(o) > 1e-300 ? o / std::abs(o) : Complex{1.0};
    for (std::size_t k = 0; k < 3; ++k) {
      const Complex d = v[k] - ph * (*target)[k];
      r.push_back(d.real());
      r.push_back(d.imag());
    }
  }
  return r;
}

double sq_norm(const std::vector<double>& r) {
  double s = 0.0;
  for (double x : r) s += x * x;
  return s;
}

// Levenberg-Marquardt over a cascade of `cells` cells. Returns the best
// parameter vector and its max-abs residual.
std::pair<std::vector<double>, double> fit_cascade(std::size_t cells, std::size_t first,
                                                   std::size_t second, const Vector& t1,
                                                   const Vector& t2) {
  const std::size_t p = 2 * cells;
  std::mt19937_64 rng(0x6d65736853796e74ULL + cells);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::vector<double> best;
  double best_res = 1e300;

  for (int restart = 0; restart < 40 && best_res > 1e-11; ++restart) {
    std::vector<double> x(p);
    for (auto& v : x) v = angle(rng);
    auto r = cascade_residual(x, first, second, t1, t2);
    double cost = sq_norm(r);
    double lambda = 1e-3;
    for (int it = 0; it < 400 && cost > 1e-26; ++it) {
      const std::size_t m = r.size();
      std::vector<double> jac(m * p);
      for (std::size_t j = 0; j < p; ++j) {
        auto xp = x, xm = x;
        xp[j] += 1e-7;
        xm[j] -= 1e-7;
        const auto rp = cascade_residual(xp, first, second, t1, t2);
        const auto rm = cascade_residual(xm, first, second, t1, t2);
        for (std::size_t i = 0; i < m; ++i) jac[i * p + j] = (rp[i] - rm[i]) / 2e-7;
      }
      std::vector<double> jtj(p * p, 0.0), jtr(p, 0.0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t a = 0; a < p; ++a) {
          jtr[a] -= jac[i * p + a] * r[i];
          for (std::size_t b = 0; b < p; ++b) jtj[a * p + b] += jac[i * p + a] * jac[i * p + b];
        }
      bool improved = false;
      for (int tries = 0; tries < 12 && !improved; ++tries) {
        auto a = jtj;
        auto step = jtr;
        for (std::size_t d = 0; d < p; ++d) a[d * p + d] += lambda * (1.0 + jtj[d * p + d]);
        if (solve_dense(a, step, p)) {
          auto xn = x;
          for (std::size_t d = 0; d < p; ++d) xn[d] += step[d];
          auto rn = cascade_residual(xn, first, second, t1, t2);
          const double cn = sq_norm(rn);
          if (cn < cost) {
            x = std::move(xn);
            r = std::move(rn);
            cost = cn;
            lambda = std::max(lambda * 0.3, 1e-12);
            improved = true;
            break;
          }
        }
        lambda *= 10.0;
      }
      if (!improved) break;
    }
    double res = 0.0;
    for (double v : r) res = std::max(res, std::abs(v));
    if (res < best_res) {
      best_res = res;
      best = x;
    }
  }
  return {best, best_res};
}

}  // namespace

double canonical_angle(double phi) { return wrap(phi); }

MZISetting MZISetting::canonical(double phi1, double phi2) { return {wrap(phi1), wrap(phi2)}; }

MZISetting MZISetting::from_delta(double delta, double sigma) {
  return canonical(sigma - 0.5 * delta, sigma + 0.5 * delta);
}

std::size_t StagePlan::active_cells(std::size_t context) const {
  if (context < 1 || context > kcbs::kContexts)
    throw InvalidArgument("active_cells: context index must be in 1..5");
  return prep.settings.size() + contexts[context - 1].settings.size();
}

Matrix mzi_transfer(const MZISetting& s) {
  const double half = 0.5 * s.delta();
  const Complex pre = Complex(0.0, 1.0) * std::polar(1.0, s.sigma());
  const double sn = std::sin(half), cs = std::cos(half);
  return Matrix{{pre * sn, pre * cs}, {pre * cs, -pre * sn}};
}

Matrix mesh_unitary(const MeshConfig& cfg) {
  if (cfg.dim < 2) throw InvalidArgument("mesh_unitary: dimension must be at least 2");
  Matrix u = Matrix::identity(cfg.dim);
  int layer = std::numeric_limits<int>::min();
  std::vector<bool> busy(cfg.dim, false);
  for (const auto& cell : cfg.settings) {
    const auto [j, k] = cell.modes;
    if (j >= cfg.dim || k >= cfg.dim || (j + 1 != k && k + 1 != j))
      throw InvalidArgument("mesh_unitary: cell " + cell.cell + " is not on an adjacent mode pair");
    if (cell.layer < layer)
      throw InvalidArgument("mesh_unitary: cells listed out of layer order");
    if (cell.layer != layer) {
      layer = cell.layer;
      std::fill(busy.begin(), busy.end(), false);
    }
    if (busy[j] || busy[k])
      throw InvalidArgument("mesh_unitary: overlapping cells in layer " +
                            std::to_string(cell.layer));
    busy[j] = busy[k] = true;
    u = linalg::embed_two_mode(mzi_transfer(cell.setting), cell.modes, cfg.dim) * u;
  }
  return u;
}

std::pair<double, double> synthesize_prep(const Vector& target) {
  if (target.dim() != 3) throw DimensionError("synthesize_prep: target must be a 3-vector");
  if (std::abs(target.norm() - 1.0) > 1e-10)
    throw InvalidArgument("synthesize_prep: target is not normalized");
  std::array<double, 3> t{};
  for (std::size_t k = 0; k < 3; ++k) {
    if (std::abs(target[k].imag()) > 1e-12 || target[k].real() < -1e-12)
      throw InvalidArgument("synthesize_prep: amplitudes must be non-negative reals");
    t[k] = std::max(target[k].real(), 0.0);
  }
  const double h1 = std::asin(std::clamp(t[0], -1.0, 1.0));
  const double h2 = std::atan2(t[1], t[2]);
  return {2.0 * h1, 2.0 * h2};
}

MeshConfig prep_config(double theta1, double theta2) {
  MeshConfig cfg;
  cfg.label = "prep";
  cfg.settings.push_back({"T1", MZISetting::from_delta(theta1), {0, 1}, 0});
  cfg.settings.push_back({"T2", MZISetting::from_delta(theta2), {1, 2}, 1});
  return cfg;
}

double row_residual(const Matrix& u, const kcbs::PentagramSet& set, std::size_t context,
                    const kcbs::ContextModes& modes) {
  const auto [t1, t2] = target_rows(set, context);
  return std::max(phase_aligned_deviation(u.row(modes.first), t1),
                  phase_aligned_deviation(u.row(modes.second), t2));
}

MeshConfig synthesize_context(std::size_t context, const kcbs::PentagramSet& set,
                              const kcbs::ContextModes& modes) {
  if (context < 1 || context > kcbs::kContexts)
    throw InvalidArgument("synthesize_context: context index must be in 1..5");
  const auto [t1, t2] = target_rows(set, context);
  if (std::abs(inner(t1, t2)) > 1e-10)
    throw InvalidArgument("synthesize_context: context projectors are not orthogonal");

  Matrix target(3);
  const Vector t3 = third_row(t1, t2);
  for (std::size_t k = 0; k < 3; ++k) {
    target(modes.first, k) = t1[k];
    target(modes.second, k) = t2[k];
    target(modes.aux, k) = t3[k];
  }

  bool real = true;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) real = real && std::abs(target(r, c).imag()) < 1e-12;

  if (real) {
    std::array<std::array<double, 3>, 3> m{};
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) m[r][c] = target(r, c).real();
    const auto h = real_elimination(m);
    const std::vector<double> params{2.0 * h[0], kRealCellSigma, 2.0 * h[1], kRealCellSigma,
                                     2.0 * h[2], kRealCellSigma};
    MeshConfig cfg = cascade_config(params, context);
    if (row_residual(mesh_unitary(cfg), set, context, modes) < kSynthesisTol) return cfg;
  }

  for (std::size_t cells = 3; cells <= 6; ++cells) {
    const auto [params, res] = fit_cascade(cells, modes.first, modes.second, t1, t2);
    if (res > kSynthesisTol) continue;
    MeshConfig cfg = cascade_config(params, context);
    if (row_residual(mesh_unitary(cfg), set, context, modes) < kSynthesisTol) return cfg;
  }
  throw NumericalError("synthesize_context: residual above 1e-8 for context " +
                       std::to_string(context));
}

std::array<kcbs::ContextModes, kcbs::kContexts> reference_mode_map() {
  // {first, second, aux} per context.
  return {{{0, 2, 1}, {1, 2, 0}, {1, 0, 2}, {0, 2, 1}, {2, 0, 1}}};
}

StagePlan build_plan(const kcbs::PentagramSet& set, const Vector& state,
                     const std::array<kcbs::ContextModes, kcbs::kContexts>& modes) {
  StagePlan plan;
  const auto [t1, t2] = synthesize_prep(state);
  plan.prep = prep_config(t1, t2);
  plan.theta_values = {canonical_angle(t1), canonical_angle(t2)};
  plan.modes = modes;
  for (std::size_t c = 1; c <= kcbs::kContexts; ++c) {
    plan.contexts[c - 1] = synthesize_context(c, set, modes[c - 1]);
    for (const auto& cell : plan.contexts[c - 1].settings)
      plan.theta_values.push_back(canonical_angle(cell.setting.delta()));
  }
  return plan;
}

}  // namespace cqrng::mesh

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


#include "cqrng/certifier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "cqrng/error.hpp"
#include "cqrng/kcbs.hpp"

namespace cqrng::certifier {

namespace {

constexpr std::size_t kWords = kMomentWords;  // 1, Pi1..Pi5, Pi1'
constexpr std::size_t kTri = kWords * (kWords + 1) / 2;
constexpr std::size_t kGuesses = kGuessVectors;
constexpr std::size_t kBlockVars = kGuesses * kTri;
constexpr std::array<std::pair<std::size_t, std::size_t>, 5> kPairs{
    {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}}};

// Certificate attempts while iterating.
constexpr int kCertEvery = 50;
// Crude upper bounds on slack values and on tr(T) for any feasible point.
constexpr double kSlackBound = 100.0;
constexpr double kTraceBound = 7.0;

std::size_t tri_index(std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  // row-major upper triangle
  return i * kWords - i * (i - 1) / 2 + (j - i);
}

struct SparseRow {
  std::vector<std::pair<std::size_t, double>> terms;
  double rhs = 0.0;
};

// Constraint system E x = f in Frobenius-scaled coordinates.
class Affine {
 public:
  Affine(const CertificationProblem& prob, double chi_wc, double w, double p) {
    const double eps = prob.eps_com;
    std::size_t slack = kBlockVars;
    std::vector<double> dense;

    // Collapsed intervals become equalities; two slacks pinned at zero
    // leave the feasible set without interior and stall the iteration.
    const bool ortho_eq = eps == 0.0;
    const bool r_eq = prob.R_lo == prob.R_hi;
    vars_ = kBlockVars + (ortho_eq ? 0 : 10) + (r_eq ? 0 : 2) + 2;
    auto start = [&] { dense.assign(vars_, 0.0); };
    auto add = [&](std::size_t g, std::size_t i, std::size_t j, double c) {
      const std::size_t k = g * kTri + tri_index(i, j);
      dense[k] += i == j ? c : c / std::numbers::sqrt2;
    };
    auto add_all = [&](std::size_t i, std::size_t j, double c) {
      for (std::size_t g = 0; g < kGuesses; ++g) add(g, i, j, c);
    };
    auto finish = [&](double rhs) {
      SparseRow row;
      row.rhs = rhs;
      for (std::size_t k = 0; k < dense.size(); ++k)
        if (dense[k] != 0.0) row.terms.emplace_back(k, dense[k]);
      rows_.push_back(std::move(row));
    };

    // projectivity inside each block
    for (std::size_t g = 0; g < kGuesses; ++g)
      for (std::size_t k = 1; k < kWords; ++k) {
        start();
        add(g, k, k, 1.0);
        add(g, 0, k, -1.0);
        finish(0.0);
      }
    start();
    add_all(0, 0, 1.0);
    finish(1.0);
    for (auto [a, b] : kPairs) {
      if (ortho_eq) {
        start();
        add_all(a, b, 1.0);
        finish(0.0);
        continue;
      }
      for (double sgn : {1.0, -1.0}) {
        start();
        add_all(a, b, sgn);
        dense[slack++] = 1.0;
        finish(eps / 2.0);
      }
    }
    // R = 1 - 2 T01 - 2 T06 + 4 T16
    for (auto [sgn, bound] : {std::pair{-1.0, prob.R_lo}, std::pair{1.0, prob.R_hi}}) {
      start();
      add_all(0, 1, -2.0);
      add_all(0, 6, -2.0);
      add_all(1, 6, 4.0);
      if (!r_eq) dense[slack++] = sgn;
      finish(bound - 1.0);
      if (r_eq) break;
    }
    start();
    for (auto [a, b] : kPairs) {
      add_all(0, a, -2.0);
      add_all(0, b, -2.0);
      add_all(a, b, 4.0);
    }
    dense[slack++] = 1.0;
    finish(chi_wc - 5.0);
    // N - p D - s = 0
    start();
    for (std::size_t g = 0; g < kGuesses; ++g)
      for (std::size_t c = 0; c < kPairs.size(); ++c) {
        const auto [a, b] = kPairs[c];
        const bool first = ((g >> c) & 1U) == 0;
        add(g, 0, a, w * ((first ? 1.0 : 0.0) - p));
        add(g, 0, b, (first ? 0.0 : 1.0) - p);
      }
    dense[slack++] = -1.0;
    finish(0.0);

    factor();
  }

  std::size_t vars() const { return vars_; }

  double residual(const std::vector<double>& x, std::vector<double>& r) const {
    double worst = 0.0;
    r.resize(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      double s = -rows_[i].rhs;
      for (auto [k, c] : rows_[i].terms) s += c * x[k];
      r[i] = s;
      worst = std::max(worst, std::abs(s));
    }
    return worst;
  }

  void project(std::vector<double>& x, std::vector<double>& r) const {
    residual(x, r);
    solve_normal(r);
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (auto [k, c] : rows_[i].terms) x[k] -= c * r[i];
  }

  // Farkas test on the displacement between the two current iterates:
  // lambda with E^T lambda in the cone (up to a bounded defect) and
  // f^T lambda < 0 proves that no feasible point exists.
  bool infeasible_certificate(const std::vector<double>& xk, const std::vector<double>& xa) const;

 private:
  void solve_normal(std::vector<double>& r) const {
    const std::size_t m = rows_.size();
    for (std::size_t i = 0; i < m; ++i) {  // forward
      double s = r[i];
      for (std::size_t k = 0; k < i; ++k) s -= chol_[i * m + k] * r[k];
      r[i] = s / chol_[i * m + i];
    }
    for (std::size_t i = m; i-- > 0;) {  // backward
      double s = r[i];
      for (std::size_t k = i + 1; k < m; ++k) s -= chol_[k * m + i] * r[k];
      r[i] = s / chol_[i * m + i];
    }
  }

  void factor() {
    const std::size_t m = rows_.size();
    std::vector<double> dense(vars_);
    chol_.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      std::fill(dense.begin(), dense.end(), 0.0);
      for (auto [k, c] : rows_[i].terms) dense[k] = c;
      for (std::size_t j = 0; j <= i; ++j) {
        double s = 0.0;
        for (auto [k, c] : rows_[j].terms) s += c * dense[k];
        chol_[i * m + j] = s;
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      double d = chol_[j * m + j];
      for (std::size_t k = 0; k < j; ++k) d -= chol_[j * m + k] * chol_[j * m + k];
      if (d <= 1e-14) throw NumericalError("relaxation: constraint rows are dependent");
      d = std::sqrt(d);
      chol_[j * m + j] = d;
      for (std::size_t i = j + 1; i < m; ++i) {
        double s = chol_[i * m + j];
        for (std::size_t k = 0; k < j; ++k) s -= chol_[i * m + k] * chol_[j * m + k];
        chol_[i * m + j] = s / d;
      }
    }
  }

  std::size_t vars_ = 0;
  std::vector<SparseRow> rows_;
  std::vector<double> chol_;  // lower triangle of E E^T
};

// Cone projection. Returns min eigenvalue over blocks and min slack.
std::pair<double, double> project_cone(std::vector<double>& x) {
  std::array<double, kWords * kWords> buf{};
  double min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < kGuesses; ++g) {
    double* blk = x.data() + g * kTri;
    for (std::size_t i = 0; i < kWords; ++i)
      for (std::size_t j = i; j < kWords; ++j) {
        const double v = blk[tri_index(i, j)];
        const double e = i == j ? v : v / std::numbers::sqrt2;
        buf[i * kWords + j] = e;
        buf[j * kWords + i] = e;
      }
    min_eig = std::min(min_eig, linalg::project_psd_inplace(buf, kWords));
    for (std::size_t i = 0; i < kWords; ++i)
      for (std::size_t j = i; j < kWords; ++j) {
        const double e = buf[i * kWords + j];
        blk[tri_index(i, j)] = i == j ? e : e * std::numbers::sqrt2;
      }
  }
  double min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = kBlockVars; k < x.size(); ++k) {
    min_slack = std::min(min_slack, x[k]);
    x[k] = std::max(0.0, x[k]);
  }
  return {min_eig, min_slack};
}

// Smallest block eigenvalue and the summed negative part of the slacks.
std::pair<double, double> cone_defect(const std::vector<double>& x) {
  std::array<double, kWords * kWords> buf{};
  double min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < kGuesses; ++g) {
    const double* blk = x.data() + g * kTri;
    for (std::size_t i = 0; i < kWords; ++i)
      for (std::size_t j = i; j < kWords; ++j) {
        const double v = blk[tri_index(i, j)];
        const double e = i == j ? v : v / std::numbers::sqrt2;
        buf[i * kWords + j] = e;
        buf[j * kWords + i] = e;
      }
    min_eig = std::min(min_eig, linalg::eig_symmetric(buf, kWords).values.back());
  }
  double neg = 0.0;
  for (std::size_t k = kBlockVars; k < x.size(); ++k) neg += std::max(0.0, -x[k]);
  return {min_eig, neg};
}

bool Affine::infeasible_certificate(const std::vector<double>& xk,
                                    const std::vector<double>& xa) const {
  const std::size_t m = rows_.size();
  std::vector<double> lambda(m), z(vars_);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (auto [k, c] : rows_[i].terms) s += c * (xa[k] - xk[k]);
    lambda[i] = s;
  }
  solve_normal(lambda);
  for (double sign : {1.0, -1.0}) {
    std::fill(z.begin(), z.end(), 0.0);
    double f_dot = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double l = sign * lambda[i];
      f_dot += l * rows_[i].rhs;
      scale += l * l;
      for (auto [k, c] : rows_[i].terms) z[k] += c * l;
    }
    if (scale == 0.0) return false;
    const auto [min_eig, neg_slack] = cone_defect(z);
    const double defect = kTraceBound * std::max(0.0, -min_eig) + kSlackBound * neg_slack;
    if (f_dot + defect < -1e-9 * std::sqrt(scale)) return true;
  }
  return false;
}

void check_unit(double v, const char* what) {
  if (!(v > 0.0 && v <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in (0, 1]");
}

}  // namespace

void validate(const CertificationProblem& prob) {
  if (!std::isfinite(prob.chi_hat)) throw InvalidArgument("chi_hat must be finite");
  if (prob.delta && !(*prob.delta >= 0.0 && std::isfinite(*prob.delta)))
    throw InvalidArgument("delta must be finite and non-negative");
  if (!(prob.R_lo >= -1.0 && prob.R_lo <= prob.R_hi && prob.R_hi <= 1.0))
    throw InvalidArgument("R interval must satisfy -1 <= R_lo <= R_hi <= 1");
  if (!(prob.eps_com >= 0.0 && prob.eps_com < 2.0))
    throw InvalidArgument("eps_com must lie in [0, 2)");
  for (double e : prob.eta) check_unit(e, "eta");
  if (prob.n_rounds == 0) throw InvalidArgument("n_rounds must be positive");
  if (!(prob.eps_fin > 0.0 && prob.eps_fin < 1.0))
    throw InvalidArgument("eps_fin must lie in (0, 1)");
}

double hoeffding_delta(std::uint64_t n, double eps_fin, int n_terms) {
  if (n == 0) throw InvalidArgument("hoeffding_delta: n must be positive");
  if (!(eps_fin > 0.0 && eps_fin < 1.0))
    throw InvalidArgument("hoeffding_delta: eps_fin must lie in (0, 1)");
  return n_terms * std::sqrt(std::log(2.0 / eps_fin) / (2.0 * static_cast<double>(n)));
}

double worst_case_chi(double chi_hat, double delta) { return chi_hat + delta; }

double effective_delta(const CertificationProblem& prob) {
  return prob.delta ? *prob.delta : hoeffding_delta(prob.n_rounds, prob.eps_fin);
}

double worst_case_chi(const CertificationProblem& prob) {
  return worst_case_chi(prob.chi_hat, effective_delta(prob));
}

std::pair<double, double> weight_interval(const std::array<double, 3>& eta) {
  const auto [lo, hi] = std::minmax_element(eta.begin(), eta.end());
  return {*lo / *hi, *hi / *lo};
}

double max_overlap(double eps_com) {
  if (!(eps_com >= 0.0 && eps_com <= 2.0)) throw InvalidArgument("eps_com must lie in [0, 2]");
  return std::sqrt((1.0 - std::sqrt(1.0 - eps_com * eps_com / 4.0)) / 2.0);
}

Feasibility relaxation_feasible(const CertificationProblem& prob, double chi_wc, double w,
                                double p, std::vector<double>& warm, const SolverOptions& opt) {
  const Affine affine(prob, chi_wc, w, p);
  if (warm.size() != affine.vars()) warm.assign(affine.vars(), 0.0);
  std::vector<double>& z = warm;
  std::vector<double> xa, xk(affine.vars()), scratch;

  Feasibility out;
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    out.sweeps = sweep;
    xa = z;
    affine.project(xa, scratch);
    for (std::size_t k = 0; k < xk.size(); ++k) xk[k] = 2.0 * xa[k] - z[k];
    project_cone(xk);
    double gap = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
      const double d = xk[k] - xa[k];
      z[k] += d;
      gap += d * d;
    }
    out.gap = std::sqrt(gap);
    // xk is in the cone exactly; accept it once the affine residual is small.
    const double res = affine.residual(xk, scratch);
    if (res <= opt.feas_tol) {
      out.feasible = true;
      out.min_eigenvalue = 0.0;  // xk came out of the cone projection
      out.affine_residual = res;
      out.moments.reserve(kGuesses * kWords * kWords + affine.vars() - kBlockVars);
      for (std::size_t g = 0; g < kGuesses; ++g)
        for (std::size_t i = 0; i < kWords; ++i)
          for (std::size_t j = 0; j < kWords; ++j) {
            const double v = xk[g * kTri + tri_index(i, j)];
            out.moments.push_back(i == j ? v : v / std::numbers::sqrt2);
          }
      out.moments.insert(out.moments.end(), xk.begin() + kBlockVars, xk.end());
      return out;
    }
    if (sweep % kCertEvery == 0 && affine.infeasible_certificate(xk, xa)) return out;
  }
  out.stagnated = true;
  return out;
}

BoundResult relaxation_bound(const CertificationProblem& prob, double chi_wc,
                             const SolverOptions& opt) {
  validate(prob);
  if (!(opt.bisect_tol > 0.0 && opt.bisect_tol < 0.5))
    throw InvalidArgument("bisect_tol must lie in (0, 0.5)");
  // Reversing the chain 1-2-3-4-5-1' swaps first and second click in every
  // context and maps w to 1/w; the interval is [a, 1/a], so one endpoint
  // covers both.
  const std::vector<double> weights{weight_interval(prob.eta).second};
  std::vector<std::vector<double>> warm(weights.size());

  BoundResult result;
  auto& diag = result.diagnostics;
  // Undecided tests count as feasible: the bound only moves up.
  auto test = [&](double p) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
      const Feasibility f = relaxation_feasible(prob, chi_wc, weights[k], p, warm[k], opt);
      diag.sweeps += f.sweeps;
      diag.stagnated = diag.stagnated || f.stagnated;
      if (f.feasible || f.stagnated) {
        if (f.feasible) {
          diag.min_eigenvalue = f.min_eigenvalue;
          diag.affine_residual = f.affine_residual;
        }
        diag.weight = weights[k];
        return true;
      }
    }
    return false;
  };

  if (!test(0.5)) throw InfeasibleError("certification constraints admit no model");
  double lo = 0.5, hi = 1.0;
  if (test(hi)) {
    diag.width = 0.0;
    result.p_guess = 1.0;
    return result;
  }
  while (hi - lo > opt.bisect_tol) {
    const double mid = 0.5 * (lo + hi);
    ++diag.bisection_steps;
    (test(mid) ? lo : hi) = mid;
  }
  diag.width = hi - lo;
  result.p_guess = std::min(1.0, lo + opt.bisect_tol);
  return result;
}

BoundResult relaxation_bound(const CertificationProblem& prob, const SolverOptions& opt) {
  validate(prob);
  return relaxation_bound(prob, worst_case_chi(prob), opt);
}

AttackResult attack_search(const CertificationProblem& prob, const AttackOptions& opt) {
  validate(prob);
  return attack_search(prob, worst_case_chi(prob), opt);
}

double min_entropy(double p_guess) {
  if (!(p_guess > 0.0 && p_guess <= 1.0 + 1e-12))
    throw InvalidArgument("min_entropy: p_guess must lie in (0, 1]");
  return std::max(0.0, -std::log2(std::min(1.0, p_guess)));
}

double certified_rate(double h_min, double round_rate) {
  if (!(h_min >= 0.0) || !(round_rate >= 0.0))
    throw InvalidArgument("certified_rate: arguments must be non-negative");
  return h_min * round_rate;
}

double certified_rate(const CertificationResult& result, double round_rate) {
  return certified_rate(result.h_min, round_rate);
}

CertificationResult certify(const CertificationProblem& prob, double round_rate,
                            const SolverOptions& solver, const AttackOptions& attack) {
  validate(prob);
  CertificationResult out;
  out.delta = effective_delta(prob);
  out.chi_worst = worst_case_chi(prob.chi_hat, out.delta);
  const BoundResult bound = relaxation_bound(prob, out.chi_worst, solver);
  out.p_guess_upper = bound.p_guess;
  out.diagnostics = bound.diagnostics;
  const AttackResult found = attack_search(prob, out.chi_worst, attack);
  out.attack_feasible = found.feasible;
  out.p_guess_attack = found.p_guess;
  out.h_min = min_entropy(out.p_guess_upper);
  out.round_rate = round_rate;
  out.rate = certified_rate(out.h_min, round_rate);
  return out;
}

std::vector<double> default_grid(std::size_t n) {
  if (n < 2) throw InvalidArgument("default_grid: need at least two points");
  const double lo = kcbs::quantum_bound();
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i)
    grid[i] = -3.0 + (lo + 3.0) * static_cast<double>(i) / static_cast<double>(n - 1);
  grid.back() = lo;
  return grid;
}

Curve rate_curve(const CertificationProblem& base, const std::vector<double>& chi_grid,
                 double round_rate, const SolverOptions& opt, unsigned threads) {
  validate(base);
  Curve curve;
  curve.points.resize(chi_grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < chi_grid.size();) {
      CurvePoint& pt = curve.points[i];
      pt.chi = chi_grid[i];
      try {
        const BoundResult b = relaxation_bound(base, pt.chi, opt);
        pt.p_guess_upper = b.p_guess;
        pt.h_min = min_entropy(b.p_guess);
        pt.rate = certified_rate(pt.h_min, round_rate);
      } catch (const Error& e) {
        pt.ok = false;
        pt.error = e.what();
      }
    }
  };
  const unsigned n = std::max(1U, std::min<unsigned>(threads, chi_grid.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  // h_min must not increase as chi grows (feasible sets are nested).
  for (std::size_t i = 0; i < curve.points.size(); ++i)
    for (std::size_t j = 0; j < curve.points.size(); ++j) {
      const auto& a = curve.points[i];
      const auto& b = curve.points[j];
      if (a.ok && b.ok && a.chi < b.chi && a.h_min < b.h_min) curve.monotone = false;
    }
  return curve;
}

}  // namespace cqrng::certifier

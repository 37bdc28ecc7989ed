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

#include "cqrng/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cqrng/error.hpp"

namespace cqrng::linalg {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw DimensionError(std::string(what) + ": dimension mismatch");
}

Complex conj_if(Complex x) { return std::conj(x); }
double real_of(Complex x) { return x.real(); }

// Cyclic complex Jacobi on a Hermitian row-major buffer. On
// return `a` is diagonal and `v` holds the eigenvectors as columns.
template <class T>
void jacobi(std::vector<T>& a, std::vector<T>& v, std::size_t n) {
  v.assign(n * n, T{});
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = T{1};
  auto at = [&](std::size_t r, std::size_t c) -> T& { return a[r * n + c]; };

  double scale = 0.0;
  for (const auto& x : a) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return;
  const double tiny = 1e-19 * scale;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::norm(at(p, q));
    if (std::sqrt(off) <= 1e-15 * scale) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const T apq = at(p, q);
        const double g = std::abs(apq);
        if (g <= tiny) continue;
        const T e = apq / g;  // unit phase of the pivot
        const double app = real_of(at(p, p));
        const double aqq = real_of(at(q, q));
        const double theta = 0.5 * std::atan2(2.0 * g, aqq - app);
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        // J = D R with D = diag(1, conj(e)) on (p, q).
        const T jpp = T{c};
        const T jpq = T{s};
        const T jqp = T{-s} * conj_if(e);
        const T jqq = T{c} * conj_if(e);
        for (std::size_t k = 0; k < n; ++k) {
          const T akp = at(k, p);
          const T akq = at(k, q);
          at(k, p) = akp * jpp + akq * jqp;
          at(k, q) = akp * jpq + akq * jqq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const T apk = at(p, k);
          const T aqk = at(q, k);
          at(p, k) = conj_if(jpp) * apk + conj_if(jqp) * aqk;
          at(q, k) = conj_if(jpq) * apk + conj_if(jqq) * aqk;
        }
        at(p, q) = T{};
        at(q, p) = T{};
        at(p, p) = T{real_of(at(p, p))};
        at(q, q) = T{real_of(at(q, q))};
        for (std::size_t k = 0; k < n; ++k) {
          const T vkp = v[k * n + p];
          const T vkq = v[k * n + q];
          v[k * n + p] = vkp * jpp + vkq * jqp;
          v[k * n + q] = vkp * jpq + vkq * jqq;
        }
      }
    }
  }
}

template <class T>
std::vector<std::size_t> descending_order(const std::vector<T>& a, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return real_of(a[x * n + x]) > real_of(a[y * n + y]);
  });
  return order;
}

}  // namespace

// ---------------------------------------------------------------- Vector

Vector Vector::basis(std::size_t dim, std::size_t k) {
  if (k >= dim) throw DimensionError("basis: index out of range");
  Vector v(dim);
  v[k] = 1.0;
  return v;
}

double Vector::norm() const {
  double s = 0.0;
  for (const auto& x : entries_) s += std::norm(x);
  return std::sqrt(s);
}

Vector Vector::normalized() const {
  const double n = norm();
  if (n == 0.0) throw InvalidArgument("normalized: zero vector");
  Vector out = *this;
  out *= 1.0 / n;
  return out;
}

Vector& Vector::operator+=(const Vector& o) {
  require_same_dim(dim(), o.dim(), "vector +");
  for (std::size_t i = 0; i < dim(); ++i) entries_[i] += o.entries_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& o) {
  require_same_dim(dim(), o.dim(), "vector -");
  for (std::size_t i = 0; i < dim(); ++i) entries_[i] -= o.entries_[i];
  return *this;
}

Vector& Vector::operator*=(Complex s) {
  for (auto& x : entries_) x *= s;
  return *this;
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator*(Complex s, Vector v) { return v *= s; }

Complex inner(const Vector& a, const Vector& b) {
  require_same_dim(a.dim(), b.dim(), "inner");
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::initializer_list<std::initializer_list<Complex>> rows)
    : dim_(rows.size()), entries_(rows.size() * rows.size()) {
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != dim_) throw DimensionError("Matrix: rows must form a square");
    std::copy(row.begin(), row.end(), entries_.begin() + static_cast<std::ptrdiff_t>(r * dim_));
    ++r;
  }
}

Matrix Matrix::identity(std::size_t dim) {
  Matrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::diagonal(std::initializer_list<double> diag) {
  return diagonal(std::span<const double>(diag.begin(), diag.size()));
}

Vector Matrix::row(std::size_t r) const {
  Vector v(dim_);
  for (std::size_t c = 0; c < dim_; ++c) v[c] = (*this)(r, c);
  return v;
}

Vector Matrix::column(std::size_t c) const {
  Vector v(dim_);
  for (std::size_t r = 0; r < dim_; ++r) v[r] = (*this)(r, c);
  return v;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require_same_dim(dim_, o.dim_, "matrix +");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require_same_dim(dim_, o.dim_, "matrix -");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= o.entries_[i];
  return *this;
}

Matrix& Matrix::operator*=(Complex s) {
  for (auto& x : entries_) x *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Complex s, Matrix m) { return m *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  require_same_dim(a.dim(), b.dim(), "matrix *");
  const std::size_t n = a.dim();
  Matrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

Vector operator*(const Matrix& m, const Vector& v) {
  require_same_dim(m.dim(), v.dim(), "matrix-vector *");
  Vector out(v.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) out[i] += m(i, j) * v[j];
  return out;
}

Matrix outer(const Vector& a, const Vector& b) {
  require_same_dim(a.dim(), b.dim(), "outer");
  Matrix m(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j) m(i, j) = a[i] * std::conj(b[j]);
  return m;
}

Matrix projector(const Vector& v) { return outer(v, v); }

Matrix dagger(const Matrix& m) {
  Matrix out(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) out(j, i) = std::conj(m(i, j));
  return out;
}

Matrix hermitize(const Matrix& m) { return 0.5 * (m + dagger(m)); }

Complex trace(const Matrix& m) {
  Complex t = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i) t += m(i, i);
  return t;
}

double max_abs(const Matrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) best = std::max(best, std::abs(m(i, j)));
  return best;
}

double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) s += std::norm(m(i, j));
  return std::sqrt(s);
}

bool is_hermitian(const Matrix& m, double tol) {
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = i; j < m.dim(); ++j)
      if (std::abs(m(i, j) - std::conj(m(j, i))) > tol) return false;
  return true;
}

bool is_unitary(const Matrix& m, double tol) {
  return max_abs(dagger(m) * m - Matrix::identity(m.dim())) < tol;
}

double expectation(const Matrix& m, const Vector& state) {
  require_same_dim(m.dim(), state.dim(), "expectation");
  if (!is_hermitian(m, 1e-10)) throw InvalidArgument("expectation: operator is not Hermitian");
  const Complex value = inner(state, m * state);
  if (std::abs(value.imag()) > 1e-10)
    throw NumericalError("expectation: non-real value for Hermitian operator");
  return value.real();
}

EigenSystem eig_hermitian(const Matrix& m) {
  if (!is_hermitian(m, 1e-10)) throw InvalidArgument("eig_hermitian: input is not Hermitian");
  const std::size_t n = m.dim();
  std::vector<Complex> a(n * n), v;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = m(i, j);
  jacobi(a, v, n);
  const auto order = descending_order(a, n);
  EigenSystem out{std::vector<double>(n), Matrix(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = a[src * n + src].real();
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v[r * n + src];
  }
  return out;
}

namespace {

Matrix spectral_map(const Matrix& m, double (*f)(double)) {
  const auto es = eig_hermitian(hermitize(m));
  const std::size_t n = m.dim();
  Matrix out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = f(es.values[k]);
    if (fk == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out(i, j) += fk * es.vectors(i, k) * std::conj(es.vectors(j, k));
  }
  return out;
}

}  // namespace

Matrix project_psd(const Matrix& m) {
  if (!is_hermitian(m, 1e-10)) throw InvalidArgument("project_psd: input is not Hermitian");
  return spectral_map(m, [](double x) { return std::max(x, 0.0); });
}

Matrix sqrt_psd(const Matrix& m) {
  return spectral_map(m, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

double spectral_norm(const Matrix& m) {
  const auto es = eig_hermitian(hermitize(dagger(m) * m));
  return std::sqrt(std::max(es.values.front(), 0.0));
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

Matrix embed_two_mode(const Matrix& t, std::pair<std::size_t, std::size_t> modes,
                      std::size_t dim) {
  const auto [j, k] = modes;
  if (t.dim() != 2) throw DimensionError("embed_two_mode: block must be 2x2");
  if (j == k || j >= dim || k >= dim)
    throw InvalidArgument("embed_two_mode: invalid mode indices");
  Matrix out = Matrix::identity(dim);
  out(j, j) = t(0, 0);
  out(j, k) = t(0, 1);
  out(k, j) = t(1, 0);
  out(k, k) = t(1, 1);
  return out;
}

namespace {

// Householder reduction to tridiagonal form followed by implicit QL
// (EISPACK tred2/tql2). On exit v holds eigenvectors in columns, d the
// eigenvalues in ascending order.
void tridiagonal_ql(double* v, double* d, double* e, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) d[j] = v[(n - 1) * n + j];
  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0, h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = v[(i - 1) * n + j];
        v[i * n + j] = 0.0;
        v[j * n + i] = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        v[j * n + i] = f;
        g = e[j] + v[j * n + j] * f;
        for (std::size_t k = j + 1; k <= i - 1; ++k) {
          g += v[k * n + j] * d[k];
          e[k] += v[k * n + j] * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k <= i - 1; ++k) v[k * n + j] -= (f * e[k] + g * d[k]);
        d[j] = v[(i - 1) * n + j];
        v[i * n + j] = 0.0;
      }
    }
    d[i] = h;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    v[(n - 1) * n + i] = v[i * n + i];
    v[i * n + i] = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = v[k * n + i + 1] / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += v[k * n + i + 1] * v[k * n + j];
        for (std::size_t k = 0; k <= i; ++k) v[k * n + j] -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) v[k * n + i + 1] = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = v[(n - 1) * n + j];
    v[(n - 1) * n + j] = 0.0;
  }
  v[(n - 1) * n + n - 1] = 1.0;
  e[0] = 0.0;

  // tql2
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  double f = 0.0, tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      for (int iter = 0; iter < 60; ++iter) {
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;
        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0, s = 0.0, s2 = 0.0;
        const double el1 = e[l + 1];
        for (std::size_t i = m; i-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (std::size_t k = 0; k < n; ++k) {
            h = v[k * n + i + 1];
            v[k * n + i + 1] = s * v[k * n + i] + c * h;
            v[k * n + i] = c * v[k * n + i] - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
        if (std::abs(e[l]) <= eps * tst1) break;
      }
    }
    d[l] += f;
    e[l] = 0.0;
  }
  // insertion sort, ascending
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t k = i;
    double p = d[i];
    for (std::size_t j = i + 1; j < n; ++j)
      if (d[j] < p) {
        k = j;
        p = d[j];
      }
    if (k != i) {
      d[k] = d[i];
      d[i] = p;
      for (std::size_t j = 0; j < n; ++j) std::swap(v[j * n + i], v[j * n + k]);
    }
  }
}

struct RealWork {
  std::vector<double> v, d, e;
  void resize(std::size_t n) {
    v.resize(n * n);
    d.resize(n);
    e.resize(n);
  }
};

RealWork& real_work(std::span<const double> a, std::size_t n) {
  thread_local RealWork w;
  w.resize(n);
  std::copy(a.begin(), a.end(), w.v.begin());
  if (n > 0) tridiagonal_ql(w.v.data(), w.d.data(), w.e.data(), n);
  return w;
}

}  // namespace

RealEigenSystem eig_symmetric(std::span<const double> a, std::size_t n) {
  if (a.size() != n * n) throw DimensionError("eig_symmetric: buffer size");
  const RealWork& w = real_work(a, n);
  RealEigenSystem out{std::vector<double>(n), std::vector<double>(n * n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = n - 1 - k;
    out.values[k] = w.d[src];
    for (std::size_t r = 0; r < n; ++r) out.vectors[r * n + k] = w.v[r * n + src];
  }
  return out;
}

double project_psd_inplace(std::span<double> a, std::size_t n) {
  if (a.size() != n * n) throw DimensionError("project_psd_inplace: buffer size");
  const RealWork& w = real_work(a, n);
  const double min_eig = n ? w.d[0] : 0.0;
  if (min_eig >= 0.0) return min_eig;
  std::fill(a.begin(), a.end(), 0.0);
  for (std::size_t k = n; k-- > 0;) {
    const double lam = w.d[k];
    if (lam <= 0.0) break;
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = lam * w.v[i * n + k];
      for (std::size_t j = 0; j < n; ++j) a[i * n + j] += vi * w.v[j * n + k];
    }
  }
  return min_eig;
}

}  // namespace cqrng::linalg

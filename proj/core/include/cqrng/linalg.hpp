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

#pragma once

// Dense complex linear algebra at small dimension (2..13). Everything is
// O(dim^3) and allocation-light; callers never see raw pointers.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace cqrng::linalg {

using Complex = std::complex<double>;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim) : entries_(dim) {}
  Vector(std::initializer_list<Complex> entries) : entries_(entries) {}
  explicit Vector(std::vector<Complex> entries) : entries_(std::move(entries)) {}

  static Vector basis(std::size_t dim, std::size_t k);

  std::size_t dim() const noexcept { return entries_.size(); }
  Complex& operator[](std::size_t i) { return entries_[i]; }
  const Complex& operator[](std::size_t i) const { return entries_[i]; }
  std::span<const Complex> entries() const noexcept { return entries_; }

  double norm() const;
  Vector normalized() const;

  Vector& operator+=(const Vector& o);
  Vector& operator-=(const Vector& o);
  Vector& operator*=(Complex s);

 private:
  std::vector<Complex> entries_;
};

Vector operator+(Vector a, const Vector& b);
Vector operator-(Vector a, const Vector& b);
Vector operator*(Complex s, Vector v);

/// <a|b>, conjugate-linear in the first argument.
Complex inner(const Vector& a, const Vector& b);

/// Square dense matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dim) : dim_(dim), entries_(dim * dim) {}
  Matrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static Matrix identity(std::size_t dim);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix diagonal(std::initializer_list<double> diag);

  std::size_t dim() const noexcept { return dim_; }
  Complex& operator()(std::size_t r, std::size_t c) { return entries_[r * dim_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const {
    return entries_[r * dim_ + c];
  }

  Vector row(std::size_t r) const;
  Vector column(std::size_t c) const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(Complex s);

 private:
  std::size_t dim_ = 0;
  std::vector<Complex> entries_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Complex s, Matrix m);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& m, const Vector& v);

/// |a><b|
Matrix outer(const Vector& a, const Vector& b);
/// |v><v|
Matrix projector(const Vector& v);

Matrix dagger(const Matrix& m);
/// (M + M^dagger) / 2, for matrices that drifted off Hermiticity by round-off.
Matrix hermitize(const Matrix& m);
Complex trace(const Matrix& m);

double max_abs(const Matrix& m);
double frobenius_norm(const Matrix& m);
bool is_hermitian(const Matrix& m, double tol = kHermitianTol);
bool is_unitary(const Matrix& m, double tol = kUnitaryTol);

/// <psi|M|psi>. Requires Hermitian M; the imaginary part is checked against
/// 1e-10 and dropped.
double expectation(const Matrix& m, const Vector& state);

struct EigenSystem {
  std::vector<double> values;  // descending
  Matrix vectors;              // column k pairs with values[k]
};

/// Cyclic complex Jacobi. Throws InvalidArgument on non-Hermitian input.
EigenSystem eig_hermitian(const Matrix& m);

/// Nearest PSD matrix in Frobenius norm (eigenvalues clipped at zero).
Matrix project_psd(const Matrix& m);

/// Principal square root of a PSD matrix; small negative eigenvalues are
/// clipped.
Matrix sqrt_psd(const Matrix& m);

/// Largest singular value.
double spectral_norm(const Matrix& m);

Matrix commutator(const Matrix& a, const Matrix& b);

/// Dim x dim unitary acting as `t` on modes (j, k) and identity elsewhere.
Matrix embed_two_mode(const Matrix& t, std::pair<std::size_t, std::size_t> modes,
                      std::size_t dim);

// Real symmetric kernels used by the certifier's cone projection. `a` is a
// row-major n x n buffer.
struct RealEigenSystem {
  std::vector<double> values;   // descending
  std::vector<double> vectors;  // row-major, column k pairs with values[k]
};
RealEigenSystem eig_symmetric(std::span<const double> a, std::size_t n);
/// In-place Frobenius projection onto the PSD cone. Returns the smallest
/// eigenvalue seen before clipping.
double project_psd_inplace(std::span<double> a, std::size_t n);

}  // namespace cqrng::linalg

// Copyright 2026 The NQCM Authors
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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nqcm {

using Complex = std::complex<double>;

/// Thrown when an iterative numerical routine fails to converge or a
/// computed quantity is too ill-conditioned to trust.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major complex matrix.  Deliberately minimal: the library only
/// needs multiplication, adjoints, norms and elementwise access.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Complex{0.0, 0.0}) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Complex& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  /// Raw row pointer; rows are contiguous.
  Complex* row(std::size_t i) { return data_.data() + i * cols_; }
  const Complex* row(std::size_t i) const { return data_.data() + i * cols_; }

  Matrix adjoint() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  double frobenius_norm() const {
    double acc = 0.0;
    for (const Complex& z : data_) acc += std::norm(z);
    return std::sqrt(acc);
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_)
      throw std::invalid_argument("matrix product: inner dimensions differ");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Complex aik = a(i, k);
        if (aik == Complex{0.0, 0.0}) continue;
        const Complex* brow = b.row(k);
        Complex* orow = out.row(i);
        for (std::size_t j = 0; j < b.cols_; ++j) orow[j] += aik * brow[j];
      }
    }
    return out;
  }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw std::invalid_argument("matrix sum: shapes differ");
    Matrix out = a;
    for (std::size_t i = 0; i < out.data_.size(); ++i)
      out.data_[i] += b.data_[i];
    return out;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw std::invalid_argument("matrix difference: shapes differ");
    Matrix out = a;
    for (std::size_t i = 0; i < out.data_.size(); ++i)
      out.data_[i] -= b.data_[i];
    return out;
  }

  friend Matrix operator*(Complex s, const Matrix& a) {
    Matrix out = a;
    for (Complex& z : out.data_) z *= s;
    return out;
  }

  friend std::vector<Complex> operator*(const Matrix& a,
                                        const std::vector<Complex>& v) {
    if (a.cols_ != v.size())
      throw std::invalid_argument("matrix-vector product: dimensions differ");
    std::vector<Complex> out(a.rows_, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < a.rows_; ++i) {
      const Complex* arow = a.row(i);
      Complex acc{0.0, 0.0};
      for (std::size_t j = 0; j < a.cols_; ++j) acc += arow[j] * v[j];
      out[i] = acc;
    }
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

inline constexpr double kHermitianTol = 1e-12;

/// Square matrix checked for conjugate symmetry on construction.
/// The check is |H(i,j) - conj(H(j,i))| <= 1e-12 entrywise, which also
/// forces diagonal imaginary parts to be at most 1e-12.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols())
      throw std::invalid_argument("hermitian matrix: not square");
    for (std::size_t i = 0; i < m_.rows(); ++i) {
      for (std::size_t j = i; j < m_.cols(); ++j) {
        const Complex diff = m_(i, j) - std::conj(m_(j, i));
        if (!(std::abs(diff) <= kHermitianTol))
          throw std::invalid_argument(
              "hermitian matrix: conjugate symmetry violated at (" +
              std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }

  std::size_t size() const { return m_.rows(); }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    return m_(i, j);
  }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

/// Spectral decomposition of a Hermitian matrix.  Eigenvalues are sorted in
/// descending order and eigenvectors[.] (column c of `eigenvectors`) matches
/// eigenvalues[c].
struct EigenDecomposition {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;
};

namespace detail {

inline double offdiagonal_norm(const Matrix& h) {
  double acc = 0.0;
  const std::size_t n = h.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) acc += std::norm(h(i, j));
  return std::sqrt(acc);
}

/// Cyclic Jacobi sweeps for a complex Hermitian matrix.  Each (p,q) pivot is
/// first phase-rotated so the pivot entry becomes real, then annihilated by
/// the classical real Jacobi rotation.  Converges when the off-diagonal
/// Frobenius norm drops below 1e-13 * ||H||_F; a hard cap of 100 sweeps
/// turns stagnation into an error instead of a hang.
inline EigenDecomposition jacobi_hermitian(Matrix h) {
  const std::size_t n = h.rows();
  if (n == 0) return {{}, Matrix(0, 0)};

  // Work on the exact average (H + H^dagger)/2 so tiny asymmetries cannot
  // leak into the iteration.
  for (std::size_t i = 0; i < n; ++i) {
    h(i, i) = Complex{h(i, i).real(), 0.0};
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex avg = 0.5 * (h(i, j) + std::conj(h(j, i)));
      h(i, j) = avg;
      h(j, i) = std::conj(avg);
    }
  }

  Matrix v = Matrix::identity(n);
  const double stop = 1e-13 * h.frobenius_norm();

  bool converged = offdiagonal_norm(h) <= stop;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex b = h(p, q);
        const double ab = std::abs(b);
        if (ab == 0.0) continue;
        const Complex f = b / ab;  // unit phase of the pivot
        const double app = h(p, p).real();
        const double aqq = h(q, q).real();
        const double tau = (aqq - app) / (2.0 * ab);
        const double t =
            (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Complex sf = s * f;
        const Complex sfc = s * std::conj(f);

        // Columns p,q of H and V transform by the plane rotation
        //   [c, s*f; -s*conj(f), c];
        // rows of H by its adjoint.  Diagonal entries get the standard
        // closed forms, which are more accurate than the generic update.
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const Complex hrp = h(r, p);
          const Complex hrq = h(r, q);
          h(r, p) = c * hrp - sfc * hrq;
          h(r, q) = sf * hrp + c * hrq;
          h(p, r) = std::conj(h(r, p));
          h(q, r) = std::conj(h(r, q));
        }
        h(p, p) = Complex{app - t * ab, 0.0};
        h(q, q) = Complex{aqq + t * ab, 0.0};
        h(p, q) = Complex{0.0, 0.0};
        h(q, p) = Complex{0.0, 0.0};

        for (std::size_t r = 0; r < n; ++r) {
          const Complex vrp = v(r, p);
          const Complex vrq = v(r, q);
          v(r, p) = c * vrp - sfc * vrq;
          v(r, q) = sf * vrp + c * vrq;
        }
      }
    }
    converged = offdiagonal_norm(h) <= stop;
  }
  if (!converged)
    throw numerical_error("eigensolver did not converge within 100 sweeps");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return h(a, a).real() > h(b, b).real();
  });

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.eigenvalues[c] = h(order[c], order[c]).real();
    for (std::size_t r = 0; r < n; ++r)
      out.eigenvectors(r, c) = v(r, order[c]);
  }
  return out;
}

}  // namespace detail

inline EigenDecomposition eigendecompose_hermitian(const HermitianMatrix& h) {
  return detail::jacobi_hermitian(h.matrix());
}

inline double min_eigenvalue(const HermitianMatrix& h) {
  if (h.size() == 0)
    throw std::invalid_argument("min_eigenvalue: empty matrix");
  return eigendecompose_hermitian(h).eigenvalues.back();
}

/// Factor a positive semidefinite matrix R as C^dagger * C with
/// C = diag(sqrt(lambda)) * V^dagger.  Rows of C follow the descending
/// eigenvalue order, so the factor is deterministic given the decomposition.
/// Slightly negative eigenvalues within -1e-9 * max(1, lambda_max) are
/// clamped to zero; anything below that means R is indefinite.
inline Matrix conjugate_factor(const HermitianMatrix& r) {
  const EigenDecomposition eig = eigendecompose_hermitian(r);
  const std::size_t k = r.size();
  const double lambda_max = k == 0 ? 0.0 : eig.eigenvalues.front();
  const double floor = -1e-9 * std::max(1.0, lambda_max);
  Matrix c(k, k);
  for (std::size_t l = 0; l < k; ++l) {
    double lambda = eig.eigenvalues[l];
    if (lambda < floor)
      throw std::invalid_argument(
          "conjugate_factor: matrix is indefinite beyond tolerance");
    if (lambda < 0.0) lambda = 0.0;
    const double root = std::sqrt(lambda);
    for (std::size_t j = 0; j < k; ++j)
      c(l, j) = root * std::conj(eig.eigenvectors(j, l));
  }
  return c;
}

namespace detail {

// Small helpers on raw amplitude vectors.  Composite states (input tensor
// blanks tensor probe) are handled as raw vectors internally; PureState is
// the validated public wrapper.

inline Complex dot(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

inline double norm2(const std::vector<Complex>& a) {
  double acc = 0.0;
  for (const Complex& z : a) acc += std::norm(z);
  return acc;
}

inline double vec_norm(const std::vector<Complex>& a) {
  return std::sqrt(norm2(a));
}

/// Kronecker product with the leftmost factor owning the slowest-varying
/// index: out[i * b.size() + j] = a[i] * b[j].
inline std::vector<Complex> kron(const std::vector<Complex>& a,
                                 const std::vector<Complex>& b) {
  std::vector<Complex> out(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Complex ai = a[i];
    for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = ai * b[j];
  }
  return out;
}

}  // namespace detail

}  // namespace nqcm

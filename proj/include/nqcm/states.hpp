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

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nqcm/linalg.hpp"

namespace nqcm {

inline constexpr double kStateNormTol = 1e-12;

/// Unit vector in a finite-dimensional Hilbert space, dimension >= 2.
/// The norm is checked to 1e-12 at construction; use `renormalized` for
/// amplitudes that are only approximately unit (e.g. machine outputs).
class PureState {
 public:
  explicit PureState(std::vector<Complex> amplitudes)
      : amp_(std::move(amplitudes)) {
    if (amp_.size() < 2)
      throw std::invalid_argument("pure state: dimension must be at least 2");
    const double nrm = detail::vec_norm(amp_);
    if (!(std::abs(nrm - 1.0) <= kStateNormTol))
      throw std::invalid_argument("pure state: amplitudes are not normalized");
  }

  static PureState basis(std::size_t dim, std::size_t index) {
    if (index >= dim)
      throw std::invalid_argument("basis state: index out of range");
    std::vector<Complex> amp(dim, Complex{0.0, 0.0});
    amp[index] = 1.0;
    return PureState(std::move(amp));
  }

  /// Scales `amplitudes` to unit norm, rejecting near-zero vectors.  `slack`
  /// bounds how far from 1 the input norm may be before it is treated as an
  /// error rather than rounding noise; pass 0 to accept any nonzero vector.
  static PureState renormalized(std::vector<Complex> amplitudes,
                                double slack = 0.0) {
    const double nrm = detail::vec_norm(amplitudes);
    if (!(nrm > 1e-12))
      throw std::invalid_argument("pure state: cannot normalize a null vector");
    if (slack > 0.0 && !(std::abs(nrm - 1.0) <= slack))
      throw std::invalid_argument(
          "pure state: norm " + std::to_string(nrm) +
          " is too far from 1 to be rounding noise");
    for (Complex& z : amplitudes) z /= nrm;
    // Guard against accumulated rounding in the division itself.
    const double check = detail::vec_norm(amplitudes);
    if (std::abs(check - 1.0) > kStateNormTol)
      for (Complex& z : amplitudes) z /= check;
    return PureState(std::move(amplitudes));
  }

  std::size_t dimension() const { return amp_.size(); }
  const std::vector<Complex>& amplitudes() const { return amp_; }
  const Complex& operator[](std::size_t i) const { return amp_[i]; }

 private:
  std::vector<Complex> amp_;
};

inline Complex inner_product(const PureState& a, const PureState& b) {
  if (a.dimension() != b.dimension())
    throw std::invalid_argument("inner product: dimensions differ");
  return detail::dot(a.amplitudes(), b.amplitudes());
}

/// Tensor product of one or more states; the first factor owns the
/// slowest-varying index of the composite space.
inline PureState tensor_product(const std::vector<PureState>& factors) {
  if (factors.empty())
    throw std::invalid_argument("tensor product: no factors");
  std::vector<Complex> acc = factors.front().amplitudes();
  for (std::size_t i = 1; i < factors.size(); ++i)
    acc = detail::kron(acc, factors[i].amplitudes());
  return PureState(std::move(acc));
}

/// Nonempty list of candidate input states sharing one dimension.
class StateSet {
 public:
  explicit StateSet(std::vector<PureState> states) : states_(std::move(states)) {
    if (states_.empty())
      throw std::invalid_argument("state set: at least one state required");
    const std::size_t d = states_.front().dimension();
    for (const PureState& s : states_)
      if (s.dimension() != d)
        throw std::invalid_argument("state set: dimensions differ");
  }

  std::size_t size() const { return states_.size(); }
  std::size_t dimension() const { return states_.front().dimension(); }
  const PureState& operator[](std::size_t i) const { return states_[i]; }

  std::vector<PureState>::const_iterator begin() const { return states_.begin(); }
  std::vector<PureState>::const_iterator end() const { return states_.end(); }

 private:
  std::vector<PureState> states_;
};

/// G(i,j) = <psi_i|psi_j>.  Unit diagonal by construction; Hermitian because
/// the lower triangle is filled with explicit conjugates.
inline HermitianMatrix gram_matrix(const StateSet& s) {
  const std::size_t k = s.size();
  Matrix g(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    g(i, i) = 1.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      const Complex z = inner_product(s[i], s[j]);
      g(i, j) = z;
      g(j, i) = std::conj(z);
    }
  }
  return HermitianMatrix(std::move(g));
}

/// Elementwise (Hadamard) power G^(m): every entry raised to the m-th power.
/// This is the Gram matrix of the m-fold tensor copies, so it stays
/// Hermitian and positive semidefinite for m >= 1.
inline HermitianMatrix hadamard_power(const HermitianMatrix& g, int m) {
  if (m < 1)
    throw std::invalid_argument("hadamard power: exponent must be >= 1");
  const std::size_t k = g.size();
  Matrix out(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      Complex acc{1.0, 0.0};
      const Complex base = g(i, j);
      for (int e = 0; e < m; ++e) acc *= base;
      out(i, j) = acc;
    }
  }
  // Re-mirror so rounding in the repeated products cannot break symmetry.
  for (std::size_t i = 0; i < k; ++i) {
    out(i, i) = Complex{out(i, i).real(), 0.0};
    for (std::size_t j = i + 1; j < k; ++j) out(j, i) = std::conj(out(i, j));
  }
  return HermitianMatrix(std::move(out));
}

struct IndependenceResult {
  bool independent = false;
  double min_gram_eigenvalue = 0.0;
};

/// Linear independence via the smallest Gram eigenvalue: independent iff
/// lambda_min > tol.  The eigenvalue is reported so callers can show how
/// close to dependence a set is.
inline IndependenceResult is_linearly_independent(const StateSet& s,
                                                  double tol = 1e-8) {
  const double lambda = min_eigenvalue(gram_matrix(s));
  return IndependenceResult{lambda > tol, lambda};
}

}  // namespace nqcm

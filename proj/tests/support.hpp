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
#include <random>
#include <vector>

#include "nqcm/nqcm.hpp"

namespace nqcm::testing {

/// Normalizes an arbitrary nonzero amplitude list into a PureState.
inline PureState state_of(std::vector<Complex> amplitudes) {
  return PureState::renormalized(std::move(amplitudes));
}

/// Real qubit pair {(1,0), (s, sqrt(1-s^2))} with overlap exactly s.
inline StateSet overlap_pair(double s) {
  return StateSet({PureState::basis(2, 0),
                   state_of({Complex{s, 0.0},
                             Complex{std::sqrt(1.0 - s * s), 0.0}})});
}

/// 2x2 real Gram matrix [[1, s], [s, 1]].
inline HermitianMatrix gram2(double s) {
  Matrix g(2, 2);
  g(0, 0) = g(1, 1) = 1.0;
  g(0, 1) = g(1, 0) = s;
  return HermitianMatrix(std::move(g));
}

inline PureState random_unit_state(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Complex> amp(d);
  for (Complex& z : amp) z = Complex{gauss(rng), gauss(rng)};
  return PureState::renormalized(std::move(amp));
}

inline StateSet random_state_set(std::mt19937_64& rng, std::size_t d,
                                 std::size_t k) {
  std::vector<PureState> states;
  states.reserve(k);
  for (std::size_t i = 0; i < k; ++i)
    states.push_back(random_unit_state(rng, d));
  return StateSet(std::move(states));
}

/// Random state set with pairwise overlap moduli at most `max_overlap` and
/// smallest Gram eigenvalue at least `min_gram_eig` (rejection sampling).
inline StateSet random_independent_set(std::mt19937_64& rng, std::size_t d,
                                       std::size_t k,
                                       double max_overlap = 0.9,
                                       double min_gram_eig = 1e-2) {
  for (;;) {
    StateSet s = random_state_set(rng, d, k);
    const HermitianMatrix g = gram_matrix(s);
    bool ok = min_eigenvalue(g) >= min_gram_eig;
    for (std::size_t i = 0; ok && i < k; ++i)
      for (std::size_t j = i + 1; ok && j < k; ++j)
        if (std::abs(g(i, j)) > max_overlap) ok = false;
    if (ok) return s;
  }
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t k) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      m(i, j) = Complex{gauss(rng), gauss(rng)};
  return m;
}

inline HermitianMatrix random_hermitian(std::mt19937_64& rng, std::size_t k) {
  const Matrix m = random_matrix(rng, k);
  Matrix h(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    h(i, i) = Complex{m(i, i).real(), 0.0};
    for (std::size_t j = i + 1; j < k; ++j) {
      const Complex avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
      h(i, j) = avg;
      h(j, i) = std::conj(avg);
    }
  }
  return HermitianMatrix(std::move(h));
}

/// Random positive semidefinite matrix B^dagger B; exactly Hermitian because
/// the (i,j) and (j,i) sums accumulate elementwise conjugates.
inline HermitianMatrix random_psd(std::mt19937_64& rng, std::size_t k) {
  const Matrix b = random_matrix(rng, k);
  return HermitianMatrix(b.adjoint() * b);
}

inline double frobenius_distance(const Matrix& a, const Matrix& b) {
  return (a - b).frobenius_norm();
}

/// Uniform-optimal allocation scaled by `u` toward the interior.
inline ProbabilityAllocation scaled_optimum(const HermitianMatrix& g,
                                            std::size_t branches,
                                            const WeightVector& w, double u) {
  const OptimizationResult opt = max_uniform_success(g, branches, w);
  ProbabilityAllocation a(branches, g.size());
  for (std::size_t b = 0; b < branches; ++b)
    for (std::size_t i = 0; i < g.size(); ++i)
      a.set(b, i, u * opt.allocation(b, i));
  return a;
}

}  // namespace nqcm::testing

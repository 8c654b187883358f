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
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nqcm/linalg.hpp"
#include "nqcm/states.hpp"

namespace nqcm {

/// Thrown when no machine can exist for the requested inputs: dependent
/// state sets or allocations outside the feasible region.
class infeasibility_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Success probabilities p[b][i] for copy branch b (0-based; branch b
/// produces b+2 total copies) and state index i.  Entries are probabilities
/// and each state's column sums to at most 1 (+1e-12 slack).
class ProbabilityAllocation {
 public:
  ProbabilityAllocation(std::size_t branches, std::size_t states)
      : branches_(branches), states_(states), p_(branches * states, 0.0) {
    if (branches_ == 0 || states_ == 0)
      throw std::invalid_argument("allocation: empty shape");
  }

  /// rows[b][i] = probability for branch b, state i.
  static ProbabilityAllocation from_rows(
      const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty())
      throw std::invalid_argument("allocation: empty shape");
    ProbabilityAllocation a(rows.size(), rows.front().size());
    for (std::size_t b = 0; b < rows.size(); ++b) {
      if (rows[b].size() != a.states_)
        throw std::invalid_argument("allocation: ragged rows");
      for (std::size_t i = 0; i < a.states_; ++i) a.set(b, i, rows[b][i]);
    }
    return a;
  }

  std::size_t branch_count() const { return branches_; }
  std::size_t state_count() const { return states_; }

  double operator()(std::size_t branch, std::size_t state) const {
    return p_[branch * states_ + state];
  }

  void set(std::size_t branch, std::size_t state, double value) {
    if (branch >= branches_ || state >= states_)
      throw std::invalid_argument("allocation: index out of range");
    if (!(value >= 0.0 && value <= 1.0))
      throw std::invalid_argument("allocation: probability outside [0, 1]");
    double& slot = p_[branch * states_ + state];
    const double old = slot;
    slot = value;
    if (state_total(state) > 1.0 + 1e-12) {
      slot = old;
      throw std::invalid_argument(
          "allocation: success probabilities for state " +
          std::to_string(state) + " would exceed 1");
    }
  }

  /// Total success probability committed to one state across all branches.
  double state_total(std::size_t state) const {
    double acc = 0.0;
    for (std::size_t b = 0; b < branches_; ++b) acc += (*this)(b, state);
    return acc;
  }

 private:
  std::size_t branches_;
  std::size_t states_;
  std::vector<double> p_;
};

/// Elementwise Gram powers for the copy branches: stack[b] holds every entry
/// of G raised to the power b+2, the overlap of (b+2)-fold tensor copies.
inline std::vector<HermitianMatrix> gram_stack(const HermitianMatrix& g,
                                               std::size_t branches) {
  if (branches == 0)
    throw std::invalid_argument("gram stack: need at least one branch");
  std::vector<HermitianMatrix> stack;
  stack.reserve(branches);
  for (std::size_t b = 0; b < branches; ++b)
    stack.push_back(hadamard_power(g, static_cast<int>(b) + 2));
  return stack;
}

/// Residual overlap matrix R = G - sum_b A_b G^(b+2) A_b with
/// A_b = diag(sqrt(p[b][i])).  Diagonal entries are computed directly as
/// 1 - sum_b p[b][i] so boundary allocations land exactly on zero.
/// A machine exists for the allocation iff R is positive semidefinite.
inline HermitianMatrix residual(const HermitianMatrix& g,
                                const std::vector<HermitianMatrix>& stack,
                                const ProbabilityAllocation& alloc) {
  const std::size_t k = g.size();
  if (alloc.state_count() != k)
    throw std::invalid_argument("residual: allocation state count != k");
  if (stack.size() != alloc.branch_count())
    throw std::invalid_argument("residual: stack depth != branch count");
  for (const HermitianMatrix& h : stack)
    if (h.size() != k)
      throw std::invalid_argument("residual: stack shape mismatch");
  for (std::size_t i = 0; i < k; ++i)
    if (std::abs(g(i, i) - Complex{1.0, 0.0}) > 1e-12)
      throw std::invalid_argument("residual: G must have unit diagonal");

  Matrix r(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    r(i, i) = Complex{1.0 - alloc.state_total(i), 0.0};
    for (std::size_t j = i + 1; j < k; ++j) {
      Complex acc = g(i, j);
      for (std::size_t b = 0; b < alloc.branch_count(); ++b)
        acc -= std::sqrt(alloc(b, i)) * stack[b](i, j) * std::sqrt(alloc(b, j));
      r(i, j) = acc;
      r(j, i) = std::conj(acc);
    }
  }
  return HermitianMatrix(std::move(r));
}

inline HermitianMatrix residual(const HermitianMatrix& g,
                                const ProbabilityAllocation& alloc) {
  return residual(g, gram_stack(g, alloc.branch_count()), alloc);
}

/// PSD test with a relative eigenvalue floor plus a direct check that no
/// diagonal entry (a probability mass) has gone negative.
inline bool is_feasible(const HermitianMatrix& residual_matrix,
                        double tol = 1e-9) {
  if (!(tol > 0.0)) throw std::invalid_argument("is_feasible: tol must be > 0");
  for (std::size_t i = 0; i < residual_matrix.size(); ++i)
    if (residual_matrix(i, i).real() < -tol) return false;
  const EigenDecomposition eig = eigendecompose_hermitian(residual_matrix);
  const double lambda_max = eig.eigenvalues.front();
  const double lambda_min = eig.eigenvalues.back();
  return lambda_min >= -tol * std::max(1.0, lambda_max);
}

struct SynthesisOptions {
  std::size_t blank_index = 0;
  std::size_t unitary_dim_cap = 4096;
  double independence_tol = 1e-8;
  double feasibility_tol = 1e-9;
};

/// A synthesized cloning machine.
///
/// Composite-space layout: (input slot) x (M copy slots) x (probe), with the
/// leftmost factor slowest-varying, so a composite index decomposes as
/// ab * probe_dim + q for AB index ab and probe index q.  Probe index n-1
/// tags the success branch with n+1 total copies (n = 1..M); probe index
/// M+l-1 tags failure branch l (l = 1..L); the initial probe state is the
/// last basis vector, index probe_dim - 1.
///
/// failure_coeffs is k x L; the amplitude of failure branch l in the image
/// of state i is conj(failure_coeffs(i, l)), carried on the composite vector
/// (AB basis vector l) x (probe basis vector M+l).  This makes
/// failure_coeffs * failure_coeffs^dagger equal the residual matrix.
struct NovelCloningMachine {
  StateSet source;
  std::size_t max_branches = 0;  // M
  ProbabilityAllocation allocation;
  Matrix failure_coeffs;  // k x L
  std::size_t probe_dim = 0;  // M + L
  std::size_t blank_index = 0;
  std::optional<Matrix> unitary;
  bool unitary_capped = false;  // true when D exceeded the cap
  // Composite images w_i of the source states; empty when capped.
  std::vector<std::vector<Complex>> input_images;

  std::size_t state_dim() const { return source.dimension(); }
  std::size_t state_count() const { return source.size(); }
  std::size_t failure_count() const { return failure_coeffs.cols(); }

  PureState blank_state() const {
    return PureState::basis(state_dim(), blank_index);
  }

  /// d^(M+1) * probe_dim, saturating at SIZE_MAX on overflow.
  std::size_t composite_dim() const {
    std::size_t acc = probe_dim;
    for (std::size_t e = 0; e <= max_branches; ++e) {
      if (acc > std::numeric_limits<std::size_t>::max() / state_dim())
        return std::numeric_limits<std::size_t>::max();
      acc *= state_dim();
    }
    return acc;
  }

  /// The machine's initial composite vector for a given input:
  /// input x blank^(x M) x (last probe basis vector).
  std::vector<Complex> input_embedding(const PureState& input) const {
    if (input.dimension() != state_dim())
      throw std::invalid_argument("input embedding: dimension mismatch");
    std::vector<Complex> ab = input.amplitudes();
    const std::vector<Complex> blank = blank_state().amplitudes();
    for (std::size_t c = 0; c < max_branches; ++c) ab = detail::kron(ab, blank);
    std::vector<Complex> out(ab.size() * probe_dim, Complex{0.0, 0.0});
    for (std::size_t a = 0; a < ab.size(); ++a)
      out[a * probe_dim + (probe_dim - 1)] = ab[a];
    return out;
  }
};

namespace detail {

inline void axpy(const Complex& alpha, const std::vector<Complex>& x,
                 std::vector<Complex>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

/// Extend the isometry v_i -> w_i to a full unitary.  Paired modified
/// Gram-Schmidt (one reorthogonalization pass) applies identical
/// coefficients to both sides, so U maps each v_i to w_i by construction;
/// each side is then padded to a full basis by sweeping computational basis
/// vectors and discarding candidates whose projection residual is tiny.
inline Matrix complete_unitary(const std::vector<std::vector<Complex>>& vs,
                               const std::vector<std::vector<Complex>>& ws) {
  const std::size_t dim = vs.front().size();
  std::vector<std::vector<Complex>> es, fs;
  es.reserve(dim);
  fs.reserve(dim);

  for (std::size_t i = 0; i < vs.size(); ++i) {
    std::vector<Complex> e = vs[i];
    std::vector<Complex> f = ws[i];
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < es.size(); ++j) {
        const Complex c = dot(es[j], e);
        axpy(-c, es[j], e);
        axpy(-c, fs[j], f);
      }
    }
    const double nrm = vec_norm(e);
    if (nrm < 1e-10)
      throw numerical_error(
          "unitary completion: input images are numerically dependent");
    for (Complex& z : e) z /= nrm;
    for (Complex& z : f) z /= nrm;
    es.push_back(std::move(e));
    fs.push_back(std::move(f));
  }

  const auto extend = [dim](std::vector<std::vector<Complex>>& basis) {
    for (std::size_t m = 0; m < dim && basis.size() < dim; ++m) {
      std::vector<Complex> cand(dim, Complex{0.0, 0.0});
      cand[m] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (const std::vector<Complex>& b : basis)
          axpy(-dot(b, cand), b, cand);
      const double nrm = vec_norm(cand);
      if (nrm < 1e-10) continue;
      for (Complex& z : cand) z /= nrm;
      basis.push_back(std::move(cand));
    }
  };
  extend(es);
  extend(fs);
  if (es.size() != dim || fs.size() != dim)
    throw numerical_error("unitary completion: basis extension fell short");

  Matrix u(dim, dim);
  std::vector<Complex> erow(dim);
  for (std::size_t m = 0; m < dim; ++m) {
    for (std::size_t c = 0; c < dim; ++c) erow[c] = std::conj(es[m][c]);
    const std::vector<Complex>& w = fs[m];
    for (std::size_t r = 0; r < dim; ++r) {
      const Complex wr = w[r];
      if (wr == Complex{0.0, 0.0}) continue;
      Complex* urow = u.row(r);
      for (std::size_t c = 0; c < dim; ++c) urow[c] += wr * erow[c];
    }
  }
  return u;
}

/// n-fold Kronecker power of a raw amplitude vector.
inline std::vector<Complex> kron_power(const std::vector<Complex>& v,
                                       std::size_t n) {
  std::vector<Complex> acc{Complex{1.0, 0.0}};
  for (std::size_t i = 0; i < n; ++i) acc = kron(acc, v);
  return acc;
}

}  // namespace detail

/// Build the machine for a linearly independent state set and a feasible
/// allocation.  The failure rank L is the number of residual eigenvalues
/// whose branch amplitude survives truncation at 1e-10; probe dimension is
/// exactly M + L.  The explicit unitary (and the stored images w_i) are
/// materialized only when the composite dimension stays within
/// options.unitary_dim_cap; larger machines come back flagged instead.
inline NovelCloningMachine synthesize(const StateSet& s, std::size_t branches,
                                      const ProbabilityAllocation& alloc,
                                      const SynthesisOptions& options = {}) {
  const std::size_t d = s.dimension();
  const std::size_t k = s.size();
  if (branches == 0)
    throw std::invalid_argument("synthesize: need at least one copy branch");
  if (alloc.branch_count() != branches || alloc.state_count() != k)
    throw std::invalid_argument("synthesize: allocation shape mismatch");
  if (options.blank_index >= d)
    throw std::invalid_argument("synthesize: blank index out of range");

  const IndependenceResult indep =
      is_linearly_independent(s, options.independence_tol);
  if (!indep.independent)
    throw infeasibility_error(
        "synthesize: states are not linearly independent (min Gram "
        "eigenvalue " +
        std::to_string(indep.min_gram_eigenvalue) + ")");

  const HermitianMatrix g = gram_matrix(s);
  const HermitianMatrix r = residual(g, alloc);
  if (!is_feasible(r, options.feasibility_tol)) {
    const double lambda = min_eigenvalue(r);
    throw infeasibility_error(
        "synthesize: allocation infeasible (residual min eigenvalue " +
        std::to_string(lambda) + ")");
  }

  // Factor the residual and keep the failure branches that carry weight.
  // Rows of the factor follow descending eigenvalues, so the survivors are
  // a prefix.
  const Matrix factor = conjugate_factor(r);
  std::size_t failures = 0;
  for (std::size_t l = 0; l < k; ++l) {
    double nrm2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) nrm2 += std::norm(factor(l, i));
    if (std::sqrt(nrm2) >= 1e-10) failures = l + 1;
  }
  Matrix coeffs(k, failures);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t l = 0; l < failures; ++l)
      coeffs(i, l) = std::conj(factor(l, i));

  NovelCloningMachine m{s,
                        branches,
                        alloc,
                        std::move(coeffs),
                        branches + failures,
                        options.blank_index,
                        std::nullopt,
                        false,
                        {}};

  const std::size_t dim = m.composite_dim();
  if (dim > options.unitary_dim_cap) {
    m.unitary_capped = true;
    return m;
  }

  // Assemble the composite images w_i: success branch n contributes
  // sqrt(p) * psi^(n+1 copies) x blank^(M-n) x probe(n-1); failure branch l
  // contributes conj(C(i,l)) on (AB basis vector l) x probe(M+l).
  const std::vector<Complex> blank = m.blank_state().amplitudes();
  const std::size_t probe_dim = m.probe_dim;
  m.input_images.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<Complex> w(dim, Complex{0.0, 0.0});
    for (std::size_t b = 0; b < branches; ++b) {
      const double amp = std::sqrt(alloc(b, i));
      if (amp == 0.0) continue;
      std::vector<Complex> ab = detail::kron_power(s[i].amplitudes(), b + 2);
      ab = detail::kron(ab, detail::kron_power(blank, branches - (b + 1)));
      for (std::size_t a = 0; a < ab.size(); ++a)
        w[a * probe_dim + b] += amp * ab[a];
    }
    for (std::size_t l = 0; l < failures; ++l)
      w[l * probe_dim + (branches + l)] += std::conj(m.failure_coeffs(i, l));
    m.input_images.push_back(std::move(w));
  }

  std::vector<std::vector<Complex>> vs;
  vs.reserve(k);
  for (std::size_t i = 0; i < k; ++i) vs.push_back(m.input_embedding(s[i]));
  m.unitary = detail::complete_unitary(vs, m.input_images);
  return m;
}

struct ValidationReport {
  double max_overlap_error = 0.0;
  double max_normalization_error = 0.0;
  std::optional<double> unitarity_defect;
  std::optional<double> max_application_error;
  double unitarity_tolerance = 0.0;
  bool overlap_ok = false;
  bool normalization_ok = false;
  bool unitary_ok = false;
  bool application_ok = false;

  bool passed() const {
    return overlap_ok && normalization_ok && unitary_ok && application_ok;
  }
};

/// Re-derive the machine's defining identities and report the worst errors:
/// output overlaps must reproduce input overlaps, success plus failure
/// probability must sum to one per state, and the explicit unitary (when
/// present) must be unitary and map each embedded input to its image.
inline ValidationReport validate_machine(const NovelCloningMachine& m) {
  const std::size_t k = m.state_count();
  const HermitianMatrix g = gram_matrix(m.source);
  ValidationReport rep;

  for (std::size_t i = 0; i < k; ++i) {
    double total = m.allocation.state_total(i);
    for (std::size_t l = 0; l < m.failure_count(); ++l)
      total += std::norm(m.failure_coeffs(i, l));
    rep.max_normalization_error =
        std::max(rep.max_normalization_error, std::abs(total - 1.0));
  }
  rep.normalization_ok = rep.max_normalization_error <= 1e-9;

  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      Complex wij;
      if (!m.input_images.empty()) {
        wij = detail::dot(m.input_images[i], m.input_images[j]);
      } else {
        // Capped machine: no stored images, so evaluate the overlap
        // algebraically from the allocation and failure coefficients.
        wij = Complex{0.0, 0.0};
        for (std::size_t b = 0; b < m.max_branches; ++b) {
          Complex pw{1.0, 0.0};
          for (std::size_t e = 0; e < b + 2; ++e) pw *= g(i, j);
          wij += std::sqrt(m.allocation(b, i)) * pw *
                 std::sqrt(m.allocation(b, j));
        }
        for (std::size_t l = 0; l < m.failure_count(); ++l)
          wij += m.failure_coeffs(i, l) * std::conj(m.failure_coeffs(j, l));
      }
      rep.max_overlap_error =
          std::max(rep.max_overlap_error, std::abs(wij - g(i, j)));
    }
  }
  rep.overlap_ok = rep.max_overlap_error <= 1e-9;

  if (m.unitary.has_value()) {
    const Matrix& u = *m.unitary;
    const std::size_t dim = u.rows();
    rep.unitarity_tolerance = 1e-10 * std::sqrt(static_cast<double>(dim));

    // ||U^dagger U - I||_F, evaluated through row-contiguous dot products
    // of A = U^dagger with itself.
    const Matrix a = u.adjoint();
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const Complex* ri = a.row(i);
      for (std::size_t j = i; j < dim; ++j) {
        const Complex* rj = a.row(j);
        Complex z{0.0, 0.0};
        for (std::size_t c = 0; c < dim; ++c) z += ri[c] * std::conj(rj[c]);
        if (i == j) z -= 1.0;
        acc += (i == j ? 1.0 : 2.0) * std::norm(z);
      }
    }
    rep.unitarity_defect = std::sqrt(acc);
    rep.unitary_ok = *rep.unitarity_defect <= rep.unitarity_tolerance;

    double worst = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<Complex> image = u * m.input_embedding(m.source[i]);
      for (std::size_t c = 0; c < image.size(); ++c)
        image[c] -= m.input_images[i][c];
      worst = std::max(worst, detail::vec_norm(image));
    }
    rep.max_application_error = worst;
    rep.application_ok = worst <= 1e-10;
  } else {
    rep.unitary_ok = true;
    rep.application_ok = true;
  }
  return rep;
}

/// Distance between the machine's actual output on a superposed input and
/// the ideal output that would clone the superposition itself, with branch
/// probabilities averaged as sum_i |c_i|^2 p[b][i].  The failure block of
/// the ideal output is taken from the actual output, so the witness isolates
/// the success-branch obstruction: it vanishes (to rounding) when the
/// coefficients select a single member state, and is strictly positive for
/// genuine superpositions over non-orthogonal sets.
inline double linearity_witness(const NovelCloningMachine& m,
                                const std::vector<Complex>& coefficients) {
  if (!m.unitary.has_value())
    throw std::invalid_argument("linearity witness: no explicit unitary");
  const std::size_t k = m.state_count();
  if (coefficients.size() != k)
    throw std::invalid_argument("linearity witness: need one coefficient per state");

  std::vector<Complex> combo(m.state_dim(), Complex{0.0, 0.0});
  for (std::size_t i = 0; i < k; ++i)
    detail::axpy(coefficients[i], m.source[i].amplitudes(), combo);
  const double nrm = detail::vec_norm(combo);
  if (!(nrm > 1e-12))
    throw std::invalid_argument(
        "linearity witness: coefficients give a null superposition");
  for (Complex& z : combo) z /= nrm;
  const PureState superposed = PureState::renormalized(combo);

  const std::vector<Complex> actual =
      *m.unitary * m.input_embedding(superposed);

  std::vector<double> averaged(m.max_branches, 0.0);
  for (std::size_t b = 0; b < m.max_branches; ++b)
    for (std::size_t i = 0; i < k; ++i)
      averaged[b] += std::norm(coefficients[i] / nrm) * m.allocation(b, i);

  const std::vector<Complex> blank = m.blank_state().amplitudes();
  std::vector<Complex> ideal(actual.size(), Complex{0.0, 0.0});
  for (std::size_t b = 0; b < m.max_branches; ++b) {
    const double amp = std::sqrt(averaged[b]);
    if (amp == 0.0) continue;
    std::vector<Complex> ab = detail::kron_power(superposed.amplitudes(), b + 2);
    ab = detail::kron(ab, detail::kron_power(blank, m.max_branches - (b + 1)));
    for (std::size_t a = 0; a < ab.size(); ++a)
      ideal[a * m.probe_dim + b] += amp * ab[a];
  }

  double acc = 0.0;
  for (std::size_t a = 0; a * m.probe_dim < actual.size(); ++a)
    for (std::size_t q = 0; q < m.max_branches; ++q)
      acc += std::norm(actual[a * m.probe_dim + q] - ideal[a * m.probe_dim + q]);
  return std::sqrt(acc);
}

}  // namespace nqcm

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
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "nqcm/linalg.hpp"
#include "nqcm/machine.hpp"

namespace nqcm {

/// Nonnegative objective weights across the copy branches; w[b] weights the
/// branch producing b+2 total copies.  At least one entry must be positive.
class WeightVector {
 public:
  explicit WeightVector(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) throw std::invalid_argument("weights: empty");
    double total = 0.0;
    for (double x : w_) {
      if (!(x >= 0.0)) throw std::invalid_argument("weights: negative entry");
      total += x;
    }
    if (!(total > 0.0)) throw std::invalid_argument("weights: all zero");
  }

  static WeightVector uniform(std::size_t branches) {
    return WeightVector(std::vector<double>(branches, 1.0));
  }

  static WeightVector single_branch(std::size_t branches, std::size_t branch) {
    if (branch >= branches)
      throw std::invalid_argument("weights: branch index out of range");
    std::vector<double> w(branches, 0.0);
    w[branch] = 1.0;
    return WeightVector(std::move(w));
  }

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t b) const { return w_[b]; }
  const std::vector<double>& raw() const { return w_; }

  std::vector<double> normalized() const {
    double total = 0.0;
    for (double x : w_) total += x;
    std::vector<double> out = w_;
    for (double& x : out) x /= total;
    return out;
  }

 private:
  std::vector<double> w_;
};

struct OptimizationResult {
  ProbabilityAllocation allocation;
  double objective = 0.0;
};

namespace detail {

inline ProbabilityAllocation scaled_allocation(const std::vector<double>& share,
                                               std::size_t states, double t) {
  ProbabilityAllocation a(share.size(), states);
  for (std::size_t b = 0; b < share.size(); ++b)
    for (std::size_t i = 0; i < states; ++i) a.set(b, i, t * share[b]);
  return a;
}

/// Near-exact PSD test used inside the optimizers' line searches.  The
/// public is_feasible tolerance (1e-9) would let boundary points overshoot
/// into slightly-indefinite residuals, whose clamped factorization then
/// degrades machine unitarity; searching against a floor at eigensolver
/// noise keeps returned optima cleanly factorizable while remaining
/// feasible under the public test.
inline bool search_feasible(const HermitianMatrix& r, double tol) {
  return is_feasible(r, std::min(tol, 1e-13));
}

}  // namespace detail

/// Largest t in [0, 1] such that the state-uniform allocation
/// p[b][i] = t * (w[b]/sum w) keeps the residual positive semidefinite.
/// Since the uniform residual is linear in t, feasibility is monotone and
/// bisection brackets the boundary; the returned point is verified feasible
/// and t + 1e-6 verified infeasible (unless t = 1).
inline OptimizationResult max_uniform_success(const HermitianMatrix& g,
                                              std::size_t branches,
                                              const WeightVector& w,
                                              double feasibility_tol = 1e-9) {
  if (branches == 0 || w.size() != branches)
    throw std::invalid_argument("uniform optimum: weight/branch mismatch");
  const double lambda = min_eigenvalue(g);
  if (!(lambda > 0.0))
    throw infeasibility_error(
        "uniform optimum: Gram matrix is not positive definite");

  const std::size_t k = g.size();
  const std::vector<double> share = w.normalized();
  const std::vector<HermitianMatrix> stack = gram_stack(g, branches);
  const auto residual_at = [&](double t) {
    return residual(g, stack, detail::scaled_allocation(share, k, t));
  };
  const auto search_ok = [&](double t) {
    return detail::search_feasible(residual_at(t), feasibility_tol);
  };

  double t = 1.0;
  if (!search_ok(1.0)) {
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo >= 1e-9) {
      const double mid = 0.5 * (lo + hi);
      (search_ok(mid) ? lo : hi) = mid;
    }
    t = lo;
  }

  if (!is_feasible(residual_at(t), feasibility_tol))
    throw numerical_error("uniform optimum: boundary point infeasible");
  if (t + 1e-6 <= 1.0 && search_ok(t + 1e-6))
    throw numerical_error("uniform optimum: bracket verification failed");
  return OptimizationResult{detail::scaled_allocation(share, k, t), t};
}

namespace detail {

inline double ascent_objective(const ProbabilityAllocation& p,
                               const WeightVector& w) {
  double acc = 0.0;
  for (std::size_t b = 0; b < p.branch_count(); ++b)
    for (std::size_t i = 0; i < p.state_count(); ++i) acc += w[b] * p(b, i);
  return acc / static_cast<double>(p.state_count());
}

}  // namespace detail

/// Coordinate-ascent refinement of the uniform optimum toward state-dependent
/// allocations.  Coordinates are visited in a fixed order (branch outer,
/// state inner, both ascending); each is pushed upward by a 40-step
/// bisection against feasibility while all others stay fixed.  The objective
/// sum_{b,i} w[b] p[b][i] / k never decreases, and a final symmetrization
/// pass averages the allocation across states whose Gram rows match up to
/// permutation, keeping the averaged point only if it stays feasible.
inline OptimizationResult max_per_state_success(const HermitianMatrix& g,
                                                std::size_t branches,
                                                const WeightVector& w,
                                                std::size_t rounds = 50,
                                                double feasibility_tol = 1e-9) {
  if (rounds == 0)
    throw std::invalid_argument("per-state optimum: rounds must be >= 1");
  ProbabilityAllocation p =
      max_uniform_success(g, branches, w, feasibility_tol).allocation;
  const std::size_t k = g.size();
  const std::vector<HermitianMatrix> stack = gram_stack(g, branches);
  const auto feasible = [&](const ProbabilityAllocation& a) {
    return detail::search_feasible(residual(g, stack, a), feasibility_tol);
  };

  double objective = detail::ascent_objective(p, w);
  for (std::size_t round = 0; round < rounds; ++round) {
    for (std::size_t b = 0; b < branches; ++b) {
      for (std::size_t i = 0; i < k; ++i) {
        const double cur = p(b, i);
        const double headroom = std::max(0.0, 1.0 - p.state_total(i));
        const double ub = std::min(1.0, cur + headroom);
        if (!(ub > cur)) continue;
        p.set(b, i, ub);
        if (feasible(p)) continue;
        double lo = cur;
        double hi = ub;
        for (int it = 0; it < 40; ++it) {
          const double mid = 0.5 * (lo + hi);
          p.set(b, i, mid);
          (feasible(p) ? lo : hi) = mid;
        }
        p.set(b, i, lo);
      }
    }
    const double next = detail::ascent_objective(p, w);
    const bool settled = next - objective < 1e-9;
    objective = next;
    if (settled) break;
  }

  // Symmetrization: states whose sorted Gram-row moduli agree within 1e-10
  // are interchangeable; average their rows and keep the result if it is
  // still feasible.
  std::vector<std::vector<double>> keys(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) keys[i].push_back(std::abs(g(i, j)));
    std::sort(keys[i].begin(), keys[i].end());
  }
  std::vector<std::size_t> klass(k);
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t assigned = reps.size();
    for (std::size_t c = 0; c < reps.size(); ++c) {
      double worst = 0.0;
      for (std::size_t j = 0; j < k; ++j)
        worst = std::max(worst, std::abs(keys[i][j] - keys[reps[c]][j]));
      if (worst <= 1e-10) {
        assigned = c;
        break;
      }
    }
    if (assigned == reps.size()) reps.push_back(i);
    klass[i] = assigned;
  }
  if (reps.size() < k) {
    ProbabilityAllocation averaged = p;
    for (std::size_t c = 0; c < reps.size(); ++c) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < k; ++i)
        if (klass[i] == c) members.push_back(i);
      if (members.size() < 2) continue;
      for (std::size_t b = 0; b < branches; ++b) {
        double mean = 0.0;
        for (std::size_t i : members) mean += p(b, i);
        mean /= static_cast<double>(members.size());
        for (std::size_t i : members) averaged.set(b, i, mean);
      }
    }
    if (feasible(averaged)) p = std::move(averaged);
  }

  return OptimizationResult{p, detail::ascent_objective(p, w)};
}

/// Two-copy success-probability ceiling 1/(1+s) at overlap modulus s.
inline double duan_guo_bound(double s) {
  if (!(s >= 0.0 && s < 1.0))
    throw std::invalid_argument("duan_guo_bound: s must lie in [0, 1)");
  return 1.0 / (1.0 + s);
}

/// m-copy generalization (1-s)/(1-s^m); the argument m is the exponent in
/// the denominator, i.e. the total number of copies produced.
inline double chefles_barnett_bound(double s, int m) {
  if (!(s >= 0.0 && s < 1.0))
    throw std::invalid_argument("chefles_barnett_bound: s must lie in [0, 1)");
  if (m < 1) throw std::invalid_argument("chefles_barnett_bound: m must be >= 1");
  if (m == 1 || s == 0.0) return 1.0;
  return (1.0 - s) / (1.0 - std::pow(s, m));
}

/// Pairwise success-probability bound and its equivalent distance form.
/// lhs = (1/2) sum_b (p[b][i] + p[b][j]) (1 - s^(b+2)) must stay below
/// rhs = 1 - s for every feasible allocation; the distance form restates
/// both sides through D^2(a,b) = 2(1 - |<a|b>|) and equals exactly twice
/// the probability form.
struct BoundReport {
  std::size_t i = 0;
  std::size_t j = 0;
  double overlap = 0.0;  // s = |G(i,j)|
  double lhs = 0.0;
  double rhs = 0.0;
  double distance_lhs = 0.0;
  double distance_rhs = 0.0;
  bool satisfied = false;
};

inline BoundReport check_pair_bound(const ProbabilityAllocation& alloc,
                                    const HermitianMatrix& g, std::size_t i,
                                    std::size_t j) {
  const std::size_t k = g.size();
  if (i >= k || j >= k || alloc.state_count() != k)
    throw std::invalid_argument("pair bound: index out of range");
  if (i == j) throw std::invalid_argument("pair bound: indices must differ");

  BoundReport rep;
  rep.i = i;
  rep.j = j;
  rep.overlap = std::abs(g(i, j));
  for (std::size_t b = 0; b < alloc.branch_count(); ++b) {
    double pw = 1.0;
    for (std::size_t e = 0; e < b + 2; ++e) pw *= rep.overlap;
    rep.lhs += 0.5 * (alloc(b, i) + alloc(b, j)) * (1.0 - pw);
  }
  rep.rhs = 1.0 - rep.overlap;
  rep.distance_lhs = 2.0 * rep.lhs;
  rep.distance_rhs = 2.0 * rep.rhs;
  rep.satisfied = rep.lhs <= rep.rhs + 1e-9;
  return rep;
}

}  // namespace nqcm

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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "support.hpp"

using namespace nqcm;
using nqcm::testing::gram2;
using nqcm::testing::overlap_pair;
using nqcm::testing::random_independent_set;
using nqcm::testing::scaled_optimum;
using nqcm::testing::state_of;

namespace {

ProbabilityAllocation uniform_alloc(std::size_t branches, std::size_t states,
                                    double value) {
  ProbabilityAllocation a(branches, states);
  for (std::size_t b = 0; b < branches; ++b)
    for (std::size_t i = 0; i < states; ++i) a.set(b, i, value / branches);
  return a;
}

/// Duan-Guo boundary machine: overlap 0.5 pair, single branch, p = 2/3.
NovelCloningMachine boundary_machine() {
  ProbabilityAllocation alloc(1, 2);
  alloc.set(0, 0, 2.0 / 3.0);
  alloc.set(0, 1, 2.0 / 3.0);
  return synthesize(overlap_pair(0.5), 1, alloc, {});
}

}  // namespace

TEST_CASE("probability allocation guards") {
  ProbabilityAllocation a(2, 2);
  REQUIRE(a.branch_count() == 2);
  REQUIRE(a.state_count() == 2);
  REQUIRE(a(0, 0) == 0.0);

  SECTION("entries must be probabilities") {
    REQUIRE_THROWS_AS(a.set(0, 0, -0.1), std::invalid_argument);
    REQUIRE_THROWS_AS(a.set(0, 0, 1.1), std::invalid_argument);
  }

  SECTION("per-state totals above 1 are rejected and reverted") {
    a.set(0, 0, 0.7);
    REQUIRE_THROWS_AS(a.set(1, 0, 0.5), std::invalid_argument);
    REQUIRE(a(1, 0) == 0.0);
    REQUIRE_THAT(a.state_total(0), Catch::Matchers::WithinAbs(0.7, 1e-15));
  }

  SECTION("from_rows validates shape") {
    REQUIRE_THROWS_AS(ProbabilityAllocation::from_rows({{0.1, 0.2}, {0.3}}),
                      std::invalid_argument);
    const ProbabilityAllocation b =
        ProbabilityAllocation::from_rows({{0.1, 0.2}, {0.3, 0.4}});
    REQUIRE(b(1, 1) == 0.4);
  }
}

TEST_CASE("gram stack holds ascending hadamard powers") {
  const std::vector<HermitianMatrix> stack = gram_stack(gram2(0.5), 2);
  REQUIRE(stack.size() == 2);
  REQUIRE_THAT(stack[0](0, 1).real(), Catch::Matchers::WithinAbs(0.25, 1e-15));
  REQUIRE_THAT(stack[1](0, 1).real(), Catch::Matchers::WithinAbs(0.125, 1e-15));
  REQUIRE_THROWS_AS(gram_stack(gram2(0.5), 0), std::invalid_argument);
}

TEST_CASE("residual on known allocations") {
  const HermitianMatrix g = gram2(0.5);

  SECTION("all-zero allocation returns the gram matrix") {
    const HermitianMatrix r = residual(g, ProbabilityAllocation(2, 2));
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) REQUIRE(r(i, j) == g(i, j));
  }

  SECTION("perfect cloning of orthogonal states zeroes the residual") {
    const HermitianMatrix id = HermitianMatrix(Matrix::identity(2));
    ProbabilityAllocation alloc(2, 2);
    alloc.set(1, 0, 1.0);
    alloc.set(1, 1, 1.0);
    const HermitianMatrix r = residual(id, alloc);
    REQUIRE(r.matrix().frobenius_norm() == 0.0);
  }

  SECTION("boundary allocation at overlap 0.5") {
    const HermitianMatrix r = residual(g, uniform_alloc(1, 2, 2.0 / 3.0));
    REQUIRE_THAT(r(0, 0).real(),
                 Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));
    REQUIRE_THAT(r(0, 1).real(),
                 Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));
    REQUIRE(std::abs(min_eigenvalue(r)) <= 1e-15);
  }

  SECTION("diagonal equals one minus the state total") {
    ProbabilityAllocation alloc(2, 2);
    alloc.set(0, 0, 0.25);
    alloc.set(1, 0, 0.5);
    const HermitianMatrix r = residual(g, alloc);
    REQUIRE(r(0, 0) == Complex{1.0 - 0.75, 0.0});
    REQUIRE(r(1, 1) == Complex{1.0, 0.0});
  }

  SECTION("shape mismatch throws") {
    REQUIRE_THROWS_AS(residual(g, ProbabilityAllocation(1, 3)),
                      std::invalid_argument);
  }
}

TEST_CASE("feasibility test") {
  const HermitianMatrix g = gram2(0.5);

  REQUIRE(is_feasible(HermitianMatrix(Matrix(2, 2))));
  REQUIRE(is_feasible(residual(g, uniform_alloc(1, 2, 2.0 / 3.0))));

  SECTION("overshooting the boundary is infeasible") {
    const HermitianMatrix r = residual(g, uniform_alloc(1, 2, 0.9));
    REQUIRE_FALSE(is_feasible(r));
    REQUIRE(min_eigenvalue(r) < -1e-3);
  }

  SECTION("tolerance must be positive") {
    REQUIRE_THROWS_AS(is_feasible(g, 0.0), std::invalid_argument);
  }
}

TEST_CASE("synthesis of the orthogonal perfect-cloning machine") {
  const StateSet s({PureState::basis(2, 0), PureState::basis(2, 1)});
  const NovelCloningMachine m = synthesize(s, 1, uniform_alloc(1, 2, 1.0), {});

  REQUIRE(m.failure_count() == 0);
  REQUIRE(m.probe_dim == 1);
  REQUIRE(m.composite_dim() == 4);
  REQUIRE(m.unitary.has_value());
  REQUIRE_FALSE(m.unitary_capped);

  SECTION("images are exact double copies") {
    // |0> -> |00> and |1> -> |11> on the two copy slots.
    REQUIRE(m.input_images[0][0] == Complex{1.0, 0.0});
    REQUIRE(m.input_images[1][3] == Complex{1.0, 0.0});
  }

  SECTION("unitary maps embeddings to images exactly") {
    const Matrix& u = *m.unitary;
    REQUIRE(u(0, 0) == Complex{1.0, 0.0});
    REQUIRE(u(3, 2) == Complex{1.0, 0.0});
    for (std::size_t i = 0; i < 2; ++i) {
      const std::vector<Complex> image = u * m.input_embedding(s[i]);
      for (std::size_t r = 0; r < image.size(); ++r)
        REQUIRE(std::abs(image[r] - m.input_images[i][r]) <= 1e-14);
    }
  }

  SECTION("validation is exact to machine precision") {
    const ValidationReport rep = validate_machine(m);
    REQUIRE(rep.passed());
    REQUIRE(rep.max_overlap_error < 1e-12);
    REQUIRE(rep.max_normalization_error < 1e-12);
    REQUIRE(*rep.unitarity_defect < 1e-12);
    REQUIRE(*rep.max_application_error < 1e-12);
  }
}

TEST_CASE("synthesis of the boundary machine at overlap 0.5") {
  const NovelCloningMachine m = boundary_machine();

  REQUIRE(m.failure_count() == 1);
  REQUIRE(m.probe_dim == 2);
  REQUIRE(m.composite_dim() == 8);
  REQUIRE(m.unitary.has_value());

  SECTION("per-state failure probability is one third") {
    for (std::size_t i = 0; i < 2; ++i) {
      double f = 0.0;
      for (std::size_t l = 0; l < m.failure_count(); ++l)
        f += std::norm(m.failure_coeffs(i, l));
      REQUIRE_THAT(f, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
    }
  }

  SECTION("failure coefficients reproduce the residual") {
    const HermitianMatrix r =
        residual(gram_matrix(m.source), m.allocation);
    const Matrix cct = m.failure_coeffs * m.failure_coeffs.adjoint();
    REQUIRE(nqcm::testing::frobenius_distance(cct, r.matrix()) <= 1e-12);
  }

  SECTION("image overlaps reproduce the source overlaps") {
    Complex overlap{0.0, 0.0};
    for (std::size_t r = 0; r < m.input_images[0].size(); ++r)
      overlap += std::conj(m.input_images[0][r]) * m.input_images[1][r];
    REQUIRE(std::abs(overlap - Complex{0.5, 0.0}) <= 1e-12);
  }

  SECTION("validation holds within the machine tolerances") {
    const ValidationReport rep = validate_machine(m);
    REQUIRE(rep.passed());
    REQUIRE(rep.max_overlap_error <= 1e-9);
    REQUIRE(rep.max_normalization_error <= 1e-9);
    REQUIRE(*rep.unitarity_defect <=
            1e-10 * std::sqrt(static_cast<double>(m.composite_dim())));
    REQUIRE(*rep.max_application_error <= 1e-10);
  }
}

TEST_CASE("degenerate all-failure machine") {
  const StateSet s = overlap_pair(0.5);
  const NovelCloningMachine m = synthesize(s, 1, ProbabilityAllocation(1, 2), {});

  REQUIRE(m.failure_count() == 2);  // full-rank residual: R = G
  for (std::size_t i = 0; i < 2; ++i) {
    double f = 0.0;
    for (std::size_t l = 0; l < m.failure_count(); ++l)
      f += std::norm(m.failure_coeffs(i, l));
    REQUIRE_THAT(f, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
  REQUIRE(validate_machine(m).passed());
}

TEST_CASE("synthesis error paths") {
  SECTION("dependent sets are rejected") {
    const StateSet dep({PureState::basis(2, 0), PureState::basis(2, 1),
                        state_of({Complex{1.0, 0.0}, Complex{1.0, 0.0}})});
    REQUIRE_THROWS_AS(synthesize(dep, 1, ProbabilityAllocation(1, 3), {}),
                      infeasibility_error);
  }

  SECTION("infeasible allocations are rejected") {
    REQUIRE_THROWS_AS(
        synthesize(overlap_pair(0.5), 1, uniform_alloc(1, 2, 0.9), {}),
        infeasibility_error);
  }

  SECTION("invalid arguments are rejected") {
    const StateSet s = overlap_pair(0.5);
    REQUIRE_THROWS_AS(synthesize(s, 0, ProbabilityAllocation(1, 2), {}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(synthesize(s, 2, ProbabilityAllocation(1, 2), {}),
                      std::invalid_argument);
    SynthesisOptions opts;
    opts.blank_index = 5;
    REQUIRE_THROWS_AS(synthesize(s, 1, ProbabilityAllocation(1, 2), opts),
                      std::invalid_argument);
  }
}

TEST_CASE("dimension cap skips the explicit unitary") {
  SynthesisOptions opts;
  opts.unitary_dim_cap = 4;  // the boundary machine needs D = 8
  ProbabilityAllocation alloc(1, 2);
  alloc.set(0, 0, 2.0 / 3.0);
  alloc.set(0, 1, 2.0 / 3.0);
  const NovelCloningMachine m = synthesize(overlap_pair(0.5), 1, alloc, opts);

  REQUIRE_FALSE(m.unitary.has_value());
  REQUIRE(m.unitary_capped);
  REQUIRE(m.input_images.empty());

  SECTION("validation falls back to the algebraic overlap identity") {
    const ValidationReport rep = validate_machine(m);
    REQUIRE(rep.passed());
    REQUIRE_FALSE(rep.unitarity_defect.has_value());
    REQUIRE_FALSE(rep.max_application_error.has_value());
  }

  SECTION("application requires the unitary") {
    REQUIRE_THROWS_AS(apply_machine(m, PureState::basis(2, 0)),
                      std::invalid_argument);
  }
}

TEST_CASE("corrupted allocations are flagged by validation") {
  NovelCloningMachine m = boundary_machine();
  // Inflate every success probability by 1% behind the machine's back.
  for (std::size_t b = 0; b < m.allocation.branch_count(); ++b)
    for (std::size_t i = 0; i < m.allocation.state_count(); ++i)
      m.allocation.set(b, i, 1.01 * m.allocation(b, i));

  const ValidationReport rep = validate_machine(m);
  REQUIRE_FALSE(rep.normalization_ok);
  REQUIRE(rep.max_normalization_error > 1e-3);
  REQUIRE_FALSE(rep.passed());
}

TEST_CASE("synthesized machines satisfy their invariants on random instances") {
  std::mt19937_64 rng(0x31u);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 2 + rng() % 2;
    const std::size_t k = 2 + (d > 2 ? rng() % 2 : 0);
    const std::size_t branches = 1 + rng() % 3;
    const StateSet s = random_independent_set(rng, d, k);
    const HermitianMatrix g = gram_matrix(s);

    const double u = trial % 3 == 0 ? 1.0 : 0.3 + 0.65 * (rng() % 1000) / 1000.0;
    const ProbabilityAllocation alloc =
        scaled_optimum(g, branches, WeightVector::uniform(branches), u);

    const NovelCloningMachine m = synthesize(s, branches, alloc, {});
    const ValidationReport rep = validate_machine(m);
    CAPTURE(d, k, branches, u, rep.max_overlap_error,
            rep.max_normalization_error);
    REQUIRE(rep.max_overlap_error <= 1e-9);
    REQUIRE(rep.max_normalization_error <= 1e-9);
    REQUIRE(m.unitary.has_value());
    REQUIRE(*rep.unitarity_defect <=
            1e-10 * std::sqrt(static_cast<double>(m.composite_dim())));
    REQUIRE(*rep.max_application_error <= 1e-10);
    REQUIRE(rep.passed());
  }
}

TEST_CASE("total success is infeasible for overlapping pairs") {
  std::mt19937_64 rng(0x32u);
  for (double s : {0.05, 0.3, 0.6, 0.9}) {
    const HermitianMatrix g = gram2(s);
    for (int trial = 0; trial < 100; ++trial) {
      // Random allocation with both state totals exactly 1 across 2 branches.
      ProbabilityAllocation alloc(2, 2);
      for (std::size_t i = 0; i < 2; ++i) {
        const double r = (rng() % 10001) / 10000.0;
        alloc.set(0, i, r);
        alloc.set(1, i, 1.0 - r);
      }
      REQUIRE(min_eigenvalue(residual(g, alloc)) < -1e-6);
    }
  }

  SECTION("orthogonal pairs accept any total-success split") {
    const HermitianMatrix id = HermitianMatrix(Matrix::identity(2));
    for (int trial = 0; trial < 20; ++trial) {
      ProbabilityAllocation alloc(2, 2);
      for (std::size_t i = 0; i < 2; ++i) {
        const double r = (rng() % 10001) / 10000.0;
        alloc.set(0, i, r);
        alloc.set(1, i, 1.0 - r);
      }
      const HermitianMatrix r = residual(id, alloc);
      REQUIRE(r.matrix().frobenius_norm() <= 1e-15);
    }
  }
}

TEST_CASE("linearity witness") {
  const NovelCloningMachine m = boundary_machine();

  SECTION("single-member coefficients show no discrepancy") {
    REQUIRE(linearity_witness(m, {Complex{1.0, 0.0}, Complex{0.0, 0.0}}) <=
            1e-10);
    REQUIRE(linearity_witness(m, {Complex{0.0, 0.0}, Complex{3.0, 0.0}}) <=
            1e-10);
  }

  SECTION("equal superpositions are not cloned") {
    const double w =
        linearity_witness(m, {Complex{1.0, 0.0}, Complex{1.0, 0.0}});
    REQUIRE(w > 1e-3);
  }

  SECTION("holds for orthogonal-set machines too") {
    const StateSet s({PureState::basis(2, 0), PureState::basis(2, 1)});
    const NovelCloningMachine perfect =
        synthesize(s, 1, uniform_alloc(1, 2, 1.0), {});
    const double w =
        linearity_witness(perfect, {Complex{1.0, 0.0}, Complex{1.0, 0.0}});
    REQUIRE(w > 1e-3);
  }

  SECTION("error paths") {
    REQUIRE_THROWS_AS(linearity_witness(m, {Complex{1.0, 0.0}}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(
        linearity_witness(m, {Complex{0.0, 0.0}, Complex{0.0, 0.0}}),
        std::invalid_argument);
    SynthesisOptions opts;
    opts.unitary_dim_cap = 4;
    ProbabilityAllocation alloc(1, 2);
    alloc.set(0, 0, 0.5);
    alloc.set(0, 1, 0.5);
    const NovelCloningMachine capped =
        synthesize(overlap_pair(0.5), 1, alloc, opts);
    REQUIRE_THROWS_AS(
        linearity_witness(capped, {Complex{1.0, 0.0}, Complex{1.0, 0.0}}),
        std::invalid_argument);
  }
}

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
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nqcm/linalg.hpp"
#include "nqcm/machine.hpp"
#include "nqcm/rng.hpp"
#include "nqcm/states.hpp"

namespace nqcm {

/// Probe observable whose eigenvalue n (= 1..M) labels the success branch
/// carrying n+1 total copies.  Failure probe vectors lie in its kernel and
/// are reported as sentinel outcomes rather than eigenvalues.
struct XeroxOperator {
  std::size_t probe_dim = 0;
  std::size_t success_count = 0;

  static XeroxOperator for_machine(const NovelCloningMachine& m) {
    return XeroxOperator{m.probe_dim, m.max_branches};
  }

  bool is_success_index(std::size_t probe_index) const {
    return probe_index < success_count;
  }

  /// Eigenvalue (branch label) on a success probe index.
  std::size_t eigenvalue(std::size_t probe_index) const {
    if (!is_success_index(probe_index))
      throw std::invalid_argument("xerox operator: not a success index");
    return probe_index + 1;
  }

  /// 1-based failure branch label on a failure probe index.
  std::size_t failure_label(std::size_t probe_index) const {
    if (probe_index < success_count || probe_index >= probe_dim)
      throw std::invalid_argument("xerox operator: not a failure index");
    return probe_index - success_count + 1;
  }

  /// Dense probe-space matrix diag(1, 2, ..., M, 0, ..., 0).
  Matrix probe_operator() const {
    Matrix n(probe_dim, probe_dim);
    for (std::size_t q = 0; q < success_count; ++q)
      n(q, q) = static_cast<double>(q + 1);
    return n;
  }
};

/// Measurement outcome: success branch n (1..M, producing n+1 copies) or
/// failure branch l (1..L, copies = 0).
struct MeasurementOutcome {
  bool success = false;
  std::size_t index = 0;
  std::size_t copies = 0;

  friend bool operator==(const MeasurementOutcome&,
                         const MeasurementOutcome&) = default;
};

struct MeasurementRecord {
  MeasurementOutcome outcome;
  double probability = 0.0;
  PureState post_state;
  std::optional<double> clone_fidelity;
};

struct BranchProbabilities {
  std::vector<double> success;  // index n-1 holds branch n
  std::vector<double> failure;  // index l-1 holds failure branch l

  double total() const {
    double acc = 0.0;
    for (double p : success) acc += p;
    for (double p : failure) acc += p;
    return acc;
  }
};

/// U applied to the machine's initial composite vector for `input`.
inline PureState apply_machine(const NovelCloningMachine& m,
                               const PureState& input) {
  if (!m.unitary.has_value())
    throw std::invalid_argument("apply_machine: machine has no explicit unitary");
  std::vector<Complex> out = *m.unitary * m.input_embedding(input);
  // Unitarity keeps the norm at 1 up to completion error; anything worse
  // than 1e-10 is a real defect, not rounding.
  return PureState::renormalized(std::move(out), 1e-10);
}

/// Squared block norms of a composite output, split by probe index into
/// success branches (first M) and failure branches (rest).
inline BranchProbabilities branch_probabilities(const PureState& output,
                                                const NovelCloningMachine& m) {
  const std::size_t probe_dim = m.probe_dim;
  if (output.dimension() % probe_dim != 0)
    throw std::invalid_argument("branch probabilities: dimension mismatch");
  const std::size_t ab_dim = output.dimension() / probe_dim;

  std::vector<double> block(probe_dim, 0.0);
  for (std::size_t a = 0; a < ab_dim; ++a)
    for (std::size_t q = 0; q < probe_dim; ++q)
      block[q] += std::norm(output[a * probe_dim + q]);

  BranchProbabilities bp;
  bp.success.assign(block.begin(),
                    block.begin() + static_cast<std::ptrdiff_t>(m.max_branches));
  bp.failure.assign(block.begin() + static_cast<std::ptrdiff_t>(m.max_branches),
                    block.end());
  return bp;
}

namespace detail {

/// Inverse-CDF branch selection over the fixed order success 1..M then
/// failure 1..L.  Zero-probability branches can never be selected; if the
/// draw lands past the accumulated total (possible only through rounding in
/// the total itself), the last positive branch is chosen.
inline std::size_t select_branch(const BranchProbabilities& bp, double u) {
  double acc = 0.0;
  std::size_t last_positive = 0;
  bool seen_positive = false;
  const std::size_t m = bp.success.size();
  const std::size_t total = m + bp.failure.size();
  for (std::size_t q = 0; q < total; ++q) {
    const double p = q < m ? bp.success[q] : bp.failure[q - m];
    if (p > 0.0) {
      last_positive = q;
      seen_positive = true;
    }
    acc += p;
    if (u < acc) return q;
  }
  if (!seen_positive)
    throw std::invalid_argument("branch selection: all probabilities zero");
  return last_positive;
}

}  // namespace detail

/// Measure the Xerox number operator on a machine output.  One uniform draw
/// is consumed from `rng`.  `input` is the state that was fed to the
/// machine; it fixes the reference copies for clone_fidelity, which is
/// reported for success outcomes only.
inline MeasurementRecord measure_xerox(const PureState& output,
                                       const NovelCloningMachine& m,
                                       const PureState& input,
                                       CounterRng& rng) {
  if (input.dimension() != m.state_dim())
    throw std::invalid_argument("measure: input dimension mismatch");
  const BranchProbabilities bp = branch_probabilities(output, m);
  const std::size_t q = detail::select_branch(bp, rng.next());
  const std::size_t probe_dim = m.probe_dim;
  const std::size_t ab_dim = output.dimension() / probe_dim;

  std::vector<Complex> projected(output.dimension(), Complex{0.0, 0.0});
  for (std::size_t a = 0; a < ab_dim; ++a)
    projected[a * probe_dim + q] = output[a * probe_dim + q];

  MeasurementRecord rec{MeasurementOutcome{}, 0.0,
                        PureState::renormalized(std::move(projected)),
                        std::nullopt};
  if (q < m.max_branches) {
    rec.outcome = MeasurementOutcome{true, q + 1, q + 2};
    rec.probability = bp.success[q];

    std::vector<Complex> ref =
        detail::kron_power(input.amplitudes(), q + 2);
    ref = detail::kron(
        ref, detail::kron_power(m.blank_state().amplitudes(),
                                m.max_branches - (q + 1)));
    Complex overlap{0.0, 0.0};
    for (std::size_t a = 0; a < ab_dim; ++a)
      overlap += std::conj(ref[a]) * rec.post_state[a * probe_dim + q];
    rec.clone_fidelity = std::norm(overlap);
  } else {
    rec.outcome = MeasurementOutcome{false, q - m.max_branches + 1, 0};
    rec.probability = bp.failure[q - m.max_branches];
  }
  return rec;
}

struct FrequencyRow {
  MeasurementOutcome outcome;
  std::uint64_t count = 0;
  double frequency = 0.0;
  double exact_probability = 0.0;
  double z = 0.0;  // 0 when exact_probability is not in (0, 1)
};

struct FrequencyTable {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<FrequencyRow> rows;  // success 1..M then failure 1..L
};

/// Sample `trials` measurements of the machine applied to `input`.  Trial t
/// consumes exactly the draw counter_uniform(seed, t), so the table is
/// independent of evaluation order.
inline FrequencyTable monte_carlo(const NovelCloningMachine& m,
                                  const PureState& input, std::uint64_t trials,
                                  std::uint64_t seed) {
  if (trials == 0)
    throw std::invalid_argument("monte carlo: need at least one trial");
  const PureState output = apply_machine(m, input);
  const BranchProbabilities bp = branch_probabilities(output, m);
  const std::size_t branches = bp.success.size() + bp.failure.size();

  std::vector<std::uint64_t> counts(branches, 0);
  for (std::uint64_t t = 0; t < trials; ++t)
    ++counts[detail::select_branch(bp, counter_uniform(seed, t))];

  FrequencyTable table{trials, seed, {}};
  table.rows.reserve(branches);
  for (std::size_t q = 0; q < branches; ++q) {
    FrequencyRow row;
    if (q < bp.success.size()) {
      row.outcome = MeasurementOutcome{true, q + 1, q + 2};
      row.exact_probability = bp.success[q];
    } else {
      row.outcome = MeasurementOutcome{false, q - bp.success.size() + 1, 0};
      row.exact_probability = bp.failure[q - bp.success.size()];
    }
    row.count = counts[q];
    row.frequency =
        static_cast<double>(row.count) / static_cast<double>(trials);
    const double p = row.exact_probability;
    if (p > 0.0 && p < 1.0)
      row.z = (row.frequency - p) * std::sqrt(static_cast<double>(trials)) /
              std::sqrt(p * (1.0 - p));
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace nqcm

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
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nqcm/config.hpp"
#include "nqcm/machine.hpp"
#include "nqcm/optimizer.hpp"
#include "nqcm/rng.hpp"
#include "nqcm/simulator.hpp"
#include "nqcm/states.hpp"

namespace nqcm {

enum class Command { check, synth, bounds, simulate, sweep };

inline const char* command_name(Command cmd) {
  switch (cmd) {
    case Command::check: return "check";
    case Command::synth: return "synth";
    case Command::bounds: return "bounds";
    case Command::simulate: return "simulate";
    case Command::sweep: return "sweep";
  }
  return "unknown";
}

struct RunOptions {
  bool include_timing = true;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::uint64_t> trials_override;
  // Value of NQCM_TOL_OVERRIDE, echoed into the report header for audit;
  // it never changes any tolerance.
  std::optional<std::string> tol_override_note;
};

namespace detail {

class StageTimer {
 public:
  explicit StageTimer(bool enabled) : enabled_(enabled) {}

  template <typename F>
  auto time(const std::string& stage, F&& fn) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(stage, start);
    } else {
      auto result = fn();
      record(stage, start);
      return result;
    }
  }

  const nlohmann::json& stages() const { return stages_; }
  bool enabled() const { return enabled_; }

 private:
  void record(const std::string& stage,
              std::chrono::steady_clock::time_point start) {
    if (!enabled_) return;
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    stages_[stage] = ms;
  }

  bool enabled_;
  nlohmann::json stages_ = nlohmann::json::object();
};

inline nlohmann::json complex_to_json(const Complex& z) {
  return nlohmann::json::array({z.real(), z.imag()});
}

inline nlohmann::json allocation_to_json(const ProbabilityAllocation& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t b = 0; b < a.branch_count(); ++b) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t i = 0; i < a.state_count(); ++i) row.push_back(a(b, i));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json bound_to_json(const BoundReport& r) {
  nlohmann::json j;
  j["i"] = r.i;
  j["j"] = r.j;
  j["overlap"] = r.overlap;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["distance_lhs"] = r.distance_lhs;
  j["distance_rhs"] = r.distance_rhs;
  j["satisfied"] = r.satisfied;
  return j;
}

inline nlohmann::json validation_to_json(const ValidationReport& v) {
  nlohmann::json j;
  j["max_overlap_error"] = v.max_overlap_error;
  j["max_normalization_error"] = v.max_normalization_error;
  j["overlap_ok"] = v.overlap_ok;
  j["normalization_ok"] = v.normalization_ok;
  j["unitary_ok"] = v.unitary_ok;
  j["application_ok"] = v.application_ok;
  if (v.unitarity_defect) {
    j["unitarity_defect"] = *v.unitarity_defect;
    j["unitarity_tolerance"] = v.unitarity_tolerance;
  }
  if (v.max_application_error)
    j["max_application_error"] = *v.max_application_error;
  j["passed"] = v.passed();
  return j;
}

inline nlohmann::json machine_to_json(const NovelCloningMachine& m) {
  nlohmann::json j;
  j["max_branches"] = m.max_branches;
  j["failure_branches"] = m.failure_count();
  j["probe_dim"] = m.probe_dim;
  j["blank_index"] = m.blank_index;
  j["composite_dim"] = m.composite_dim();
  j["unitary_present"] = m.unitary.has_value();
  j["unitary_capped"] = m.unitary_capped;
  nlohmann::json coeffs = nlohmann::json::array();
  for (std::size_t i = 0; i < m.state_count(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t l = 0; l < m.failure_count(); ++l)
      row.push_back(complex_to_json(m.failure_coeffs(i, l)));
    coeffs.push_back(std::move(row));
  }
  j["failure_coeffs"] = std::move(coeffs);
  return j;
}

inline nlohmann::json frequency_table_to_json(const FrequencyTable& t) {
  nlohmann::json j;
  j["trials"] = t.trials;
  j["seed"] = t.seed;
  nlohmann::json rows = nlohmann::json::array();
  for (const FrequencyRow& r : t.rows) {
    nlohmann::json row;
    row["kind"] = r.outcome.success ? "success" : "failure";
    row["index"] = r.outcome.index;
    row["copies"] = r.outcome.copies;
    row["count"] = r.count;
    row["frequency"] = r.frequency;
    row["exact_probability"] = r.exact_probability;
    row["z"] = r.z;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

inline nlohmann::json pair_bounds_json(const ProbabilityAllocation& alloc,
                                       const HermitianMatrix& g,
                                       std::size_t branches) {
  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      const BoundReport r = check_pair_bound(alloc, g, i, j);
      nlohmann::json entry = bound_to_json(r);
      entry["duan_guo"] = duan_guo_bound(std::min(r.overlap, 1.0 - 1e-15));
      nlohmann::json cb = nlohmann::json::array();
      for (std::size_t b = 0; b < branches; ++b) {
        nlohmann::json one;
        one["copies"] = b + 2;
        one["value"] = chefles_barnett_bound(
            std::min(r.overlap, 1.0 - 1e-15), static_cast<int>(b) + 2);
        cb.push_back(std::move(one));
      }
      entry["chefles_barnett"] = std::move(cb);
      pairs.push_back(std::move(entry));
    }
  }
  return pairs;
}

}  // namespace detail

/// Execute one pipeline command and return the report document.
/// check: independence only.  synth: optimize (when no explicit allocation)
/// + synthesize + validate.  bounds: pairwise bound reports plus closed
/// forms.  simulate: synth plus exact branch probabilities and a Monte
/// Carlo frequency table per source state.  sweep: uniform optimum vs
/// closed forms over the frozen (s, M) grid; the config's states are not
/// consulted for the grid.
inline nlohmann::json run_command(Command cmd, const ProblemConfig& cfg,
                                  const RunOptions& options = {}) {
  using nlohmann::json;
  json out;
  out["command"] = command_name(cmd);
  if (options.tol_override_note)
    out["env_tol_override"] = *options.tol_override_note;
  detail::StageTimer timer(options.include_timing);

  const SynthesisOptions synth_opts = cfg.synthesis_options();

  if (cmd == Command::sweep) {
    json rows = json::array();
    timer.time("sweep", [&] {
      for (std::size_t m = 1; m <= 4; ++m) {
        // Weight sits on the branch whose copy count is max(m, 2); lower
        // branches stay available but unweighted, so the optimum tracks the
        // matching closed-form bound.
        const std::size_t copies = std::max<std::size_t>(m, 2);
        const std::size_t branch = copies - 2;  // 0-based
        const WeightVector w = WeightVector::single_branch(m, branch);
        for (int step = 1; step <= 19; ++step) {
          const double s = static_cast<double>(step) / 20.0;
          Matrix gm(2, 2);
          gm(0, 0) = gm(1, 1) = 1.0;
          gm(0, 1) = gm(1, 0) = s;
          const HermitianMatrix g(std::move(gm));
          const OptimizationResult opt =
              max_uniform_success(g, m, w, synth_opts.feasibility_tol);
          const double cb = chefles_barnett_bound(s, static_cast<int>(copies));
          json row;
          row["s"] = s;
          row["M"] = m;
          row["weight_mode"] =
              "single_branch_" + std::to_string(branch + 1);
          row["uniform_optimum"] = opt.objective;
          row["duan_guo"] = duan_guo_bound(s);
          row["chefles_barnett"] = cb;
          row["gap"] = opt.objective - cb;
          rows.push_back(std::move(row));
        }
      }
    });
    out["rows"] = std::move(rows);
    if (timer.enabled()) out["timing_ms"] = timer.stages();
    return out;
  }

  const StateSet states = cfg.state_set();
  const HermitianMatrix g = gram_matrix(states);
  const IndependenceResult indep = timer.time("independence", [&] {
    return is_linearly_independent(states, synth_opts.independence_tol);
  });
  out["dimension"] = cfg.dimension;
  out["state_count"] = states.size();
  out["independent"] = indep.independent;
  out["min_gram_eigenvalue"] = indep.min_gram_eigenvalue;

  if (cmd == Command::check) {
    if (timer.enabled()) out["timing_ms"] = timer.stages();
    return out;
  }

  if (!indep.independent)
    throw infeasibility_error(
        "run: states are not linearly independent (min Gram eigenvalue " +
        detail::format_double(indep.min_gram_eigenvalue) + ")");

  // Pick the working allocation: explicit from the config, else the
  // uniform optimum under the config weights.
  std::optional<ProbabilityAllocation> explicit_alloc = cfg.explicit_allocation();
  ProbabilityAllocation alloc(cfg.max_copies, states.size());
  if (explicit_alloc.has_value()) {
    alloc = *explicit_alloc;
    out["allocation_mode"] = "explicit";
  } else {
    const OptimizationResult opt = timer.time("optimize", [&] {
      return max_uniform_success(g, cfg.max_copies, cfg.weight_vector(),
                                 synth_opts.feasibility_tol);
    });
    alloc = opt.allocation;
    out["allocation_mode"] = "uniform_optimal";
    out["objective"] = opt.objective;
  }
  out["allocation"] = detail::allocation_to_json(alloc);

  const HermitianMatrix res = residual(g, alloc);
  const double res_min = min_eigenvalue(res);
  out["residual_min_eigenvalue"] = res_min;
  out["feasible"] = is_feasible(res, synth_opts.feasibility_tol);

  if (states.size() > 1)
    out["bounds"] = detail::pair_bounds_json(alloc, g, cfg.max_copies);

  if (cmd == Command::bounds) {
    if (timer.enabled()) out["timing_ms"] = timer.stages();
    return out;
  }

  const NovelCloningMachine machine = timer.time("synthesize", [&] {
    return synthesize(states, cfg.max_copies, alloc, synth_opts);
  });
  out["machine"] = detail::machine_to_json(machine);
  const ValidationReport validation =
      timer.time("validate", [&] { return validate_machine(machine); });
  out["validation"] = detail::validation_to_json(validation);

  if (cmd == Command::simulate) {
    if (!machine.unitary.has_value())
      throw config_error(
          "simulate: composite dimension " +
          std::to_string(machine.composite_dim()) +
          " exceeds unitary_dim_cap, no explicit unitary to simulate");
    const std::uint64_t seed = options.seed_override.value_or(cfg.seed);
    const std::uint64_t trials = options.trials_override.value_or(cfg.trials);
    if (trials == 0)
      throw config_error("simulate: trials must be at least 1");
    out["seed"] = seed;
    out["trials"] = trials;

    json per_state = json::array();
    timer.time("simulate", [&] {
      for (std::size_t i = 0; i < states.size(); ++i) {
        const PureState output = apply_machine(machine, states[i]);
        const BranchProbabilities bp = branch_probabilities(output, machine);
        json entry;
        entry["state"] = i;
        entry["success_probabilities"] = bp.success;
        entry["failure_probabilities"] = bp.failure;
        // Independent substream per state: trial t of state i draws
        // counter_uniform(derive_stream(seed, i), t).
        const FrequencyTable table =
            monte_carlo(machine, states[i], trials, derive_stream(seed, i));
        entry["monte_carlo"] = detail::frequency_table_to_json(table);
        per_state.push_back(std::move(entry));
      }
    });
    out["simulation"] = std::move(per_state);
  }

  if (timer.enabled()) out["timing_ms"] = timer.stages();
  return out;
}

/// Canonical single-line JSON rendering of a report.
inline std::string render_report(const nlohmann::json& report) {
  return detail::canonical_json(report) + "\n";
}

/// CSV rendering; defined for sweep (one row per grid point) and simulate
/// (the per-state probability table).
inline std::string render_csv(Command cmd, const nlohmann::json& report) {
  std::string out;
  if (cmd == Command::sweep) {
    out += "s,M,weight_mode,uniform_optimum,duan_guo,chefles_barnett,gap\n";
    for (const nlohmann::json& row : report.at("rows")) {
      out += detail::format_double(row.at("s").get<double>());
      out += ',';
      out += std::to_string(row.at("M").get<std::uint64_t>());
      out += ',';
      out += row.at("weight_mode").get<std::string>();
      out += ',';
      out += detail::format_double(row.at("uniform_optimum").get<double>());
      out += ',';
      out += detail::format_double(row.at("duan_guo").get<double>());
      out += ',';
      out += detail::format_double(row.at("chefles_barnett").get<double>());
      out += ',';
      out += detail::format_double(row.at("gap").get<double>());
      out += '\n';
    }
    return out;
  }
  if (cmd == Command::simulate) {
    out += "state,outcome,copies,exact_probability,count,frequency,z\n";
    for (const nlohmann::json& entry : report.at("simulation")) {
      const std::uint64_t state = entry.at("state").get<std::uint64_t>();
      for (const nlohmann::json& row : entry.at("monte_carlo").at("rows")) {
        out += std::to_string(state);
        out += ',';
        out += row.at("kind").get<std::string>() + "_" +
               std::to_string(row.at("index").get<std::uint64_t>());
        out += ',';
        out += std::to_string(row.at("copies").get<std::uint64_t>());
        out += ',';
        out += detail::format_double(row.at("exact_probability").get<double>());
        out += ',';
        out += std::to_string(row.at("count").get<std::uint64_t>());
        out += ',';
        out += detail::format_double(row.at("frequency").get<double>());
        out += ',';
        out += detail::format_double(row.at("z").get<double>());
        out += '\n';
      }
    }
    return out;
  }
  throw config_error("csv output is only defined for sweep and simulate");
}

}  // namespace nqcm

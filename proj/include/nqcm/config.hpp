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
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nqcm/machine.hpp"
#include "nqcm/optimizer.hpp"
#include "nqcm/states.hpp"

namespace nqcm {

/// Thrown for malformed or invalid configuration documents; the message
/// names the offending field.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ToleranceOverrides {
  std::optional<double> independence;
  std::optional<double> feasibility;

  friend bool operator==(const ToleranceOverrides&,
                         const ToleranceOverrides&) = default;
};

/// One problem instance as read from a JSON config document.  Complex
/// amplitudes serialize as two-element [re, im] arrays.  States are stored
/// already normalized; inputs whose norm deviates from 1 by more than 1e-12
/// but at most 1e-3 are rescaled, anything further off is rejected.
struct ProblemConfig {
  std::size_t dimension = 0;
  std::vector<std::vector<Complex>> states;
  std::size_t max_copies = 1;
  std::vector<double> weights;
  std::optional<std::vector<std::vector<double>>> allocation;  // M rows x k
  std::size_t blank_index = 0;
  std::uint64_t seed = 0;
  std::uint64_t trials = 10000;
  std::size_t unitary_dim_cap = 4096;
  ToleranceOverrides tolerances;

  friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;

  StateSet state_set() const {
    std::vector<PureState> list;
    list.reserve(states.size());
    for (const std::vector<Complex>& amp : states)
      list.push_back(PureState::renormalized(amp, 1e-6));
    return StateSet(std::move(list));
  }

  WeightVector weight_vector() const { return WeightVector(weights); }

  std::optional<ProbabilityAllocation> explicit_allocation() const {
    if (!allocation.has_value()) return std::nullopt;
    return ProbabilityAllocation::from_rows(*allocation);
  }

  SynthesisOptions synthesis_options() const {
    SynthesisOptions opts;
    opts.blank_index = blank_index;
    opts.unitary_dim_cap = unitary_dim_cap;
    if (tolerances.independence) opts.independence_tol = *tolerances.independence;
    if (tolerances.feasibility) opts.feasibility_tol = *tolerances.feasibility;
    return opts;
  }
};

namespace detail {

/// Fixed 17-significant-digit float formatting shared by every emitter, so
/// documents are byte-stable across platforms and round-trip exactly.
inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void append_json_string(std::string& out, const std::string& s) {
  out += '"';
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

/// Canonical serializer: keys in sorted order (nlohmann objects iterate
/// sorted already), floats at 17 significant digits, no whitespace.
inline void append_canonical(std::string& out, const nlohmann::json& v) {
  using nlohmann::json;
  switch (v.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, value] : v.items()) {
        if (!first) out += ',';
        first = false;
        append_json_string(out, key);
        out += ':';
        append_canonical(out, value);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ',';
        append_canonical(out, v[i]);
      }
      out += ']';
      break;
    }
    case json::value_t::string:
      append_json_string(out, v.get_ref<const std::string&>());
      break;
    case json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    case json::value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      break;
    case json::value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      break;
    case json::value_t::number_float:
      out += format_double(v.get<double>());
      break;
    default:
      out += "null";
      break;
  }
}

inline std::string canonical_json(const nlohmann::json& v) {
  std::string out;
  append_canonical(out, v);
  return out;
}

inline double require_number(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number())
    throw config_error("config: field '" + path + "' must be a number");
  return v.get<double>();
}

inline std::uint64_t require_uint(const nlohmann::json& v,
                                  const std::string& path) {
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw config_error("config: field '" + path + "' must be a non-negative integer");
  if (v.is_number_integer() && v.get<std::int64_t>() < 0)
    throw config_error("config: field '" + path + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

inline Complex parse_complex(const nlohmann::json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2)
    throw config_error("config: field '" + path +
                       "' must be a two-element [re, im] array");
  return Complex{require_number(v[0], path + "[0]"),
                 require_number(v[1], path + "[1]")};
}

}  // namespace detail

/// Parse and validate a config document.  Recoverable oddities (unknown
/// fields, more states than dimensions) are appended to `warnings` unless
/// `strict`, which escalates them to errors.
inline ProblemConfig parse_config(const std::string& text, bool strict = false,
                                  std::vector<std::string>* warnings = nullptr) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw config_error("config: document must be a JSON object");

  const auto warn = [&](const std::string& message) {
    if (strict) throw config_error("config (strict): " + message);
    if (warnings) warnings->push_back(message);
  };

  static const std::set<std::string> known = {
      "dimension", "states",      "max_copies", "weights",
      "allocation", "blank_index", "seed",       "trials",
      "unitary_dim_cap", "tolerances"};
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (!known.count(key)) warn("unknown field '" + key + "' ignored");
  }

  ProblemConfig cfg;

  if (!doc.contains("dimension"))
    throw config_error("config: field 'dimension' is required");
  cfg.dimension =
      static_cast<std::size_t>(detail::require_uint(doc["dimension"], "dimension"));
  if (cfg.dimension < 2)
    throw config_error("config: field 'dimension' must be at least 2");

  if (!doc.contains("states") || !doc["states"].is_array() ||
      doc["states"].empty())
    throw config_error("config: field 'states' must be a nonempty array");
  for (std::size_t i = 0; i < doc["states"].size(); ++i) {
    const std::string path = "states[" + std::to_string(i) + "]";
    const nlohmann::json& sv = doc["states"][i];
    if (!sv.is_array() || sv.size() != cfg.dimension)
      throw config_error("config: field '" + path + "' must list " +
                         std::to_string(cfg.dimension) + " amplitudes");
    std::vector<Complex> amp;
    amp.reserve(cfg.dimension);
    for (std::size_t c = 0; c < sv.size(); ++c)
      amp.push_back(
          detail::parse_complex(sv[c], path + "[" + std::to_string(c) + "]"));
    const double nrm = detail::vec_norm(amp);
    if (std::abs(nrm - 1.0) > 1e-3)
      throw config_error("config: field '" + path + "' has norm " +
                         detail::format_double(nrm) +
                         ", too far from 1 to auto-normalize");
    if (std::abs(nrm - 1.0) > 1e-12)
      for (Complex& z : amp) z /= nrm;
    cfg.states.push_back(std::move(amp));
  }
  if (cfg.states.size() > cfg.dimension)
    warn("more states than dimensions: the set cannot be linearly independent");

  if (doc.contains("max_copies")) {
    cfg.max_copies =
        static_cast<std::size_t>(detail::require_uint(doc["max_copies"], "max_copies"));
    if (cfg.max_copies == 0)
      throw config_error("config: field 'max_copies' must be at least 1");
  }

  if (doc.contains("weights")) {
    const nlohmann::json& wv = doc["weights"];
    if (!wv.is_array() || wv.size() != cfg.max_copies)
      throw config_error("config: field 'weights' must list " +
                         std::to_string(cfg.max_copies) + " entries");
    for (std::size_t b = 0; b < wv.size(); ++b)
      cfg.weights.push_back(
          detail::require_number(wv[b], "weights[" + std::to_string(b) + "]"));
    try {
      WeightVector check(cfg.weights);
      (void)check;
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("config: field 'weights': ") + e.what());
    }
  } else {
    cfg.weights.assign(cfg.max_copies, 1.0);
  }

  if (doc.contains("allocation")) {
    const nlohmann::json& av = doc["allocation"];
    if (!av.is_array() || av.size() != cfg.max_copies)
      throw config_error("config: field 'allocation' must have " +
                         std::to_string(cfg.max_copies) + " rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t b = 0; b < av.size(); ++b) {
      const std::string path = "allocation[" + std::to_string(b) + "]";
      if (!av[b].is_array() || av[b].size() != cfg.states.size())
        throw config_error("config: field '" + path + "' must list " +
                           std::to_string(cfg.states.size()) + " entries");
      std::vector<double> row;
      for (std::size_t i = 0; i < av[b].size(); ++i)
        row.push_back(detail::require_number(
            av[b][i], path + "[" + std::to_string(i) + "]"));
      rows.push_back(std::move(row));
    }
    try {
      ProbabilityAllocation check = ProbabilityAllocation::from_rows(rows);
      (void)check;
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("config: field 'allocation': ") + e.what());
    }
    cfg.allocation = std::move(rows);
  }

  if (doc.contains("blank_index")) {
    cfg.blank_index =
        static_cast<std::size_t>(detail::require_uint(doc["blank_index"], "blank_index"));
    if (cfg.blank_index >= cfg.dimension)
      throw config_error("config: field 'blank_index' must be below 'dimension'");
  }

  if (doc.contains("seed")) cfg.seed = detail::require_uint(doc["seed"], "seed");

  if (doc.contains("trials")) {
    cfg.trials = detail::require_uint(doc["trials"], "trials");
    if (cfg.trials == 0)
      throw config_error("config: field 'trials' must be at least 1");
  }

  if (doc.contains("unitary_dim_cap")) {
    cfg.unitary_dim_cap = static_cast<std::size_t>(
        detail::require_uint(doc["unitary_dim_cap"], "unitary_dim_cap"));
    if (cfg.unitary_dim_cap == 0)
      throw config_error("config: field 'unitary_dim_cap' must be at least 1");
  }

  if (doc.contains("tolerances")) {
    const nlohmann::json& tv = doc["tolerances"];
    if (!tv.is_object())
      throw config_error("config: field 'tolerances' must be an object");
    for (const auto& [key, value] : tv.items()) {
      const double x = detail::require_number(value, "tolerances." + key);
      if (!(x > 0.0))
        throw config_error("config: field 'tolerances." + key +
                           "' must be positive");
      if (key == "independence") {
        cfg.tolerances.independence = x;
      } else if (key == "feasibility") {
        cfg.tolerances.feasibility = x;
      } else {
        warn("unknown field 'tolerances." + key + "' ignored");
      }
    }
  }

  return cfg;
}

/// Canonical serialization; parse_config(emit_config(cfg)) == cfg.
inline std::string emit_config(const ProblemConfig& cfg) {
  using nlohmann::json;
  json doc;
  doc["dimension"] = cfg.dimension;
  json states = json::array();
  for (const std::vector<Complex>& amp : cfg.states) {
    json sv = json::array();
    for (const Complex& z : amp) sv.push_back(json::array({z.real(), z.imag()}));
    states.push_back(std::move(sv));
  }
  doc["states"] = std::move(states);
  doc["max_copies"] = cfg.max_copies;
  doc["weights"] = cfg.weights;
  if (cfg.allocation.has_value()) doc["allocation"] = *cfg.allocation;
  doc["blank_index"] = cfg.blank_index;
  doc["seed"] = cfg.seed;
  doc["trials"] = cfg.trials;
  doc["unitary_dim_cap"] = cfg.unitary_dim_cap;
  if (cfg.tolerances.independence || cfg.tolerances.feasibility) {
    json tv;
    if (cfg.tolerances.independence)
      tv["independence"] = *cfg.tolerances.independence;
    if (cfg.tolerances.feasibility) tv["feasibility"] = *cfg.tolerances.feasibility;
    doc["tolerances"] = std::move(tv);
  }
  return detail::canonical_json(doc);
}

}  // namespace nqcm

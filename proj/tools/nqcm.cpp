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

// Command-line front end: check / synth / bounds / simulate / sweep over a
// JSON problem config.  Exit codes: 0 success, 2 config error, 3 infeasible
// or dependent input, 4 numerical failure.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nqcm/nqcm.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

struct CliState {
  std::string config_path;
  std::string out_path;
  std::string format = "json";
  bool strict = false;
  bool no_timing = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
};

void add_common_options(CLI::App* sub, CliState& state) {
  sub->add_option("config", state.config_path, "Path to the JSON problem config")
      ->required();
  sub->add_option("--out", state.out_path, "Write the report to this path");
  sub->add_option("--format", state.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}));
  sub->add_flag("--strict", state.strict, "Escalate config warnings to errors");
  sub->add_flag("--no-timing", state.no_timing, "Omit timing fields");
  sub->add_option_function<std::uint64_t>(
         "--seed", [&state](std::uint64_t v) { state.seed = v; },
         "Override the config seed");
  sub->add_option_function<std::uint64_t>(
         "--trials", [&state](std::uint64_t v) { state.trials = v; },
         "Override the config trial count");
}

int run(nqcm::Command cmd, const CliState& state) {
  std::ifstream in(state.config_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open config file '" << state.config_path
              << "'\n";
    return kExitConfig;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();

  std::vector<std::string> warnings;
  const nqcm::ProblemConfig cfg =
      nqcm::parse_config(buffer.str(), state.strict, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

  if (state.format == "csv" && cmd != nqcm::Command::sweep &&
      cmd != nqcm::Command::simulate)
    throw nqcm::config_error("csv output is only defined for sweep and simulate");

  nqcm::RunOptions options;
  options.include_timing = !state.no_timing;
  options.seed_override = state.seed;
  options.trials_override = state.trials;
  if (const char* env = std::getenv("NQCM_TOL_OVERRIDE"))
    options.tol_override_note = std::string(env);

  const nlohmann::json report = nqcm::run_command(cmd, cfg, options);
  const std::string rendered = state.format == "csv"
                                   ? nqcm::render_csv(cmd, report)
                                   : nqcm::render_report(report);

  if (state.out_path.empty()) {
    std::cout << rendered;
  } else {
    std::ofstream out(state.out_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write to '" << state.out_path << "'\n";
      return kExitConfig;
    }
    out << rendered;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesis and simulation toolkit for probabilistic multi-copy "
               "cloning machines"};
  app.require_subcommand(1);

  CliState state;
  nqcm::Command cmd = nqcm::Command::check;

  const struct {
    const char* name;
    const char* help;
    nqcm::Command command;
  } subs[] = {
      {"check", "Test linear independence of the configured states",
       nqcm::Command::check},
      {"synth", "Optimize (if needed), synthesize and validate a machine",
       nqcm::Command::synth},
      {"bounds", "Evaluate pairwise success-probability bounds",
       nqcm::Command::bounds},
      {"simulate", "Synthesize, then Monte Carlo the branch statistics",
       nqcm::Command::simulate},
      {"sweep", "Tabulate the uniform optimum against closed-form bounds",
       nqcm::Command::sweep},
  };
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common_options(sub, state);
    sub->callback([&cmd, command = s.command] { cmd = command; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    return run(cmd, state);
  } catch (const nqcm::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nqcm::infeasibility_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const nqcm::numerical_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

// Copyright 2026 The esr-engine Authors
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


// esr: run and check ESR-model experiments from JSON configs.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "esr/error.hpp"
#include "esr/experiments.hpp"

namespace {

int exit_code_for(const esr::Error& e) {
  switch (e.kind()) {
    case esr::ErrorKind::ConfigInvalid: return esr::kExitConfig;
    case esr::ErrorKind::IoFailure: return esr::kExitIo;
    default: return esr::kExitNumerical;
  }
}

int cmd_validate(const std::string& file) {
  try {
    const auto diagnostics = esr::validate(esr::read_json_file(file));
    for (const auto& d : diagnostics) std::cout << d << '\n';
    if (diagnostics.empty()) std::cout << file << ": ok\n";
    return diagnostics.empty() ? esr::kExitOk : esr::kExitConfig;
  } catch (const esr::Error& e) {
    std::cerr << "esr: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

int cmd_run(const std::string& file, const std::optional<std::uint64_t>& seed,
            const std::optional<std::string>& out) {
  try {
    const auto j = esr::read_json_file(file);
    const auto diagnostics = esr::validate(j);
    if (!diagnostics.empty()) {
      for (const auto& d : diagnostics) std::cerr << d << '\n';
      return esr::kExitConfig;
    }
    auto config = esr::config_from_json(j);
    if (seed) config.seed = *seed;
    if (out) config.output_path = *out;
    const auto result = esr::execute(config);
    for (const auto& line : result.report) std::cout << line << '\n';
    for (const auto& path : esr::write_artifacts(config, result)) std::cout << "wrote " << path << '\n';
    if (result.exit_code != esr::kExitOk) std::cerr << "esr: numerical invariant violated\n";
    return result.exit_code;
  } catch (const esr::Error& e) {
    std::cerr << "esr: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

int cmd_chsh(double eta, std::uint64_t pairs, std::uint64_t seed, const std::vector<double>& angles,
             bool montecarlo, unsigned workers) {
  try {
    esr::BipartiteSettings s = esr::BipartiteSettings::tsirelson();
    if (!angles.empty()) s = {angles[0], angles[1], angles[2], angles[3]};
    const auto table = esr::chsh_table(s, eta, eta, montecarlo ? pairs : 0, seed, workers);
    esr::write_csv(std::cout, table);
    return esr::kExitOk;
  } catch (const esr::Error& e) {
    std::cerr << "esr: " << e.what() << '\n';
    return e.kind() == esr::ErrorKind::EtaOutOfRange ? esr::kExitConfig : exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ESR-model experiment runner"};
  app.require_subcommand(1);

  std::string validate_file;
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("file", validate_file, "Config file")->required();

  std::string run_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("file", run_file, "Config file")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out, "Override the output directory");

  double eta = 1.0;
  std::uint64_t pairs = 100000;
  std::uint64_t chsh_seed = 0;
  std::vector<double> angles;
  unsigned workers = 1;
  auto* chsh = app.add_subcommand("chsh", "CHSH correlators for the spin singlet (CSV on stdout)");
  chsh->add_option("--eta", eta, "Detection efficiency of both wings")->check(CLI::Range(0.0, 1.0));
  chsh->add_option("--pairs", pairs, "Pairs per setting pair (Monte Carlo)")->check(CLI::PositiveNumber);
  chsh->add_option("--seed", chsh_seed, "Seed (Monte Carlo)");
  chsh->add_option("--settings", angles, "a,a',b,b' in radians")->delimiter(',')->expected(4);
  chsh->add_option("--workers", workers, "Worker threads (Monte Carlo)")->check(CLI::PositiveNumber);
  auto* analytic = chsh->add_flag("--analytic", "Closed-form correlators (default)");
  auto* montecarlo = chsh->add_flag("--montecarlo", "Sample pairs");
  analytic->excludes(montecarlo);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : esr::kExitConfig;
  }

  if (*validate) return cmd_validate(validate_file);
  if (*run) return cmd_run(run_file, seed, out);
  return cmd_chsh(eta, pairs, chsh_seed, angles, montecarlo->count() > 0, workers);
}

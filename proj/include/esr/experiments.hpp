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


/**
 * @file
 * JSON-configured experiments behind the `esr` command-line tool.
 *
 * A config file is
 *   { "kind": ..., "seed": n, "output_path": dir, "parameters": {...} }
 * and each kind writes CSV (and for axm, JSON) files into output_path.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "esr/bell.hpp"
#include "esr/observables.hpp"
#include "esr/probability.hpp"

namespace esr {

enum class ExperimentKind { BornRecovery, OutcomeDist, Cascade, Axm, Chsh, HvSample, Evolve };

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> experiment_kind_from_string(const std::string& name);

struct ExperimentConfig {
  ExperimentKind kind;
  nlohmann::json parameters;
  std::uint64_t seed = 0;
  std::string output_path = ".";
};

/// Exit statuses of `esr run`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Reads and parses a config file. Throws IoFailure or ConfigInvalid.
nlohmann::json read_json_file(const std::string& path);

/// Top-level fields only. Throws ConfigInvalid.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Path-qualified diagnostics ("/parameters/detection: ..."); empty when the
/// config is runnable.
std::vector<std::string> validate(const nlohmann::json& j);

/// One CSV file: header plus rows of already formatted cells.
struct Table {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(std::ostream& out, const Table& table);

struct RunResult {
  int exit_code = kExitOk;
  std::vector<Table> tables;
  std::optional<nlohmann::json> json_artifact;  // axm triple
  std::vector<std::string> report;              // human-readable lines
};

/// Runs a validated config without touching the filesystem. A violated
/// numerical invariant sets exit_code to kExitNumerical; config problems
/// throw ConfigInvalid.
RunResult execute(const ExperimentConfig& config);

/// execute() followed by writing the artifacts into config.output_path.
/// Returns the paths written. Throws IoFailure.
std::vector<std::string> write_artifacts(const ExperimentConfig& config, const RunResult& result);

/// "%.12g": scientific notation for 0 < |x| < 1e-4, no negative zero.
std::string format_number(double x);

/// Four CSV rows plus a CHSH summary. With n_pairs = 0 the values are
/// analytic and the count columns are left empty.
Table chsh_table(const BipartiteSettings& settings, double eta_a, double eta_b,
                 std::uint64_t n_pairs, std::uint64_t seed, unsigned workers);

}  // namespace esr

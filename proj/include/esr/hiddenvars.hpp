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
 * Microscopic layer: microstates built from hidden properties, their
 * detection probabilities, and aggregation to macroscopic probabilities.
 *
 * A micro property f is tied one-to-one to a macroscopic property
 * phi(f) in which a0 is not an outcome. An individual object in microstate
 * S_mu displays F = phi(f) iff it is detected and possesses f.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "esr/observables.hpp"
#include "esr/probability.hpp"

namespace esr {

struct MicroProperty {
  std::string id;
  PhysicalProperty macro;
};

struct MicroState {
  std::vector<std::string> possessed;
  bool possesses(const std::string& id) const;
};

class MicroModel {
 public:
  /// (microstate index, micro property id) -> p^d(S_mu, phi(f)).
  using DetectionTable = std::map<std::pair<std::size_t, std::string>, double>;
  /// macro state label -> p(S_mu | S) for every microstate, in order.
  using ConditionalTable = std::map<std::string, std::vector<double>>;

  MicroModel(std::vector<MicroProperty> properties, std::vector<MicroState> microstates,
             ConditionalTable cond, DetectionTable detect, bool deterministic);

  const std::vector<MicroProperty>& properties() const { return properties_; }
  const std::vector<MicroState>& microstates() const { return microstates_; }
  const ConditionalTable& cond() const { return cond_; }
  const DetectionTable& detect() const { return detect_; }
  bool deterministic() const { return deterministic_; }

  /// phi^{-1}(F). Throws UnregisteredProperty.
  const MicroProperty& preimage(const PhysicalProperty& f) const;
  /// p(. | S). Throws UnregisteredProperty for unknown macro states.
  const std::vector<double>& weights(const std::string& macro_state) const;
  /// p^d(S_mu, phi(f)). Throws MissingDetectionEntry.
  double micro_detection(std::size_t microstate, const std::string& id) const;

 private:
  std::vector<MicroProperty> properties_;
  std::vector<MicroState> microstates_;
  ConditionalTable cond_;
  DetectionTable detect_;
  bool deterministic_;
};

/// { "micro_properties":[{"id","macro":{"observable","sigma"}}],
///   "microstates":[[ids]], "cond":{state:{index:weight}},
///   "detect":{index:{id:p}}, "deterministic": bool }
MicroModel micro_model_from_json(const nlohmann::json& j, const ObservableRegistry& registry,
                                 const std::string& path = "");

/// p(S_mu, F): 1 iff S_mu possesses phi^{-1}(F).
int micro_conditional(const MicroModel& model, const MicroState& sm, const PhysicalProperty& f);

/// p^t(S_mu, F) = p^d(S_mu, F) p(S_mu, F).
double micro_overall(const MicroModel& model, std::size_t microstate, const PhysicalProperty& f);

struct AggregateProbabilities {
  double p_t;
  double p_d;
  double p;
};

/// Macroscopic (p^t, p^d, p) of F in macro state S. Throws UndefinedRatio
/// when p^d = 0.
AggregateProbabilities aggregate(const MicroModel& model, const std::string& macro_state,
                                 const PhysicalProperty& f);

/// p^t(S, F) for F with a0 in Sigma, summed microstate by microstate from
/// p^t(S_mu, F) = 1 - p^t(S_mu, F^c).
double aggregate_complement(const MicroModel& model, const std::string& macro_state,
                            const PhysicalProperty& f);

struct Individual {
  std::size_t microstate;
  bool detected;
  bool displays;
};

/// One object of macro state S measured for F, drawn from stream (seed, 0).
/// For F with a0 in Sigma the draw is made for F^c and `displays` is
/// negated; `detected` then refers to the F^c measurement.
Individual sample_individual(const MicroModel& model, const std::string& macro_state,
                             const PhysicalProperty& f, std::uint64_t seed);

struct SampleTally {
  std::uint64_t n = 0;
  std::uint64_t detected = 0;
  std::uint64_t displayed = 0;

  double p_t() const { return static_cast<double>(displayed) / static_cast<double>(n); }
  double p_d() const { return static_cast<double>(detected) / static_cast<double>(n); }
  double p() const { return static_cast<double>(displayed) / static_cast<double>(detected); }
};

/// n independent objects; trial i uses stream (seed, i / kStreamChunk).
/// The tally does not depend on `workers`.
SampleTally sample_many(const MicroModel& model, const std::string& macro_state,
                        const PhysicalProperty& f, std::uint64_t n, std::uint64_t seed,
                        unsigned workers = 1);

struct Discrepancy {
  std::string state_label;
  std::string property;
  std::string quantity;  // "p_t", "p_d", "p" or "unregistered"
  double micro;
  double macro;
};

/// Entries of `macro` the micro model fails to reproduce within `tol`.
std::vector<Discrepancy> consistency_check(const MicroModel& model,
                                           const std::vector<MacroEntry>& macro, double tol);

}  // namespace esr

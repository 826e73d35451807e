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
 * Conditional-on-detection, detection and overall probabilities.
 *
 * Pure states and improper mixtures share one representation
 * (GeneralizedPureState): a labelled density operator. The label is the
 * key the detection model uses, since detection probabilities are indexed
 * by state rather than derived from it. Proper mixtures keep their
 * components and weights separately.
 */

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "esr/hilbert.hpp"
#include "esr/observables.hpp"

namespace esr {

/// Probabilities at or below this are treated as zero in ratios and
/// normalizations.
inline constexpr double kZeroProbability = 1e-14;

struct PureState {
  std::string label;
  StateVector vector;
};

struct ImproperMixture {
  std::string label;
  DensityOperator rho;
};

class GeneralizedPureState {
 public:
  GeneralizedPureState(std::string label, DensityOperator rho)
      : label_(std::move(label)), rho_(std::move(rho)) {}
  GeneralizedPureState(std::string label, const StateVector& psi)
      : label_(std::move(label)), rho_(DensityOperator::from_pure(psi)) {}
  GeneralizedPureState(const PureState& s)  // NOLINT(runtime/explicit)
      : GeneralizedPureState(s.label, s.vector) {}
  GeneralizedPureState(const ImproperMixture& s)  // NOLINT(runtime/explicit)
      : GeneralizedPureState(s.label, s.rho) {}

  const std::string& label() const { return label_; }
  const DensityOperator& rho() const { return rho_; }
  Eigen::Index dim() const { return rho_.dim(); }

  /// Same label, new density operator (post-measurement or evolved state).
  GeneralizedPureState with_rho(DensityOperator rho) const {
    return {label_, std::move(rho)};
  }

 private:
  std::string label_;
  DensityOperator rho_;
};

struct MixtureComponent {
  double weight;
  GeneralizedPureState state;
};

class ProperMixture {
 public:
  /// Weights must lie in (0, 1] and sum to 1 within 1e-10.
  ProperMixture(std::string label, std::vector<MixtureComponent> components);

  const std::string& label() const { return label_; }
  const std::vector<MixtureComponent>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }
  Eigen::Index dim() const { return components_.front().state.dim(); }

  /// sum_j p_j rho_j, the QM density operator of the mixture.
  DensityOperator qm_density() const;

 private:
  std::string label_;
  std::vector<MixtureComponent> components_;
};

using EsrState = std::variant<PureState, ImproperMixture, ProperMixture>;

/// Throws InvalidArgument for proper mixtures.
GeneralizedPureState as_generalized_pure(const EsrState& s);

/**
 * The family p^d_{S,A0}(a_n) of per-state, per-observable, per-eigenvalue
 * detection probabilities.
 */
class DetectionModel {
 public:
  struct Entry {
    std::string state;
    std::string observable;
    double outcome;
    double eta;
  };
  using Function = std::function<double(
      const GeneralizedPureState&, const GeneralizedObservable&, double)>;

  static DetectionModel constant(double eta);
  /// Eigenvalue -> eta, applied to every state and observable.
  static DetectionModel per_outcome(std::vector<std::pair<double, double>> table,
                                    std::optional<double> fallback = {});
  /// (state label, observable name, eigenvalue) -> eta.
  static DetectionModel per_state_outcome(std::vector<Entry> entries,
                                          std::optional<double> fallback = {});
  /// Arbitrary state-dependent rule; range is checked on every lookup.
  static DetectionModel function(Function f);

  /// p^d for outcome k >= 1 of `obs`. Throws DetectionOutOfRange or
  /// MissingDetectionEntry.
  double operator()(const GeneralizedPureState& s,
                    const GeneralizedObservable& obs, std::size_t k) const;

  /// p^d for k = 1..W, in outcome order.
  std::vector<double> outcome_detection(const GeneralizedPureState& s,
                                        const GeneralizedObservable& obs) const;

  bool is_constant() const { return std::holds_alternative<Constant>(model_); }
  nlohmann::json to_json() const;

 private:
  struct Constant {
    double eta;
  };
  struct PerOutcome {
    std::vector<std::pair<double, double>> table;
    std::optional<double> fallback;
  };
  struct PerStateOutcome {
    std::vector<Entry> entries;
    std::optional<double> fallback;
  };
  using Model = std::variant<Constant, PerOutcome, PerStateOutcome, Function>;

  explicit DetectionModel(Model m) : model_(std::move(m)) {}
  Model model_;
};

/// {"kind":"constant","eta":x} | {"kind":"per_outcome","table":{"1":x,...}}
/// | {"kind":"per_state_outcome","entries":[...]}; optional "default".
DetectionModel detection_model_from_json(const nlohmann::json& j,
                                         const std::string& path = "");

/// p(S, F) = Tr[rho_S P(Sigma)] for F with a0 not in Sigma.
double conditional_prob(const GeneralizedPureState& s, const PhysicalProperty& f);

/// T_{S,A0}(Sigma), both branches of the discrete effect-operator formula.
CMatrix effect_operator(const GeneralizedPureState& s, const PhysicalProperty& f,
                        const DetectionModel& d);

/// p^t(S, F) = Tr[rho_S T_{S,A0}(Sigma)].
double overall_prob(const GeneralizedPureState& s, const PhysicalProperty& f,
                    const DetectionModel& d);

/// p^d(S, F) = p^t / p. Throws UndefinedRatio when p(S, F) = 0.
double detection_prob(const GeneralizedPureState& s, const PhysicalProperty& f,
                      const DetectionModel& d);

/// rho_M(F): component states reweighted by their detection probabilities.
DensityOperator proper_mixture_density(const ProperMixture& m,
                                       const PhysicalProperty& f,
                                       const DetectionModel& d);

struct MixtureProbabilities {
  double p;    // conditional on detection
  double p_d;  // detection
  double p_t;  // overall
};

MixtureProbabilities proper_mixture_probs(const ProperMixture& m,
                                          const PhysicalProperty& f,
                                          const DetectionModel& d);

/// One row of a macroscopic probability table; p_d and p are absent when
/// p(S, F) = 0 or a0 is in Sigma.
struct MacroEntry {
  std::string state_label;
  PhysicalProperty property;
  double p_t;
  std::optional<double> p_d;
  std::optional<double> p;
};

std::vector<MacroEntry> macro_table(const std::vector<GeneralizedPureState>& states,
                                    const std::vector<PhysicalProperty>& properties,
                                    const DetectionModel& d);

}  // namespace esr

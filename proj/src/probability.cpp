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


#include "esr/probability.hpp"

#include <cmath>
#include <sstream>

namespace esr {

namespace {

void require_unit_range(double eta, const std::string& what) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    std::ostringstream msg;
    msg << what << " = " << eta << " outside [0,1]";
    fail(ErrorKind::DetectionOutOfRange, msg.str());
  }
}

void require_dims(const GeneralizedPureState& s, const GeneralizedObservable& obs) {
  if (s.dim() != obs.dim()) {
    fail(ErrorKind::DimensionMismatch,
         "state '" + s.label() + "' has dimension " + std::to_string(s.dim()) +
             ", observable '" + obs.name() + "' has " + std::to_string(obs.dim()));
  }
}

bool same_value(double a, double b) {
  return std::abs(a - b) < tolerance::kDegeneracy;
}

}  // namespace

ProperMixture::ProperMixture(std::string label,
                             std::vector<MixtureComponent> components)
    : label_(std::move(label)), components_(std::move(components)) {
  if (components_.empty()) {
    fail(ErrorKind::InvalidState, "proper mixture needs at least one component");
  }
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0 && c.weight <= 1.0)) {
      fail(ErrorKind::InvalidState,
           "mixture weight " + std::to_string(c.weight) + " outside (0,1]");
    }
    if (c.state.dim() != components_.front().state.dim()) {
      fail(ErrorKind::DimensionMismatch, "mixture components differ in dimension");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-10) {
    fail(ErrorKind::InvalidState,
         "mixture weights sum to " + std::to_string(total));
  }
}

DensityOperator ProperMixture::qm_density() const {
  CMatrix sum = CMatrix::Zero(dim(), dim());
  for (const auto& c : components_) sum += c.weight * c.state.rho().matrix();
  return DensityOperator(sum);
}

GeneralizedPureState as_generalized_pure(const EsrState& s) {
  if (const auto* pure = std::get_if<PureState>(&s)) return *pure;
  if (const auto* improper = std::get_if<ImproperMixture>(&s)) return *improper;
  fail(ErrorKind::InvalidArgument,
       "operation applies to pure states and improper mixtures only");
}

// ---------------------------------------------------------------------------
// DetectionModel
// ---------------------------------------------------------------------------

DetectionModel DetectionModel::constant(double eta) {
  require_unit_range(eta, "eta");
  return DetectionModel(Constant{eta});
}

DetectionModel DetectionModel::per_outcome(
    std::vector<std::pair<double, double>> table, std::optional<double> fallback) {
  for (const auto& [outcome, eta] : table) {
    require_unit_range(eta, "detection for outcome " + std::to_string(outcome));
  }
  if (fallback) require_unit_range(*fallback, "default detection");
  return DetectionModel(PerOutcome{std::move(table), fallback});
}

DetectionModel DetectionModel::per_state_outcome(std::vector<Entry> entries,
                                                 std::optional<double> fallback) {
  for (const auto& e : entries) {
    require_unit_range(e.eta, "detection for (" + e.state + ", " + e.observable +
                                  ", " + std::to_string(e.outcome) + ")");
  }
  if (fallback) require_unit_range(*fallback, "default detection");
  return DetectionModel(PerStateOutcome{std::move(entries), fallback});
}

DetectionModel DetectionModel::function(Function f) {
  if (!f) fail(ErrorKind::InvalidArgument, "empty detection function");
  return DetectionModel(std::move(f));
}

double DetectionModel::operator()(const GeneralizedPureState& s,
                                  const GeneralizedObservable& obs,
                                  std::size_t k) const {
  if (k == 0 || k >= obs.outcome_count()) {
    fail(ErrorKind::InvalidArgument,
         "detection probability is defined for eigenvalue outcomes only");
  }
  const double value = obs.outcome(k);
  auto missing = [&]() -> double {
    std::ostringstream msg;
    msg << "no detection probability for state '" << s.label()
        << "', observable '" << obs.name() << "', outcome " << value;
    fail(ErrorKind::MissingDetectionEntry, msg.str());
  };

  if (const auto* c = std::get_if<Constant>(&model_)) return c->eta;
  if (const auto* table = std::get_if<PerOutcome>(&model_)) {
    for (const auto& [outcome, eta] : table->table) {
      if (same_value(outcome, value)) return eta;
    }
    return table->fallback ? *table->fallback : missing();
  }
  if (const auto* table = std::get_if<PerStateOutcome>(&model_)) {
    for (const auto& e : table->entries) {
      if (e.state == s.label() && e.observable == obs.name() &&
          same_value(e.outcome, value)) {
        return e.eta;
      }
    }
    return table->fallback ? *table->fallback : missing();
  }
  const double eta = std::get<Function>(model_)(s, obs, value);
  std::ostringstream what;
  what << "detection for (" << s.label() << ", " << obs.name() << ", " << value
       << ")";
  require_unit_range(eta, what.str());
  return eta;
}

std::vector<double> DetectionModel::outcome_detection(
    const GeneralizedPureState& s, const GeneralizedObservable& obs) const {
  std::vector<double> out;
  out.reserve(obs.outcome_count() - 1);
  for (std::size_t k = 1; k < obs.outcome_count(); ++k) {
    out.push_back((*this)(s, obs, k));
  }
  return out;
}

nlohmann::json DetectionModel::to_json() const {
  nlohmann::json j;
  auto put_default = [&j](const std::optional<double>& fallback) {
    if (fallback) j["default"] = *fallback;
  };
  if (const auto* c = std::get_if<Constant>(&model_)) {
    j["kind"] = "constant";
    j["eta"] = c->eta;
  } else if (const auto* t = std::get_if<PerOutcome>(&model_)) {
    j["kind"] = "per_outcome";
    j["table"] = nlohmann::json::object();
    for (const auto& [outcome, eta] : t->table) {
      std::ostringstream key;
      key << outcome;
      j["table"][key.str()] = eta;
    }
    put_default(t->fallback);
  } else if (const auto* t = std::get_if<PerStateOutcome>(&model_)) {
    j["kind"] = "per_state_outcome";
    j["entries"] = nlohmann::json::array();
    for (const auto& e : t->entries) {
      j["entries"].push_back({{"state", e.state},
                              {"observable", e.observable},
                              {"outcome", e.outcome},
                              {"eta", e.eta}});
    }
    put_default(t->fallback);
  } else {
    fail(ErrorKind::InvalidArgument, "function detection models are not serializable");
  }
  return j;
}

namespace {

double json_probability(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) {
    fail(ErrorKind::ConfigInvalid, path + ": expected a number");
  }
  const double eta = j.get<double>();
  if (!(eta >= 0.0 && eta <= 1.0)) {
    std::ostringstream msg;
    msg << path << ": detect out of [0,1] (got " << eta << ")";
    fail(ErrorKind::ConfigInvalid, msg.str());
  }
  return eta;
}

std::optional<double> json_default(const nlohmann::json& j, const std::string& path) {
  if (!j.contains("default")) return std::nullopt;
  return json_probability(j["default"], path + "/default");
}

double json_outcome_key(const std::string& key, const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(key, &used);
    if (used == key.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::ConfigInvalid, path + ": table key '" + key + "' is not a number");
}

}  // namespace

DetectionModel detection_model_from_json(const nlohmann::json& j,
                                         const std::string& path) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    fail(ErrorKind::ConfigInvalid, path + "/kind: missing detection model kind");
  }
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "constant") {
    if (!j.contains("eta")) fail(ErrorKind::ConfigInvalid, path + "/eta: missing");
    return DetectionModel::constant(json_probability(j["eta"], path + "/eta"));
  }
  if (kind == "per_outcome") {
    if (!j.contains("table") || !j["table"].is_object()) {
      fail(ErrorKind::ConfigInvalid, path + "/table: expected an object");
    }
    std::vector<std::pair<double, double>> table;
    for (const auto& [key, value] : j["table"].items()) {
      const std::string entry_path = path + "/table/" + key;
      table.emplace_back(json_outcome_key(key, entry_path),
                         json_probability(value, entry_path));
    }
    return DetectionModel::per_outcome(std::move(table), json_default(j, path));
  }
  if (kind == "per_state_outcome") {
    if (!j.contains("entries") || !j["entries"].is_array()) {
      fail(ErrorKind::ConfigInvalid, path + "/entries: expected an array");
    }
    std::vector<DetectionModel::Entry> entries;
    for (std::size_t i = 0; i < j["entries"].size(); ++i) {
      const auto& e = j["entries"][i];
      const std::string entry_path = path + "/entries/" + std::to_string(i);
      for (const char* key : {"state", "observable", "outcome", "eta"}) {
        if (!e.contains(key)) {
          fail(ErrorKind::ConfigInvalid, entry_path + "/" + key + ": missing");
        }
      }
      if (!e["state"].is_string() || !e["observable"].is_string() ||
          !e["outcome"].is_number()) {
        fail(ErrorKind::ConfigInvalid, entry_path + ": malformed entry");
      }
      entries.push_back({e["state"].get<std::string>(),
                         e["observable"].get<std::string>(),
                         e["outcome"].get<double>(),
                         json_probability(e["eta"], entry_path + "/eta")});
    }
    return DetectionModel::per_state_outcome(std::move(entries), json_default(j, path));
  }
  fail(ErrorKind::ConfigInvalid, path + "/kind: unknown detection model '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Probabilities
// ---------------------------------------------------------------------------

double conditional_prob(const GeneralizedPureState& s, const PhysicalProperty& f) {
  require_dims(s, f.observable());
  return std::real(expectation(s.rho(), projector_for(f).matrix()));
}

CMatrix effect_operator(const GeneralizedPureState& s, const PhysicalProperty& f,
                        const DetectionModel& d) {
  const auto& obs = f.observable();
  require_dims(s, obs);
  const Eigen::Index dim = obs.dim();
  if (!f.contains_a0()) {
    CMatrix t = CMatrix::Zero(dim, dim);
    for (std::size_t k = 1; k < obs.outcome_count(); ++k) {
      if (f.contains(k)) t += d(s, obs, k) * obs.projector(k).matrix();
    }
    return t;
  }
  // I - T(Sigma^c), expanded over the resolution of identity so that a0
  // carries exactly zero weight when every outcome is detected.
  CMatrix t = CMatrix::Zero(dim, dim);
  for (std::size_t k = 1; k < obs.outcome_count(); ++k) {
    const double w = f.contains(k) ? 1.0 : 1.0 - d(s, obs, k);
    t += w * obs.projector(k).matrix();
  }
  return t;
}

double overall_prob(const GeneralizedPureState& s, const PhysicalProperty& f,
                    const DetectionModel& d) {
  return std::real(expectation(s.rho(), effect_operator(s, f, d)));
}

double detection_prob(const GeneralizedPureState& s, const PhysicalProperty& f,
                      const DetectionModel& d) {
  const double p = conditional_prob(s, f);
  if (p <= kZeroProbability) {
    fail(ErrorKind::UndefinedRatio,
         "p(" + s.label() + ", " + f.describe() + ") = 0; detection ratio undefined");
  }
  return overall_prob(s, f, d) / p;
}

namespace {

// p_j * p^d(P_j, F) per component, the unnormalized weights of rho_M(F).
std::vector<double> detected_weights(const ProperMixture& m, const PhysicalProperty& f,
                                     const DetectionModel& d) {
  if (f.contains_a0()) {
    fail(ErrorKind::ContainsNoRegistration,
         f.describe() + " contains the no-registration outcome");
  }
  std::vector<double> weights;
  weights.reserve(m.size());
  for (const auto& c : m.components()) {
    const double p = conditional_prob(c.state, f);
    if (p <= kZeroProbability) {
      fail(ErrorKind::ComponentUndetectable,
           "component '" + c.state.label() + "' has p = 0 for " + f.describe());
    }
    weights.push_back(c.weight * overall_prob(c.state, f, d) / p);
  }
  return weights;
}

}  // namespace

DensityOperator proper_mixture_density(const ProperMixture& m,
                                       const PhysicalProperty& f,
                                       const DetectionModel& d) {
  const auto weights = detected_weights(m, f, d);
  double total = 0.0;
  CMatrix sum = CMatrix::Zero(m.dim(), m.dim());
  for (std::size_t j = 0; j < weights.size(); ++j) {
    sum += weights[j] * m.components()[j].state.rho().matrix();
    total += weights[j];
  }
  if (total <= kZeroProbability) {
    fail(ErrorKind::UndefinedRatio,
         "no component of '" + m.label() + "' can be detected for " + f.describe());
  }
  return DensityOperator(sum / total);
}

MixtureProbabilities proper_mixture_probs(const ProperMixture& m,
                                          const PhysicalProperty& f,
                                          const DetectionModel& d) {
  const auto weights = detected_weights(m, f, d);
  double p_d = 0.0;
  for (double w : weights) p_d += w;
  if (p_d <= kZeroProbability) {
    fail(ErrorKind::UndefinedRatio,
         "no component of '" + m.label() + "' can be detected for " + f.describe());
  }
  CMatrix sum = CMatrix::Zero(m.dim(), m.dim());
  for (std::size_t j = 0; j < weights.size(); ++j) {
    sum += (weights[j] / p_d) * m.components()[j].state.rho().matrix();
  }
  const DensityOperator rho_m(sum);
  const double p = std::real(expectation(rho_m, projector_for(f).matrix()));
  return {p, p_d, p_d * p};
}

std::vector<MacroEntry> macro_table(const std::vector<GeneralizedPureState>& states,
                                    const std::vector<PhysicalProperty>& properties,
                                    const DetectionModel& d) {
  std::vector<MacroEntry> table;
  for (const auto& s : states) {
    for (const auto& f : properties) {
      MacroEntry entry{s.label(), f, overall_prob(s, f, d), std::nullopt, std::nullopt};
      if (!f.contains_a0()) {
        const double p = conditional_prob(s, f);
        entry.p = p;
        if (p > kZeroProbability) entry.p_d = entry.p_t / p;
      }
      table.push_back(std::move(entry));
    }
  }
  return table;
}

}  // namespace esr

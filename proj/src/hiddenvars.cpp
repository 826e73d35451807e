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


#include "esr/hiddenvars.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "esr/random.hpp"

namespace esr {

bool MicroState::possesses(const std::string& id) const {
  return std::find(possessed.begin(), possessed.end(), id) != possessed.end();
}

MicroModel::MicroModel(std::vector<MicroProperty> properties,
                       std::vector<MicroState> microstates, ConditionalTable cond,
                       DetectionTable detect, bool deterministic)
    : properties_(std::move(properties)),
      microstates_(std::move(microstates)),
      cond_(std::move(cond)),
      detect_(std::move(detect)),
      deterministic_(deterministic) {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < properties_.size(); ++i) {
    const auto& mp = properties_[i];
    if (!ids.insert(mp.id).second) {
      fail(ErrorKind::InvalidArgument, "duplicate micro property '" + mp.id + "'");
    }
    if (mp.macro.contains_a0()) {
      fail(ErrorKind::ContainsNoRegistration,
           "micro property '" + mp.id + "' maps to " + mp.macro.describe());
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (properties_[j].macro == mp.macro) {
        fail(ErrorKind::InvalidArgument, "micro properties '" + properties_[j].id +
                                             "' and '" + mp.id + "' share a macro property");
      }
    }
  }
  if (microstates_.empty()) fail(ErrorKind::InvalidArgument, "no microstates");
  for (const auto& sm : microstates_) {
    for (const auto& id : sm.possessed) {
      if (!ids.count(id)) {
        fail(ErrorKind::UnregisteredProperty, "microstate uses unknown property '" + id + "'");
      }
    }
  }
  for (const auto& [label, row] : cond_) {
    if (row.size() != microstates_.size()) {
      fail(ErrorKind::DimensionMismatch,
           "p(.|" + label + ") has " + std::to_string(row.size()) + " entries for " +
               std::to_string(microstates_.size()) + " microstates");
    }
    double total = 0.0;
    for (double w : row) {
      if (!(w >= 0.0 && w <= 1.0)) {
        fail(ErrorKind::InvalidArgument, "p(.|" + label + ") entry outside [0,1]");
      }
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      fail(ErrorKind::InvalidArgument,
           "p(.|" + label + ") sums to " + std::to_string(total));
    }
  }
  for (const auto& [key, p] : detect_) {
    if (key.first >= microstates_.size() || !ids.count(key.second)) {
      fail(ErrorKind::UnregisteredProperty,
           "detection entry for unknown (" + std::to_string(key.first) + ", " + key.second + ")");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
      fail(ErrorKind::DetectionOutOfRange, "micro detection outside [0,1]");
    }
    if (deterministic_ && p != 0.0 && p != 1.0) {
      fail(ErrorKind::InvalidArgument,
           "deterministic model has micro detection " + std::to_string(p));
    }
  }
}

const MicroProperty& MicroModel::preimage(const PhysicalProperty& f) const {
  for (const auto& mp : properties_) {
    if (mp.macro == f) return mp;
  }
  fail(ErrorKind::UnregisteredProperty, f.describe() + " has no micro property");
}

const std::vector<double>& MicroModel::weights(const std::string& macro_state) const {
  const auto it = cond_.find(macro_state);
  if (it == cond_.end()) {
    fail(ErrorKind::UnregisteredProperty, "unknown macro state '" + macro_state + "'");
  }
  return it->second;
}

double MicroModel::micro_detection(std::size_t microstate, const std::string& id) const {
  const auto it = detect_.find({microstate, id});
  if (it == detect_.end()) {
    fail(ErrorKind::MissingDetectionEntry,
         "no detection for microstate " + std::to_string(microstate) + ", property '" + id + "'");
  }
  return it->second;
}

MicroModel micro_model_from_json(const nlohmann::json& j, const ObservableRegistry& registry,
                                 const std::string& path) {
  auto require = [&](const char* key, bool ok) {
    if (!j.contains(key) || !ok) {
      fail(ErrorKind::ConfigInvalid, path + "/" + key + ": missing or malformed");
    }
  };
  require("micro_properties", j.contains("micro_properties") && j["micro_properties"].is_array());
  require("microstates", j.contains("microstates") && j["microstates"].is_array());
  require("cond", j.contains("cond") && j["cond"].is_object());
  require("detect", j.contains("detect") && j["detect"].is_object());

  std::vector<MicroProperty> properties;
  for (std::size_t i = 0; i < j["micro_properties"].size(); ++i) {
    const auto& e = j["micro_properties"][i];
    const std::string p = path + "/micro_properties/" + std::to_string(i);
    if (!e.contains("id") || !e["id"].is_string()) {
      fail(ErrorKind::ConfigInvalid, p + "/id: missing");
    }
    if (!e.contains("macro") || !e["macro"].is_object() || !e["macro"].contains("observable") ||
        !e["macro"]["observable"].is_string() || !e["macro"].contains("sigma") ||
        !e["macro"]["sigma"].is_array()) {
      fail(ErrorKind::ConfigInvalid, p + "/macro: expected {observable, sigma}");
    }
    const std::string name = e["macro"]["observable"].get<std::string>();
    if (!registry.contains(name)) {
      fail(ErrorKind::ConfigInvalid, p + "/macro/observable: unknown observable '" + name + "'");
    }
    std::vector<double> sigma;
    for (const auto& v : e["macro"]["sigma"]) {
      if (!v.is_number()) fail(ErrorKind::ConfigInvalid, p + "/macro/sigma: expected numbers");
      sigma.push_back(v.get<double>());
    }
    try {
      properties.push_back({e["id"].get<std::string>(), PhysicalProperty(registry.at(name), sigma)});
    } catch (const Error& err) {
      fail(ErrorKind::ConfigInvalid, p + "/macro/sigma: " + err.what());
    }
  }

  std::vector<MicroState> microstates;
  for (std::size_t i = 0; i < j["microstates"].size(); ++i) {
    const auto& e = j["microstates"][i];
    MicroState sm;
    if (!e.is_array()) {
      fail(ErrorKind::ConfigInvalid, path + "/microstates/" + std::to_string(i) + ": expected ids");
    }
    for (const auto& id : e) {
      if (!id.is_string()) {
        fail(ErrorKind::ConfigInvalid, path + "/microstates/" + std::to_string(i) + ": expected ids");
      }
      sm.possessed.push_back(id.get<std::string>());
    }
    microstates.push_back(std::move(sm));
  }

  auto index_key = [&](const std::string& key, const std::string& p) {
    try {
      std::size_t used = 0;
      const unsigned long idx = std::stoul(key, &used);
      if (used == key.size() && idx < microstates.size()) return static_cast<std::size_t>(idx);
    } catch (const std::exception&) {
    }
    fail(ErrorKind::ConfigInvalid, p + ": '" + key + "' is not a microstate index");
  };

  MicroModel::ConditionalTable cond;
  for (const auto& [label, row] : j["cond"].items()) {
    const std::string p = path + "/cond/" + label;
    if (!row.is_object()) fail(ErrorKind::ConfigInvalid, p + ": expected {index: weight}");
    std::vector<double> weights(microstates.size(), 0.0);
    for (const auto& [key, w] : row.items()) {
      if (!w.is_number()) fail(ErrorKind::ConfigInvalid, p + "/" + key + ": expected a number");
      weights[index_key(key, p + "/" + key)] = w.get<double>();
    }
    cond.emplace(label, std::move(weights));
  }

  MicroModel::DetectionTable detect;
  for (const auto& [key, row] : j["detect"].items()) {
    const std::string p = path + "/detect/" + key;
    const std::size_t idx = index_key(key, p);
    if (!row.is_object()) fail(ErrorKind::ConfigInvalid, p + ": expected {id: p}");
    for (const auto& [id, v] : row.items()) {
      if (!v.is_number()) fail(ErrorKind::ConfigInvalid, p + "/" + id + ": expected a number");
      const double pd = v.get<double>();
      if (!(pd >= 0.0 && pd <= 1.0)) {
        fail(ErrorKind::ConfigInvalid, p + "/" + id + ": detect out of [0,1]");
      }
      detect[{idx, id}] = pd;
    }
  }

  const bool deterministic = j.value("deterministic", false);
  try {
    return MicroModel(std::move(properties), std::move(microstates), std::move(cond),
                      std::move(detect), deterministic);
  } catch (const Error& err) {
    fail(ErrorKind::ConfigInvalid, path + ": " + err.what());
  }
}

int micro_conditional(const MicroModel& model, const MicroState& sm,
                      const PhysicalProperty& f) {
  return sm.possesses(model.preimage(f).id) ? 1 : 0;
}

double micro_overall(const MicroModel& model, std::size_t microstate,
                     const PhysicalProperty& f) {
  const auto& mp = model.preimage(f);
  const auto& sm = model.microstates().at(microstate);
  if (!sm.possesses(mp.id)) return 0.0;
  return model.micro_detection(microstate, mp.id);
}

AggregateProbabilities aggregate(const MicroModel& model, const std::string& macro_state,
                                 const PhysicalProperty& f) {
  const auto& mp = model.preimage(f);
  const auto& weights = model.weights(macro_state);
  double p_t = 0.0;
  double p_d = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    p_t += weights[i] * micro_overall(model, i, f);
    p_d += weights[i] * model.micro_detection(i, mp.id);
  }
  if (p_d <= kZeroProbability) {
    fail(ErrorKind::UndefinedRatio, "p^d(" + macro_state + ", " + f.describe() + ") = 0");
  }
  return {p_t, p_d, p_t / p_d};
}

double aggregate_complement(const MicroModel& model, const std::string& macro_state,
                            const PhysicalProperty& f) {
  if (!f.contains_a0()) {
    fail(ErrorKind::InvalidArgument, f.describe() + " does not contain a0; use aggregate");
  }
  const PhysicalProperty fc = complement(f);
  const auto& weights = model.weights(macro_state);
  double p_t = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    p_t += weights[i] * (1.0 - micro_overall(model, i, fc));
  }
  return p_t;
}

namespace {

Individual draw_individual(const MicroModel& model, const std::vector<double>& weights,
                           const MicroProperty& mp, bool negate, Engine& engine) {
  const std::size_t i = categorical(engine, weights);
  const bool detected = bernoulli(engine, model.micro_detection(i, mp.id));
  const bool displays = detected && model.microstates()[i].possesses(mp.id);
  return {i, detected, negate ? !displays : displays};
}

}  // namespace

Individual sample_individual(const MicroModel& model, const std::string& macro_state,
                             const PhysicalProperty& f, std::uint64_t seed) {
  const bool negate = f.contains_a0();
  const auto& mp = model.preimage(negate ? complement(f) : f);
  Engine engine = make_stream(seed, 0);
  return draw_individual(model, model.weights(macro_state), mp, negate, engine);
}

SampleTally sample_many(const MicroModel& model, const std::string& macro_state,
                        const PhysicalProperty& f, std::uint64_t n, std::uint64_t seed,
                        unsigned workers) {
  const bool negate = f.contains_a0();
  const auto& mp = model.preimage(negate ? complement(f) : f);
  const auto& weights = model.weights(macro_state);
  const std::uint64_t chunks = (n + kStreamChunk - 1) / kStreamChunk;

  std::vector<SampleTally> per_chunk(chunks);
  auto run_chunk = [&](std::uint64_t c) {
    Engine engine = make_stream(seed, c);
    const std::uint64_t begin = c * kStreamChunk;
    const std::uint64_t end = std::min(n, begin + kStreamChunk);
    SampleTally tally;
    for (std::uint64_t i = begin; i < end; ++i) {
      const Individual ind = draw_individual(model, weights, mp, negate, engine);
      ++tally.n;
      tally.detected += ind.detected ? 1 : 0;
      tally.displayed += ind.displays ? 1 : 0;
    }
    per_chunk[c] = tally;
  };

  workers = std::max(1u, workers);
  if (workers == 1 || chunks < 2) {
    for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t c = w; c < chunks; c += workers) run_chunk(c);
      });
    }
    for (auto& t : pool) t.join();
  }

  SampleTally total;
  for (const auto& t : per_chunk) {
    total.n += t.n;
    total.detected += t.detected;
    total.displayed += t.displayed;
  }
  return total;
}

std::vector<Discrepancy> consistency_check(const MicroModel& model,
                                           const std::vector<MacroEntry>& macro, double tol) {
  std::vector<Discrepancy> report;
  for (const auto& entry : macro) {
    const auto& f = entry.property;
    const std::string name = f.describe();
    const bool known_state = model.cond().count(entry.state_label) != 0;
    bool known_property = true;
    try {
      model.preimage(f.contains_a0() ? complement(f) : f);
    } catch (const Error&) {
      known_property = false;
    }
    if (!known_state || !known_property) {
      report.push_back({entry.state_label, name, "unregistered", 0.0, entry.p_t});
      continue;
    }
    auto check = [&](const char* quantity, double micro, double macro_value) {
      if (std::abs(micro - macro_value) > tol) {
        report.push_back({entry.state_label, name, quantity, micro, macro_value});
      }
    };
    if (f.contains_a0()) {
      check("p_t", aggregate_complement(model, entry.state_label, f), entry.p_t);
      continue;
    }
    const auto& mp = model.preimage(f);
    const auto& weights = model.weights(entry.state_label);
    double p_t = 0.0;
    double p_d = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] == 0.0) continue;
      p_t += weights[i] * micro_overall(model, i, f);
      p_d += weights[i] * model.micro_detection(i, mp.id);
    }
    check("p_t", p_t, entry.p_t);
    if (entry.p_d) check("p_d", p_d, *entry.p_d);
    if (entry.p_d && p_d > kZeroProbability && entry.p) check("p", p_t / p_d, *entry.p);
  }
  return report;
}

}  // namespace esr

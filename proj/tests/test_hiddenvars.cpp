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


#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "esr/hiddenvars.hpp"
#include "esr/measurement.hpp"
#include "support/checks.hpp"
#include "support/random.hpp"

using namespace esr;
using namespace esr::testing;

namespace {

const GeneralizedObservable& sz0() {
  static const GeneralizedObservable a = make_generalized(Observable("sz", sigma_z()), 0.0);
  return a;
}

PhysicalProperty up() { return PhysicalProperty(sz0(), {1.0}); }
PhysicalProperty down() { return PhysicalProperty(sz0(), {-1.0}); }

MicroModel::DetectionTable uniform_detection(std::size_t microstates, const std::vector<std::string>& ids,
                                             double eta) {
  MicroModel::DetectionTable t;
  for (std::size_t i = 0; i < microstates; ++i)
    for (const auto& id : ids) t[{i, id}] = eta;
  return t;
}

// S1 = {f} and S2 = {} with weights (0.5, 0.5), p^d = 0.8 everywhere.
MicroModel half_model() {
  return MicroModel({{"f", up()}, {"g", down()}}, {{{"f"}}, {{}}}, {{"S", {0.5, 0.5}}},
                    uniform_detection(2, {"f", "g"}, 0.8), false);
}

// Binomial 4 sigma bound.
bool within_4sigma(double empirical, double p, double n) {
  const double sigma = std::sqrt(std::max(p * (1.0 - p), 1e-300) / n);
  return std::abs(empirical - p) <= 4.0 * sigma + 1e-15;
}

}  // namespace

TEST_CASE("micro conditional is membership") {
  const auto model = half_model();
  CHECK(micro_conditional(model, model.microstates()[0], up()) == 1);
  CHECK(micro_conditional(model, model.microstates()[0], down()) == 0);
  CHECK(micro_conditional(model, model.microstates()[1], up()) == 0);
  CHECK(micro_conditional(model, model.microstates()[1], down()) == 0);
  CHECK(kind_of([&] { micro_conditional(model, model.microstates()[0], PhysicalProperty(sz0(), {-1.0, 1.0})); }) ==
        ErrorKind::UnregisteredProperty);
}

TEST_CASE("micro overall probability") {
  const auto model = half_model();
  CHECK(micro_overall(model, 0, up()) == doctest::Approx(0.8));
  CHECK(micro_overall(model, 1, up()) == 0.0);
  const MicroModel det({{"f", up()}}, {{{"f"}}}, {{"S", {1.0}}}, {{{0, "f"}, 1.0}}, true);
  CHECK(micro_overall(det, 0, up()) == 1.0);
}

TEST_CASE("aggregation examples") {
  const auto a = aggregate(half_model(), "S", up());
  CHECK(a.p_t == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(a.p_d == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(a.p == doctest::Approx(0.5).epsilon(1e-14));

  const MicroModel det({{"f", up()}}, {{{"f"}}, {{}}}, {{"S", {0.5, 0.5}}}, {{{0, "f"}, 1.0}, {{1, "f"}, 0.0}}, true);
  const auto b = aggregate(det, "S", up());
  CHECK(b.p_t == doctest::Approx(0.5));
  CHECK(b.p_d == doctest::Approx(0.5));
  CHECK(b.p == doctest::Approx(1.0));

  for (double eta : {0.1, 0.55, 1.0}) {
    const MicroModel single({{"f", up()}}, {{{"f"}}}, {{"S", {1.0}}}, {{{0, "f"}, eta}}, false);
    const auto c = aggregate(single, "S", up());
    CHECK(c.p_t == doctest::Approx(eta));
    CHECK(c.p_d == doctest::Approx(eta));
    CHECK(c.p == doctest::Approx(1.0));
  }

  const MicroModel blind({{"f", up()}}, {{{"f"}}}, {{"S", {1.0}}}, {{{0, "f"}, 0.0}}, true);
  CHECK(kind_of([&] { aggregate(blind, "S", up()); }) == ErrorKind::UndefinedRatio);
  CHECK(kind_of([&] { aggregate(half_model(), "T", up()); }) == ErrorKind::UnregisteredProperty);
}

TEST_CASE("complement aggregation") {
  const auto model = half_model();
  // F = {a0, -1} is the complement of {+1}.
  const PhysicalProperty f(sz0(), {0.0, -1.0});
  CHECK(aggregate_complement(model, "S", f) == doctest::Approx(0.6));
  CHECK(aggregate_complement(model, "S", f) + aggregate(model, "S", up()).p_t == doctest::Approx(1.0).epsilon(1e-12));

  const MicroModel none({{"f", up()}}, {{{}}}, {{"S", {1.0}}}, {{{0, "f"}, 0.7}}, false);
  CHECK(aggregate_complement(none, "S", f) == doctest::Approx(1.0));
  const MicroModel all({{"f", up()}}, {{{"f"}}}, {{"S", {1.0}}}, {{{0, "f"}, 1.0}}, true);
  CHECK(aggregate_complement(all, "S", f) == doctest::Approx(0.0));
  CHECK(kind_of([&] { aggregate_complement(model, "S", PhysicalProperty(sz0(), {0.0})); }) ==
        ErrorKind::UnregisteredProperty);
}

TEST_CASE("complement aggregation matches the macroscopic overall probability") {
  // Micro model reproducing |0> under constant eta = 0.5 for sz0.
  const MicroModel det({{"f", up()}, {"g", down()}}, {{{"f"}}, {{"f"}}}, {{"zero", {0.5, 0.5}}},
                       {{{0, "f"}, 1.0}, {{1, "f"}, 0.0}, {{0, "g"}, 1.0}, {{1, "g"}, 0.0}}, true);
  const GeneralizedPureState zero("zero", StateVector::basis(2, 0));
  const auto d = DetectionModel::constant(0.5);
  for (const auto& f : {PhysicalProperty(sz0(), {0.0, -1.0}), PhysicalProperty(sz0(), {0.0, 1.0})}) {
    CHECK(aggregate_complement(det, "zero", f) == doctest::Approx(overall_prob(zero, f, d)).epsilon(1e-12));
  }
}

TEST_CASE("model validation") {
  CHECK(kind_of([] { MicroModel({{"f", up()}, {"f", down()}}, {{{}}}, {{"S", {1.0}}}, {}, false); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([] { MicroModel({{"f", PhysicalProperty(sz0(), {0.0, 1.0})}}, {{{}}}, {{"S", {1.0}}}, {}, false); }) ==
        ErrorKind::ContainsNoRegistration);
  CHECK(kind_of([] { MicroModel({{"f", up()}, {"g", up()}}, {{{}}}, {{"S", {1.0}}}, {}, false); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([] { MicroModel({{"f", up()}}, {{{"h"}}}, {{"S", {1.0}}}, {{{0, "f"}, 1.0}}, false); }) ==
        ErrorKind::UnregisteredProperty);
  CHECK(kind_of([] { MicroModel({{"f", up()}}, {{{}}, {{}}}, {{"S", {0.5, 0.6}}}, uniform_detection(2, {"f"}, 1.0), false); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([] { MicroModel({{"f", up()}}, {{{}}}, {{"S", {1.0}}}, {{{0, "f"}, 1.2}}, false); }) ==
        ErrorKind::DetectionOutOfRange);
  CHECK(kind_of([] { MicroModel({{"f", up()}}, {{{}}}, {{"S", {1.0}}}, {{{0, "f"}, 0.5}}, true); }) ==
        ErrorKind::InvalidArgument);
  const MicroModel partial({{"f", up()}, {"g", down()}}, {{{"f"}}}, {{"S", {1.0}}}, {{{0, "f"}, 1.0}}, false);
  CHECK(kind_of([&] { aggregate(partial, "S", down()); }) == ErrorKind::MissingDetectionEntry);
}

TEST_CASE("AX1 and AX2 follow from the micro layer") {
  Rng rng(71);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index dim = random_dim(rng, 2, 4);
    const auto obs = random_observable(dim, rng);
    // Micro properties: every singleton {a_k}, k >= 1.
    std::vector<MicroProperty> props;
    std::vector<std::string> ids;
    for (std::size_t k = 1; k < obs.outcome_count(); ++k) {
      ids.push_back("f" + std::to_string(k));
      props.push_back({ids.back(), PhysicalProperty::singleton(obs, k)});
    }
    const std::size_t m = static_cast<std::size_t>(random_dim(rng, 1, 5));
    std::vector<MicroState> states(m);
    MicroModel::DetectionTable detect;
    std::vector<double> w(m);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (const auto& id : ids) {
        if (uniform(rng) < 0.5) states[i].possessed.push_back(id);
        detect[{i, id}] = uniform(rng, 0.01, 1.0);
      }
      total += (w[i] = uniform(rng, 0.01, 1.0));
    }
    for (auto& x : w) x /= total;
    const MicroModel model(props, states, {{"S", w}}, detect, false);
    for (std::size_t k = 1; k < obs.outcome_count(); ++k) {
      const auto f = PhysicalProperty::singleton(obs, k);
      const auto a = aggregate(model, "S", f);
      CHECK(std::abs(a.p_t - a.p_d * a.p) <= 1e-12);
      CHECK(std::abs(aggregate_complement(model, "S", complement(f)) + a.p_t - 1.0) <= 1e-12);
      // Repeated evaluation is bit-identical.
      const auto again = aggregate(model, "S", f);
      CHECK(again.p_t == a.p_t);
      CHECK(again.p_d == a.p_d);
      CHECK(again.p == a.p);
    }
  }
}

TEST_CASE("individual sampling") {
  const MicroModel sure({{"f", up()}}, {{{"f"}}}, {{"S", {1.0}}}, {{{0, "f"}, 1.0}}, true);
  const MicroModel blind({{"f", up()}}, {{{"f"}}, {{}}}, {{"S", {0.5, 0.5}}}, uniform_detection(2, {"f"}, 0.0), true);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto a = sample_individual(sure, "S", up(), seed);
    CHECK(a.detected);
    CHECK(a.displays);
    const auto b = sample_individual(blind, "S", up(), seed);
    CHECK_FALSE(b.detected);
    CHECK_FALSE(b.displays);
    const auto c = sample_individual(half_model(), "S", up(), seed);
    const auto d = sample_individual(half_model(), "S", up(), seed);
    CHECK(c.microstate == d.microstate);
    CHECK(c.detected == d.detected);
    CHECK(c.displays == d.displays);
  }
}

TEST_CASE("deterministic detection is constant per microstate") {
  const MicroModel det({{"f", up()}}, {{{"f"}}, {{"f"}}, {{}}}, {{"S", {0.3, 0.3, 0.4}}},
                       {{{0, "f"}, 1.0}, {{1, "f"}, 0.0}, {{2, "f"}, 1.0}}, true);
  std::map<std::size_t, std::set<bool>> seen;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto s = sample_individual(det, "S", up(), seed);
    seen[s.microstate].insert(s.detected);
  }
  CHECK(seen.size() == 3);
  for (const auto& [state, values] : seen) CHECK(values.size() == 1);
}

TEST_CASE("monte carlo frequencies converge") {
  const std::uint64_t n = 100000;
  const auto tally = sample_many(half_model(), "S", up(), n, 7, 3);
  CHECK(within_4sigma(tally.p_t(), 0.4, n));
  CHECK(within_4sigma(tally.p_d(), 0.8, n));
  CHECK(within_4sigma(tally.p(), 0.5, static_cast<double>(tally.detected)));
  const auto serial = sample_many(half_model(), "S", up(), n, 7, 1);
  CHECK(serial.detected == tally.detected);
  CHECK(serial.displayed == tally.displayed);

  Rng rng(72);
  for (int model_index = 0; model_index < 20; ++model_index) {
    const auto obs = random_observable(random_dim(rng, 2, 3), rng);
    std::vector<MicroProperty> props;
    std::vector<std::string> ids;
    for (std::size_t k = 1; k < obs.outcome_count(); ++k) {
      ids.push_back("f" + std::to_string(k));
      props.push_back({ids.back(), PhysicalProperty::singleton(obs, k)});
    }
    const std::size_t m = static_cast<std::size_t>(random_dim(rng, 1, 4));
    std::vector<MicroState> states(m);
    MicroModel::DetectionTable detect;
    std::vector<double> w(m);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (const auto& id : ids) {
        if (uniform(rng) < 0.6) states[i].possessed.push_back(id);
        detect[{i, id}] = uniform(rng, 0.05, 1.0);
      }
      total += (w[i] = uniform(rng, 0.05, 1.0));
    }
    for (auto& x : w) x /= total;
    const MicroModel model(props, states, {{"S", w}}, detect, false);
    const auto f = PhysicalProperty::singleton(obs, 1);
    const auto a = aggregate(model, "S", f);
    const auto t = sample_many(model, "S", f, n, 1000 + static_cast<std::uint64_t>(model_index));
    CHECK(within_4sigma(t.p_t(), a.p_t, n));
    CHECK(within_4sigma(t.p_d(), a.p_d, n));
    if (t.detected > 0) CHECK(within_4sigma(t.p(), a.p, static_cast<double>(t.detected)));
    // a0 in Sigma: sampled through the complement.
    const auto c = sample_many(model, "S", complement(f), n, 2000 + static_cast<std::uint64_t>(model_index));
    CHECK(within_4sigma(c.p_t(), aggregate_complement(model, "S", complement(f)), n));
  }
}

TEST_CASE("consistency check against macroscopic tables") {
  const MicroModel det({{"f", up()}, {"g", down()}}, {{{"f"}}, {{"f"}}}, {{"zero", {0.5, 0.5}}},
                       {{{0, "f"}, 1.0}, {{1, "f"}, 0.0}, {{0, "g"}, 1.0}, {{1, "g"}, 0.0}}, true);
  const std::vector<GeneralizedPureState> states{GeneralizedPureState("zero", StateVector::basis(2, 0))};
  const std::vector<PhysicalProperty> props{up(), down(), complement(up()), complement(down())};
  const auto table = macro_table(states, props, DetectionModel::constant(0.5));
  CHECK(consistency_check(det, table, 1e-12).empty());

  // Shift 0.1 of weight between microstates.
  const MicroModel off({{"f", up()}, {"g", down()}}, {{{"f"}}, {{"f"}}}, {{"zero", {0.6, 0.4}}}, det.detect(), true);
  const auto report = consistency_check(off, table, 1e-12);
  REQUIRE_FALSE(report.empty());
  CHECK(report.front().state_label == "zero");
  CHECK(report.front().property == up().describe());

  // A property the micro model does not know.
  const auto extra = macro_table(states, {PhysicalProperty(sz0(), {0.0})}, DetectionModel::constant(0.5));
  const auto unknown = consistency_check(det, extra, 1e-12);
  REQUIRE(unknown.size() == 1);
  CHECK(unknown.front().quantity == "unregistered");

  // Built to match a non-eigenstate: |+> with eta = 0.8 through two microstates.
  const GeneralizedPureState plus("plus", plus_state());
  const MicroModel matched({{"f", up()}, {"g", down()}}, {{{"f"}}, {{"g"}}}, {{"plus", {0.5, 0.5}}},
                           uniform_detection(2, {"f", "g"}, 0.8), false);
  CHECK(consistency_check(matched, macro_table({plus}, props, DetectionModel::constant(0.8)), 1e-12).empty());
}

TEST_CASE("micro models load from json") {
  ObservableRegistry registry;
  registry.add(sz0());
  const auto j = nlohmann::json::parse(R"({
    "micro_properties": [{"id": "f", "macro": {"observable": "sz", "sigma": [1]}},
                         {"id": "g", "macro": {"observable": "sz", "sigma": [-1]}}],
    "microstates": [["f"], []],
    "cond": {"S": {"0": 0.5, "1": 0.5}},
    "detect": {"0": {"f": 0.8, "g": 0.8}, "1": {"f": 0.8, "g": 0.8}},
    "deterministic": false
  })");
  const auto model = micro_model_from_json(j, registry);
  const auto a = aggregate(model, "S", up());
  CHECK(a.p_t == doctest::Approx(0.4));
  CHECK(a.p == doctest::Approx(0.5));

  auto bad = j;
  bad["detect"]["1"]["g"] = 1.5;
  try {
    micro_model_from_json(bad, registry, "/micro_model");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigInvalid);
    CHECK(e.detail() == "/micro_model/detect/1/g: detect out of [0,1]");
  }
  bad = j;
  bad["micro_properties"][0]["macro"]["observable"] = "sx";
  CHECK(kind_of([&] { micro_model_from_json(bad, registry); }) == ErrorKind::ConfigInvalid);
  bad = j;
  bad["cond"]["S"]["7"] = 0.1;
  CHECK(kind_of([&] { micro_model_from_json(bad, registry); }) == ErrorKind::ConfigInvalid);
}

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


#include "esr/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "esr/composite.hpp"
#include "esr/evolution.hpp"
#include "esr/hiddenvars.hpp"
#include "esr/measurement.hpp"
#include "esr/random.hpp"
#include "esr/serialization.hpp"

namespace esr {

using nlohmann::json;

namespace {

const std::map<std::string, ExperimentKind>& kind_names() {
  static const std::map<std::string, ExperimentKind> names{
      {"born_recovery", ExperimentKind::BornRecovery}, {"outcome_dist", ExperimentKind::OutcomeDist},
      {"cascade", ExperimentKind::Cascade},            {"axm", ExperimentKind::Axm},
      {"chsh", ExperimentKind::Chsh},                  {"hv_sample", ExperimentKind::HvSample},
      {"evolve", ExperimentKind::Evolve},
  };
  return names;
}

[[noreturn]] void bad(const std::string& path, const std::string& message) {
  fail(ErrorKind::ConfigInvalid, path + ": " + message);
}

// Errors raised while building engine objects from a config section are
// reported against that section's path.
template <typename F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    bad(path, e.what());
  }
}

const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) bad(path + "/" + key, "missing");
  return j[key];
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& path) {
  return j.contains(key) ? as_number(j[key], path + "/" + key) : fallback;
}

std::uint64_t count_or(const json& j, const std::string& key, std::uint64_t fallback,
                       const std::string& path) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    bad(path + "/" + key, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) bad(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> number_list(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], path + "/" + std::to_string(i)));
  return out;
}

/// Collects one diagnostic per failing section.
class Collector {
 public:
  template <typename F>
  auto section(F&& f) -> std::optional<decltype(f())> {
    try {
      return f();
    } catch (const Error& e) {
      items_.push_back(e.kind() == ErrorKind::ConfigInvalid ? e.detail() : e.what());
      return std::nullopt;
    }
  }
  void add(std::string message) { items_.push_back(std::move(message)); }
  const std::vector<std::string>& items() const { return items_; }

 private:
  std::vector<std::string> items_;
};

// --- sections shared between kinds -----------------------------------------

ObservableRegistry parse_registry(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array of observables");
  ObservableRegistry registry;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    const std::string name = as_string(need(j[i], "name", p), p + "/name");
    if (registry.contains(name)) bad(p + "/name", "duplicate observable '" + name + "'");
    const CMatrix m = matrix_from_json(need(j[i], "matrix", p), p + "/matrix");
    at_path(p, [&] {
      Observable base(name, m);
      if (j[i].contains("a0")) {
        registry.add(make_generalized(std::move(base), as_number(j[i]["a0"], p + "/a0")));
      } else {
        registry.add(make_generalized(std::move(base)));
      }
      return 0;
    });
  }
  return registry;
}

struct ParsedState {
  GeneralizedPureState state;
  std::optional<PureState> pure;
};

ParsedState parse_state(const json& j, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  const std::string label = j.contains("label") ? as_string(j["label"], path + "/label") : "S";
  if (j.contains("vector")) {
    const CVector v = vector_from_json(j["vector"], path + "/vector");
    return at_path(path + "/vector", [&] {
      PureState pure{label, StateVector::normalized(v)};
      return ParsedState{GeneralizedPureState(pure), pure};
    });
  }
  if (j.contains("rho")) {
    const CMatrix m = matrix_from_json(j["rho"], path + "/rho");
    return at_path(path + "/rho", [&] {
      return ParsedState{GeneralizedPureState(label, DensityOperator::normalized(m)), std::nullopt};
    });
  }
  bad(path, "expected \"vector\" or \"rho\"");
}

const GeneralizedObservable& lookup(const ObservableRegistry& registry, const json& j,
                                    const std::string& path) {
  const std::string name = as_string(j, path);
  if (!registry.contains(name)) bad(path, "unknown observable '" + name + "'");
  return registry.at(name);
}

PhysicalProperty parse_property(const json& j, const ObservableRegistry& registry,
                                const std::string& path) {
  const auto& obs = lookup(registry, need(j, "observable", path), path + "/observable");
  const auto sigma = number_list(need(j, "sigma", path), path + "/sigma");
  return at_path(path + "/sigma", [&] { return PhysicalProperty(obs, sigma); });
}

DetectionModel parse_detection(const json& params, const std::string& path) {
  if (!params.contains("detection")) return DetectionModel::constant(1.0);
  return detection_model_from_json(params["detection"], path + "/detection");
}

void require_dim(Eigen::Index got, Eigen::Index want, const std::string& path) {
  if (got != want) {
    bad(path, "dimension " + std::to_string(got) + " does not match " + std::to_string(want));
  }
}

// --- per-kind plans ----------------------------------------------------------

struct BornCase {
  GeneralizedPureState state;
  GeneralizedObservable observable;
};

struct BornPlan {
  std::vector<BornCase> cases;
  DetectionModel detection;
};

CMatrix random_hermitian(Eigen::Index dim, Engine& engine) {
  CMatrix m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      m(i, k) = Complex(2.0 * uniform01(engine) - 1.0, 2.0 * uniform01(engine) - 1.0);
    }
  }
  return (m + m.adjoint()) * 0.5;
}

CVector random_vector(Eigen::Index dim, Engine& engine) {
  CVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    v(i) = Complex(2.0 * uniform01(engine) - 1.0, 2.0 * uniform01(engine) - 1.0);
  }
  return v;
}

BornPlan parse_born(const json& params, std::uint64_t seed, const std::string& path, Collector& c) {
  auto detection = c.section([&] { return parse_detection(params, path); });
  std::vector<BornCase> cases;
  if (params.contains("random")) {
    c.section([&] {
      const json& r = params["random"];
      const std::string p = path + "/random";
      const std::uint64_t count = count_or(r, "count", 100, p);
      const std::uint64_t max_dim = count_or(r, "max_dim", 8, p);
      if (count == 0) bad(p + "/count", "must be at least 1");
      if (max_dim < 2 || max_dim > static_cast<std::uint64_t>(kMaxDimension)) {
        bad(p + "/max_dim", "must lie in [2, 64]");
      }
      for (std::uint64_t i = 0; i < count; ++i) {
        Engine engine = make_stream(seed, i);
        const auto dim = static_cast<Eigen::Index>(
            2 + static_cast<std::uint64_t>(uniform01(engine) * static_cast<double>(max_dim - 1)));
        const StateVector psi = StateVector::normalized(random_vector(dim, engine));
        Observable obs("A" + std::to_string(i), random_hermitian(dim, engine));
        cases.push_back({GeneralizedPureState("S" + std::to_string(i), psi),
                         make_generalized(std::move(obs))});
      }
      return 0;
    });
  } else {
    auto registry = c.section([&] {
      return parse_registry(need(params, "observables", path), path + "/observables");
    });
    c.section([&] {
      const json& states = need(params, "states", path);
      if (!states.is_array() || states.empty()) bad(path + "/states", "expected a non-empty array");
      for (std::size_t i = 0; i < states.size(); ++i) {
        const auto s = parse_state(states[i], path + "/states/" + std::to_string(i));
        if (!registry) continue;
        for (const auto& name : registry->names()) {
          const auto& obs = registry->at(name);
          if (obs.dim() == s.state.dim()) cases.push_back({s.state, obs});
        }
      }
      if (registry && cases.empty()) bad(path + "/states", "no state matches any observable dimension");
      return 0;
    });
  }
  return {std::move(cases), detection.value_or(DetectionModel::constant(1.0))};
}

struct StatePlan {
  ObservableRegistry registry;
  ParsedState state;
  DetectionModel detection;
};

std::optional<StatePlan> parse_state_plan(const json& params, const std::string& path,
                                          Collector& c) {
  auto registry = c.section([&] {
    return parse_registry(need(params, "observables", path), path + "/observables");
  });
  auto state = c.section([&] { return parse_state(need(params, "state", path), path + "/state"); });
  auto detection = c.section([&] { return parse_detection(params, path); });
  if (!registry || !state || !detection) return std::nullopt;
  return StatePlan{std::move(*registry), std::move(*state), std::move(*detection)};
}

struct OutcomePlan {
  StatePlan base;
  GeneralizedObservable observable;
};

std::optional<OutcomePlan> parse_outcome(const json& params, const std::string& path,
                                         Collector& c) {
  auto base = parse_state_plan(params, path, c);
  if (!base) return std::nullopt;
  auto obs = c.section([&] {
    const auto& o = lookup(base->registry, need(params, "observable", path), path + "/observable");
    require_dim(o.dim(), base->state.state.dim(), path + "/observable");
    return o;
  });
  if (!obs) return std::nullopt;
  return OutcomePlan{std::move(*base), std::move(*obs)};
}

struct CascadePlan {
  StatePlan base;
  std::vector<PhysicalProperty> steps;
  bool sample;
};

std::optional<CascadePlan> parse_cascade(const json& params, const std::string& path,
                                         Collector& c) {
  auto base = parse_state_plan(params, path, c);
  if (!base) return std::nullopt;
  auto steps = c.section([&] {
    const json& js = need(params, "steps", path);
    if (!js.is_array() || js.empty()) bad(path + "/steps", "expected a non-empty array");
    std::vector<PhysicalProperty> out;
    for (std::size_t i = 0; i < js.size(); ++i) {
      const std::string p = path + "/steps/" + std::to_string(i);
      out.push_back(parse_property(js[i], base->registry, p));
      require_dim(out.back().observable().dim(), base->state.state.dim(), p + "/observable");
    }
    return out;
  });
  auto sample = c.section([&] {
    if (!params.contains("sample")) return false;
    if (!params["sample"].is_boolean()) bad(path + "/sample", "expected a boolean");
    return params["sample"].get<bool>();
  });
  if (!steps || !sample) return std::nullopt;
  return CascadePlan{std::move(*base), std::move(*steps), *sample};
}

struct AxmPlan {
  OutcomePlan base;
  PointerBasis pointer;
  AxmPhases phases;
};

std::optional<AxmPlan> parse_axm(const json& params, const std::string& path, Collector& c) {
  auto base = parse_outcome(params, path, c);
  if (!base) return std::nullopt;
  if (!base->base.state.pure) {
    c.add(path + "/state: axm needs a state vector");
    return std::nullopt;
  }
  const auto count = static_cast<Eigen::Index>(base->observable.outcome_count());
  auto pointer = c.section([&] {
    if (!params.contains("pointer")) return PointerBasis::canonical(count);
    const CMatrix m = matrix_from_json(params["pointer"], path + "/pointer");
    if (m.cols() != count) {
      bad(path + "/pointer", "needs " + std::to_string(count) + " pointer vectors (columns)");
    }
    return at_path(path + "/pointer", [&] { return PointerBasis(m); });
  });
  auto phases = c.section([&] {
    AxmPhases ph;
    if (!params.contains("phases")) return ph;
    const json& j = params["phases"];
    const std::string p = path + "/phases";
    if (j.contains("theta")) {
      ph.theta = number_list(j["theta"], p + "/theta");
      if (ph.theta.size() + 1 != base->observable.outcome_count()) {
        bad(p + "/theta", "needs one phase per eigenvalue");
      }
    }
    ph.phi0 = number_or(j, "phi0", 0.0, p);
    return ph;
  });
  if (!pointer || !phases) return std::nullopt;
  return AxmPlan{std::move(*base), std::move(*pointer), std::move(*phases)};
}

struct ChshPlan {
  BipartiteSettings settings;
  double eta_a;
  double eta_b;
  std::uint64_t pairs;  // 0 = analytic
  unsigned workers;
};

std::optional<ChshPlan> parse_chsh(const json& params, const std::string& path, Collector& c) {
  return c.section([&] {
    ChshPlan plan{BipartiteSettings::tsirelson(), 1.0, 1.0, 0, 1};
    if (params.contains("settings")) {
      const json& s = params["settings"];
      const std::string p = path + "/settings";
      if (s.is_array()) {
        const auto v = number_list(s, p);
        if (v.size() != 4) bad(p, "expected [a, a', b, b']");
        plan.settings = {v[0], v[1], v[2], v[3]};
      } else {
        plan.settings = {as_number(need(s, "a", p), p + "/a"),
                         as_number(need(s, "a_prime", p), p + "/a_prime"),
                         as_number(need(s, "b", p), p + "/b"),
                         as_number(need(s, "b_prime", p), p + "/b_prime")};
      }
    }
    const double eta = number_or(params, "eta", 1.0, path);
    plan.eta_a = number_or(params, "eta_a", eta, path);
    plan.eta_b = number_or(params, "eta_b", eta, path);
    for (const auto& [key, v] : {std::pair{"eta_a", plan.eta_a}, std::pair{"eta_b", plan.eta_b}}) {
      if (!(v >= 0.0 && v <= 1.0)) {
        const char* where = params.contains(key) ? key : "eta";
        bad(path + "/" + where, "detect out of [0,1] (got " + format_number(v) + ")");
      }
    }
    const std::string mode =
        params.contains("mode") ? as_string(params["mode"], path + "/mode") : "analytic";
    if (mode == "montecarlo") {
      plan.pairs = count_or(params, "pairs", 100000, path);
      if (plan.pairs == 0) bad(path + "/pairs", "must be at least 1");
    } else if (mode != "analytic") {
      bad(path + "/mode", "expected \"analytic\" or \"montecarlo\"");
    }
    plan.workers = static_cast<unsigned>(std::max<std::uint64_t>(1, count_or(params, "workers", 1, path)));
    return plan;
  });
}

struct HvPlan {
  MicroModel model;
  std::string macro_state;
  PhysicalProperty property;
  std::uint64_t n;
  unsigned workers;
};

std::optional<HvPlan> parse_hv(const json& params, const std::string& path, Collector& c) {
  auto registry = c.section([&] {
    return parse_registry(need(params, "observables", path), path + "/observables");
  });
  if (!registry) return std::nullopt;
  auto model = c.section([&] {
    return micro_model_from_json(need(params, "micro_model", path), *registry,
                                 path + "/micro_model");
  });
  auto property = c.section([&] {
    return parse_property(need(params, "property", path), *registry, path + "/property");
  });
  auto rest = c.section([&] {
    const std::string label = as_string(need(params, "state", path), path + "/state");
    const std::uint64_t n = count_or(params, "n", 100000, path);
    if (n == 0) bad(path + "/n", "must be at least 1");
    const auto workers = static_cast<unsigned>(std::max<std::uint64_t>(1, count_or(params, "workers", 1, path)));
    return std::tuple{label, n, workers};
  });
  if (!model || !property || !rest) return std::nullopt;
  const auto& [label, n, workers] = *rest;
  auto checked = c.section([&] {
    if (!model->cond().count(label)) bad(path + "/state", "unknown macro state '" + label + "'");
    at_path(path + "/property", [&] {
      return model->preimage(property->contains_a0() ? complement(*property) : *property).id;
    });
    return 0;
  });
  if (!checked) return std::nullopt;
  return HvPlan{std::move(*model), label, std::move(*property), n, workers};
}

struct EvolvePlan {
  ParsedState state;
  Hamiltonian hamiltonian;
  std::vector<double> times;
  std::vector<GeneralizedObservable> expectations;
};

std::optional<EvolvePlan> parse_evolve(const json& params, const std::string& path, Collector& c) {
  auto state = c.section([&] { return parse_state(need(params, "state", path), path + "/state"); });
  auto hamiltonian = c.section([&] {
    const CMatrix h = matrix_from_json(need(params, "hamiltonian", path), path + "/hamiltonian");
    const double hbar = number_or(params, "hbar", 1.0, path);
    if (!(hbar > 0.0)) bad(path + "/hbar", "must be positive");
    return at_path(path + "/hamiltonian", [&] { return Hamiltonian(h, hbar); });
  });
  auto times = c.section([&] {
    const json& t = need(params, "times", path);
    if (t.is_array()) return number_list(t, path + "/times");
    const std::string p = path + "/times";
    const double start = number_or(t, "start", 0.0, p);
    const double stop = as_number(need(t, "stop", p), p + "/stop");
    const std::uint64_t steps = count_or(t, "steps", 100, p);
    if (steps == 0) bad(p + "/steps", "must be at least 1");
    std::vector<double> out;
    for (std::uint64_t i = 0; i <= steps; ++i) {
      out.push_back(start + (stop - start) * static_cast<double>(i) / static_cast<double>(steps));
    }
    return out;
  });
  std::optional<std::vector<GeneralizedObservable>> expectations = std::vector<GeneralizedObservable>{};
  if (params.contains("observables") || params.contains("expectations")) {
    expectations = c.section([&] {
      const auto registry =
          parse_registry(need(params, "observables", path), path + "/observables");
      std::vector<GeneralizedObservable> out;
      const json& names = need(params, "expectations", path);
      if (!names.is_array()) bad(path + "/expectations", "expected an array of names");
      for (std::size_t i = 0; i < names.size(); ++i) {
        out.push_back(lookup(registry, names[i], path + "/expectations/" + std::to_string(i)));
      }
      return out;
    });
  }
  if (!state || !hamiltonian || !times || !expectations) return std::nullopt;
  c.section([&] {
    require_dim(hamiltonian->dim(), state->state.dim(), path + "/hamiltonian");
    for (std::size_t i = 0; i < expectations->size(); ++i) {
      require_dim((*expectations)[i].dim(), state->state.dim(),
                  path + "/expectations/" + std::to_string(i));
    }
    return 0;
  });
  return EvolvePlan{std::move(*state), std::move(*hamiltonian), std::move(*times),
                    std::move(*expectations)};
}

using Plan = std::variant<std::monostate, BornPlan, OutcomePlan, CascadePlan, AxmPlan, ChshPlan,
                          HvPlan, EvolvePlan>;

Plan parse_plan(const ExperimentConfig& config, Collector& c) {
  const json& p = config.parameters;
  const std::string path = "/parameters";
  auto wrap = [](auto opt) -> Plan {
    if (opt) return Plan(std::move(*opt));
    return Plan();
  };
  switch (config.kind) {
    case ExperimentKind::BornRecovery: return parse_born(p, config.seed, path, c);
    case ExperimentKind::OutcomeDist: return wrap(parse_outcome(p, path, c));
    case ExperimentKind::Cascade: return wrap(parse_cascade(p, path, c));
    case ExperimentKind::Axm: return wrap(parse_axm(p, path, c));
    case ExperimentKind::Chsh: return wrap(parse_chsh(p, path, c));
    case ExperimentKind::HvSample: return wrap(parse_hv(p, path, c));
    case ExperimentKind::Evolve: return wrap(parse_evolve(p, path, c));
  }
  return Plan();
}

// --- execution ---------------------------------------------------------------

std::string fmt(double x) { return format_number(x); }

void run_born(const BornPlan& plan, RunResult& out) {
  Table t{"born_recovery", {"case", "dim", "outcome", "p_esr", "p_qm", "p_t", "abs_diff"}, {}};
  double worst = 0.0;
  double worst_a0 = 0.0;
  for (std::size_t i = 0; i < plan.cases.size(); ++i) {
    const auto& [s, obs] = plan.cases[i];
    for (std::size_t k = 0; k < obs.outcome_count(); ++k) {
      const PhysicalProperty f = PhysicalProperty::singleton(obs, k);
      const double p_t = overall_prob(s, f, plan.detection);
      if (k == 0) {
        worst_a0 = std::max(worst_a0, std::abs(p_t));
        t.rows.push_back({std::to_string(i), std::to_string(s.dim()), fmt(obs.outcome(k)), "", "",
                          fmt(p_t), ""});
        continue;
      }
      const double p = conditional_prob(s, f);
      const double born = std::real(expectation(s.rho(), obs.projector(k).matrix()));
      const double diff = std::abs(p - born);
      worst = std::max(worst, diff);
      t.rows.push_back({std::to_string(i), std::to_string(s.dim()), fmt(obs.outcome(k)), fmt(p),
                        fmt(born), fmt(p_t), fmt(diff)});
    }
  }
  out.tables.push_back(std::move(t));
  out.report.push_back("max |ESR - QM| = " + fmt(worst));
  out.report.push_back("max p_t(a0) = " + fmt(worst_a0));
  if (worst > 1e-10) out.exit_code = kExitNumerical;
}

void run_outcome(const OutcomePlan& plan, RunResult& out) {
  Table t{"outcome_dist", {"index", "outcome", "p_t"}, {}};
  double total = 0.0;
  for (const auto& o : outcome_distribution(plan.base.state.state, plan.observable, plan.base.detection)) {
    total += o.p_t;
    t.rows.push_back({std::to_string(o.index), fmt(o.value), fmt(o.p_t)});
  }
  out.tables.push_back(std::move(t));
  out.report.push_back("sum p_t = " + fmt(total));
  if (std::abs(total - 1.0) > 1e-10) out.exit_code = kExitNumerical;
}

void run_cascade(const CascadePlan& plan, std::uint64_t seed, RunResult& out) {
  Table t{"cascade", {"step", "property", "outcome", "p_t", "purity"}, {}};
  const DetectionModel& d = plan.base.detection;
  GeneralizedPureState s = plan.base.state.state;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const PhysicalProperty& f = plan.steps[i];
    const double p_t = overall_prob(s, f, d);
    bool yes = true;
    if (plan.sample) {
      const MeasurementOutcome m = sample_outcome(s, f.observable(), d, seed + i);
      yes = m.result_for(f) == MeasurementResult::Yes;
      s = m.post_state;
    } else {
      s = s.with_rho(glp_update(s, f, d));
    }
    t.rows.push_back({std::to_string(i + 1), f.describe(), yes ? "yes" : "no", fmt(p_t),
                      fmt(s.rho().purity())});
  }
  out.tables.push_back(std::move(t));
}

void run_axm(const AxmPlan& plan, RunResult& out) {
  const PureState& psi = *plan.base.base.state.pure;
  const auto& obs = plan.base.observable;
  const auto& d = plan.base.base.detection;
  const StateVector initial = axm_initial_state(psi.vector, plan.pointer);
  const StateVector composite = axm_premeasurement(psi, obs, d, plan.pointer, plan.phases);
  const DensityOperator reduced = reduced_post_state(composite, {psi.vector.dim(), plan.pointer.dim()});
  const DensityOperator closed = measurement_transform(GeneralizedPureState(psi), obs, d);
  const double residual = max_abs(reduced.matrix() - closed.matrix());
  const NonlinearityReport nl = nonlinearity_certificate(reduced, obs);

  out.json_artifact = json{{"initial", to_json(initial.amplitudes())},
                           {"premeasured", to_json(composite.amplitudes())},
                           {"reduced", to_json(reduced.matrix())}};
  out.tables.push_back({"axm",
                        {"purity", "is_pure", "bo_violation", "closed_form_residual"},
                        {{fmt(nl.purity), nl.is_pure ? "1" : "0", fmt(nl.bo_violation), fmt(residual)}}});
  if (residual > 1e-10) out.exit_code = kExitNumerical;
}

void run_hv(const HvPlan& plan, std::uint64_t seed, RunResult& out) {
  Table t{"hv_sample", {"quantity", "analytic", "monte_carlo", "sigma", "z"}, {}};
  const SampleTally tally = sample_many(plan.model, plan.macro_state, plan.property, plan.n, seed, plan.workers);
  auto row = [&](const char* name, double analytic, double mc, double trials) {
    const double sigma = std::sqrt(analytic * (1.0 - analytic) / trials);
    const double z = sigma > 0.0 ? (mc - analytic) / sigma : 0.0;
    t.rows.push_back({name, fmt(analytic), fmt(mc), fmt(sigma), fmt(z)});
  };
  const auto n = static_cast<double>(tally.n);
  if (plan.property.contains_a0()) {
    row("p_t", aggregate_complement(plan.model, plan.macro_state, plan.property), tally.p_t(), n);
  } else {
    const AggregateProbabilities a = aggregate(plan.model, plan.macro_state, plan.property);
    row("p_t", a.p_t, tally.p_t(), n);
    row("p_d", a.p_d, tally.p_d(), n);
    if (tally.detected > 0) row("p", a.p, tally.p(), static_cast<double>(tally.detected));
  }
  out.tables.push_back(std::move(t));
}

void run_evolve(const EvolvePlan& plan, RunResult& out) {
  Table t{"evolve", {"t"}, {}};
  for (const auto& o : plan.expectations) t.header.push_back(o.name());
  t.header.insert(t.header.end(), {"energy", "purity", "trace"});
  const DensityOperator& rho0 = plan.state.state.rho();
  const double e0 = std::real(expectation(rho0, plan.hamiltonian.matrix()));
  const double scale = std::max(1.0, max_abs(plan.hamiltonian.matrix()));
  double drift = 0.0;
  for (double time : plan.times) {
    const DensityOperator rho = evolve_closed(rho0, plan.hamiltonian, time);
    std::vector<std::string> r{fmt(time)};
    for (const auto& o : plan.expectations) r.push_back(fmt(std::real(expectation(rho, o.base().matrix()))));
    const double e = std::real(expectation(rho, plan.hamiltonian.matrix()));
    const double tr = std::real(rho.matrix().trace());
    drift = std::max({drift, std::abs(e - e0) / scale, std::abs(tr - 1.0)});
    r.insert(r.end(), {fmt(e), fmt(rho.purity()), fmt(tr)});
    t.rows.push_back(std::move(r));
  }
  out.tables.push_back(std::move(t));
  out.report.push_back("max trace/energy drift = " + fmt(drift));
  if (drift > 1e-9) out.exit_code = kExitNumerical;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char ch : cell) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [name, k] : kind_names()) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> experiment_kind_from_string(const std::string& name) {
  const auto it = kind_names().find(name);
  if (it == kind_names().end()) return std::nullopt;
  return it->second;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoFailure, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ConfigInvalid, path + ": " + e.what());
  }
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) bad("", "config must be a JSON object");
  ExperimentConfig config;
  const std::string name = as_string(need(j, "kind", ""), "/kind");
  const auto kind = experiment_kind_from_string(name);
  if (!kind) bad("/kind", "unknown experiment kind '" + name + "'");
  config.kind = *kind;
  config.seed = count_or(j, "seed", 0, "");
  if (j.contains("output_path")) config.output_path = as_string(j["output_path"], "/output_path");
  config.parameters = j.contains("parameters") ? j["parameters"] : json::object();
  if (!config.parameters.is_object()) bad("/parameters", "expected an object");
  return config;
}

std::vector<std::string> validate(const json& j) {
  Collector c;
  const auto config = c.section([&] { return config_from_json(j); });
  if (config) parse_plan(*config, c);
  return c.items();
}

void write_csv(std::ostream& out, const Table& table) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_escape(cells[i]);
    out << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
}

RunResult execute(const ExperimentConfig& config) {
  Collector c;
  Plan plan = parse_plan(config, c);
  if (!c.items().empty()) {
    std::string message;
    for (const auto& item : c.items()) message += (message.empty() ? "" : "; ") + item;
    fail(ErrorKind::ConfigInvalid, message);
  }
  RunResult out;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, BornPlan>) {
          run_born(p, out);
        } else if constexpr (std::is_same_v<P, OutcomePlan>) {
          run_outcome(p, out);
        } else if constexpr (std::is_same_v<P, CascadePlan>) {
          run_cascade(p, config.seed, out);
        } else if constexpr (std::is_same_v<P, AxmPlan>) {
          run_axm(p, out);
        } else if constexpr (std::is_same_v<P, ChshPlan>) {
          out.tables.push_back(chsh_table(p.settings, p.eta_a, p.eta_b, p.pairs, config.seed, p.workers));
        } else if constexpr (std::is_same_v<P, HvPlan>) {
          run_hv(p, config.seed, out);
        } else if constexpr (std::is_same_v<P, EvolvePlan>) {
          run_evolve(p, out);
        } else {
          fail(ErrorKind::ConfigInvalid, "/parameters: nothing to run");
        }
      },
      plan);
  return out;
}

std::vector<std::string> write_artifacts(const ExperimentConfig& config, const RunResult& result) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.output_path, ec);
  if (ec) fail(ErrorKind::IoFailure, "cannot create '" + config.output_path + "': " + ec.message());
  std::vector<std::string> written;
  auto open = [&](const std::string& file) {
    const std::string path = (fs::path(config.output_path) / file).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::IoFailure, "cannot write '" + path + "'");
    written.push_back(path);
    return out;
  };
  for (const auto& table : result.tables) {
    auto out = open(table.name + ".csv");
    write_csv(out, table);
    if (!out) fail(ErrorKind::IoFailure, "write failed for '" + written.back() + "'");
  }
  if (result.json_artifact) {
    auto out = open(to_string(config.kind) + ".json");
    out << result.json_artifact->dump(2) << '\n';
    if (!out) fail(ErrorKind::IoFailure, "write failed for '" + written.back() + "'");
  }
  return written;
}

std::string format_number(double x) {
  if (x == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

Table chsh_table(const BipartiteSettings& settings, double eta_a, double eta_b,
                 std::uint64_t n_pairs, std::uint64_t seed, unsigned workers) {
  Table t{"chsh", {"setting_pair", "E_detected", "E_overall", "n_produced", "n_detected"}, {}};
  if (n_pairs == 0) {
    const Correlator cond = conditional_correlator;
    const Correlator overall = [&](double x, double y) { return overall_correlator(x, y, eta_a, eta_b); };
    const std::array<std::pair<const char*, std::pair<double, double>>, 4> pairs{{
        {"ab", {settings.a, settings.b}},
        {"ab'", {settings.a, settings.b_prime}},
        {"a'b", {settings.a_prime, settings.b}},
        {"a'b'", {settings.a_prime, settings.b_prime}},
    }};
    for (const auto& [name, angles] : pairs) {
      t.rows.push_back({name, fmt(cond(angles.first, angles.second)),
                        fmt(overall(angles.first, angles.second)), "", ""});
    }
    t.rows.push_back({"CHSH", fmt(chsh_value(settings, cond)), fmt(chsh_value(settings, overall)), "", ""});
    return t;
  }
  const auto records = simulate_bell_run(settings, eta_a, eta_b, n_pairs, seed, workers);
  std::uint64_t produced = 0;
  std::uint64_t detected = 0;
  for (const auto& r : records) {
    produced += r.n_produced;
    detected += r.n_both_detected;
    t.rows.push_back({r.setting_pair, r.n_both_detected ? fmt(r.e_detected()) : "",
                      fmt(r.e_overall()), std::to_string(r.n_produced),
                      std::to_string(r.n_both_detected)});
  }
  const bool all_detected = std::all_of(records.begin(), records.end(),
                                        [](const CorrelationRecord& r) { return r.n_both_detected > 0; });
  t.rows.push_back({"CHSH", all_detected ? fmt(chsh_detected(records).value) : "",
                    fmt(chsh_overall(records).value), std::to_string(produced),
                    std::to_string(detected)});
  return t;
}

}  // namespace esr

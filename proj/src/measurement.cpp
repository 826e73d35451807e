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


#include "esr/measurement.hpp"

#include "esr/random.hpp"

namespace esr {

namespace {

DensityOperator sandwich(const CMatrix& t, const GeneralizedPureState& s,
                         const std::string& what) {
  const CMatrix out = t * s.rho().matrix() * t.adjoint();
  const double trace = std::real(out.trace());
  if (trace <= kZeroProbability) {
    fail(ErrorKind::ZeroProbabilityBranch,
         what + " has zero probability in state '" + s.label() + "'");
  }
  return DensityOperator(out / trace);
}

}  // namespace

DensityOperator lueders_qm(const GeneralizedPureState& s, const PhysicalProperty& f) {
  if (s.dim() != f.observable().dim()) {
    fail(ErrorKind::DimensionMismatch, "state and observable dimensions differ");
  }
  return sandwich(projector_for(f).matrix(), s, f.describe());
}

DensityOperator glp_update(const GeneralizedPureState& s, const PhysicalProperty& f,
                           const DetectionModel& d) {
  return sandwich(effect_operator(s, f, d), s, f.describe());
}

std::vector<OutcomeProbability> outcome_distribution(const GeneralizedPureState& s,
                                                     const GeneralizedObservable& obs,
                                                     const DetectionModel& d) {
  std::vector<OutcomeProbability> out;
  out.reserve(obs.outcome_count());
  for (std::size_t k = 0; k < obs.outcome_count(); ++k) {
    out.push_back({k, obs.outcome(k),
                   overall_prob(s, PhysicalProperty::singleton(obs, k), d)});
  }
  return out;
}

MeasurementOutcome sample_outcome(const GeneralizedPureState& s,
                                  const GeneralizedObservable& obs,
                                  const DetectionModel& d, std::uint64_t seed) {
  const auto dist = outcome_distribution(s, obs, d);
  std::vector<double> weights;
  weights.reserve(dist.size());
  for (const auto& o : dist) weights.push_back(o.p_t);
  Engine engine = make_stream(seed, 0);
  const std::size_t k = categorical(engine, weights);
  const auto f = PhysicalProperty::singleton(obs, k);
  return {k, obs.outcome(k), s.with_rho(glp_update(s, f, d))};
}

ProperMixture proper_mixture_update(const ProperMixture& m, const PhysicalProperty& f,
                                    const DetectionModel& d) {
  std::vector<MixtureComponent> updated;
  double total = 0.0;
  for (const auto& c : m.components()) {
    const double p_t = overall_prob(c.state, f, d);
    if (p_t <= kZeroProbability) continue;
    const double weight = c.weight * p_t;
    const DensityOperator post = glp_update(c.state, f, d);
    bool merged = false;
    for (auto& u : updated) {
      if (max_abs(CMatrix(u.state.rho().matrix() - post.matrix())) <= 1e-10) {
        u.weight += weight;
        merged = true;
        break;
      }
    }
    if (!merged) updated.push_back({weight, c.state.with_rho(post)});
    total += weight;
  }
  if (updated.empty()) {
    fail(ErrorKind::AllBranchesZero,
         "no component of '" + m.label() + "' yields " + f.describe());
  }
  for (auto& u : updated) u.weight /= total;
  return ProperMixture(m.label(), std::move(updated));
}

}  // namespace esr

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


#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "esr/probability.hpp"

namespace esr {

/// P rho P / Tr[P rho P] for F with a0 not in Sigma.
DensityOperator lueders_qm(const GeneralizedPureState& s, const PhysicalProperty& f);

/// Generalized Lueders postulate for the yes result of F:
/// T rho T / Tr[T rho T] with T the effect operator of F.
DensityOperator glp_update(const GeneralizedPureState& s, const PhysicalProperty& f,
                           const DetectionModel& d);

struct OutcomeProbability {
  std::size_t index;  // 0 is a0
  double value;
  double p_t;
};

/// Overall probabilities of every singleton outcome, a0 first.
std::vector<OutcomeProbability> outcome_distribution(const GeneralizedPureState& s,
                                                     const GeneralizedObservable& obs,
                                                     const DetectionModel& d);

enum class MeasurementResult { Yes, No };

struct MeasurementOutcome {
  std::size_t index;
  double outcome_value;
  GeneralizedPureState post_state;

  /// Yes iff the drawn outcome lies in Sigma(f).
  MeasurementResult result_for(const PhysicalProperty& f) const {
    return f.contains(index) ? MeasurementResult::Yes : MeasurementResult::No;
  }
};

/// Draws an outcome from outcome_distribution and applies the GLP for
/// that singleton. Uses stream (seed, 0).
MeasurementOutcome sample_outcome(const GeneralizedPureState& s,
                                  const GeneralizedObservable& obs,
                                  const DetectionModel& d, std::uint64_t seed);

/**
 * Yes-result update of a proper mixture: every component is mapped by
 * glp_update, weights become proportional to p_j * p^t(P_j, F) and
 * components with p^t = 0 drop out. Components that coincide after the
 * update are merged.
 */
ProperMixture proper_mixture_update(const ProperMixture& m, const PhysicalProperty& f,
                                    const DetectionModel& d);

}  // namespace esr

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
 * Spin-singlet Bell experiments with lossy detectors.
 *
 * Correlators come from the Born rule on the two-qubit singlet. In the
 * overall (all-produced) ensemble a wing that does not register
 * contributes 0 to the product, so E_overall = eta_a eta_b E.
 */

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "esr/hilbert.hpp"
#include "esr/observables.hpp"

namespace esr {

struct BipartiteSettings {
  double a = 0.0;
  double a_prime = 0.0;
  double b = 0.0;
  double b_prime = 0.0;

  /// a = 0, a' = pi/2, b = pi/4, b' = -pi/4, where S = -2 sqrt(2).
  static BipartiteSettings tsirelson();
};

using Correlator = std::function<double(double theta_a, double theta_b)>;

/// (|01> - |10>)/sqrt(2).
const StateVector& singlet();

/// cos(theta) sigma_z + sin(theta) sigma_x.
CMatrix spin_operator(double theta);

/// Joint outcome observable 2 sigma(theta_a) x I + I x sigma(theta_b). Its
/// eigenvalues -3, -1, 1, 3 label the outcome pairs (-,-), (-,+), (+,-),
/// (+,+); a0 = 0.
GeneralizedObservable pair_observable(double theta_a, double theta_b);

/// Born probabilities of the four outcome pairs in the order above.
std::array<double, 4> pair_probabilities(double theta_a, double theta_b);

/// E(a, b) on detected pairs, from the ESR conditional probabilities.
double conditional_correlator(double theta_a, double theta_b);

/// eta_a eta_b e. Throws EtaOutOfRange.
double overall_from_conditional(double e, double eta_a, double eta_b);

double overall_correlator(double theta_a, double theta_b, double eta_a, double eta_b);

/// E(a,b) + E(a,b') + E(a',b) - E(a',b').
double chsh_value(const BipartiteSettings& s, const Correlator& correlator);

/// |E(a,b) - E(a,c)| - E(b,c).
double bell_ohs_value(double a, double b, double c, const Correlator& correlator);

enum class InequalityKind { CHSH, BellOriginal };

/// Classical bound: 2 for CHSH, 1 for the original Bell inequality.
double classical_bound(InequalityKind kind);

struct Violation {
  double value;
  std::vector<double> angles;  // (a, a', b, b') or (a, b, c)
};

/// Maximum of |S| (CHSH) or of the signed Bell expression over settings.
/// The correlator is tabulated on a grid of step `grid_step` radians with
/// the first angle fixed at 0, which assumes E depends only on the angle
/// difference; the best grid point is then refined by pattern search over
/// all angles.
Violation max_violation(InequalityKind kind, const Correlator& correlator,
                        double grid_step = std::numbers::pi / 180.0);

/// Largest symmetric eta whose overall correlator does not violate the
/// classical bound, found by bisection to `search_tol`.
double critical_efficiency(InequalityKind kind, double search_tol);

struct CorrelationRecord {
  std::string setting_pair;  // "ab", "ab'", "a'b", "a'b'"
  double theta_a = 0.0;
  double theta_b = 0.0;
  std::uint64_t n_produced = 0;
  std::uint64_t n_both_detected = 0;
  std::int64_t sum_products_detected = 0;
  /// Per wing: counts of -1, +1 and no registration.
  std::array<std::uint64_t, 3> wing_a{};
  std::array<std::uint64_t, 3> wing_b{};
  /// joint[i][j] with the same indexing as the wing tallies.
  std::array<std::array<std::uint64_t, 3>, 3> joint{};

  double e_detected() const;
  double e_overall() const;
  /// Binomial standard errors of the two estimates.
  double sigma_detected() const;
  double sigma_overall() const;
};

/// n_pairs singlets per setting pair. Each pair draws its outcome pair from
/// the Born rule and each wing registers independently with probability
/// eta. Setting pair s, chunk c uses stream (seed, s * 2^40 + c); results
/// do not depend on `workers`.
std::array<CorrelationRecord, 4> simulate_bell_run(const BipartiteSettings& settings,
                                                   double eta_a, double eta_b,
                                                   std::uint64_t n_pairs, std::uint64_t seed,
                                                   unsigned workers = 1);

/// CHSH combination of the four estimates, with a standard error.
struct ChshEstimate {
  double value;
  double sigma;
};
ChshEstimate chsh_detected(const std::array<CorrelationRecord, 4>& records);
ChshEstimate chsh_overall(const std::array<CorrelationRecord, 4>& records);

}  // namespace esr

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
 * Measurement as an interaction between a system and a pointer.
 *
 * Composite vectors live on H (x) H^M with the system index slow: entry
 * i * dim_M + m pairs system basis vector i with pointer basis vector m.
 * Pointer vector 0 is the no-registration position a0^M; pointer vector
 * n >= 1 registers eigenvalue outcome n of the generalized observable.
 */

#pragma once

#include <cstddef>
#include <vector>

#include "esr/probability.hpp"

namespace esr {

class PointerBasis {
 public:
  /// Columns are |a0^M>, |a1^M>, ...; they must be orthonormal.
  explicit PointerBasis(CMatrix vectors);
  static PointerBasis canonical(Eigen::Index count);

  Eigen::Index dim() const { return vectors_.rows(); }
  std::size_t count() const { return static_cast<std::size_t>(vectors_.cols()); }
  CVector vector(std::size_t k) const { return vectors_.col(static_cast<Eigen::Index>(k)); }

 private:
  CMatrix vectors_;
};

/// Phases of the branch amplitudes; empty theta means all zero.
struct AxmPhases {
  std::vector<double> theta;
  double phi0 = 0.0;
};

/// |psi>|a0^M>, the pre-measurement composite vector.
StateVector axm_initial_state(const StateVector& psi, const PointerBasis& pointer);

/// |psi_F0>: the system vector left behind by the a0 outcome. Returns an
/// empty vector when that branch has probability zero.
CVector no_detection_vector(const PureState& psi, const GeneralizedObservable& obs,
                            const DetectionModel& d);

/**
 * Composite vector after an idealized measurement of `obs`:
 *   sum_n alpha_n P_n|psi>|a_n^M> + beta_0 |psi_F0>|a0^M>,
 * alpha_n = sqrt(p^d(a_n)) e^{i theta_n}, beta_0 = sqrt(p^t(F0)) e^{i phi0}.
 * The beta branch is dropped when p^t(F0) = 0.
 */
StateVector axm_premeasurement(const PureState& psi, const GeneralizedObservable& obs,
                               const DetectionModel& d, const PointerBasis& pointer,
                               const AxmPhases& phases = {});

/// Tr over the pointer of |Psi><Psi|.
DensityOperator reduced_post_state(const StateVector& composite, BipartiteDims dims);

/// Closed form of the reduced post-measurement state for any pure state or
/// improper mixture: p^t(F0) rho_{S_F0} + sum_n p^d(a_n) P_n rho P_n.
DensityOperator measurement_transform(const GeneralizedPureState& s,
                                      const GeneralizedObservable& obs,
                                      const DetectionModel& d);

/// State-independent branch coefficients of a linear premeasurement.
/// The target of eigenvector |a_n^mu> in the a0 branch is
/// target_map * |a_n^mu>; target_map must be unitary.
struct LinearizedCoefficients {
  std::vector<Complex> alphas;
  std::vector<Complex> betas;
  CMatrix target_map;
};

/// Coefficients for uniform detection efficiency eta with identity targets.
LinearizedCoefficients uniform_coefficients(const GeneralizedObservable& obs, double eta);

/// The isometry H -> H (x) H^M of the linear premeasurement.
/// Throws NormalizationViolation if |alpha_n|^2 + |beta_n|^2 != 1 or the
/// targets are not orthonormal.
CMatrix linearized_map(const GeneralizedObservable& obs, const LinearizedCoefficients& c,
                       const PointerBasis& pointer);

StateVector linearized_premeasurement(const StateVector& psi,
                                      const GeneralizedObservable& obs,
                                      const LinearizedCoefficients& c,
                                      const PointerBasis& pointer);

/// Whether the state-dependent and the linear premeasurement agree on psi
/// (both linearity conditions at once), within `tol` per amplitude.
bool linearity_conditions_hold(const PureState& psi, const GeneralizedObservable& obs,
                               const DetectionModel& d, const LinearizedCoefficients& c,
                               const PointerBasis& pointer, double tol = 1e-10);

struct NonlinearityReport {
  double purity;
  bool is_pure;
  /// max over basis pairs (n, n') of |rho_nn rho_n'n' - |rho_nn'|^2| in the
  /// eigenbasis of the measured observable; zero iff rho is pure.
  double bo_violation;
};

NonlinearityReport nonlinearity_certificate(const DensityOperator& rho_tilde,
                                            const GeneralizedObservable& obs);

}  // namespace esr

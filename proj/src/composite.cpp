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


#include "esr/composite.hpp"

#include <cmath>

namespace esr {

namespace {

void require_pointer(const GeneralizedObservable& obs, const PointerBasis& pointer) {
  if (pointer.count() != obs.outcome_count()) {
    fail(ErrorKind::PointerCountMismatch,
         "pointer has " + std::to_string(pointer.count()) + " positions, " +
             obs.name() + " has " + std::to_string(obs.outcome_count()) + " outcomes");
  }
}

Complex branch_phase(const std::vector<double>& theta, std::size_t n) {
  return theta.empty() ? Complex(1.0) : std::polar(1.0, theta.at(n));
}

// Concatenated eigenspace bases of the observable: a unitary whose columns
// are |a_n^mu>.
CMatrix eigenbasis(const GeneralizedObservable& obs) {
  CMatrix v(obs.dim(), obs.dim());
  Eigen::Index col = 0;
  for (const auto& component : obs.base().spectrum()) {
    v.middleCols(col, component.basis.cols()) = component.basis;
    col += component.basis.cols();
  }
  return v;
}

}  // namespace

PointerBasis::PointerBasis(CMatrix vectors) : vectors_(std::move(vectors)) {
  const auto k = vectors_.cols();
  if (k < 2 || vectors_.rows() < k) {
    fail(ErrorKind::DimensionMismatch, "pointer basis needs 2..dim orthonormal vectors");
  }
  const CMatrix gram = vectors_.adjoint() * vectors_;
  if (max_abs(CMatrix(gram - CMatrix::Identity(k, k))) > tolerance::kNorm) {
    fail(ErrorKind::InvalidState, "pointer vectors are not orthonormal");
  }
}

PointerBasis PointerBasis::canonical(Eigen::Index count) {
  return PointerBasis(CMatrix::Identity(count, count));
}

StateVector axm_initial_state(const StateVector& psi, const PointerBasis& pointer) {
  return StateVector(Eigen::kroneckerProduct(psi.amplitudes(), pointer.vector(0)).eval());
}

CVector no_detection_vector(const PureState& psi, const GeneralizedObservable& obs,
                            const DetectionModel& d) {
  if (psi.vector.dim() != obs.dim()) {
    fail(ErrorKind::DimensionMismatch, "state and observable dimensions differ");
  }
  const auto detection = d.outcome_detection(psi, obs);
  CVector v = CVector::Zero(obs.dim());
  for (std::size_t n = 1; n < obs.outcome_count(); ++n) {
    v += (1.0 - detection[n - 1]) * (obs.projector(n).matrix() * psi.vector.amplitudes());
  }
  const double norm = v.norm();
  if (norm * norm <= kZeroProbability) return CVector();
  return v / norm;
}

StateVector axm_premeasurement(const PureState& psi, const GeneralizedObservable& obs,
                               const DetectionModel& d, const PointerBasis& pointer,
                               const AxmPhases& phases) {
  require_pointer(obs, pointer);
  if (psi.vector.dim() != obs.dim()) {
    fail(ErrorKind::DimensionMismatch, "state and observable dimensions differ");
  }
  const std::size_t w = obs.outcome_count() - 1;
  if (!phases.theta.empty() && phases.theta.size() != w) {
    fail(ErrorKind::InvalidArgument,
         "expected " + std::to_string(w) + " branch phases");
  }
  const GeneralizedPureState state(psi);
  const CVector& amplitudes = psi.vector.amplitudes();
  const auto detection = d.outcome_detection(state, obs);

  CVector out = CVector::Zero(obs.dim() * pointer.dim());
  for (std::size_t n = 1; n <= w; ++n) {
    const CVector branch = obs.projector(n).matrix() * amplitudes;
    const Complex alpha = std::sqrt(detection[n - 1]) * branch_phase(phases.theta, n - 1);
    out += alpha * Eigen::kroneckerProduct(branch, pointer.vector(n)).eval();
  }
  const double p_t0 = overall_prob(state, PhysicalProperty::singleton(obs, 0), d);
  const CVector no_detection = no_detection_vector(psi, obs, d);
  if (p_t0 > kZeroProbability && no_detection.size() > 0) {
    const Complex beta = std::sqrt(p_t0) * std::polar(1.0, phases.phi0);
    out += beta * Eigen::kroneckerProduct(no_detection, pointer.vector(0))
                      .eval();
  }
  return StateVector(std::move(out));
}

DensityOperator reduced_post_state(const StateVector& composite, BipartiteDims dims) {
  if (composite.dim() != dims.a * dims.b) {
    fail(ErrorKind::DimensionMismatch, "composite vector does not match dims");
  }
  return DensityOperator(partial_trace_matrix(composite.outer(), dims, Keep::A));
}

DensityOperator measurement_transform(const GeneralizedPureState& s,
                                      const GeneralizedObservable& obs,
                                      const DetectionModel& d) {
  if (s.dim() != obs.dim()) {
    fail(ErrorKind::DimensionMismatch, "state and observable dimensions differ");
  }
  const auto detection = d.outcome_detection(s, obs);
  const CMatrix& rho = s.rho().matrix();
  CMatrix out = CMatrix::Zero(obs.dim(), obs.dim());
  CMatrix t = CMatrix::Zero(obs.dim(), obs.dim());
  for (std::size_t n = 1; n < obs.outcome_count(); ++n) {
    const CMatrix& p = obs.projector(n).matrix();
    out += detection[n - 1] * (p * rho * p);
    t += (1.0 - detection[n - 1]) * p;
  }
  // p^t(F0) rho_{S_F0} = p^t(F0) T rho T / Tr[T rho T].
  const CMatrix branch = t * rho * t;
  const double branch_trace = std::real(branch.trace());
  if (branch_trace > kZeroProbability) {
    const double p_t0 = overall_prob(s, PhysicalProperty::singleton(obs, 0), d);
    out += (p_t0 / branch_trace) * branch;
  }
  return DensityOperator(out);
}

LinearizedCoefficients uniform_coefficients(const GeneralizedObservable& obs, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    fail(ErrorKind::DetectionOutOfRange, "eta outside [0,1]");
  }
  const std::size_t w = obs.outcome_count() - 1;
  return {std::vector<Complex>(w, std::sqrt(eta)),
          std::vector<Complex>(w, std::sqrt(1.0 - eta)),
          CMatrix::Identity(obs.dim(), obs.dim())};
}

CMatrix linearized_map(const GeneralizedObservable& obs, const LinearizedCoefficients& c,
                       const PointerBasis& pointer) {
  require_pointer(obs, pointer);
  const std::size_t w = obs.outcome_count() - 1;
  if (c.alphas.size() != w || c.betas.size() != w) {
    fail(ErrorKind::DimensionMismatch,
         "expected " + std::to_string(w) + " alpha and beta coefficients");
  }
  for (std::size_t n = 0; n < w; ++n) {
    const double total = std::norm(c.alphas[n]) + std::norm(c.betas[n]);
    if (std::abs(total - 1.0) > 1e-10) {
      fail(ErrorKind::NormalizationViolation,
           "|alpha|^2 + |beta|^2 = " + std::to_string(total) + " for outcome " +
               std::to_string(n + 1));
    }
  }
  const Eigen::Index dim = obs.dim();
  if (c.target_map.rows() != dim || c.target_map.cols() != dim) {
    fail(ErrorKind::DimensionMismatch, "target map has the wrong size");
  }
  if (max_abs(CMatrix(c.target_map.adjoint() * c.target_map -
                      CMatrix::Identity(dim, dim))) > 1e-10) {
    fail(ErrorKind::NormalizationViolation, "a0-branch targets are not orthonormal");
  }

  CMatrix detected_part = CMatrix::Zero(dim, dim);
  CMatrix map = CMatrix::Zero(dim * pointer.dim(), dim);
  for (std::size_t n = 1; n <= w; ++n) {
    const CMatrix& p = obs.projector(n).matrix();
    map += Eigen::kroneckerProduct(CMatrix(c.alphas[n - 1] * p),
                                   CMatrix(pointer.vector(n)))
               .eval();
    detected_part += c.betas[n - 1] * p;
  }
  map += Eigen::kroneckerProduct(CMatrix(c.target_map * detected_part),
                                 CMatrix(pointer.vector(0)))
             .eval();
  return map;
}

StateVector linearized_premeasurement(const StateVector& psi,
                                      const GeneralizedObservable& obs,
                                      const LinearizedCoefficients& c,
                                      const PointerBasis& pointer) {
  if (psi.dim() != obs.dim()) {
    fail(ErrorKind::DimensionMismatch, "state and observable dimensions differ");
  }
  return StateVector(linearized_map(obs, c, pointer) * psi.amplitudes());
}

bool linearity_conditions_hold(const PureState& psi, const GeneralizedObservable& obs,
                               const DetectionModel& d, const LinearizedCoefficients& c,
                               const PointerBasis& pointer, double tol) {
  const StateVector general = axm_premeasurement(psi, obs, d, pointer);
  const StateVector linear = linearized_premeasurement(psi.vector, obs, c, pointer);
  return max_abs(CVector(general.amplitudes() - linear.amplitudes())) <= tol;
}

NonlinearityReport nonlinearity_certificate(const DensityOperator& rho_tilde,
                                            const GeneralizedObservable& obs) {
  if (rho_tilde.dim() != obs.dim()) {
    fail(ErrorKind::DimensionMismatch, "state and observable dimensions differ");
  }
  const CMatrix v = eigenbasis(obs);
  const CMatrix rho = v.adjoint() * rho_tilde.matrix() * v;
  double violation = 0.0;
  for (Eigen::Index n = 0; n < rho.rows(); ++n) {
    for (Eigen::Index m = n + 1; m < rho.rows(); ++m) {
      const double lhs = std::real(rho(n, n)) * std::real(rho(m, m));
      const double rhs = std::norm(rho(n, m));
      violation = std::max(violation, std::abs(lhs - rhs));
    }
  }
  const double purity = rho_tilde.purity();
  return {purity, purity >= 1.0 - 1e-9, violation};
}

}  // namespace esr

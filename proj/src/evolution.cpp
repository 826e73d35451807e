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


#include "esr/evolution.hpp"

namespace esr {

namespace {

void require_same_dim(const DensityOperator& rho, const Hamiltonian& h) {
  if (rho.dim() != h.dim()) {
    fail(ErrorKind::DimensionMismatch,
         "state dimension " + std::to_string(rho.dim()) + " vs Hamiltonian dimension " +
             std::to_string(h.dim()));
  }
}

CMatrix conjugate(const CMatrix& rho, const CMatrix& u) { return u * rho * u.adjoint(); }

}  // namespace

Hamiltonian::Hamiltonian(const CMatrix& matrix, double hbar) : hbar_(hbar) {
  require_hermitian(matrix, "Hamiltonian");
  if (!(hbar > 0.0)) fail(ErrorKind::InvalidArgument, "hbar must be positive");
  matrix_ = (matrix + matrix.adjoint()) * 0.5;
}

Hamiltonian non_interacting(const Hamiltonian& system, const Hamiltonian& ancilla) {
  if (system.hbar() != ancilla.hbar()) {
    fail(ErrorKind::InvalidArgument, "Hamiltonians use different hbar");
  }
  const CMatrix id_sys = CMatrix::Identity(system.dim(), system.dim());
  const CMatrix id_anc = CMatrix::Identity(ancilla.dim(), ancilla.dim());
  return Hamiltonian(tensor(system.matrix(), id_anc) + tensor(id_sys, ancilla.matrix()),
                     system.hbar());
}

DensityOperator evolve_closed(const DensityOperator& rho, const Hamiltonian& h, double t) {
  require_same_dim(rho, h);
  return DensityOperator(conjugate(rho.matrix(), h.propagator(t)));
}

ProperMixture evolve_proper_mixture(const ProperMixture& m, const Hamiltonian& h, double t) {
  const CMatrix u = h.propagator(t);
  std::vector<MixtureComponent> evolved;
  evolved.reserve(m.size());
  for (const auto& c : m.components()) {
    require_same_dim(c.state.rho(), h);
    evolved.push_back(
        {c.weight, c.state.with_rho(DensityOperator(conjugate(c.state.rho().matrix(), u)))});
  }
  return ProperMixture(m.label(), std::move(evolved));
}

DensityOperator evolve_open_by_dilation(const DensityOperator& rho_sys,
                                        const DensityOperator& ancilla,
                                        const Hamiltonian& joint_h, double t) {
  if (joint_h.dim() != rho_sys.dim() * ancilla.dim()) {
    fail(ErrorKind::DimensionMismatch,
         "joint Hamiltonian dimension " + std::to_string(joint_h.dim()) + " is not " +
             std::to_string(rho_sys.dim()) + " x " + std::to_string(ancilla.dim()));
  }
  const CMatrix joint = conjugate(tensor(rho_sys.matrix(), ancilla.matrix()),
                                  joint_h.propagator(t));
  return DensityOperator(
      partial_trace_matrix(joint, {rho_sys.dim(), ancilla.dim()}, Keep::A));
}

double liouville_residual(const DensityOperator& rho0, const Hamiltonian& h, double t,
                          double step) {
  require_same_dim(rho0, h);
  const CMatrix& rho = rho0.matrix();
  const CMatrix now = conjugate(rho, h.propagator(t));
  const CMatrix ahead = conjugate(rho, h.propagator(t + step));
  const CMatrix behind = conjugate(rho, h.propagator(t - step));
  const CMatrix lhs = Complex(0.0, h.hbar()) * (ahead - behind) / (2.0 * step);
  const CMatrix rhs = h.matrix() * now - now * h.matrix();
  return max_abs(CMatrix(lhs - rhs));
}

}  // namespace esr

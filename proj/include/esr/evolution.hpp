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

#include "esr/hilbert.hpp"
#include "esr/probability.hpp"

namespace esr {

class Hamiltonian {
 public:
  explicit Hamiltonian(const CMatrix& matrix, double hbar = 1.0);

  const CMatrix& matrix() const { return matrix_; }
  double hbar() const { return hbar_; }
  Eigen::Index dim() const { return matrix_.rows(); }

  /// U(t) = exp(-i H t / hbar).
  CMatrix propagator(double t) const { return unitary_exp(matrix_, t, hbar_); }

 private:
  CMatrix matrix_;
  double hbar_;
};

/// H_sys (x) I + I (x) H_anc.
Hamiltonian non_interacting(const Hamiltonian& system, const Hamiltonian& ancilla);

/// U(t) rho U(t)^dagger, the closed-system von Neumann-Liouville flow.
DensityOperator evolve_closed(const DensityOperator& rho, const Hamiltonian& h, double t);

/// Components evolve independently; weights are untouched.
ProperMixture evolve_proper_mixture(const ProperMixture& m, const Hamiltonian& h, double t);

/// Tr_anc[U(t) (rho_sys (x) ancilla) U(t)^dagger].
DensityOperator evolve_open_by_dilation(const DensityOperator& rho_sys,
                                        const DensityOperator& ancilla,
                                        const Hamiltonian& joint_h, double t);

/// max-entry residual of i hbar d rho/dt - [H, rho] at time t, with the
/// derivative taken by a central difference of width 2 * step.
double liouville_residual(const DensityOperator& rho0, const Hamiltonian& h, double t,
                          double step = 1e-5);

}  // namespace esr

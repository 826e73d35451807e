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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "esr/hilbert.hpp"

namespace esr {

/// A quantum observable: Hermitian operator plus its merged spectrum.
class Observable {
 public:
  Observable(std::string name, const CMatrix& op);

  const std::string& name() const { return name_; }
  const CMatrix& matrix() const { return matrix_; }
  const Spectrum& spectrum() const { return spectrum_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  std::size_t eigenvalue_count() const { return spectrum_.size(); }
  double eigenvalue(std::size_t n) const { return spectrum_.at(n).eigenvalue; }
  const Projector& projector(std::size_t n) const {
    return spectrum_.at(n).projector;
  }

  /// Index into spectrum() of the eigenvalue within kDegeneracy of `value`.
  std::optional<std::size_t> find_eigenvalue(double value) const;

 private:
  std::string name_;
  CMatrix matrix_;
  Spectrum spectrum_;
};

/**
 * Observable extended with the no-registration outcome a0.
 *
 * Outcomes are indexed 0..W: index 0 is a0, index n >= 1 is the n-th
 * eigenvalue of the base observable in ascending order.
 */
class GeneralizedObservable {
 public:
  const Observable& base() const { return base_; }
  const std::string& name() const { return base_.name(); }
  double a0() const { return a0_; }
  Eigen::Index dim() const { return base_.dim(); }

  std::size_t outcome_count() const { return base_.eigenvalue_count() + 1; }
  double outcome(std::size_t k) const {
    return k == 0 ? a0_ : base_.eigenvalue(k - 1);
  }
  std::vector<double> outcomes() const;
  std::optional<std::size_t> outcome_index(double value) const;

  /// Spectral projector of outcome k >= 1.
  const Projector& projector(std::size_t k) const {
    return base_.projector(k - 1);
  }

  friend bool operator==(const GeneralizedObservable& lhs,
                         const GeneralizedObservable& rhs);

 private:
  friend GeneralizedObservable make_generalized(Observable base, double a0);
  GeneralizedObservable(Observable base, double a0)
      : base_(std::move(base)), a0_(a0) {}

  Observable base_;
  double a0_;
};

/// Throws OutcomeCollision when a0 is (within kDegeneracy) an eigenvalue.
GeneralizedObservable make_generalized(Observable base, double a0);
/// Uses the default convention a0 = min(eigenvalues) - 1.
GeneralizedObservable make_generalized(Observable base);

/// F = (A0, Sigma) with Sigma a subset of the outcomes of A0.
class PhysicalProperty {
 public:
  /// Throws UnknownOutcome for values that are not outcomes of `observable`.
  PhysicalProperty(GeneralizedObservable observable,
                   const std::vector<double>& sigma);

  static PhysicalProperty from_mask(GeneralizedObservable observable,
                                    std::vector<bool> mask);
  /// F_k = (A0, {a_k}).
  static PhysicalProperty singleton(GeneralizedObservable observable,
                                    std::size_t k);

  const GeneralizedObservable& observable() const { return observable_; }
  const std::vector<bool>& mask() const { return mask_; }
  bool contains(std::size_t k) const { return mask_.at(k); }
  bool contains_a0() const { return mask_.front(); }
  bool empty() const;
  std::vector<double> sigma() const;

  /// "name:{v1,v2}" for reports.
  std::string describe() const;

  friend bool operator==(const PhysicalProperty& lhs,
                         const PhysicalProperty& rhs) {
    return lhs.mask_ == rhs.mask_ && lhs.observable_ == rhs.observable_;
  }

 private:
  struct MaskTag {};
  PhysicalProperty(GeneralizedObservable observable, std::vector<bool> mask, MaskTag)
      : observable_(std::move(observable)), mask_(std::move(mask)) {}

  GeneralizedObservable observable_;
  std::vector<bool> mask_;
};

/// F^c = (A0, outcomes \ Sigma).
PhysicalProperty complement(const PhysicalProperty& f);

/// A property of standard quantum mechanics: (A, Sigma), Sigma within the
/// spectrum of A.
struct QuantumProperty {
  Observable observable;
  std::vector<double> sigma;
};

/// g: (A0, Sigma) -> (A, Sigma); throws ContainsNoRegistration if a0 in Sigma.
QuantumProperty g_map(const PhysicalProperty& f);

/// P^A(Sigma) = sum of spectral projectors over Sigma.
Projector projector_for(const PhysicalProperty& f);

/// Generalized observables keyed by name; makes g invertible.
class ObservableRegistry {
 public:
  void add(GeneralizedObservable observable);
  bool contains(const std::string& name) const;
  /// Throws UnregisteredProperty for unknown names.
  const GeneralizedObservable& at(const std::string& name) const;
  std::vector<std::string> names() const;

  /// Inverse of g_map for the registered generalized observable.
  PhysicalProperty embed(const QuantumProperty& e) const;

 private:
  std::map<std::string, GeneralizedObservable> entries_;
};

}  // namespace esr

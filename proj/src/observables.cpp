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


#include "esr/observables.hpp"

#include <cmath>
#include <sstream>

namespace esr {

Observable::Observable(std::string name, const CMatrix& op)
    : name_(std::move(name)), spectrum_(spectral_decompose(op)) {
  require_dimension_cap(op.rows(), "observable");
  matrix_ = (op + op.adjoint()) * 0.5;
}

std::optional<std::size_t> Observable::find_eigenvalue(double value) const {
  for (std::size_t n = 0; n < spectrum_.size(); ++n) {
    if (std::abs(spectrum_[n].eigenvalue - value) < tolerance::kDegeneracy) {
      return n;
    }
  }
  return std::nullopt;
}

std::vector<double> GeneralizedObservable::outcomes() const {
  std::vector<double> out;
  out.reserve(outcome_count());
  for (std::size_t k = 0; k < outcome_count(); ++k) {
    out.push_back(outcome(k));
  }
  return out;
}

std::optional<std::size_t> GeneralizedObservable::outcome_index(
    double value) const {
  if (std::abs(value - a0_) < tolerance::kDegeneracy) {
    return 0;
  }
  if (auto n = base_.find_eigenvalue(value)) {
    return *n + 1;
  }
  return std::nullopt;
}

bool operator==(const GeneralizedObservable& lhs,
                const GeneralizedObservable& rhs) {
  return lhs.name() == rhs.name() && lhs.a0_ == rhs.a0_ &&
         lhs.base_.matrix() == rhs.base_.matrix();
}

GeneralizedObservable make_generalized(Observable base, double a0) {
  if (!std::isfinite(a0)) {
    fail(ErrorKind::InvalidArgument, "a0 must be finite");
  }
  if (base.find_eigenvalue(a0)) {
    std::ostringstream msg;
    msg << "a0 = " << a0 << " is an eigenvalue of " << base.name();
    fail(ErrorKind::OutcomeCollision, msg.str());
  }
  return GeneralizedObservable(std::move(base), a0);
}

GeneralizedObservable make_generalized(Observable base) {
  const double a0 = base.eigenvalue(0) - 1.0;
  return make_generalized(std::move(base), a0);
}

PhysicalProperty::PhysicalProperty(GeneralizedObservable observable,
                                   const std::vector<double>& sigma)
    : observable_(std::move(observable)),
      mask_(observable_.outcome_count(), false) {
  for (double value : sigma) {
    const auto k = observable_.outcome_index(value);
    if (!k) {
      std::ostringstream msg;
      msg << value << " is not an outcome of " << observable_.name();
      fail(ErrorKind::UnknownOutcome, msg.str());
    }
    mask_[*k] = true;
  }
}

PhysicalProperty PhysicalProperty::from_mask(GeneralizedObservable observable,
                                             std::vector<bool> mask) {
  if (mask.size() != observable.outcome_count()) {
    fail(ErrorKind::DimensionMismatch,
         "outcome mask has " + std::to_string(mask.size()) + " entries, " +
             observable.name() + " has " +
             std::to_string(observable.outcome_count()) + " outcomes");
  }
  return PhysicalProperty(std::move(observable), std::move(mask), MaskTag{});
}

PhysicalProperty PhysicalProperty::singleton(GeneralizedObservable observable,
                                             std::size_t k) {
  std::vector<bool> mask(observable.outcome_count(), false);
  mask.at(k) = true;
  return PhysicalProperty(std::move(observable), std::move(mask), MaskTag{});
}

bool PhysicalProperty::empty() const {
  for (bool b : mask_) {
    if (b) return false;
  }
  return true;
}

std::vector<double> PhysicalProperty::sigma() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < mask_.size(); ++k) {
    if (mask_[k]) out.push_back(observable_.outcome(k));
  }
  return out;
}

std::string PhysicalProperty::describe() const {
  std::ostringstream out;
  out << observable_.name() << ":{";
  bool first = true;
  for (double v : sigma()) {
    out << (first ? "" : ",") << v;
    first = false;
  }
  out << "}";
  return out.str();
}

PhysicalProperty complement(const PhysicalProperty& f) {
  std::vector<bool> mask = f.mask();
  mask.flip();
  return PhysicalProperty::from_mask(f.observable(), std::move(mask));
}

QuantumProperty g_map(const PhysicalProperty& f) {
  if (f.contains_a0()) {
    fail(ErrorKind::ContainsNoRegistration,
         f.describe() + " contains the no-registration outcome");
  }
  return {f.observable().base(), f.sigma()};
}

Projector projector_for(const PhysicalProperty& f) {
  if (f.contains_a0()) {
    fail(ErrorKind::ContainsNoRegistration,
         f.describe() + " contains the no-registration outcome");
  }
  const auto& obs = f.observable();
  CMatrix sum = CMatrix::Zero(obs.dim(), obs.dim());
  for (std::size_t k = 1; k < obs.outcome_count(); ++k) {
    if (f.contains(k)) sum += obs.projector(k).matrix();
  }
  return Projector(sum);
}

void ObservableRegistry::add(GeneralizedObservable observable) {
  const std::string name = observable.name();
  if (!entries_.emplace(name, std::move(observable)).second) {
    fail(ErrorKind::InvalidArgument, "observable '" + name + "' already registered");
  }
}

bool ObservableRegistry::contains(const std::string& name) const {
  return entries_.count(name) != 0;
}

const GeneralizedObservable& ObservableRegistry::at(
    const std::string& name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) {
    fail(ErrorKind::UnregisteredProperty, "no observable named '" + name + "'");
  }
  return it->second;
}

std::vector<std::string> ObservableRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, obs] : entries_) out.push_back(name);
  return out;
}

PhysicalProperty ObservableRegistry::embed(const QuantumProperty& e) const {
  const auto& obs = at(e.observable.name());
  if (obs.base().matrix() != e.observable.matrix()) {
    fail(ErrorKind::UnregisteredProperty,
         "observable '" + e.observable.name() + "' differs from the registered one");
  }
  PhysicalProperty f(obs, e.sigma);
  if (f.contains_a0()) {
    fail(ErrorKind::UnknownOutcome, "quantum property sigma contains a0");
  }
  return f;
}

}  // namespace esr

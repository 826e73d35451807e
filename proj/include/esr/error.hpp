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

#include <stdexcept>
#include <string>
#include <string_view>

namespace esr {

enum class ErrorKind {
  NotHermitian,
  DimensionMismatch,
  InvalidState,
  OutcomeCollision,
  UnknownOutcome,
  ContainsNoRegistration,
  DetectionOutOfRange,
  MissingDetectionEntry,
  UndefinedRatio,
  ComponentUndetectable,
  ZeroProbabilityBranch,
  AllBranchesZero,
  PointerCountMismatch,
  NormalizationViolation,
  UnregisteredProperty,
  EtaOutOfRange,
  InvalidArgument,
  ConfigInvalid,
  IoFailure,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::OutcomeCollision: return "OutcomeCollision";
    case ErrorKind::UnknownOutcome: return "UnknownOutcome";
    case ErrorKind::ContainsNoRegistration: return "ContainsNoRegistration";
    case ErrorKind::DetectionOutOfRange: return "DetectionOutOfRange";
    case ErrorKind::MissingDetectionEntry: return "MissingDetectionEntry";
    case ErrorKind::UndefinedRatio: return "UndefinedRatio";
    case ErrorKind::ComponentUndetectable: return "ComponentUndetectable";
    case ErrorKind::ZeroProbabilityBranch: return "ZeroProbabilityBranch";
    case ErrorKind::AllBranchesZero: return "AllBranchesZero";
    case ErrorKind::PointerCountMismatch: return "PointerCountMismatch";
    case ErrorKind::NormalizationViolation: return "NormalizationViolation";
    case ErrorKind::UnregisteredProperty: return "UnregisteredProperty";
    case ErrorKind::EtaOutOfRange: return "EtaOutOfRange";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

/// Single exception type for the engine; `kind()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace esr

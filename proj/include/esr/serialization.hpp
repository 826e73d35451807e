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

#include <string>

#include <json.hpp>

#include "esr/hilbert.hpp"

namespace esr {

// Matrices are row-major arrays of rows; each entry is an [re, im] pair.
// Vectors are flat arrays of [re, im] pairs. On input a bare number is
// accepted as a real entry.

nlohmann::json to_json(const CMatrix& m);
nlohmann::json to_json(const CVector& v);

/// Throws Error(ConfigInvalid) naming `path` on malformed input.
CMatrix matrix_from_json(const nlohmann::json& j, const std::string& path = "");
CVector vector_from_json(const nlohmann::json& j, const std::string& path = "");

}  // namespace esr

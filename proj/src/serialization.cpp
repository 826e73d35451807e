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

#include "esr/serialization.hpp"

namespace esr {

namespace {

nlohmann::json entry_to_json(const Complex& z) {
  return nlohmann::json::array({z.real(), z.imag()});
}

Complex entry_from_json(const nlohmann::json& j, const std::string& path) {
  if (j.is_number()) {
    return {j.get<double>(), 0.0};
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  fail(ErrorKind::ConfigInvalid, path + ": expected [re, im] pair or number");
}

}  // namespace

nlohmann::json to_json(const CMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(entry_to_json(m(i, j)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(const CVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(entry_to_json(v(i)));
  }
  return out;
}

CMatrix matrix_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) {
    fail(ErrorKind::ConfigInvalid, path + ": expected a nonempty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) {
    fail(ErrorKind::ConfigInvalid, path + "/0: expected a nonempty row");
  }
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    const std::string row_path = path + "/" + std::to_string(i);
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      fail(ErrorKind::ConfigInvalid,
           row_path + ": expected a row of " + std::to_string(cols) + " entries");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = entry_from_json(row[static_cast<std::size_t>(c)],
                                row_path + "/" + std::to_string(c));
    }
  }
  return m;
}

CVector vector_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) {
    fail(ErrorKind::ConfigInvalid, path + ": expected a nonempty array");
  }
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) =
        entry_from_json(j[i], path + "/" + std::to_string(i));
  }
  return v;
}

}  // namespace esr

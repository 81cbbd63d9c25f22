// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// JSON scenario documents. The accepted layout is described by
// schemas/scenario.schema.json; parse_document enforces the same rules.

#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "eddylab/harness.hpp"
#include "eddylab/scenarios.hpp"

namespace eddylab {

/// Malformed JSON. Carries the 1-based line and column of the failure.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(what), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed JSON that does not follow the schema. The message starts
/// with the JSON pointer of the offending value.
class DocumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class GeometryKind { laminated_core, box };

struct ScenarioDocument {
  /// laminated_core: the full lamination layout.
  /// box: air box with an optional single conductor block (the `core`
  /// range, no laminations) and an optional coil around it.
  GeometryKind geometry = GeometryKind::laminated_core;
  LaminatedCoreScenario layout;
  bool has_conductor = true;
  bool has_coil = true;
  std::string study_kind = "bound";
  StudyConfig study;
};

ScenarioDocument parse_document(const nlohmann::json& doc);
/// Reads and parses a document; ParseError for malformed JSON.
ScenarioDocument load_document(const std::string& path);
nlohmann::json parse_json_text(const std::string& text);

ScenarioInstance instantiate(const ScenarioDocument& doc);

/// Multiplies all cell quantities by `factor`.
ScenarioDocument refine(const ScenarioDocument& doc, int factor);

}  // namespace eddylab

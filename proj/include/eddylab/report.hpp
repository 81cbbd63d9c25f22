// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace eddylab {

/// Ordinary least-squares line y = intercept + slope * x with a two-sided
/// Student-t confidence interval on the slope.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t points = 0;
};

/// Needs at least two points; the interval is NaN with exactly two.
LinearFit fit_line(std::span<const double> x, std::span<const double> y, double confidence = 0.95);

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  double upper = 0.0;    // only for "in"
  std::string relation;  // "<=", ">=", "in", "flag"
  bool pass = false;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void write_csv(std::ostream& os) const;
};

/// Column layout of the per-s tables.
Table make_per_s_table();

struct StudyReport {
  std::string study_kind;
  std::string scenario_digest;
  nlohmann::json parameters = nlohmann::json::object();
  std::map<std::string, double> measured;
  std::map<std::string, Table> tables;
  std::optional<LinearFit> fitted_rate;
  std::vector<Check> checks;
  std::vector<std::string> notes;
  double wall_time = 0.0;

  bool pass() const;

  Check& check_le(std::string name, double value, double threshold);
  Check& check_ge(std::string name, double value, double threshold);
  Check& check_in(std::string name, double value, double low, double high);
  Check& check_flag(std::string name, bool ok);

  /// Timing fields are only emitted when requested so that reruns with the
  /// same inputs produce identical documents.
  nlohmann::json to_json(bool include_timing = true) const;
};

}  // namespace eddylab

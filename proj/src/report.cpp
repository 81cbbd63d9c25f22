// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "eddylab/report.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace eddylab {

LinearFit fit_line(std::span<const double> x, std::span<const double> y, double confidence) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("fit_line: need at least two points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_line: x values are all equal");

  LinearFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n == 2) {
    fit.slope_stderr = std::numeric_limits<double>::quiet_NaN();
    fit.ci_low = fit.ci_high = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    sse += r * r;
  }
  const double dof = static_cast<double>(n - 2);
  fit.slope_stderr = std::sqrt(sse / dof / sxx);
  const boost::math::students_t dist(dof);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - confidence)));
  fit.ci_low = fit.slope - t * fit.slope_stderr;
  fit.ci_high = fit.slope + t * fit.slope_stderr;
  return fit;
}

void Table::write_csv(std::ostream& os) const {
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  const auto old_precision = os.precision(17);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  os.precision(old_precision);
}

Table make_per_s_table() { return Table{{"s", "error", "bound", "ratio", "residual"}, {}}; }

bool StudyReport::pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

Check& StudyReport::check_le(std::string name, double value, double threshold) {
  return checks.emplace_back(Check{std::move(name), value, threshold, 0.0, "<=", value <= threshold});
}

Check& StudyReport::check_ge(std::string name, double value, double threshold) {
  return checks.emplace_back(Check{std::move(name), value, threshold, 0.0, ">=", value >= threshold});
}

Check& StudyReport::check_in(std::string name, double value, double low, double high) {
  return checks.emplace_back(
      Check{std::move(name), value, low, high, "in", value >= low && value <= high});
}

Check& StudyReport::check_flag(std::string name, bool ok) {
  return checks.emplace_back(Check{std::move(name), ok ? 1.0 : 0.0, 1.0, 0.0, "flag", ok});
}

namespace {

// JSON has no NaN/inf; emit null instead.
nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

nlohmann::json StudyReport::to_json(bool include_timing) const {
  nlohmann::json j;
  j["study_kind"] = study_kind;
  j["scenario_digest"] = scenario_digest;
  j["parameters"] = parameters;
  j["pass"] = pass();
  auto& m = j["measured"] = nlohmann::json::object();
  for (const auto& [k, v] : measured) m[k] = number(v);
  auto& cs = j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json entry{{"name", c.name},
                         {"value", number(c.value)},
                         {"threshold", number(c.threshold)},
                         {"relation", c.relation},
                         {"pass", c.pass}};
    if (c.relation == "in") entry["upper"] = number(c.upper);
    cs.push_back(std::move(entry));
  }
  if (fitted_rate) {
    j["fitted_rate"] = {{"slope", number(fitted_rate->slope)},
                        {"intercept", number(fitted_rate->intercept)},
                        {"stderr", number(fitted_rate->slope_stderr)},
                        {"ci95", {number(fitted_rate->ci_low), number(fitted_rate->ci_high)}},
                        {"points", fitted_rate->points}};
  } else {
    j["fitted_rate"] = nullptr;
  }
  auto& ts = j["tables"] = nlohmann::json::object();
  for (const auto& [name, table] : tables) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
      nlohmann::json r = nlohmann::json::array();
      for (double v : row) r.push_back(number(v));
      rows.push_back(std::move(r));
    }
    ts[name] = {{"columns", table.columns}, {"rows", std::move(rows)}};
  }
  j["notes"] = notes;
  if (include_timing) j["wall_time"] = wall_time;
  return j;
}

}  // namespace eddylab

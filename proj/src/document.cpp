// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "eddylab/document.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "eddylab/errors.hpp"

namespace eddylab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw DocumentError((path.empty() ? "/" : path) + ": " + what);
}

// Cursor over one JSON object that rejects keys nobody asked about.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }
  /// Call once all keys were read.
  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail(path_ + "/" + key, "unknown key");
    }
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }
  const json& get(const std::string& key) {
    if (!has(key)) fail(at(key), "required key missing");
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = {}) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(at(key), "required key missing");
    }
    const auto& v = j_.at(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    return v.get<double>();
  }
  double positive(const std::string& key, std::optional<double> fallback = {}) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) fail(at(key), "must be positive");
    return v;
  }
  int integer(const std::string& key, std::optional<int> fallback = {}) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(at(key), "required key missing");
    }
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    return v.get<int>();
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) fail(at(key), "expected a boolean");
    return v.get<bool>();
  }
  std::string string(const std::string& key, std::optional<std::string> fallback = {}) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(at(key), "required key missing");
    }
    const auto& v = j_.at(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_array()) fail(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(at(key) + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  Index3 triple(const std::string& key, std::optional<Index3> fallback = {}) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(at(key), "required key missing");
    }
    const auto& v = j_.at(key);
    if (!v.is_array() || v.size() != 3) fail(at(key), "expected three integers");
    Index3 out{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (!v[i].is_number_integer()) fail(at(key) + "/" + std::to_string(i), "expected an integer");
      out[i] = v[i].get<int>();
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

BoundaryLabel parse_label(const json& v, const std::string& path) {
  if (v == "electric") return BoundaryLabel::electric;
  if (v == "magnetic") return BoundaryLabel::magnetic;
  fail(path, "expected \"electric\" or \"magnetic\"");
}

int axis_in(Section& s, const std::string& key, int fallback) {
  const int a = s.integer(key, fallback);
  if (a < 0 || a > 2) fail(s.at(key), "axis must be 0, 1 or 2");
  return a;
}

TimeProfile parse_profile(const json& j, const std::string& path) {
  Section s(j, path);
  TimeProfile p;
  const auto kind = s.string("kind", "smooth_ramp");
  try {
    p.kind = profile_kind_from_string(kind);
  } catch (const ValidationError&) {
    fail(s.at("kind"), "unknown profile kind '" + kind + "'");
  }
  p.amplitude = s.number("amplitude", 1.0);
  p.onset = s.number("onset", 0.0);
  p.width = s.number("width", 1.0);
  if (p.width < 0.0) fail(s.at("width"), "must be non-negative");
  p.frequency = s.number("frequency", 1.0);
  s.done();
  return p;
}

BoundarySplit parse_boundary(const json& j, const std::string& path) {
  Section s(j, path);
  BoundarySplit split;
  if (s.has("sides")) {
    const auto& sides = s.get("sides");
    if (sides.is_string()) {
      split = BoundarySplit::all(parse_label(sides, s.at("sides")));
    } else if (sides.is_array() && sides.size() == 6) {
      for (std::size_t i = 0; i < 6; ++i) {
        split.box_sides[i] = parse_label(sides[i], s.at("sides") + "/" + std::to_string(i));
      }
    } else {
      fail(s.at("sides"), "expected a label or six labels (-x, +x, -y, +y, -z, +z)");
    }
  }
  if (s.has("interior")) split.interior = parse_label(s.get("interior"), s.at("interior"));
  if (s.has("overrides")) {
    const auto& list = s.get("overrides");
    if (!list.is_array()) fail(s.at("overrides"), "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section o(list[i], s.at("overrides") + "/" + std::to_string(i));
      Location face{axis_in(o, "axis", 0), o.triple("node")};
      split.overrides.emplace_back(face, parse_label(o.get("label"), o.at("label")));
      o.done();
    }
  }
  s.done();
  return split;
}

Tolerances parse_tolerances(const json& j, const std::string& path) {
  Section s(j, path);
  Tolerances t;
  t.structure = s.positive("structure", t.structure);
  t.bound_slack = s.number("bound_slack", t.bound_slack);
  t.causality = s.positive("causality", t.causality);
  t.identity_factor = s.positive("identity_factor", t.identity_factor);
  t.scaling_low = s.number("scaling_low", t.scaling_low);
  t.scaling_high = s.number("scaling_high", t.scaling_high);
  t.rate_low = s.number("rate_low", t.rate_low);
  t.rate_high = s.number("rate_high", t.rate_high);
  t.noise_floor_factor = s.positive("noise_floor_factor", t.noise_floor_factor);
  t.smoothed_margin = s.number("smoothed_margin", t.smoothed_margin);
  t.accretivity_upper = s.number("accretivity_upper", t.accretivity_upper);
  if (t.bound_slack < 0.0) fail(s.at("bound_slack"), "must be non-negative");
  if (t.smoothed_margin < 0.0) fail(s.at("smoothed_margin"), "must be non-negative");
  if (t.scaling_low > t.scaling_high) fail(s.at("scaling_low"), "exceeds scaling_high");
  if (t.rate_low > t.rate_high) fail(s.at("rate_low"), "exceeds rate_high");
  s.done();
  return t;
}

LinearSolverKind parse_solver_kind(const std::string& v, const std::string& path) {
  if (v == "automatic") return LinearSolverKind::automatic;
  if (v == "schur_cg") return LinearSolverKind::schur_cg;
  if (v == "gmres") return LinearSolverKind::gmres;
  if (v == "direct") return LinearSolverKind::direct;
  fail(path, "unknown solver '" + v + "'");
}

void parse_study(const json& j, const std::string& path, ScenarioDocument& doc) {
  Section s(j, path);
  auto& c = doc.study;
  doc.study_kind = s.string("kind", "bound");
  const auto& names = study_names();
  if (std::find(names.begin(), names.end(), doc.study_kind) == names.end()) {
    fail(s.at("kind"), "unknown study '" + doc.study_kind + "'");
  }
  c.s_values = s.numbers("s_values", c.s_values);
  if (c.s_values.empty()) fail(s.at("s_values"), "must not be empty");
  for (std::size_t i = 0; i < c.s_values.size(); ++i) {
    if (c.s_values[i] < 0.0 || c.s_values[i] > 1.0) {
      fail(s.at("s_values") + "/" + std::to_string(i), "must lie in [0, 1]");
    }
  }
  const int seed = s.integer("seed", 42);
  if (seed < 0) fail(s.at("seed"), "must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  const int samples = s.integer("n_samples", 10);
  if (samples < 1) fail(s.at("n_samples"), "must be positive");
  c.n_samples = static_cast<std::size_t>(samples);
  c.solver.lin_tol = s.positive("lin_tol", c.solver.lin_tol);
  c.cutoffs = s.numbers("cutoffs", {});
  c.identity_s = s.number("identity_s", c.identity_s);
  c.lin_tol_sweep = s.numbers("lin_tol_sweep", {});
  for (double v : c.lin_tol_sweep) {
    if (!(v > 0.0)) fail(s.at("lin_tol_sweep"), "values must be positive");
  }
  c.assert_rate = s.boolean("assert_rate", true);
  const int acc = s.integer("accretivity_samples", 1000);
  if (acc < 1) fail(s.at("accretivity_samples"), "must be positive");
  c.accretivity_samples = static_cast<std::size_t>(acc);
  c.accretivity_taus = s.numbers("accretivity_taus", c.accretivity_taus);
  if (s.has("solver")) {
    Section o(s.get("solver"), s.at("solver"));
    c.solver.kind = parse_solver_kind(o.string("kind", "automatic"), o.at("kind"));
    c.solver.krylov_fraction = o.positive("krylov_fraction", c.solver.krylov_fraction);
    c.solver.max_iterations = o.integer("max_iterations", c.solver.max_iterations);
    c.solver.max_restarts = o.integer("max_restarts", c.solver.max_restarts);
    c.solver.restart = o.integer("restart", c.solver.restart);
    if (c.solver.max_iterations < 1 || c.solver.max_restarts < 0 || c.solver.restart < 1) {
      fail(o.at("max_iterations"), "iteration limits must be positive");
    }
    if (c.solver.krylov_fraction > 1.0) fail(o.at("krylov_fraction"), "must not exceed 1");
    o.done();
  }
  if (s.has("tolerances")) c.tolerances = parse_tolerances(s.get("tolerances"), s.at("tolerances"));
  s.done();
}

// `byte` is the 1-based offset of the offending character.
std::size_t line_of(const std::string& text, std::size_t byte, std::size_t& column) {
  const std::size_t index = std::min(byte > 0 ? byte - 1 : 0, text.size());
  std::size_t line = 1;
  std::size_t line_start = 0;
  for (std::size_t i = 0; i < index; ++i) {
    if (text[i] == '\n') {
      ++line;
      line_start = i + 1;
    }
  }
  column = index - line_start + 1;
  return line;
}

}  // namespace

nlohmann::json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t column = 0;
    const std::size_t line = line_of(text, e.byte, column);
    throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + e.what(),
                     line, column);
  }
}

ScenarioDocument parse_document(const nlohmann::json& j) {
  ScenarioDocument doc;
  Section root(j, "");
  auto& L = doc.layout;

  {
    Section d(root.get("discretization"), "/discretization");
    L.box_cells = d.triple("cells");
    for (int a = 0; a < 3; ++a) {
      if (L.box_cells[a] < 1) fail(d.at("cells"), "cell counts must be positive");
    }
    L.spacing = d.positive("spacing", 1.0 / L.box_cells[0]);
    doc.study.tau = d.positive("tau");
    doc.study.T = d.positive("T");
    const double steps = doc.study.T / doc.study.tau;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps) {
      fail(d.at("T"), "T / tau must be an integer");
    }
    d.done();
  }
  {
    Section w(root.get("weight"), "/weight");
    doc.study.rho = w.positive("rho");
    w.done();
  }
  {
    Section m(root.get("materials"), "/materials");
    auto& c = L.coefficients;
    c.eps_air = m.number("eps_air", c.eps_air);
    c.eps_lam = m.number("eps_lam", c.eps_lam);
    c.eps_cor = m.number("eps_cor", c.eps_cor);
    c.sigma_cor = m.number("sigma_cor", c.sigma_cor);
    c.mu = m.number("mu", c.mu);
    const std::pair<const char*, double> values[] = {
        {"eps_air", c.eps_air}, {"eps_lam", c.eps_lam}, {"eps_cor", c.eps_cor}, {"sigma_cor", c.sigma_cor}};
    for (const auto& [key, v] : values) {
      if (v < 0.0) fail(m.at(key), "must be non-negative");
    }
    if (!(c.mu > 0.0)) fail(m.at("mu"), "must be positive");
    m.done();
  }
  {
    Section g(root.get("geometry"), "/geometry");
    const auto kind = g.string("scenario", "laminated_core");
    if (kind == "laminated_core") {
      doc.geometry = GeometryKind::laminated_core;
    } else if (kind == "box") {
      doc.geometry = GeometryKind::box;
    } else {
      fail(g.at("scenario"), "expected \"laminated_core\" or \"box\"");
    }
    doc.has_conductor = g.has("core");
    if (doc.has_conductor) {
      Section c(g.get("core"), g.at("core"));
      L.core = CellRange{c.triple("lo"), c.triple("hi")};
      c.done();
    } else if (doc.geometry == GeometryKind::laminated_core) {
      fail(g.at("core"), "required key missing");
    }
    if (g.has("laminations")) {
      if (doc.geometry == GeometryKind::box) fail(g.at("laminations"), "not allowed for a box");
      Section l(g.get("laminations"), g.at("laminations"));
      L.lamination_axis = axis_in(l, "axis", 0);
      L.lamination_period = l.integer("period", 1);
      if (L.lamination_period < 1) fail(l.at("period"), "must be >= 1");
      l.done();
    }
    if (g.has("gap")) {
      if (doc.geometry == GeometryKind::box) fail(g.at("gap"), "not allowed for a box");
      Section a(g.get("gap"), g.at("gap"));
      L.air_gap = AirGap{axis_in(a, "axis", 2), a.integer("start"), a.integer("width", 1)};
      a.done();
    }
    doc.has_coil = g.has("coil");
    if (doc.has_coil) {
      if (!doc.has_conductor) fail(g.at("coil"), "a coil needs a core to wind around");
      Section c(g.get("coil"), g.at("coil"));
      L.coil.axis = axis_in(c, "axis", 2);
      L.coil.plane = c.integer("plane");
      L.coil.clearance = c.integer("clearance", 1);
      L.coil.turns = c.integer("turns", 1);
      if (L.coil.turns < 1) fail(c.at("turns"), "must be >= 1");
      if (L.coil.clearance < 0) fail(c.at("clearance"), "must be >= 0");
      if (c.has("profile")) L.coil.profile = parse_profile(c.get("profile"), c.at("profile"));
      c.done();
    } else if (doc.geometry == GeometryKind::laminated_core) {
      fail(g.at("coil"), "required key missing");
    }
    if (g.has("boundary")) L.boundary = parse_boundary(g.get("boundary"), g.at("boundary"));
    g.done();
  }
  if (root.has("study")) {
    parse_study(root.get("study"), "/study", doc);
  }
  root.has("$schema");
  root.done();
  return doc;
}

ScenarioDocument load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_document(parse_json_text(buffer.str()));
}

ScenarioInstance instantiate(const ScenarioDocument& doc) {
  const auto& L = doc.layout;
  if (doc.geometry == GeometryKind::laminated_core) return build_laminated_core(L);

  const auto& n = L.box_cells;
  std::vector<Region> labels(static_cast<std::size_t>(n[0]) * n[1] * n[2], Region::air);
  if (doc.has_conductor) {
    for (int d = 0; d < 3; ++d) {
      if (L.core.lo[d] < 0 || L.core.hi[d] > n[d] || L.core.lo[d] >= L.core.hi[d]) {
        throw ValidationError("conductor block must be a non-empty range inside the box");
      }
    }
    for (int k = 0; k < n[2]; ++k) {
      for (int j = 0; j < n[1]; ++j) {
        for (int i = 0; i < n[0]; ++i) {
          if (L.core.contains({i, j, k})) {
            labels[(static_cast<std::size_t>(k) * n[1] + j) * n[0] + i] = Region::core_metal;
          }
        }
      }
    }
  }
  Grid grid = build_grid(n, L.spacing, L.boundary);
  MaterialMap materials = build_material_map(grid, std::move(labels), L.coefficients);
  SourceTerm source;
  source.profile = L.coil.profile;
  if (doc.has_coil) {
    for (const auto& [dof, sign] : coil_edges(grid, L.core, L.coil)) source.pattern.emplace_back(dof, -sign);
  }
  return ScenarioInstance{std::move(grid), std::move(materials), std::move(source), "box"};
}

ScenarioDocument refine(const ScenarioDocument& doc, int factor) {
  ScenarioDocument out = doc;
  out.layout = refine(doc.layout, factor);
  return out;
}

}  // namespace eddylab

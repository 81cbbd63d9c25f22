// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "eddylab/scenarios.hpp"

#include <cmath>
#include <numbers>

#include "eddylab/errors.hpp"
#include "eddylab/evolution.hpp"

namespace eddylab {

namespace {

double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * (3.0 - 2.0 * x);
}

void check_axis(int axis, const char* what) {
  if (axis < 0 || axis > 2) throw ValidationError(std::string(what) + ": axis must be 0, 1 or 2");
}

}  // namespace

const char* to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::smooth_ramp:
      return "smooth_ramp";
    case ProfileKind::sine_burst:
      return "sine_burst";
    case ProfileKind::step:
      return "step";
  }
  return "unknown";
}

ProfileKind profile_kind_from_string(const std::string& name) {
  if (name == "smooth_ramp") return ProfileKind::smooth_ramp;
  if (name == "sine_burst") return ProfileKind::sine_burst;
  if (name == "step") return ProfileKind::step;
  throw ValidationError("unknown time profile kind '" + name + "'");
}

double TimeProfile::operator()(double t) const {
  if (t <= onset) return 0.0;
  const double x = width > 0.0 ? (t - onset) / width : 1.0;
  switch (kind) {
    case ProfileKind::smooth_ramp:
      return amplitude * smoothstep(x);
    case ProfileKind::sine_burst:
      return amplitude * smoothstep(x) * std::sin(2.0 * std::numbers::pi * frequency * (t - onset));
    case ProfileKind::step:
      return amplitude;
  }
  return 0.0;
}

Eigen::VectorXd SourceTerm::at(double t, std::size_t size) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
  const double value = profile(t);
  if (value == 0.0) return out;
  for (const auto& [dof, weight] : pattern) out[static_cast<Eigen::Index>(dof)] += weight * value;
  return out;
}

Trajectory sample_forcing(const ScenarioInstance& scenario, double tau, double T, double rho) {
  if (!(tau > 0.0) || !(T > 0.0)) throw ValidationError("sample_forcing: tau and T must be positive");
  const double steps = T / tau;
  const auto n = static_cast<std::size_t>(std::llround(steps));
  if (n == 0 || std::abs(steps - static_cast<double>(n)) > 1e-9 * steps) {
    throw ValidationError("sample_forcing: T / tau must be a positive integer");
  }
  const std::size_t size = scenario.grid.size();
  return sample_trajectory(scenario.grid, tau, n, rho,
                           [&](double t) { return scenario.source.at(t, size); });
}

std::vector<std::pair<std::size_t, double>> coil_edges(const Grid& grid, const CellRange& core,
                                                       const CoilLoop& coil) {
  check_axis(coil.axis, "coil");
  if (coil.turns < 1) throw ValidationError("coil: turns must be >= 1");
  if (coil.clearance < 0) throw ValidationError("coil: clearance must be >= 0");
  const int a = coil.axis;
  const int b = (a + 1) % 3;
  const int c = (a + 2) % 3;
  const int b_lo = core.lo[b] - coil.clearance;
  const int b_hi = core.hi[b] + coil.clearance;
  const int c_lo = core.lo[c] - coil.clearance;
  const int c_hi = core.hi[c] + coil.clearance;

  std::vector<std::pair<std::size_t, double>> out;
  auto add = [&](int axis, Index3 node, double sign) {
    const auto dof = grid.e_space().find(Location{axis, node});
    if (!dof) {
      throw ValidationError("coil: loop edge leaves the set of free E edges (too close to an "
                            "electric boundary or outside the box)");
    }
    out.emplace_back(*dof, sign);
  };
  for (int turn = 0; turn < coil.turns; ++turn) {
    const int plane = coil.plane + turn;
    if (plane < core.lo[a] || plane > core.hi[a]) {
      throw ValidationError("coil: loop plane does not cut the core limb");
    }
    Index3 node{};
    node[a] = plane;
    // +b along c_lo, +c along b_hi, -b along c_hi, -c along b_lo.
    for (int x = b_lo; x < b_hi; ++x) {
      node[b] = x;
      node[c] = c_lo;
      add(b, node, 1.0);
      node[c] = c_hi;
      add(b, node, -1.0);
    }
    for (int y = c_lo; y < c_hi; ++y) {
      node[c] = y;
      node[b] = b_hi;
      add(c, node, 1.0);
      node[b] = b_lo;
      add(c, node, -1.0);
    }
  }
  return out;
}

std::vector<Region> laminated_core_labels(const LaminatedCoreScenario& sc) {
  check_axis(sc.lamination_axis, "laminations");
  if (sc.lamination_period < 1) throw ValidationError("laminations: period must be >= 1");
  for (int d = 0; d < 3; ++d) {
    if (sc.core.lo[d] < 1 || sc.core.hi[d] > sc.box_cells[d] - 1 || sc.core.lo[d] >= sc.core.hi[d]) {
      throw ValidationError("core must lie strictly inside the outer box");
    }
  }
  if (sc.air_gap) {
    check_axis(sc.air_gap->axis, "air gap");
    const int g = sc.air_gap->axis;
    if (sc.air_gap->width < 1 || sc.air_gap->start < sc.core.lo[g] ||
        sc.air_gap->start + sc.air_gap->width > sc.core.hi[g]) {
      throw ValidationError("air gap must lie within the core extent");
    }
  }
  const auto& n = sc.box_cells;
  std::vector<Region> labels(static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]) *
                                 static_cast<std::size_t>(n[2]),
                             Region::air);
  const int la = sc.lamination_axis;
  for (int k = 0; k < n[2]; ++k) {
    for (int j = 0; j < n[1]; ++j) {
      for (int i = 0; i < n[0]; ++i) {
        const Index3 cell{i, j, k};
        if (!sc.core.contains(cell)) continue;
        if (sc.air_gap) {
          const int x = cell[sc.air_gap->axis];
          if (x >= sc.air_gap->start && x < sc.air_gap->start + sc.air_gap->width) continue;
        }
        const int slab = (cell[la] - sc.core.lo[la]) / sc.lamination_period;
        labels[(static_cast<std::size_t>(k) * static_cast<std::size_t>(n[1]) +
                static_cast<std::size_t>(j)) *
                   static_cast<std::size_t>(n[0]) +
               static_cast<std::size_t>(i)] = slab % 2 == 0 ? Region::core_metal : Region::insulator;
      }
    }
  }
  return labels;
}

ScenarioInstance build_laminated_core(const LaminatedCoreScenario& sc) {
  auto labels = laminated_core_labels(sc);
  Grid grid = build_grid(sc.box_cells, sc.spacing, sc.boundary);
  MaterialMap materials = build_material_map(grid, std::move(labels), sc.coefficients);
  SourceTerm source;
  source.profile = sc.coil.profile;
  // F = (-J, 0): the coil current enters the E equation with a minus sign.
  for (const auto& [dof, sign] : coil_edges(grid, sc.core, sc.coil)) {
    source.pattern.emplace_back(dof, -sign);
  }
  return ScenarioInstance{std::move(grid), std::move(materials), std::move(source),
                          "laminated_core"};
}

std::pair<ScenarioInstance, Trajectory> build_laminated_core(const LaminatedCoreScenario& sc,
                                                             double tau, double T, double rho) {
  auto instance = build_laminated_core(sc);
  auto forcing = sample_forcing(instance, tau, T, rho);
  return {std::move(instance), std::move(forcing)};
}

ScenarioInstance build_unit_test_scenario(const std::string& kind) {
  LaminatedCoreScenario sc;
  sc.box_cells = {6, 6, 6};
  sc.spacing = 1.0 / 6.0;
  sc.core = CellRange{{2, 2, 2}, {4, 4, 4}};
  sc.coil.axis = 2;
  sc.coil.plane = 3;
  sc.coil.clearance = 1;
  sc.coefficients = RegionCoefficients{1.0, 1.0, 10.0, 5.0, 1.0};

  std::vector<Region> labels(216, Region::air);
  if (kind == "homogeneous_box") {
    // all air
  } else if (kind == "all_gamma2_box") {
    sc.boundary = BoundarySplit::all(BoundaryLabel::magnetic);
  } else if (kind == "single_conductor_block") {
    for (int k = 0; k < 6; ++k) {
      for (int j = 0; j < 6; ++j) {
        for (int i = 0; i < 6; ++i) {
          if (sc.core.contains({i, j, k})) labels[static_cast<std::size_t>((k * 6 + j) * 6 + i)] = Region::core_metal;
        }
      }
    }
  } else {
    throw ValidationError("unknown unit test scenario '" + kind + "'");
  }

  Grid grid = build_grid(sc.box_cells, sc.spacing, sc.boundary);
  MaterialMap materials = build_material_map(grid, std::move(labels), sc.coefficients);
  SourceTerm source;
  source.profile = sc.coil.profile;
  for (const auto& [dof, sign] : coil_edges(grid, sc.core, sc.coil)) {
    source.pattern.emplace_back(dof, -sign);
  }
  return ScenarioInstance{std::move(grid), std::move(materials), std::move(source), kind};
}

LaminatedCoreScenario refine(const LaminatedCoreScenario& sc, int factor) {
  if (factor < 1) throw ValidationError("refine: factor must be >= 1");
  LaminatedCoreScenario out = sc;
  for (int d = 0; d < 3; ++d) {
    out.box_cells[d] *= factor;
    out.core.lo[d] *= factor;
    out.core.hi[d] *= factor;
  }
  out.spacing = sc.spacing / factor;
  out.lamination_period *= factor;
  if (out.air_gap) {
    out.air_gap->start *= factor;
    out.air_gap->width *= factor;
  }
  out.coil.plane *= factor;
  out.coil.clearance *= factor;
  // Each overridden face splits into factor^2 sub-faces.
  out.boundary.overrides.clear();
  for (const auto& [face, label] : sc.boundary.overrides) {
    const int b = (face.axis + 1) % 3;
    const int c = (face.axis + 2) % 3;
    for (int u = 0; u < factor; ++u) {
      for (int v = 0; v < factor; ++v) {
        Location sub{face.axis, {face.node[0] * factor, face.node[1] * factor, face.node[2] * factor}};
        sub.node[b] += u;
        sub.node[c] += v;
        out.boundary.overrides.emplace_back(sub, label);
      }
    }
  }
  return out;
}

}  // namespace eddylab

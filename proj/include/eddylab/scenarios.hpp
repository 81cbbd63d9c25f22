// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eddylab/discrete_ops.hpp"
#include "eddylab/materials.hpp"
#include "eddylab/mesh.hpp"

namespace eddylab {

enum class ProfileKind { smooth_ramp, sine_burst, step };

const char* to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& name);

/// Scalar time profile of the coil current. Vanishes for t <= onset.
///   smooth_ramp: amplitude * smoothstep((t - onset) / width), C^1
///   sine_burst:  amplitude * smoothstep((t - onset) / width) * sin(2 pi f (t - onset))
///   step:        amplitude for t > onset
struct TimeProfile {
  ProfileKind kind = ProfileKind::smooth_ramp;
  double amplitude = 1.0;
  double onset = 0.0;
  double width = 1.0;
  double frequency = 1.0;

  double operator()(double t) const;
};

/// Half-open cell box [lo, hi).
struct CellRange {
  Index3 lo{0, 0, 0};
  Index3 hi{0, 0, 0};

  bool contains(const Index3& c) const {
    for (int d = 0; d < 3; ++d) {
      if (c[d] < lo[d] || c[d] >= hi[d]) return false;
    }
    return true;
  }
};

/// Cells of the core with index along `axis` in [start, start + width)
/// are replaced by air.
struct AirGap {
  int axis = 2;
  int start = 0;
  int width = 1;
};

/// Rectangular current loops of edges around the core limb. The limb runs
/// along `axis`; loop k lies in the node plane `plane + k` and keeps
/// `clearance` cells of distance from the core.
struct CoilLoop {
  int axis = 2;
  int plane = 8;
  int clearance = 1;
  int turns = 1;
  TimeProfile profile;
};

struct LaminatedCoreScenario {
  Index3 box_cells{16, 16, 16};
  double spacing = 1.0 / 16.0;
  CellRange core{{5, 5, 5}, {11, 11, 11}};
  /// Slabs alternate metal / insulator along this axis, starting with metal.
  int lamination_axis = 0;
  /// Slab thickness in cells.
  int lamination_period = 1;
  std::optional<AirGap> air_gap;
  CoilLoop coil;
  RegionCoefficients coefficients;
  BoundarySplit boundary;
};

/// Forcing pattern times a time profile: F(t) = profile(t) * pattern.
struct SourceTerm {
  std::vector<std::pair<std::size_t, double>> pattern;  // combined-space dof, weight
  TimeProfile profile;

  Eigen::VectorXd at(double t, std::size_t size) const;
};

/// Everything a study needs: geometry, materials, and the source that is
/// sampled onto whatever time grid the study uses.
struct ScenarioInstance {
  Grid grid;
  MaterialMap materials;
  SourceTerm source;
  std::string name;
};

/// F sampled at t_n = n tau, n = 1..round(T / tau).
Trajectory sample_forcing(const ScenarioInstance& scenario, double tau, double T, double rho);

/// Oriented coil edges (E dof, +-1). Throws ValidationError if the loop
/// leaves the box interior or does not surround the core.
std::vector<std::pair<std::size_t, double>> coil_edges(const Grid& grid, const CellRange& core,
                                                       const CoilLoop& coil);

/// Per-cell labels of the laminated core geometry.
std::vector<Region> laminated_core_labels(const LaminatedCoreScenario& scenario);

/// Builds the full-box grid, labels the core, and attaches the coil source
/// F = (-J, 0).
ScenarioInstance build_laminated_core(const LaminatedCoreScenario& scenario);

/// Returns the scenario together with F sampled on the given time grid.
std::pair<ScenarioInstance, Trajectory> build_laminated_core(const LaminatedCoreScenario& scenario,
                                                             double tau, double T, double rho);

/// homogeneous_box, single_conductor_block, all_gamma2_box (6^3 cells).
ScenarioInstance build_unit_test_scenario(const std::string& kind);

/// Multiplies every cell-count quantity by `factor` and divides the spacing
/// by it, keeping the physical geometry.
LaminatedCoreScenario refine(const LaminatedCoreScenario& scenario, int factor);

}  // namespace eddylab

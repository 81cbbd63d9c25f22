// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eddylab/discrete_ops.hpp"
#include "eddylab/mesh.hpp"

namespace eddylab {

enum class Region : std::uint8_t { air, insulator, core_metal };

const char* to_string(Region region);

/// Piecewise-constant region coefficients (nondimensional).
struct RegionCoefficients {
  double eps_air = 1.0;
  double eps_lam = 2.0;
  double eps_cor = 10.0;
  double sigma_cor = 5.0;
  double mu = 1.0;
};

/// Per-DOF material values of the full (s = 1) model. The dielectricity
/// is stored split into the part contributed by air and insulator cells
/// and the part contributed by metal cells, so that
///   eps_s = eps_fixed + s * eps_metal.
struct MaterialMap {
  Eigen::VectorXd eps_fixed;  // per E dof
  Eigen::VectorXd eps_metal;  // per E dof, metal cells at s = 1
  Eigen::VectorXd sigma;      // per E dof
  Eigen::VectorXd mu;         // per H dof
  std::vector<Region> region_labels;  // per cell, grid cell order
  RegionCoefficients coefficients;

  Eigen::VectorXd eps_at(double s) const { return eps_fixed + s * eps_metal; }
  std::size_t e_count() const noexcept { return static_cast<std::size_t>(sigma.size()); }
  std::size_t h_count() const noexcept { return static_cast<std::size_t>(mu.size()); }
};

/// DOF values from cell labels: each edge or face takes the arithmetic mean
/// of the coefficients of its adjacent masked cells.
/// Throws ValidationError on negative coefficients, non-positive mu or a
/// label vector that does not match the grid.
MaterialMap build_material_map(const Grid& grid, std::vector<Region> labels,
                               const RegionCoefficients& coefficients);

/// The eddy-current family: metal dielectricity scaled by s in [0, 1].
/// s = 0 is the eddy-current model, s = 1 the full Maxwell model.
struct LimitFamily {
  std::shared_ptr<const MaterialMap> base;
  double s = 1.0;

  LimitFamily at(double other_s) const { return LimitFamily{base, other_s}; }
};

LimitFamily make_family(MaterialMap map, double s = 1.0);

/// diag(eps_s, mu) on the combined space.
SparseOperator assemble_M(const LimitFamily& family, const Grid& grid);
/// diag(sigma, 0) on the combined space.
SparseOperator assemble_N(const MaterialMap& map, const Grid& grid);

/// c = min diag(rho M_s + N_s). Throws ModelInvalidError naming the first
/// offending DOF and its region when c <= 0.
double wellposedness_constant(const LimitFamily& family, double rho, const Grid& grid);

/// Positivity constant of rho M + sym(N) for general operators: the minimum
/// diagonal entry when both are diagonal, otherwise the smallest eigenvalue
/// of the dense symmetric part (limited to small systems).
double wellposedness_constant(const SparseOperator& M, const SparseOperator& N, double rho);

/// inf over s of wellposedness_constant; the constant behind the 1/c bound.
double uniform_family_bound(const LimitFamily& family, std::span<const double> s_values,
                            double rho, const Grid& grid);

/// Region names of the cells adjacent to an E dof, e.g. "core_metal".
std::string e_dof_region(const MaterialMap& map, const Grid& grid, std::size_t dof);

}  // namespace eddylab

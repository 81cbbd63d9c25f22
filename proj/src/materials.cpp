// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "eddylab/materials.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

#include "eddylab/errors.hpp"

namespace eddylab {

namespace {

struct CellCoefficients {
  double eps_fixed;
  double eps_metal;
  double sigma;
  double mu;
};

CellCoefficients cell_coefficients(Region r, const RegionCoefficients& c) {
  switch (r) {
    case Region::air:
      return {c.eps_air, 0.0, 0.0, c.mu};
    case Region::insulator:
      return {c.eps_lam, 0.0, 0.0, c.mu};
    case Region::core_metal:
      return {0.0, c.eps_cor, c.sigma_cor, c.mu};
  }
  throw std::logic_error("unknown region");
}

constexpr std::size_t kDenseLimit = 3000;

}  // namespace

const char* to_string(Region region) {
  switch (region) {
    case Region::air:
      return "air";
    case Region::insulator:
      return "insulator";
    case Region::core_metal:
      return "core_metal";
  }
  return "unknown";
}

MaterialMap build_material_map(const Grid& grid, std::vector<Region> labels,
                               const RegionCoefficients& coefficients) {
  if (labels.size() != grid.cell_count()) {
    throw ValidationError("build_material_map: expected one region label per cell");
  }
  const auto& c = coefficients;
  if (c.eps_air < 0 || c.eps_lam < 0 || c.eps_cor < 0 || c.sigma_cor < 0) {
    throw ValidationError("build_material_map: negative material coefficient");
  }
  if (!(c.mu > 0)) throw ValidationError("build_material_map: mu must be positive");

  MaterialMap map;
  map.coefficients = coefficients;
  const auto ne = static_cast<Eigen::Index>(grid.e_count());
  const auto nh = static_cast<Eigen::Index>(grid.h_count());
  map.eps_fixed = Eigen::VectorXd::Zero(ne);
  map.eps_metal = Eigen::VectorXd::Zero(ne);
  map.sigma = Eigen::VectorXd::Zero(ne);
  map.mu = Eigen::VectorXd::Zero(nh);

  auto label_of = [&](const Index3& cell) {
    return labels[grid.cell_index(cell[0], cell[1], cell[2])];
  };

  for (Eigen::Index dof = 0; dof < ne; ++dof) {
    int count = 0;
    CellCoefficients acc{0, 0, 0, 0};
    for (const auto& cell : grid.edge_cells(grid.e_space().location(static_cast<std::size_t>(dof)))) {
      if (!grid.masked(cell)) continue;
      const auto cc = cell_coefficients(label_of(cell), c);
      acc.eps_fixed += cc.eps_fixed;
      acc.eps_metal += cc.eps_metal;
      acc.sigma += cc.sigma;
      ++count;
    }
    map.eps_fixed[dof] = acc.eps_fixed / count;
    map.eps_metal[dof] = acc.eps_metal / count;
    map.sigma[dof] = acc.sigma / count;
  }
  for (Eigen::Index dof = 0; dof < nh; ++dof) {
    int count = 0;
    double mu = 0.0;
    for (const auto& cell : grid.face_cells(grid.h_space().location(static_cast<std::size_t>(dof)))) {
      if (!grid.masked(cell)) continue;
      mu += cell_coefficients(label_of(cell), c).mu;
      ++count;
    }
    map.mu[dof] = mu / count;
  }
  map.region_labels = std::move(labels);
  return map;
}

LimitFamily make_family(MaterialMap map, double s) {
  return LimitFamily{std::make_shared<const MaterialMap>(std::move(map)), s};
}

SparseOperator assemble_M(const LimitFamily& family, const Grid& grid) {
  const MaterialMap& map = *family.base;
  if (map.e_count() != grid.e_count() || map.h_count() != grid.h_count()) {
    throw DimensionError("assemble_M: material map does not conform to the grid");
  }
  if (family.s < 0.0) throw ValidationError("assemble_M: negative family parameter");
  Eigen::VectorXd diag(static_cast<Eigen::Index>(grid.size()));
  diag << map.eps_at(family.s), map.mu;
  if ((diag.array() < 0.0).any()) throw ValidationError("assemble_M: negative coefficient");
  return SparseOperator::diagonal(DofKind::combined, diag);
}

SparseOperator assemble_N(const MaterialMap& map, const Grid& grid) {
  if (map.e_count() != grid.e_count() || map.h_count() != grid.h_count()) {
    throw DimensionError("assemble_N: material map does not conform to the grid");
  }
  if ((map.sigma.array() < 0.0).any()) throw ValidationError("assemble_N: negative sigma");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  diag.head(static_cast<Eigen::Index>(grid.e_count())) = map.sigma;
  return SparseOperator::diagonal(DofKind::combined, diag);
}

std::string e_dof_region(const MaterialMap& map, const Grid& grid, std::size_t dof) {
  std::set<std::string> names;
  for (const auto& cell : grid.edge_cells(grid.e_space().location(dof))) {
    if (!grid.masked(cell)) continue;
    names.insert(to_string(map.region_labels[grid.cell_index(cell[0], cell[1], cell[2])]));
  }
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += "+";
    out += n;
  }
  return out;
}

double wellposedness_constant(const LimitFamily& family, double rho, const Grid& grid) {
  if (!(rho > 0.0)) throw std::invalid_argument("wellposedness_constant: rho must be positive");
  const MaterialMap& map = *family.base;
  const Eigen::VectorXd e_diag = rho * map.eps_at(family.s) + map.sigma;
  double c = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < e_diag.size(); ++i) {
    if (!(e_diag[i] > 0.0)) {
      const auto dof = static_cast<std::size_t>(i);
      throw ModelInvalidError("rho*M + N is not positive at E dof " + std::to_string(dof) +
                                  " in region " + e_dof_region(map, grid, dof) +
                                  " (eps = 0 and sigma = 0)",
                              dof, e_dof_region(map, grid, dof));
    }
    c = std::min(c, e_diag[i]);
  }
  if (map.mu.size() > 0) c = std::min(c, rho * map.mu.minCoeff());
  return c;
}

double wellposedness_constant(const SparseOperator& M, const SparseOperator& N, double rho) {
  if (M.rows() != M.cols() || N.rows() != N.cols() || M.rows() != N.rows()) {
    throw DimensionError("wellposedness_constant: M and N must be square and conform");
  }
  double c = 0.0;
  std::size_t where = 0;
  if (M.is_diagonal() && N.is_diagonal()) {
    const Eigen::VectorXd d = rho * M.diagonal_values() + N.diagonal_values();
    Eigen::Index idx = 0;
    c = d.size() > 0 ? d.minCoeff(&idx) : std::numeric_limits<double>::infinity();
    where = static_cast<std::size_t>(idx);
  } else {
    if (M.rows() > kDenseLimit) {
      throw std::invalid_argument(
          "wellposedness_constant: non-diagonal coefficients limited to small systems");
    }
    const Eigen::MatrixXd dm = Eigen::MatrixXd(M.matrix());
    const Eigen::MatrixXd dn = Eigen::MatrixXd(N.matrix());
    const Eigen::MatrixXd sym = rho * 0.5 * (dm + dm.transpose()) + 0.5 * (dn + dn.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    c = es.eigenvalues().minCoeff();
  }
  if (!(c > 0.0)) {
    throw ModelInvalidError("rho*M + N is not positive definite (min " + std::to_string(c) + ")",
                            where, "unknown");
  }
  return c;
}

double uniform_family_bound(const LimitFamily& family, std::span<const double> s_values,
                            double rho, const Grid& grid) {
  if (s_values.empty()) throw std::invalid_argument("uniform_family_bound: no s values");
  double c = std::numeric_limits<double>::infinity();
  for (double s : s_values) c = std::min(c, wellposedness_constant(family.at(s), rho, grid));
  return c;
}

}  // namespace eddylab

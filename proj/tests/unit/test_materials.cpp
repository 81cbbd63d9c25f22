// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "eddylab/errors.hpp"
#include "eddylab/materials.hpp"
#include "generators.hpp"

namespace eddylab {
namespace {

using testing::Gen;

// 4^3 box with a 2^3 core: metal at i = 1, insulator at i = 2.
struct Fixture {
  Grid grid;
  std::vector<Region> labels;
};

Fixture small_core(BoundarySplit split = BoundarySplit::all(BoundaryLabel::magnetic)) {
  Fixture f{build_grid({4, 4, 4}, 0.25, split), std::vector<Region>(64, Region::air)};
  for (int k = 1; k < 3; ++k) {
    for (int j = 1; j < 3; ++j) {
      f.labels[static_cast<std::size_t>((k * 4 + j) * 4 + 1)] = Region::core_metal;
      f.labels[static_cast<std::size_t>((k * 4 + j) * 4 + 2)] = Region::insulator;
    }
  }
  return f;
}

std::size_t e_dof(const Grid& g, int axis, Index3 node) { return *g.e_space().find(Location{axis, node}); }

TEST(AssembleM, RegionEntries) {
  const auto f = small_core();
  RegionCoefficients c;
  c.eps_cor = 8.0;
  const auto map = build_material_map(f.grid, f.labels, c);
  const auto family = make_family(map);
  // x edge from (1,2,2): all four neighbours are metal cells.
  const auto metal = e_dof(f.grid, 0, {1, 2, 2});
  // x edge from (0,0,0): a corner edge touching one air cell.
  const auto air = e_dof(f.grid, 0, {0, 0, 0});
  for (double s : {0.0, 0.5, 1.0}) {
    const auto M = assemble_M(family.at(s), f.grid).diagonal_values();
    EXPECT_DOUBLE_EQ(M[static_cast<Eigen::Index>(metal)], 8.0 * s);
    EXPECT_DOUBLE_EQ(M[static_cast<Eigen::Index>(air)], c.eps_air);
    EXPECT_TRUE(assemble_M(family.at(s), f.grid).is_diagonal());
  }
  EXPECT_EQ(assemble_M(family.at(0.0), f.grid).diagonal_values()[static_cast<Eigen::Index>(metal)], 0.0);
  EXPECT_DOUBLE_EQ(assemble_M(family.at(0.5), f.grid).diagonal_values()[static_cast<Eigen::Index>(metal)], 4.0);
  const auto M = assemble_M(family, f.grid).diagonal_values();
  EXPECT_TRUE((M.tail(static_cast<Eigen::Index>(f.grid.h_count())).array() == c.mu).all());
}

TEST(AssembleM, MixedEdgesAverageTheirCells) {
  const auto f = small_core();
  RegionCoefficients c{1.0, 2.0, 10.0, 5.0, 1.0};
  const auto map = build_material_map(f.grid, f.labels, c);
  // y edge from (2,1,1): cells i in {1,2}, k in {0,1} with j = 1, i.e.
  // metal(1,1,1), insulator(2,1,1), air(1,1,0), air(2,1,0).
  const auto dof = static_cast<Eigen::Index>(e_dof(f.grid, 1, {2, 1, 1}));
  EXPECT_DOUBLE_EQ(map.eps_fixed[dof], (2.0 + 1.0 + 1.0) / 4.0);
  EXPECT_DOUBLE_EQ(map.eps_metal[dof], 10.0 / 4.0);
  EXPECT_DOUBLE_EQ(map.sigma[dof], 5.0 / 4.0);
}

TEST(AssembleN, RegionEntries) {
  const auto f = small_core();
  RegionCoefficients c;
  c.sigma_cor = 3.5;
  const auto map = build_material_map(f.grid, f.labels, c);
  const auto N = assemble_N(map, f.grid).diagonal_values();
  EXPECT_EQ(N[static_cast<Eigen::Index>(e_dof(f.grid, 0, {0, 0, 0}))], 0.0);
  EXPECT_DOUBLE_EQ(N[static_cast<Eigen::Index>(e_dof(f.grid, 0, {1, 2, 2}))], 3.5);
  EXPECT_EQ(N.tail(static_cast<Eigen::Index>(f.grid.h_count())).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GE(N.minCoeff(), 0.0);
}

TEST(MaterialMap, Validation) {
  const auto f = small_core();
  RegionCoefficients negative;
  negative.eps_lam = -1.0;
  EXPECT_THROW(build_material_map(f.grid, f.labels, negative), ValidationError);
  RegionCoefficients no_mu;
  no_mu.mu = 0.0;
  EXPECT_THROW(build_material_map(f.grid, f.labels, no_mu), ValidationError);
  EXPECT_THROW(build_material_map(f.grid, std::vector<Region>(10, Region::air), {}), ValidationError);
  const auto map = build_material_map(f.grid, f.labels, {});
  EXPECT_THROW(assemble_M(make_family(map, -0.1), f.grid), ValidationError);
  const auto other = build_grid({2, 2, 2}, 1.0);
  EXPECT_THROW(assemble_N(map, other), DimensionError);
}

TEST(Wellposedness, DocumentedConstants) {
  const auto f = small_core();
  const RegionCoefficients c{1.0, 1.0, 10.0, 2.0, 1.0};
  const auto family = make_family(build_material_map(f.grid, f.labels, c), 0.0);
  EXPECT_DOUBLE_EQ(wellposedness_constant(family, 1.0, f.grid), 1.0);
  EXPECT_DOUBLE_EQ(wellposedness_constant(family, 2.0, f.grid), 2.0);
  const std::array<double, 3> s{0.0, 0.5, 1.0};
  EXPECT_DOUBLE_EQ(uniform_family_bound(family, s, 1.0, f.grid), 1.0);
  EXPECT_THROW(wellposedness_constant(family, 0.0, f.grid), std::invalid_argument);
  EXPECT_THROW(uniform_family_bound(family, std::span<const double>{}, 1.0, f.grid),
               std::invalid_argument);
}

TEST(Wellposedness, VanishingConductivityNamesTheRegion) {
  const auto f = small_core();
  RegionCoefficients c;
  c.sigma_cor = 0.0;
  const auto map = build_material_map(f.grid, f.labels, c);
  const auto family = make_family(map, 0.0);
  try {
    wellposedness_constant(family, 1.0, f.grid);
    FAIL() << "expected ModelInvalidError";
  } catch (const ModelInvalidError& e) {
    EXPECT_EQ(e.region(), "core_metal");
    EXPECT_NE(std::string(e.what()).find("core_metal"), std::string::npos);
    EXPECT_DOUBLE_EQ(map.eps_fixed[static_cast<Eigen::Index>(e.dof())], 0.0);
    EXPECT_EQ(e_dof_region(map, f.grid, e.dof()), "core_metal");
  }
  // With s > 0 the metal dielectricity alone keeps the model valid.
  EXPECT_GT(wellposedness_constant(family.at(1.0), 1.0, f.grid), 0.0);
}

TEST(Wellposedness, SmallConductivityControlsTheBound) {
  const auto f = small_core();
  for (double sigma : {1e-1, 1e-2, 1e-4}) {
    RegionCoefficients c;
    c.sigma_cor = sigma;
    const auto family = make_family(build_material_map(f.grid, f.labels, c), 0.0);
    EXPECT_DOUBLE_EQ(wellposedness_constant(family, 1.0, f.grid), sigma);
  }
}

TEST(Wellposedness, MonotoneInS) {
  const auto f = small_core();
  const auto family = make_family(build_material_map(f.grid, f.labels, {}), 0.0);
  double previous = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double s = i / 9.0;
    const double c = wellposedness_constant(family.at(s), 0.3, f.grid);
    EXPECT_GE(c, previous);
    previous = c;
  }
}

TEST(Wellposedness, MatchesDenseEigenvalues) {
  Gen gen(61);
  for (int trial = 0; trial < 10; ++trial) {
    const Index3 cells{gen.integer(1, 3), gen.integer(1, 2), gen.integer(1, 2)};
    const auto grid = build_grid(cells, 0.5, BoundarySplit::all(BoundaryLabel::magnetic));
    ASSERT_LE(grid.size(), 200u);
    std::vector<Region> labels(grid.cell_count());
    for (auto& r : labels) r = static_cast<Region>(gen.integer(0, 2));
    const RegionCoefficients c{gen.uniform(0.5, 2), gen.uniform(0.5, 2), gen.uniform(1, 10),
                               gen.uniform(0.5, 5), gen.uniform(0.5, 2)};
    const auto family = make_family(build_material_map(grid, labels, c), gen.uniform());
    const double rho = gen.uniform(0.1, 3.0);
    const Eigen::MatrixXd op = rho * Eigen::MatrixXd(assemble_M(family, grid).matrix()) +
                               Eigen::MatrixXd(assemble_N(*family.base, grid).matrix());
    const double oracle =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(op, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    EXPECT_NEAR(wellposedness_constant(family, rho, grid), oracle, 1e-12 * oracle);
    EXPECT_NEAR(wellposedness_constant(assemble_M(family, grid), assemble_N(*family.base, grid), rho),
                oracle, 1e-12 * oracle);
  }
}

TEST(Wellposedness, GeneralOperators) {
  // sym(rho I + N) = (rho + 1) I for N = [[1, 1], [-1, 1]];
  // rho I + [[2, 1], [1, 2]] has eigenvalues rho + 1 and rho + 3.
  const auto I = SparseOperator::diagonal(DofKind::combined, Eigen::VectorXd::Ones(2));
  const auto skew = SparseOperator::from_triplets(DofKind::combined, DofKind::combined, 2, 2,
                                                  {{0, 0, 1}, {0, 1, 1}, {1, 0, -1}, {1, 1, 1}});
  const auto sym = SparseOperator::from_triplets(DofKind::combined, DofKind::combined, 2, 2,
                                                 {{0, 0, 2}, {0, 1, 1}, {1, 0, 1}, {1, 1, 2}});
  EXPECT_NEAR(wellposedness_constant(I, skew, 0.5), 1.5, 1e-14);
  EXPECT_NEAR(wellposedness_constant(I, sym, 0.5), 1.5, 1e-14);
  const auto indefinite = SparseOperator::from_triplets(DofKind::combined, DofKind::combined, 2, 2,
                                                        {{0, 1, 3}, {1, 0, 3}});
  EXPECT_THROW(wellposedness_constant(I, indefinite, 1.0), ModelInvalidError);
}

TEST(LimitFamily, CoefficientDeviationIsLinearInS) {
  const auto f = small_core();
  RegionCoefficients c;
  c.eps_cor = 7.0;
  const auto family = make_family(build_material_map(f.grid, f.labels, c));
  const Eigen::VectorXd m0 = assemble_M(family.at(0.0), f.grid).diagonal_values();
  for (double s : {1.0, 0.3, 0.01}) {
    const Eigen::VectorXd ms = assemble_M(family.at(s), f.grid).diagonal_values();
    EXPECT_NEAR((ms - m0).cwiseAbs().maxCoeff(), s * 7.0, 1e-14);
    EXPECT_GE(ms.minCoeff(), 0.0);
  }
  EXPECT_EQ(assemble_N(*family.base, f.grid).matrix().nonZeros(),
            assemble_N(*family.at(0.2).base, f.grid).matrix().nonZeros());
}

}  // namespace
}  // namespace eddylab

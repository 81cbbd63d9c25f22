// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "eddylab/errors.hpp"
#include "eddylab/mesh.hpp"
#include "generators.hpp"

namespace eddylab {
namespace {

using testing::Gen;

// Independent count of retained edges of a full box: an edge is dropped iff it
// lies in a box side plane labelled electric.
std::size_t expected_full_box_edges(const Index3& n, const BoundarySplit& split) {
  std::size_t count = 0;
  for (int a = 0; a < 3; ++a) {
    Index3 node{};
    for (node[2] = 0; node[2] <= n[2]; ++node[2]) {
      for (node[1] = 0; node[1] <= n[1]; ++node[1]) {
        for (node[0] = 0; node[0] <= n[0]; ++node[0]) {
          if (node[a] == n[a]) continue;
          bool dropped = false;
          for (int d = 0; d < 3; ++d) {
            if (d == a) continue;
            if (node[d] == 0 && split.box_sides[2 * d] == BoundaryLabel::electric) dropped = true;
            if (node[d] == n[d] && split.box_sides[2 * d + 1] == BoundaryLabel::electric) dropped = true;
          }
          if (!dropped) ++count;
        }
      }
    }
  }
  return count;
}

TEST(BuildGrid, TwoCubedAllElectric) {
  const auto g = build_grid({2, 2, 2}, 1.0);
  EXPECT_EQ(g.e_count(), 6u);
  EXPECT_EQ(g.h_count(), 36u);
}

TEST(BuildGrid, SingleCellAllElectricHasNoEdges) {
  const auto g = build_grid({1, 1, 1}, 1.0);
  EXPECT_EQ(g.e_count(), 0u);
  EXPECT_EQ(g.h_count(), 6u);
}

TEST(BuildGrid, TwoCubedAllMagneticKeepsEveryEdge) {
  const auto g = build_grid({2, 2, 2}, 1.0, BoundarySplit::all(BoundaryLabel::magnetic));
  EXPECT_EQ(g.e_count(), 54u);
  EXPECT_EQ(g.h_count(), 36u);
}

TEST(BuildGrid, FullGridCountingFormulas) {
  for (int n = 1; n <= 6; ++n) {
    const auto g = build_grid({n, n, n}, 1.0, BoundarySplit::all(BoundaryLabel::magnetic));
    EXPECT_EQ(g.e_count(), static_cast<std::size_t>(3 * n * (n + 1) * (n + 1))) << n;
    EXPECT_EQ(g.h_count(), static_cast<std::size_t>(3 * n * n * (n + 1))) << n;
    const auto e1 = build_grid({n, n, n}, 1.0);
    EXPECT_EQ(e1.e_count(), static_cast<std::size_t>(3 * n * (n - 1) * (n - 1))) << n;
    EXPECT_EQ(e1.h_count(), g.h_count());
  }
}

TEST(BuildGrid, MixedSplitsMatchPlaneOracle) {
  Gen gen(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto cells = gen.cells(1, 5);
    const auto split = gen.split();
    const auto g = build_grid(cells, 1.0, split);
    EXPECT_EQ(g.e_count(), expected_full_box_edges(cells, split));
    EXPECT_EQ(g.h_count(), static_cast<std::size_t>(cells[0] * cells[1] * (cells[2] + 1) +
                                                    cells[0] * (cells[1] + 1) * cells[2] +
                                                    (cells[0] + 1) * cells[1] * cells[2]));
  }
}

TEST(BuildGrid, IndexMapsAreBijections) {
  Gen gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = gen.grid();
    for (const auto* space : {&g.e_space(), &g.h_space()}) {
      for (std::size_t i = 0; i < space->size(); ++i) {
        const auto found = space->find(space->location(i));
        ASSERT_TRUE(found.has_value());
        EXPECT_EQ(*found, i);
      }
    }
  }
}

TEST(BuildGrid, EveryDofTouchesAMaskedCell) {
  Gen gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto c = gen.cells(1, 5);
    const auto g = build_grid(c, 1.0, gen.mask(c, 0.4), gen.split());
    for (const auto& loc : g.e_space().locations()) {
      bool any = false;
      for (const auto& cell : g.edge_cells(loc)) any = any || g.masked(cell);
      EXPECT_TRUE(any);
    }
    for (const auto& loc : g.h_space().locations()) {
      bool any = false;
      for (const auto& cell : g.face_cells(loc)) any = any || g.masked(cell);
      EXPECT_TRUE(any);
    }
  }
}

TEST(BuildGrid, RetainedEdgesNeverTouchElectricFaces) {
  Gen gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = gen.grid();
    for (const auto& loc : g.e_space().locations()) EXPECT_FALSE(g.edge_on_electric_boundary(loc));
  }
}

TEST(BuildGrid, Deterministic) {
  Gen gen(21);
  const auto c = gen.cells(2, 5);
  const auto mask = gen.mask(c, 0.6);
  const auto split = gen.split();
  const auto a = build_grid(c, 0.5, mask, split);
  const auto b = build_grid(c, 0.5, mask, split);
  EXPECT_EQ(a.e_space().locations(), b.e_space().locations());
  EXPECT_EQ(a.h_space().locations(), b.h_space().locations());
}

TEST(BuildGrid, RejectsBadInput) {
  EXPECT_THROW(build_grid({0, 2, 2}, 1.0), DomainError);
  EXPECT_THROW(build_grid({2, 2, 2}, 0.0), DomainError);
  EXPECT_THROW(build_grid({2, 2, 2}, -1.0), DomainError);
  EXPECT_THROW(build_grid({2, 2, 2}, 1.0, std::vector<std::uint8_t>(8, 0)), DomainError);
  EXPECT_THROW(build_grid({2, 2, 2}, 1.0, std::vector<std::uint8_t>(7, 1)), DomainError);
}

TEST(BuildGrid, OverridesMustNameBoundaryFaces) {
  BoundarySplit split;
  split.overrides.push_back({Location{0, {1, 0, 0}}, BoundaryLabel::magnetic});  // interior face
  EXPECT_THROW(build_grid({2, 2, 2}, 1.0, split), ValidationError);

  BoundarySplit conflicting;
  conflicting.overrides.push_back({Location{0, {0, 0, 0}}, BoundaryLabel::magnetic});
  conflicting.overrides.push_back({Location{0, {0, 0, 0}}, BoundaryLabel::electric});
  EXPECT_THROW(build_grid({2, 2, 2}, 1.0, conflicting), ValidationError);
}

TEST(BuildGrid, OverrideOpensEdgesOnOneFace) {
  // A single magnetic face on the -x side of an otherwise electric 2^3 box:
  // each of its edges also touches an electric face, which wins the tie.
  BoundarySplit split;
  split.overrides.push_back({Location{0, {0, 0, 0}}, BoundaryLabel::magnetic});
  const auto g = build_grid({2, 2, 2}, 1.0, split);
  EXPECT_EQ(g.e_count(), 6u);
  // Flipping the whole -x side retains the four edges interior to that side.
  BoundarySplit side;
  side.box_sides[0] = BoundaryLabel::magnetic;
  EXPECT_EQ(build_grid({2, 2, 2}, 1.0, side).e_count(), 10u);
}

TEST(InnerProduct, AllOnes) {
  const auto g = build_grid({2, 2, 2}, 1.0);
  const StateVector x(Eigen::VectorXd::Ones(42), 6);
  EXPECT_DOUBLE_EQ(inner_product(x, x, g), 42.0);
  const auto half = build_grid({2, 2, 2}, 0.5);
  EXPECT_DOUBLE_EQ(inner_product(x, x, half), 5.25);
  const StateVector zero(Eigen::VectorXd::Zero(42), 6);
  Gen gen(1);
  const auto y = gen.state(g);
  EXPECT_EQ(inner_product(y, zero, g), 0.0);
}

TEST(InnerProduct, SymmetricPositiveDefinite) {
  Gen gen(99);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = gen.grid();
    const auto x = gen.state(g);
    const auto y = gen.state(g);
    EXPECT_DOUBLE_EQ(inner_product(x, y, g), inner_product(y, x, g));
    EXPECT_GT(inner_product(x, x, g), 0.0);
    EXPECT_NEAR(norm(x, g), std::sqrt(inner_product(x, x, g)), 1e-12 * norm(x, g));
  }
}

TEST(InnerProduct, RejectsNonConformingStates) {
  const auto g = build_grid({2, 2, 2}, 1.0);
  const StateVector x(Eigen::VectorXd::Ones(42), 6);
  const StateVector y(Eigen::VectorXd::Ones(42), 7);
  EXPECT_THROW(inner_product(x, y, g), DimensionError);
}

}  // namespace
}  // namespace eddylab

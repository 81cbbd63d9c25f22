// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Seeded random inputs for property tests.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <vector>

#include "eddylab/discrete_ops.hpp"
#include "eddylab/mesh.hpp"

namespace eddylab::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  bool coin(double p = 0.5) { return uniform() < p; }

  Eigen::VectorXd vector(std::size_t n) {
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = normal(rng_);
    return v;
  }

  Index3 cells(int lo = 1, int hi = 5) { return {integer(lo, hi), integer(lo, hi), integer(lo, hi)}; }

  BoundarySplit split() {
    BoundarySplit s;
    for (auto& side : s.box_sides) side = coin() ? BoundaryLabel::electric : BoundaryLabel::magnetic;
    s.interior = coin() ? BoundaryLabel::electric : BoundaryLabel::magnetic;
    return s;
  }

  /// Non-empty random mask, density p.
  std::vector<std::uint8_t> mask(const Index3& cells, double p) {
    const auto n = static_cast<std::size_t>(cells[0] * cells[1] * cells[2]);
    std::vector<std::uint8_t> m(n, 0);
    for (auto& x : m) x = coin(p) ? 1 : 0;
    m[static_cast<std::size_t>(integer(0, static_cast<int>(n) - 1))] = 1;
    return m;
  }

  /// Either a full box or a random mask, with a random boundary split.
  Grid grid() {
    const auto c = cells();
    const double h = uniform(0.1, 2.0);
    if (coin()) return build_grid(c, h, split());
    return build_grid(c, h, mask(c, uniform(0.3, 0.9)), split());
  }

  StateVector state(const Grid& g) { return StateVector(vector(g.size()), g.e_count()); }

  Trajectory trajectory(const Grid& g, std::size_t steps, double tau, double rho, long start = 1) {
    Trajectory t{tau, start, rho, {}};
    for (std::size_t n = 0; n < steps; ++n) t.states.push_back(state(g));
    return t;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace eddylab::testing

// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cstring>
#include <functional>
#include <sstream>

#include "eddylab/errors.hpp"
#include "eddylab/evolution.hpp"
#include "eddylab/materials.hpp"
#include "eddylab/scenarios.hpp"
#include "generators.hpp"

namespace eddylab {
namespace {

using testing::Gen;

SparseOperator constant_diagonal(std::size_t n, double v) {
  return SparseOperator::diagonal(DofKind::combined, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), v));
}

// A single cell with electric walls keeps no E edges, so A vanishes and the
// six H faces evolve as independent scalar equations.
struct Decoupled {
  Grid grid = build_grid({1, 1, 1}, 1.0);
  BlockOperatorA A = assemble_A(grid);

  EvolutionProblem problem(double m, double n, double tau, std::size_t steps,
                           const std::function<double(double)>& f) const {
    EvolutionProblem p;
    p.M = constant_diagonal(grid.size(), m);
    p.N = constant_diagonal(grid.size(), n);
    p.A = A;
    p.tau = tau;
    p.T = tau * static_cast<double>(steps);
    p.rho = 1.0;
    p.forcing = sample_trajectory(grid, tau, steps, 1.0, [&](double t) {
      return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.size()), f(t)).eval();
    });
    return p;
  }
};

TEST(StepMatrix, ScalarExamples) {
  const Decoupled d;
  ASSERT_EQ(d.grid.size(), 6u);
  const auto s = step_matrix(constant_diagonal(6, 1.0), constant_diagonal(6, 0.0), d.A, 0.1);
  EXPECT_DOUBLE_EQ(s.diagonal_values()[0], 10.0);
  for (double tau : {1.0, 0.1, 1e-4}) {
    const auto dae = step_matrix(constant_diagonal(6, 0.0), constant_diagonal(6, 3.0), d.A, tau);
    EXPECT_EQ(dae.diagonal_values()[3], 3.0);
  }
}

TEST(StepMatrix, SymmetricPartBoundedBelow) {
  Gen gen(71);
  for (int trial = 0; trial < 8; ++trial) {
    const auto grid = build_grid({gen.integer(1, 2), gen.integer(1, 2), 2}, 0.5, gen.split());
    ASSERT_LE(grid.size(), 200u);
    std::vector<Region> labels(grid.cell_count());
    for (auto& r : labels) r = static_cast<Region>(gen.integer(0, 2));
    const auto family = make_family(build_material_map(grid, labels, {}), gen.uniform());
    const auto M = assemble_M(family, grid);
    const auto N = assemble_N(*family.base, grid);
    const double tau = gen.uniform(0.01, 0.5);
    const Eigen::MatrixXd S(step_matrix(M, N, assemble_A(grid), tau).matrix());
    const Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
    const double lowest =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    const double min_diag = (M.diagonal_values() / tau + N.diagonal_values()).minCoeff();
    EXPECT_GE(lowest, min_diag * (1 - 1e-12));
    EXPECT_NEAR(step_matrix_coercivity(M, N, tau), min_diag, 1e-12 * min_diag);
  }
}

TEST(Solve, ZeroForcingGivesZero) {
  const auto sc = build_unit_test_scenario("single_conductor_block");
  EvolutionProblem p;
  const auto family = make_family(sc.materials, 0.0);
  p.M = assemble_M(family, sc.grid);
  p.N = assemble_N(sc.materials, sc.grid);
  p.A = assemble_A(sc.grid);
  p.tau = 0.1;
  p.T = 1.0;
  p.forcing = Trajectory{0.1, 1, 1.0, std::vector<StateVector>(10, StateVector(sc.grid))};
  const auto r = solve_evolution(p);
  ASSERT_EQ(r.solution.size(), 10u);
  for (const auto& u : r.solution.states) EXPECT_EQ(u.values().squaredNorm(), 0.0);
}

TEST(Solve, DiscreteRamp) {
  const Decoupled d;
  const double tau = 0.05;
  const auto r = solve_evolution(d.problem(1.0, 0.0, tau, 40, [](double) { return 1.0; }));
  for (std::size_t n = 0; n < r.solution.size(); ++n) {
    EXPECT_NEAR(r.solution.states[n].values()[2], static_cast<double>(n + 1) * tau, 1e-12);
  }
  EXPECT_LE(r.max_residual(), 1e-10);
}

TEST(Solve, AlgebraicLimitIsPointwise) {
  const Decoupled d;
  const auto r = solve_evolution(d.problem(0.0, 2.0, 0.1, 30, [](double t) { return std::sin(7 * t) + t * t; }));
  for (std::size_t n = 0; n < r.solution.size(); ++n) {
    const double t = r.solution.time(n);
    EXPECT_NEAR(r.solution.states[n].values()[4], (std::sin(7 * t) + t * t) / 2.0, 1e-12);
  }
}

LaminatedCoreScenario eight_cubed() {
  LaminatedCoreScenario sc;
  sc.box_cells = {8, 8, 8};
  sc.spacing = 1.0 / 8.0;
  sc.core = CellRange{{2, 2, 2}, {6, 6, 6}};
  sc.coil.plane = 4;
  sc.coil.clearance = 1;
  return sc;
}

EvolutionProblem scenario_problem(const ScenarioInstance& sc, const Trajectory& forcing, double s,
                                  double T, SolverOptions options = {}) {
  EvolutionProblem p;
  p.M = assemble_M(make_family(sc.materials, s), sc.grid);
  p.N = assemble_N(sc.materials, sc.grid);
  p.A = assemble_A(sc.grid);
  p.forcing = forcing;
  p.tau = forcing.tau;
  p.T = T;
  p.rho = forcing.rho;
  p.options = options;
  return p;
}

TEST(Solve, EnergyBoundOnLaminatedCore) {
  const double rho = 1.0;
  const double T = 2.0;
  std::vector<double> certified;
  for (double tau : {4e-2, 2e-2, 1e-2}) {
    ASSERT_LE(rho * tau, 0.05);
    const auto [sc, forcing] = build_laminated_core(eight_cubed(), tau, T, rho);
    for (double s : {1.0, 0.1, 0.0}) {
      const auto family = make_family(sc.materials, s);
      const double c = wellposedness_constant(family, rho, sc.grid);
      const auto u = solve_evolution(scenario_problem(sc, forcing, s, T)).solution;
      EXPECT_LE(weighted_norm(u, sc.grid), 1.1 / c * weighted_norm(forcing, sc.grid)) << tau << ' ' << s;
    }
    // The discrete bound holds with rho_tau in place of rho; its excess over
    // the continuum constant shrinks with tau.
    const auto family = make_family(sc.materials, 0.0);
    certified.push_back(wellposedness_constant(family, rho, sc.grid) /
                            wellposedness_constant(family, discrete_rho(rho, tau), sc.grid) -
                        1.0);
  }
  EXPECT_GT(certified[0], certified[1]);
  EXPECT_GT(certified[1], certified[2]);
  EXPECT_LT(certified[2], 0.1);
}

TEST(Solve, Superposition) {
  LaminatedCoreScenario small;
  small.box_cells = {6, 6, 6};
  small.spacing = 1.0 / 6.0;
  small.core = CellRange{{2, 2, 2}, {4, 4, 4}};
  small.coil.plane = 3;
  small.coil.clearance = 1;
  small.boundary = BoundarySplit::all(BoundaryLabel::magnetic);
  const auto sc = build_laminated_core(small);
  Gen gen(73);
  for (double s : {1.0, 0.0}) {
    const auto f1 = gen.trajectory(sc.grid, 20, 0.05, 1.0);
    const auto f2 = gen.trajectory(sc.grid, 20, 0.05, 1.0);
    const auto u1 = solve_evolution(scenario_problem(sc, f1, s, 1.0)).solution;
    const auto u2 = solve_evolution(scenario_problem(sc, f2, s, 1.0)).solution;
    const auto u12 = solve_evolution(scenario_problem(sc, f1 + f2, s, 1.0)).solution;
    EXPECT_LE(weighted_norm(u12 - (u1 + u2), sc.grid), 1e-9 * weighted_norm(u12, sc.grid));
  }
}

TEST(Solve, SolverKindsAgree) {
  const auto sc = build_unit_test_scenario("single_conductor_block");
  Gen gen(79);
  const auto forcing = gen.trajectory(sc.grid, 10, 0.1, 1.0);
  for (double s : {1.0, 0.0}) {
    std::vector<Trajectory> solutions;
    for (auto kind : {LinearSolverKind::schur_cg, LinearSolverKind::gmres, LinearSolverKind::direct}) {
      SolverOptions options;
      options.kind = kind;
      const auto p = scenario_problem(sc, forcing, s, 1.0, options);
      const StepSolver solver(p.M, p.N, p.A, p.tau, options);
      EXPECT_EQ(solver.kind(), kind);
      const auto r = solver.solve(forcing);
      EXPECT_LE(r.max_residual(), 1e-10);
      solutions.push_back(r.solution);
    }
    const double scale = weighted_norm(solutions[2], sc.grid);
    EXPECT_LE(weighted_norm(solutions[0] - solutions[2], sc.grid), 1e-8 * scale);
    EXPECT_LE(weighted_norm(solutions[1] - solutions[2], sc.grid), 1e-8 * scale);
  }
  const auto p = scenario_problem(sc, forcing, 1.0, 1.0);
  EXPECT_EQ(StepSolver(p.M, p.N, p.A, p.tau).kind(), LinearSolverKind::schur_cg);
}

TEST(Solve, ReportsMissedTolerance) {
  const auto sc = build_unit_test_scenario("single_conductor_block");
  Gen gen(83);
  SolverOptions options;
  options.kind = LinearSolverKind::gmres;
  options.max_iterations = 1;
  options.max_restarts = 0;
  const auto forcing = gen.trajectory(sc.grid, 5, 0.1, 1.0);
  try {
    solve_evolution(scenario_problem(sc, forcing, 0.0, 0.5, options));
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.step(), 0u);  // position in the trajectory
    EXPECT_GT(e.residual(), 1e-10);
  }
}

TEST(Causality, TruncatedForcing) {
  const double tau = 0.05;
  const double T = 2.0;
  const auto [sc, full] = build_laminated_core(eight_cubed(), tau, T, 1.0);
  for (double a : {0.5, 1.0}) {
    auto truncated = full;
    for (std::size_t n = 0; n < truncated.size(); ++n) {
      if (truncated.time(n) <= a) truncated.states[n].values().setZero();
    }
    for (double s : {1.0, 0.0}) {
      EXPECT_EQ(verify_causality(scenario_problem(sc, truncated, s, T), a, sc.grid), 0.0);
    }
    EXPECT_THROW(verify_causality(scenario_problem(sc, full, 0.0, T), a, sc.grid), ValidationError);
  }
  // a = T with no forcing at all.
  const auto zero = full.zeros_like();
  EXPECT_EQ(verify_causality(scenario_problem(sc, zero, 0.0, T), T, sc.grid), 0.0);
}

TEST(Causality, AgreementBeforeCutoff) {
  const double tau = 0.05;
  const double T = 2.0;
  const double a = 1.0;
  const auto [sc, f1] = build_laminated_core(eight_cubed(), tau, T, 1.0);
  Gen gen(89);
  auto f2 = f1;
  for (std::size_t n = 0; n < f2.size(); ++n) {
    if (f2.time(n) > a) f2.states[n].values() += gen.vector(sc.grid.size());
  }
  const auto u1 = solve_evolution(scenario_problem(sc, f1, 0.0, T)).solution;
  const auto u2 = solve_evolution(scenario_problem(sc, f2, 0.0, T)).solution;
  EXPECT_LE(causal_prefix_norm(u1 - u2, a, sc.grid), 1e-10 * causal_prefix_norm(u1, a, sc.grid));
}

TEST(Validate, RejectsInconsistentProblems) {
  const Decoupled d;
  const auto good = d.problem(1.0, 0.0, 0.1, 10, [](double) { return 1.0; });
  EXPECT_NO_THROW(validate(good));

  auto p = good;
  p.tau = 0.0;
  EXPECT_THROW(validate(p), ValidationError);
  p = good;
  p.T = 0.95;
  EXPECT_THROW(validate(p), ValidationError);
  p = good;
  p.forcing.states.pop_back();
  EXPECT_THROW(validate(p), ValidationError);
  p = good;
  p.forcing.start_index = 0;
  EXPECT_THROW(validate(p), ValidationError);
  p = good;
  p.forcing.states[3] = StateVector(Eigen::VectorXd::Zero(5), 0);
  EXPECT_THROW(validate(p), DimensionError);
  p = good;
  p.M = constant_diagonal(6, 0.0);
  EXPECT_THROW(validate(p), ModelInvalidError);
  p = good;
  p.N = constant_diagonal(7, 0.0);
  EXPECT_THROW(validate(p), std::invalid_argument);
}

TEST(Export, CsvAndBinary) {
  const Decoupled d;
  auto traj = d.problem(1.0, 0.0, 0.5, 2, [](double t) { return t; }).forcing;
  std::ostringstream csv;
  write_trajectory_csv(traj, d.grid, csv);
  // Six H faces of value t on a unit cell: h-norm = sqrt(6) t.
  std::istringstream lines(csv.str());
  std::string header, first, second;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  EXPECT_EQ(header, "step,time,e_norm,h_norm");
  EXPECT_EQ(first.substr(0, 8), "1,0.5,0,");
  EXPECT_NEAR(std::stod(second.substr(second.rfind(',') + 1)), std::sqrt(6.0), 1e-15);

  std::ostringstream bin;
  write_trajectory_binary(traj, bin);
  const std::string bytes = bin.str();
  ASSERT_EQ(bytes.size(), 2u * 6u * 8u);
  // 0.5 = 0x3FE0000000000000, little-endian.
  const unsigned char expected[8] = {0, 0, 0, 0, 0, 0, 0xE0, 0x3F};
  EXPECT_EQ(std::memcmp(bytes.data(), expected, 8), 0);
  const unsigned char one[8] = {0, 0, 0, 0, 0, 0, 0xF0, 0x3F};
  EXPECT_EQ(std::memcmp(bytes.data() + 6 * 8, one, 8), 0);
}

}  // namespace
}  // namespace eddylab

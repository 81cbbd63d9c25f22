// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Verification studies. Every study fixes one grid and one tau across all
// values of the family parameter s, so differences u_s - u_0 are plain
// vector differences. Results are deterministic given the scenario, the
// configuration and the seed.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "eddylab/evolution.hpp"
#include "eddylab/report.hpp"
#include "eddylab/scenarios.hpp"

namespace eddylab {

struct Tolerances {
  /// Relative defects of the structure checks.
  double structure = 1e-12;
  /// |u|_rho <= (1 + bound_slack) / c * |F|_rho.
  double bound_slack = 0.1;
  /// max_{t <= a} |u|_H <= causality * max_t |F|_H.
  double causality = 1e-10;
  /// Resolvent identity defect <= identity_factor * lin_tol.
  double identity_factor = 100.0;
  /// Band for the log-log slope of the identity defect against lin_tol.
  double scaling_low = 0.5;
  double scaling_high = 1.5;
  /// Band for the fitted convergence rate in s.
  double rate_low = 0.9;
  double rate_high = 1.1;
  /// Errors below noise_floor_factor * lin_tol * |u_0|_rho are not fitted.
  double noise_floor_factor = 100.0;
  /// Relative allowance on r(s) <= K s for the smoothed study.
  double smoothed_margin = 0.1;
  /// |ratio - rho| <= (accretivity_upper - 1) rho for the C^1 bump at the
  /// finest tau.
  double accretivity_upper = 1.05;
};

struct StudyConfig {
  double rho = 1.0;
  double tau = 0.02;
  double T = 4.0;
  std::vector<double> s_values{1.0, 0.1, 0.01, 0.0};
  SolverOptions solver;
  std::uint64_t seed = 42;
  /// Random forcings for the smoothed study.
  std::size_t n_samples = 10;
  /// Causality cutoffs; empty means {T/4, T/2}.
  std::vector<double> cutoffs;
  /// Family parameter of the resolvent identity study.
  double identity_s = 0.1;
  /// Extra lin_tol values for the identity scaling check; empty to skip.
  std::vector<double> lin_tol_sweep;
  /// Assert the rate band (off for rough forcings, where only convergence
  /// is recorded).
  bool assert_rate = true;
  /// Random trajectories for the accretivity study.
  std::size_t accretivity_samples = 1000;
  std::vector<double> accretivity_taus{1e-2, 1e-3, 1e-4};
  Tolerances tolerances;
};

/// FNV-1a digest of grid, labels, coefficients and source.
std::string scenario_digest(const ScenarioInstance& scenario);

/// Lazily built step solvers for the members of one limit family at a
/// fixed tau. M_s is assembled once per s and reused for every forcing.
class FamilySolvers {
 public:
  FamilySolvers(const ScenarioInstance& scenario, double tau, SolverOptions options);

  const SparseOperator& M(double s);
  const SparseOperator& N() const { return N_; }
  const StepSolver& solver(double s);
  SolveResult solve(double s, const Trajectory& forcing);
  const LimitFamily& family() const { return family_; }

 private:
  struct Member {
    SparseOperator M;
    std::unique_ptr<StepSolver> solver;
  };
  Member& member(double s);

  const ScenarioInstance& scenario_;
  double tau_;
  SolverOptions options_;
  LimitFamily family_;
  SparseOperator N_;
  BlockOperatorA A_;
  std::map<double, Member> members_;
};

/// Skew-adjointness of A, the (curl0, curl0^T) adjoint pairing, and
/// curl0 * grad = 0 on random samples.
StudyReport study_structure_checks(const Grid& grid, std::uint64_t seed = 42,
                                   std::size_t samples = 10, double tolerance = 1e-12);

/// |u_s|_rho / |F|_rho against (1 + slack) / c for every s.
StudyReport study_uniform_bound(const ScenarioInstance& scenario, const StudyConfig& config);
StudyReport study_uniform_bound(const ScenarioInstance& scenario, const StudyConfig& config,
                                const Trajectory& forcing);

/// Forcing truncated to (a, T]: the solution must vanish on [0, a]; two
/// forcings agreeing on [0, a] give solutions agreeing on [0, a].
StudyReport study_causality(const ScenarioInstance& scenario, const StudyConfig& config);
StudyReport study_causality(const ScenarioInstance& scenario, const StudyConfig& config,
                            const Trajectory& forcing);

/// u_s - u_0 = Sol_s[(M_0 - M_s) d0 u_0 + (N_0 - N_s) u_0], checked to
/// solver precision, optionally across a lin_tol sweep.
StudyReport study_resolvent_identity(const ScenarioInstance& scenario, const StudyConfig& config);
StudyReport study_resolvent_identity(const ScenarioInstance& scenario, const StudyConfig& config,
                                     const Trajectory& forcing);

/// e(s) = |u_s - u_0|_rho over decreasing s, log-log slope and the a-priori
/// bound e(s) <= (s eps_cor / c) |d0 u_0|_rho.
StudyReport study_convergence_rate(const ScenarioInstance& scenario, const StudyConfig& config);
StudyReport study_convergence_rate(const ScenarioInstance& scenario, const StudyConfig& config,
                                   const Trajectory& forcing);

/// r(s) = max over seeded unit forcings of |d0^{-1}(u_s - u_0)|_rho,
/// compared with K s where K comes from the two largest s.
StudyReport study_smoothed_operator_convergence(const ScenarioInstance& scenario,
                                                const StudyConfig& config);

/// <u, d0 u>_rho >= rho_tau |u|_rho^2 on random compactly supported
/// trajectories, and the ratio for a C^1 bump approaching rho as tau -> 0.
StudyReport study_accretivity(const StudyConfig& config);

/// Study names: structure, bound, causality, identity, rate, smoothed,
/// accretivity. Throws std::invalid_argument for anything else.
StudyReport run_study(const std::string& name, const ScenarioInstance& scenario,
                      const StudyConfig& config);
const std::vector<std::string>& study_names();

}  // namespace eddylab

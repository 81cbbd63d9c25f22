// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Implicit causal time stepping for (d0 M + N + A) u = F.
//
// The time grid is t_n = n tau. A trajectory with start_index 1 holds the
// samples n = 1..N; the state at n = 0 (and everything before) is the zero
// history. Each step solves
//   S u_n = F_n + (M / tau) u_{n-1},   S = M / tau + N + A,
// which is exactly (M d0 + N + A) u = F with the zero-history backward
// difference of d0_apply. M may vanish on some DOFs (eddy-current blocks);
// S stays invertible as long as rho M + N >= c > 0.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <vector>

#include "eddylab/discrete_ops.hpp"
#include "eddylab/mesh.hpp"

namespace eddylab {

/// automatic: schur_cg when M and N are diagonal, gmres otherwise.
/// schur_cg eliminates the H block (its diagonal M / tau + N is invertible)
/// and runs Jacobi-preconditioned CG on the SPD electric Schur complement.
enum class LinearSolverKind { automatic, schur_cg, gmres, direct };

struct SolverOptions {
  /// Relative residual |b - S x| / |b| required of every step.
  double lin_tol = 1e-10;
  /// Krylov stopping tolerance as a fraction of lin_tol. Differences of two
  /// solutions are much smaller than the solutions themselves, so landing
  /// well inside lin_tol keeps their relative error near lin_tol as well.
  double krylov_fraction = 0.1;
  int max_iterations = 5000;
  /// Extra warm-started solves allowed when the true residual still misses
  /// lin_tol after the Krylov iteration stopped.
  int max_restarts = 4;
  /// Krylov subspace dimension between GMRES restarts.
  int restart = 40;
  LinearSolverKind kind = LinearSolverKind::automatic;
};

struct EvolutionProblem {
  SparseOperator M;
  SparseOperator N;
  BlockOperatorA A;
  Trajectory forcing;  // F = (-J, K)
  double tau = 0.0;
  double T = 0.0;
  double rho = 1.0;
  SolverOptions options;
};

/// Throws on non-conforming operators, a non-positive wellposedness
/// constant, or a forcing that does not cover T / tau steps.
void validate(const EvolutionProblem& problem);

struct SolveResult {
  Trajectory solution;
  std::vector<double> per_step_linear_residuals;
  std::vector<int> per_step_iterations;
  double wall_time = 0.0;  // seconds

  double max_residual() const;
};

/// S = M / tau + N + A.
SparseOperator step_matrix(const SparseOperator& M, const SparseOperator& N,
                           const BlockOperatorA& A, double tau);
SparseOperator step_matrix(const EvolutionProblem& problem);

/// Smallest eigenvalue of the symmetric part of the step matrix, i.e. the
/// positivity constant of M / tau + N (A drops out of the symmetric part).
double step_matrix_coercivity(const SparseOperator& M, const SparseOperator& N, double tau);

/// Factorizes (or preconditions) S once and runs any number of forcings
/// through the causal recursion.
class StepSolver {
 public:
  StepSolver(const SparseOperator& M, const SparseOperator& N, const BlockOperatorA& A,
             double tau, SolverOptions options = {});
  ~StepSolver();
  StepSolver(StepSolver&&) noexcept;
  StepSolver& operator=(StepSolver&&) noexcept;

  /// Throws SolverError with the step index when a step misses lin_tol.
  /// Not safe to call concurrently on one instance.
  SolveResult solve(const Trajectory& forcing) const;

  const SparseOperator& matrix() const;
  const SolverOptions& options() const;
  /// Resolved solver kind (never automatic).
  LinearSolverKind kind() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SolveResult solve_evolution(const EvolutionProblem& problem);

/// max over t_n <= cutoff of |u_n|_H. The forcing must vanish for t <= cutoff
/// (ValidationError otherwise).
double verify_causality(const EvolutionProblem& problem, double cutoff, const Grid& grid);

/// Overload reusing an existing solution.
double causal_prefix_norm(const Trajectory& solution, double cutoff, const Grid& grid);

/// "step,time,e_norm,h_norm" header plus one line per state; norms use the
/// h^3-weighted inner product of each block.
void write_trajectory_csv(const Trajectory& traj, const Grid& grid, std::ostream& os);

/// Raw dump: every state's combined vector (E block, then H block, DOF order
/// of the grid's index maps) as little-endian 64-bit floats, states in time
/// order, no header.
void write_trajectory_binary(const Trajectory& traj, std::ostream& os);

/// Samples F on n = 1..steps; `source` maps t to the combined forcing vector.
template <typename Source>
Trajectory sample_trajectory(const Grid& grid, double tau, std::size_t steps, double rho,
                             Source&& source) {
  Trajectory out{tau, 1, rho, {}};
  out.states.reserve(steps);
  for (std::size_t n = 1; n <= steps; ++n) {
    out.states.emplace_back(source(static_cast<double>(n) * tau), grid.e_count());
  }
  return out;
}

}  // namespace eddylab

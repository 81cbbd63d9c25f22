// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "eddylab/evolution.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "eddylab/errors.hpp"
#include "eddylab/materials.hpp"

namespace eddylab {

double SolveResult::max_residual() const {
  double r = 0.0;
  for (double v : per_step_linear_residuals) r = std::max(r, v);
  return r;
}

SparseOperator step_matrix(const SparseOperator& M, const SparseOperator& N,
                           const BlockOperatorA& A, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("step_matrix: tau must be positive");
  if (M.rows() != A.size() || N.rows() != A.size() || M.cols() != A.size() ||
      N.cols() != A.size()) {
    throw DimensionError("step_matrix: M, N and A do not share one combined space");
  }
  SparseMatrix s = (1.0 / tau) * M.matrix() + N.matrix() + A.assemble().matrix();
  return SparseOperator(DofKind::combined, DofKind::combined, std::move(s));
}

SparseOperator step_matrix(const EvolutionProblem& problem) {
  return step_matrix(problem.M, problem.N, problem.A, problem.tau);
}

double step_matrix_coercivity(const SparseOperator& M, const SparseOperator& N, double tau) {
  return wellposedness_constant(M, N, 1.0 / tau);
}

void validate(const EvolutionProblem& p) {
  if (!(p.tau > 0.0) || !(p.T > 0.0) || !(p.rho > 0.0)) {
    throw ValidationError("EvolutionProblem: tau, T and rho must be positive");
  }
  const double steps = p.T / p.tau;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps) {
    throw ValidationError("EvolutionProblem: T / tau must be an integer step count");
  }
  if (p.forcing.size() != static_cast<std::size_t>(std::llround(steps)) ||
      p.forcing.start_index != 1 || p.forcing.tau != p.tau) {
    throw ValidationError("EvolutionProblem: forcing must sample n = 1..T/tau");
  }
  for (const auto& f : p.forcing.states) {
    if (f.size() != p.A.size() || f.e_count() != p.A.e_count()) {
      throw DimensionError("EvolutionProblem: forcing state does not conform");
    }
  }
  step_matrix_coercivity(p.M, p.N, 1.0 / p.rho);  // rho M + N >= c > 0
  step_matrix(p);
}

struct StepSolver::Impl {
  using ColMatrix = Eigen::SparseMatrix<double>;
  using Gmres = Eigen::GMRES<SparseMatrix, Eigen::DiagonalPreconditioner<double>>;
  using Cg = Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                                      Eigen::DiagonalPreconditioner<double>>;
  using Direct = Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>;

  SparseOperator s;
  SparseOperator m_over_tau;
  SolverOptions options;
  LinearSolverKind kind = LinearSolverKind::gmres;

  std::optional<Gmres> gmres;
  std::optional<ColMatrix> col_matrix;
  std::optional<Direct> direct;

  // Schur complement path.
  Eigen::Index ne = 0;
  SparseMatrix curl0;
  Eigen::VectorXd d_e;
  Eigen::VectorXd inv_d_h;
  SparseMatrix schur;  // D_E + C^T D_H^{-1} C
  std::optional<Cg> cg;

  // One linear solve with warm start x; returns the full relative residual.
  double solve_step(const Eigen::VectorXd& b, double bnorm, Eigen::VectorXd& x, int& iterations);
  double residual(const Eigen::VectorXd& b, double bnorm, const Eigen::VectorXd& x) const {
    return (b - s.matrix() * x).norm() / bnorm;
  }
};

double StepSolver::Impl::solve_step(const Eigen::VectorXd& b, double bnorm, Eigen::VectorXd& x,
                                    int& iterations) {
  const double tol = options.lin_tol;
  if (kind == LinearSolverKind::direct) {
    x = direct->solve(b);
    return residual(b, bnorm, x);
  }
  double r = residual(b, bnorm, x);
  if (kind == LinearSolverKind::gmres) {
    for (int attempt = 0; attempt <= options.max_restarts && r > tol; ++attempt) {
      Eigen::VectorXd next = gmres->solveWithGuess(b, x);
      iterations += static_cast<int>(gmres->iterations());
      if (!next.allFinite()) next = gmres->solve(b);
      r = residual(b, bnorm, next);
      x = std::move(next);
    }
    return r;
  }
  const auto nh = x.size() - ne;
  const auto b_e = b.head(ne);
  const auto b_h = b.tail(nh);
  const Eigen::VectorXd scaled_bh = inv_d_h.cwiseProduct(b_h);
  const Eigen::VectorXd rhs = b_e + curl0.transpose() * scaled_bh;
  const double rhs_norm = rhs.norm();
  for (int attempt = 0; attempt <= options.max_restarts && r > tol; ++attempt) {
    // The Schur residual equals the E part of the full residual; the H part
    // vanishes up to rounding once H is recovered from E.
    Eigen::VectorXd e = x.head(ne);
    if (rhs_norm > 0.0) {
      cg->setTolerance(std::max(options.krylov_fraction * tol * bnorm / rhs_norm, 1e-16));
      e = cg->solveWithGuess(rhs, e);
      iterations += static_cast<int>(cg->iterations());
    } else {
      e.setZero();
    }
    x.head(ne) = e;
    x.tail(nh) = inv_d_h.cwiseProduct(b_h - curl0 * e);
    r = residual(b, bnorm, x);
  }
  return r;
}

StepSolver::StepSolver(const SparseOperator& M, const SparseOperator& N, const BlockOperatorA& A,
                       double tau, SolverOptions options)
    : impl_(std::make_unique<Impl>()) {
  if (!(options.lin_tol > 0.0)) throw std::invalid_argument("StepSolver: lin_tol must be positive");
  if (!(options.krylov_fraction > 0.0 && options.krylov_fraction <= 1.0)) {
    throw std::invalid_argument("StepSolver: krylov_fraction must lie in (0, 1]");
  }
  Impl& im = *impl_;
  im.options = options;
  im.s = step_matrix(M, N, A, tau);
  im.m_over_tau =
      SparseOperator(DofKind::combined, DofKind::combined, SparseMatrix((1.0 / tau) * M.matrix()));

  im.kind = options.kind;
  const auto ne = static_cast<Eigen::Index>(A.e_count());
  Eigen::VectorXd d;
  const bool diagonal = M.is_diagonal() && N.is_diagonal();
  if (diagonal) d = (1.0 / tau) * M.diagonal_values() + N.diagonal_values();
  const bool schur_ok = diagonal && (d.size() == 0 || d.minCoeff() > 0.0);
  if (im.kind == LinearSolverKind::automatic) {
    im.kind = schur_ok ? LinearSolverKind::schur_cg : LinearSolverKind::gmres;
  }
  if (im.kind == LinearSolverKind::schur_cg && !schur_ok) {
    throw std::invalid_argument(
        "StepSolver: schur_cg needs diagonal M, N with M / tau + N > 0 on every dof");
  }

  switch (im.kind) {
    case LinearSolverKind::schur_cg: {
      im.ne = ne;
      im.curl0 = A.curl0().matrix();
      im.d_e = d.head(ne);
      im.inv_d_h = d.tail(d.size() - ne).cwiseInverse();
      SparseMatrix scaled = im.inv_d_h.asDiagonal() * im.curl0;
      im.schur = SparseMatrix(im.curl0.transpose()) * scaled;
      im.schur.diagonal() += im.d_e;
      im.schur.makeCompressed();
      auto& cg = im.cg.emplace();
      cg.setMaxIterations(options.max_iterations);
      cg.compute(im.schur);
      if (cg.info() != Eigen::Success) {
        throw SolverError("StepSolver: CG setup failed", 0, 0.0);
      }
      break;
    }
    case LinearSolverKind::gmres: {
      auto& k = im.gmres.emplace();
      k.setTolerance(options.krylov_fraction * options.lin_tol);
      k.setMaxIterations(options.max_iterations);
      k.set_restart(options.restart);
      k.compute(im.s.matrix());
      if (k.info() != Eigen::Success) {
        throw SolverError("StepSolver: preconditioner setup failed", 0, 0.0);
      }
      break;
    }
    case LinearSolverKind::direct: {
      im.col_matrix.emplace(im.s.matrix());
      auto& lu = im.direct.emplace();
      lu.compute(*im.col_matrix);
      if (lu.info() != Eigen::Success) {
        throw SolverError("StepSolver: sparse LU factorization failed: " + lu.lastErrorMessage(),
                          0, 0.0);
      }
      break;
    }
    case LinearSolverKind::automatic:
      break;
  }
}

StepSolver::~StepSolver() = default;
StepSolver::StepSolver(StepSolver&&) noexcept = default;
StepSolver& StepSolver::operator=(StepSolver&&) noexcept = default;

const SparseOperator& StepSolver::matrix() const { return impl_->s; }
const SolverOptions& StepSolver::options() const { return impl_->options; }
LinearSolverKind StepSolver::kind() const { return impl_->kind; }

SolveResult StepSolver::solve(const Trajectory& forcing) const {
  const auto start = std::chrono::steady_clock::now();
  Impl& im = *impl_;
  const auto n = static_cast<Eigen::Index>(im.s.rows());

  SolveResult result;
  result.solution = Trajectory{forcing.tau, forcing.start_index, forcing.rho, {}};
  result.solution.states.reserve(forcing.size());
  result.per_step_linear_residuals.reserve(forcing.size());
  result.per_step_iterations.reserve(forcing.size());

  Eigen::VectorXd previous = Eigen::VectorXd::Zero(n);
  for (std::size_t step = 0; step < forcing.size(); ++step) {
    const auto& f = forcing.states[step];
    if (static_cast<Eigen::Index>(f.size()) != n) {
      throw DimensionError("StepSolver::solve: forcing state does not conform");
    }
    const Eigen::VectorXd b = f.values() + im.m_over_tau.matrix() * previous;
    const double bnorm = b.norm();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    double residual = 0.0;
    int iterations = 0;
    if (bnorm > 0.0) {
      x = previous;
      residual = im.solve_step(b, bnorm, x, iterations);
      if (!(residual <= im.options.lin_tol)) {
        throw SolverError("linear solve missed tolerance at step " + std::to_string(step) +
                              " (relative residual " + std::to_string(residual) + ")",
                          step, residual);
      }
    }
    result.per_step_linear_residuals.push_back(residual);
    result.per_step_iterations.push_back(iterations);
    result.solution.states.emplace_back(x, f.e_count());
    previous = std::move(x);
  }
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SolveResult solve_evolution(const EvolutionProblem& problem) {
  validate(problem);
  StepSolver solver(problem.M, problem.N, problem.A, problem.tau, problem.options);
  auto result = solver.solve(problem.forcing);
  result.solution.rho = problem.rho;
  return result;
}

double causal_prefix_norm(const Trajectory& solution, double cutoff, const Grid& grid) {
  double worst = 0.0;
  for (std::size_t n = 0; n < solution.size(); ++n) {
    if (solution.time(n) > cutoff) break;
    worst = std::max(worst, norm(solution.states[n], grid));
  }
  return worst;
}

double verify_causality(const EvolutionProblem& problem, double cutoff, const Grid& grid) {
  for (std::size_t n = 0; n < problem.forcing.size(); ++n) {
    if (problem.forcing.time(n) > cutoff) break;
    if (problem.forcing.states[n].values().squaredNorm() != 0.0) {
      throw ValidationError("verify_causality: forcing does not vanish before the cutoff");
    }
  }
  const auto result = solve_evolution(problem);
  return causal_prefix_norm(result.solution, cutoff, grid);
}

void write_trajectory_csv(const Trajectory& traj, const Grid& grid, std::ostream& os) {
  const double vol = grid.cell_volume();
  const auto old_precision = os.precision(17);
  os << "step,time,e_norm,h_norm\n";
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const auto& x = traj.states[n];
    os << traj.start_index + static_cast<long>(n) << ',' << traj.time(n) << ','
       << std::sqrt(vol * x.e().squaredNorm()) << ',' << std::sqrt(vol * x.h().squaredNorm()) << '\n';
  }
  os.precision(old_precision);
}

void write_trajectory_binary(const Trajectory& traj, std::ostream& os) {
  for (const auto& x : traj.states) {
    for (double v : x.values()) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      char bytes[8];
      std::memcpy(bytes, &bits, sizeof bytes);
      os.write(bytes, sizeof bytes);
    }
  }
}

}  // namespace eddylab

// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/SparseCore>

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "eddylab/mesh.hpp"

namespace eddylab {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// Real sparse matrix tagged with the DOF spaces it maps between.
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(DofKind rows, DofKind cols, SparseMatrix matrix);

  /// Duplicate (row, col) triplets are summed.
  static SparseOperator from_triplets(DofKind rows, DofKind cols, std::size_t nrows,
                                      std::size_t ncols, const std::vector<Triplet>& triplets);
  static SparseOperator diagonal(DofKind space, const Eigen::VectorXd& values);

  DofKind row_kind() const noexcept { return row_kind_; }
  DofKind col_kind() const noexcept { return col_kind_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(matrix_.cols()); }
  std::size_t nonzeros() const noexcept { return static_cast<std::size_t>(matrix_.nonZeros()); }
  const SparseMatrix& matrix() const noexcept { return matrix_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const;
  SparseOperator transpose() const;

  bool is_diagonal() const;
  /// Main diagonal (zero where no entry is stored).
  Eigen::VectorXd diagonal_values() const;

  /// One "row col value" line per stored entry, row-major, columns ascending.
  void write_coordinate_text(std::ostream& os) const;

 private:
  DofKind row_kind_ = DofKind::combined;
  DofKind col_kind_ = DofKind::combined;
  SparseMatrix matrix_;
};

/// Edge-to-face circulation stencil with entries +-1/h. Columns are the
/// retained E edges, rows all H faces of the grid.
SparseOperator assemble_curl0(const Grid& grid);

/// Nodes whose value is free under the electric condition: nodes in the
/// domain that touch no Gamma_1-eliminated edge. Returned in the DofSpace
/// used as the column space of assemble_gradient.
DofSpace free_nodes(const Grid& grid);

/// Node-to-edge difference operator on free nodes. Eliminated nodes carry
/// an implicit zero, so curl0 * gradient vanishes identically.
SparseOperator assemble_gradient(const Grid& grid);

/// The Maxwell spatial block [[0, -curl0^T], [curl0, 0]]. The inner product
/// weights both blocks by h^3, so the transpose gives the exact adjoint.
class BlockOperatorA {
 public:
  BlockOperatorA() = default;
  explicit BlockOperatorA(SparseOperator curl0);

  const SparseOperator& curl0() const noexcept { return curl0_; }
  std::size_t e_count() const noexcept { return curl0_.cols(); }
  std::size_t h_count() const noexcept { return curl0_.rows(); }
  std::size_t size() const noexcept { return e_count() + h_count(); }

  /// Combined-space sparse matrix of the block operator.
  SparseOperator assemble() const;

 private:
  SparseOperator curl0_;
};

BlockOperatorA assemble_A(const Grid& grid);

/// (-curl0^T h, curl0 e).
StateVector apply_A(const BlockOperatorA& A, const StateVector& u);

/// Samples u_n at t_n = (start_index + n) * tau, extended by zero before
/// start_index.
struct Trajectory {
  double tau = 1.0;
  long start_index = 0;
  double rho = 1.0;
  std::vector<StateVector> states;

  double time(std::size_t position) const {
    return static_cast<double>(start_index + static_cast<long>(position)) * tau;
  }
  std::size_t size() const noexcept { return states.size(); }

  /// Same time grid and weight, all-zero states of the given layout.
  Trajectory zeros_like() const;
};

/// Backward difference (u_n - u_{n-1}) / tau with zero history.
Trajectory d0_apply(const Trajectory& traj);
/// Causal cumulative sum tau * sum_{k<=n} u_k; inverse of d0_apply.
Trajectory d0_inverse_apply(const Trajectory& traj);

/// sum_n tau exp(-2 rho t_n) <u_n, v_n>_H.
double weighted_inner_product(const Trajectory& u, const Trajectory& v, const Grid& grid);
/// sqrt(sum_n tau exp(-2 rho t_n) |u_n|_H^2), left-endpoint rule.
double weighted_norm(const Trajectory& traj, const Grid& grid);

/// (1 - exp(-2 rho tau)) / (2 tau): the lower bound of <u, d0 u>_rho / |u|_rho^2
/// for the backward difference with zero history.
double discrete_rho(double rho, double tau);

/// <u, d0 u>_rho / |u|_rho^2. Throws std::invalid_argument for a zero trajectory.
double check_discrete_d0_positivity(const Trajectory& traj, const Grid& grid);

// Elementwise trajectory arithmetic (same grid and time layout).
Trajectory operator-(const Trajectory& a, const Trajectory& b);
Trajectory operator+(const Trajectory& a, const Trajectory& b);
Trajectory operator*(double alpha, const Trajectory& a);

}  // namespace eddylab

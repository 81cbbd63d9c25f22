// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "eddylab/discrete_ops.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "eddylab/errors.hpp"

namespace eddylab {

SparseOperator::SparseOperator(DofKind rows, DofKind cols, SparseMatrix matrix)
    : row_kind_(rows), col_kind_(cols), matrix_(std::move(matrix)) {
  matrix_.makeCompressed();
}

SparseOperator SparseOperator::from_triplets(DofKind rows, DofKind cols, std::size_t nrows,
                                             std::size_t ncols,
                                             const std::vector<Triplet>& triplets) {
  SparseMatrix m(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(ncols));
  for (const auto& t : triplets) {
    if (t.row() < 0 || t.col() < 0 || t.row() >= m.rows() || t.col() >= m.cols()) {
      throw DimensionError("SparseOperator: triplet index out of range");
    }
  }
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.prune(0.0);
  return SparseOperator(rows, cols, std::move(m));
}

SparseOperator SparseOperator::diagonal(DofKind space, const Eigen::VectorXd& values) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) t.emplace_back(i, i, values[i]);
  }
  const auto n = static_cast<std::size_t>(values.size());
  return from_triplets(space, space, n, n, t);
}

Eigen::VectorXd SparseOperator::apply(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != cols()) {
    throw DimensionError("SparseOperator::apply: size mismatch");
  }
  return matrix_ * x;
}

Eigen::VectorXd SparseOperator::apply_transpose(const Eigen::VectorXd& y) const {
  if (static_cast<std::size_t>(y.size()) != rows()) {
    throw DimensionError("SparseOperator::apply_transpose: size mismatch");
  }
  return matrix_.transpose() * y;
}

SparseOperator SparseOperator::transpose() const {
  return SparseOperator(col_kind_, row_kind_, SparseMatrix(matrix_.transpose()));
}

bool SparseOperator::is_diagonal() const {
  for (Eigen::Index r = 0; r < matrix_.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it) {
      if (it.row() != it.col() && it.value() != 0.0) return false;
    }
  }
  return true;
}

Eigen::VectorXd SparseOperator::diagonal_values() const { return matrix_.diagonal(); }

void SparseOperator::write_coordinate_text(std::ostream& os) const {
  const auto old_precision = os.precision(17);
  for (Eigen::Index r = 0; r < matrix_.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  os.precision(old_precision);
}

SparseOperator assemble_curl0(const Grid& grid) {
  const double inv_h = 1.0 / grid.spacing();
  const auto& faces = grid.h_space();
  const auto& edges = grid.e_space();
  std::vector<Triplet> t;
  t.reserve(4 * faces.size());
  for (std::size_t row = 0; row < faces.size(); ++row) {
    const Location& f = faces.location(row);
    const int b = (f.axis + 1) % 3;
    const int c = (f.axis + 2) % 3;
    // (curl E)_a = d_b E_c - d_c E_b, as a circulation around the face.
    Location ec_lo{c, f.node};
    Location ec_hi{c, f.node};
    ec_hi.node[b] += 1;
    Location eb_lo{b, f.node};
    Location eb_hi{b, f.node};
    eb_hi.node[c] += 1;
    const std::array<std::pair<Location, double>, 4> stencil{
        std::pair{ec_hi, inv_h}, std::pair{ec_lo, -inv_h}, std::pair{eb_hi, -inv_h},
        std::pair{eb_lo, inv_h}};
    for (const auto& [loc, value] : stencil) {
      if (const auto col = edges.find(loc)) {
        t.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(*col), value);
      }
    }
  }
  return SparseOperator::from_triplets(DofKind::h_faces, DofKind::e_edges, faces.size(),
                                       edges.size(), t);
}

DofSpace free_nodes(const Grid& grid) {
  const auto& cells = grid.cells();
  std::vector<Location> nodes;
  for (int k = 0; k <= cells[2]; ++k) {
    for (int j = 0; j <= cells[1]; ++j) {
      for (int i = 0; i <= cells[0]; ++i) {
        const Index3 n{i, j, k};
        bool in_domain = false;
        for (int dk = 0; dk < 2 && !in_domain; ++dk) {
          for (int dj = 0; dj < 2 && !in_domain; ++dj) {
            for (int di = 0; di < 2 && !in_domain; ++di) {
              in_domain = grid.masked(i - di, j - dj, k - dk);
            }
          }
        }
        if (!in_domain) continue;
        bool pinned = false;
        for (int a = 0; a < 3 && !pinned; ++a) {
          for (int d = 0; d < 2 && !pinned; ++d) {
            Location e{a, n};
            e.node[a] -= d;
            if (e.node[a] < 0 || e.node[a] >= cells[a]) continue;
            pinned = grid.edge_in_domain(e) && !grid.e_space().find(e);
          }
        }
        if (!pinned) nodes.push_back(Location{0, n});
      }
    }
  }
  return DofSpace(DofKind::nodes, cells, std::move(nodes));
}

SparseOperator assemble_gradient(const Grid& grid) {
  const DofSpace nodes = free_nodes(grid);
  const double inv_h = 1.0 / grid.spacing();
  const auto& edges = grid.e_space();
  std::vector<Triplet> t;
  t.reserve(2 * edges.size());
  for (std::size_t row = 0; row < edges.size(); ++row) {
    const Location& e = edges.location(row);
    Index3 head = e.node;
    head[e.axis] += 1;
    if (const auto col = nodes.find(Location{0, head})) {
      t.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(*col), inv_h);
    }
    if (const auto col = nodes.find(Location{0, e.node})) {
      t.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(*col), -inv_h);
    }
  }
  return SparseOperator::from_triplets(DofKind::e_edges, DofKind::nodes, edges.size(),
                                       nodes.size(), t);
}

BlockOperatorA::BlockOperatorA(SparseOperator curl0) : curl0_(std::move(curl0)) {
  if (curl0_.row_kind() != DofKind::h_faces || curl0_.col_kind() != DofKind::e_edges) {
    throw DimensionError("BlockOperatorA: curl0 must map E edges to H faces");
  }
}

SparseOperator BlockOperatorA::assemble() const {
  const auto ne = static_cast<Eigen::Index>(e_count());
  std::vector<Triplet> t;
  t.reserve(2 * curl0_.nonzeros());
  const auto& c = curl0_.matrix();
  for (Eigen::Index r = 0; r < c.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(c, r); it; ++it) {
      t.emplace_back(ne + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), ne + it.row(), -it.value());
    }
  }
  return SparseOperator::from_triplets(DofKind::combined, DofKind::combined, size(), size(), t);
}

BlockOperatorA assemble_A(const Grid& grid) { return BlockOperatorA(assemble_curl0(grid)); }

StateVector apply_A(const BlockOperatorA& A, const StateVector& u) {
  if (u.e_count() != A.e_count() || u.h_count() != A.h_count()) {
    throw DimensionError("apply_A: state does not conform to the operator");
  }
  StateVector out(Eigen::VectorXd(static_cast<Eigen::Index>(A.size())), A.e_count());
  out.e() = -(A.curl0().matrix().transpose() * u.h());
  out.h() = A.curl0().matrix() * u.e();
  return out;
}

Trajectory Trajectory::zeros_like() const {
  Trajectory out{tau, start_index, rho, {}};
  out.states.reserve(states.size());
  for (const auto& s : states) {
    out.states.emplace_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.size())),
                            s.e_count());
  }
  return out;
}

Trajectory d0_apply(const Trajectory& traj) {
  if (traj.states.empty()) throw std::invalid_argument("d0_apply: empty trajectory");
  Trajectory out{traj.tau, traj.start_index, traj.rho, {}};
  out.states.reserve(traj.size());
  const double inv_tau = 1.0 / traj.tau;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const auto& cur = traj.states[n];
    if (n == 0) {
      out.states.emplace_back(inv_tau * cur.values(), cur.e_count());
    } else {
      out.states.emplace_back(inv_tau * (cur.values() - traj.states[n - 1].values()),
                              cur.e_count());
    }
  }
  return out;
}

Trajectory d0_inverse_apply(const Trajectory& traj) {
  Trajectory out{traj.tau, traj.start_index, traj.rho, {}};
  out.states.reserve(traj.size());
  Eigen::VectorXd acc;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const auto& cur = traj.states[n];
    if (n == 0) {
      acc = traj.tau * cur.values();
    } else {
      acc += traj.tau * cur.values();
    }
    out.states.emplace_back(acc, cur.e_count());
  }
  return out;
}

double weighted_inner_product(const Trajectory& u, const Trajectory& v, const Grid& grid) {
  if (u.size() != v.size() || u.start_index != v.start_index || u.tau != v.tau) {
    throw DimensionError("weighted_inner_product: trajectories on different time grids");
  }
  double sum = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const double w = u.tau * std::exp(-2.0 * u.rho * u.time(n));
    sum += w * inner_product(u.states[n], v.states[n], grid);
  }
  return sum;
}

double weighted_norm(const Trajectory& traj, const Grid& grid) {
  return std::sqrt(weighted_inner_product(traj, traj, grid));
}

double discrete_rho(double rho, double tau) {
  return -std::expm1(-2.0 * rho * tau) / (2.0 * tau);
}

double check_discrete_d0_positivity(const Trajectory& traj, const Grid& grid) {
  const double denom = weighted_inner_product(traj, traj, grid);
  if (!(denom > 0.0)) {
    throw std::invalid_argument("check_discrete_d0_positivity: zero trajectory");
  }
  return weighted_inner_product(traj, d0_apply(traj), grid) / denom;
}

namespace {

template <typename Op>
Trajectory combine(const Trajectory& a, const Trajectory& b, Op op) {
  if (a.size() != b.size() || a.start_index != b.start_index) {
    throw DimensionError("trajectory arithmetic: time grids differ");
  }
  Trajectory out{a.tau, a.start_index, a.rho, {}};
  out.states.reserve(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (a.states[n].size() != b.states[n].size()) {
      throw DimensionError("trajectory arithmetic: state sizes differ");
    }
    out.states.emplace_back(op(a.states[n].values(), b.states[n].values()),
                            a.states[n].e_count());
  }
  return out;
}

}  // namespace

Trajectory operator-(const Trajectory& a, const Trajectory& b) {
  return combine(a, b, [](const auto& x, const auto& y) -> Eigen::VectorXd { return x - y; });
}

Trajectory operator+(const Trajectory& a, const Trajectory& b) {
  return combine(a, b, [](const auto& x, const auto& y) -> Eigen::VectorXd { return x + y; });
}

Trajectory operator*(double alpha, const Trajectory& a) {
  Trajectory out{a.tau, a.start_index, a.rho, {}};
  out.states.reserve(a.size());
  for (const auto& s : a.states) out.states.emplace_back(alpha * s.values(), s.e_count());
  return out;
}

}  // namespace eddylab

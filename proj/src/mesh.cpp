// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "eddylab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eddylab/errors.hpp"

namespace eddylab {

namespace {

std::size_t slot_count(const Index3& cells) {
  return 3u * static_cast<std::size_t>(cells[0] + 1) * static_cast<std::size_t>(cells[1] + 1) *
         static_cast<std::size_t>(cells[2] + 1);
}

std::size_t slot_of(const Index3& cells, const Location& loc) {
  const auto nx = static_cast<std::size_t>(cells[0] + 1);
  const auto ny = static_cast<std::size_t>(cells[1] + 1);
  const auto nz = static_cast<std::size_t>(cells[2] + 1);
  return ((static_cast<std::size_t>(loc.axis) * nz + static_cast<std::size_t>(loc.node[2])) * ny +
          static_cast<std::size_t>(loc.node[1])) *
             nx +
         static_cast<std::size_t>(loc.node[0]);
}

bool node_in_range(const Index3& cells, const Index3& n) {
  for (int d = 0; d < 3; ++d) {
    if (n[d] < 0 || n[d] > cells[d]) return false;
  }
  return true;
}

// Edge (a, n) exists if n + e_a is still a node.
bool edge_exists(const Index3& cells, const Location& e) {
  return node_in_range(cells, e.node) && e.node[e.axis] < cells[e.axis];
}

// Face (a, n) exists if n + e_b + e_c is still a node.
bool face_exists(const Index3& cells, const Location& f) {
  if (!node_in_range(cells, f.node)) return false;
  const int b = (f.axis + 1) % 3;
  const int c = (f.axis + 2) % 3;
  return f.node[b] < cells[b] && f.node[c] < cells[c];
}

std::string describe(const Location& loc) {
  std::ostringstream os;
  os << "(axis " << loc.axis << ", node " << loc.node[0] << "," << loc.node[1] << ","
     << loc.node[2] << ")";
  return os.str();
}

}  // namespace

const char* to_string(DofKind kind) {
  switch (kind) {
    case DofKind::e_edges:
      return "E_edges";
    case DofKind::h_faces:
      return "H_faces";
    case DofKind::nodes:
      return "nodes";
    case DofKind::combined:
      return "combined";
  }
  return "unknown";
}

DofSpace::DofSpace(DofKind kind, Index3 cells, std::vector<Location> locations)
    : kind_(kind), cells_(cells), locations_(std::move(locations)),
      lookup_(slot_count(cells), -1) {
  for (std::size_t dof = 0; dof < locations_.size(); ++dof) {
    auto& entry = lookup_.at(slot(locations_[dof]));
    if (entry >= 0) {
      throw ValidationError("DofSpace: duplicate location " + describe(locations_[dof]));
    }
    entry = static_cast<std::int64_t>(dof);
  }
}

std::size_t DofSpace::slot(const Location& loc) const { return slot_of(cells_, loc); }

std::optional<std::size_t> DofSpace::find(const Location& loc) const {
  if (loc.axis < 0 || loc.axis > 2 || !node_in_range(cells_, loc.node)) return std::nullopt;
  const auto v = lookup_[slot(loc)];
  if (v < 0) return std::nullopt;
  return static_cast<std::size_t>(v);
}

BoundarySplit BoundarySplit::all(BoundaryLabel label) {
  BoundarySplit split;
  split.box_sides.fill(label);
  split.interior = label;
  return split;
}

std::size_t Grid::cell_index(int i, int j, int k) const {
  return (static_cast<std::size_t>(k) * static_cast<std::size_t>(cells_[1]) +
          static_cast<std::size_t>(j)) *
             static_cast<std::size_t>(cells_[0]) +
         static_cast<std::size_t>(i);
}

bool Grid::masked(int i, int j, int k) const {
  if (i < 0 || j < 0 || k < 0 || i >= cells_[0] || j >= cells_[1] || k >= cells_[2]) {
    return false;
  }
  return mask_[cell_index(i, j, k)] != 0;
}

std::vector<Index3> Grid::edge_cells(const Location& edge) const {
  const int b = (edge.axis + 1) % 3;
  const int c = (edge.axis + 2) % 3;
  std::vector<Index3> out;
  out.reserve(4);
  for (int db = 0; db < 2; ++db) {
    for (int dc = 0; dc < 2; ++dc) {
      Index3 cell = edge.node;
      cell[b] -= db;
      cell[c] -= dc;
      if (cell[0] >= 0 && cell[1] >= 0 && cell[2] >= 0 && cell[0] < cells_[0] &&
          cell[1] < cells_[1] && cell[2] < cells_[2]) {
        out.push_back(cell);
      }
    }
  }
  return out;
}

std::vector<Index3> Grid::face_cells(const Location& face) const {
  std::vector<Index3> out;
  out.reserve(2);
  for (int d = 1; d >= 0; --d) {
    Index3 cell = face.node;
    cell[face.axis] -= d;
    if (cell[face.axis] >= 0 && cell[face.axis] < cells_[face.axis]) out.push_back(cell);
  }
  return out;
}

bool Grid::edge_in_domain(const Location& edge) const {
  if (!edge_exists(cells_, edge)) return false;
  for (const auto& c : edge_cells(edge)) {
    if (masked(c)) return true;
  }
  return false;
}

bool Grid::face_in_domain(const Location& face) const {
  if (!face_exists(cells_, face)) return false;
  for (const auto& c : face_cells(face)) {
    if (masked(c)) return true;
  }
  return false;
}

bool Grid::is_boundary_face(const Location& face) const {
  if (!face_exists(cells_, face)) return false;
  Index3 lower = face.node;
  lower[face.axis] -= 1;
  return masked(lower) != masked(face.node);
}

std::optional<BoundaryLabel> Grid::face_label(const Location& face) const {
  if (!is_boundary_face(face)) return std::nullopt;
  const auto pinned = override_labels_[slot_of(cells_, face)];
  if (pinned >= 0) return static_cast<BoundaryLabel>(pinned);
  Index3 lower = face.node;
  lower[face.axis] -= 1;
  // Unmasked side outside the box selects a box side label.
  if (!masked(face.node) && face.node[face.axis] == cells_[face.axis]) {
    return split_.box_sides[static_cast<std::size_t>(2 * face.axis + 1)];
  }
  if (!masked(lower) && face.node[face.axis] == 0) {
    return split_.box_sides[static_cast<std::size_t>(2 * face.axis)];
  }
  return split_.interior;
}

bool Grid::edge_on_electric_boundary(const Location& edge) const {
  if (!edge_exists(cells_, edge)) return false;
  const int b = (edge.axis + 1) % 3;
  const int c = (edge.axis + 2) % 3;
  // The four faces containing the edge: normal b at n and n - e_c,
  // normal c at n and n - e_b.
  std::array<Location, 4> faces{Location{b, edge.node}, Location{b, edge.node},
                                Location{c, edge.node}, Location{c, edge.node}};
  faces[1].node[c] -= 1;
  faces[3].node[b] -= 1;
  for (const auto& f : faces) {
    if (!face_exists(cells_, f)) continue;
    const auto label = face_label(f);
    if (label && *label == BoundaryLabel::electric) return true;
  }
  return false;
}

Grid build_grid(Index3 cells, double spacing, std::vector<std::uint8_t> mask,
                BoundarySplit split) {
  for (int d = 0; d < 3; ++d) {
    if (cells[d] < 1) throw DomainError("build_grid: cells_per_axis components must be >= 1");
  }
  if (!(spacing > 0.0)) throw DomainError("build_grid: spacing must be positive");
  const std::size_t ncell = static_cast<std::size_t>(cells[0]) *
                            static_cast<std::size_t>(cells[1]) *
                            static_cast<std::size_t>(cells[2]);
  if (mask.size() != ncell) {
    throw DomainError("build_grid: mask has " + std::to_string(mask.size()) +
                      " entries, expected " + std::to_string(ncell));
  }
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) {
    throw DomainError("build_grid: domain mask is empty");
  }

  Grid grid;
  grid.cells_ = cells;
  grid.spacing_ = spacing;
  grid.mask_ = std::move(mask);
  grid.split_ = std::move(split);
  grid.override_labels_.assign(slot_count(cells), -1);
  for (const auto& [face, label] : grid.split_.overrides) {
    if (face.axis < 0 || face.axis > 2 || !grid.is_boundary_face(face)) {
      throw ValidationError("build_grid: boundary override " + describe(face) +
                            " is not a boundary face");
    }
    auto& entry = grid.override_labels_[slot_of(cells, face)];
    const auto value = static_cast<std::int8_t>(label);
    if (entry >= 0 && entry != value) {
      throw ValidationError("build_grid: conflicting boundary overrides for face " +
                            describe(face));
    }
    entry = value;
  }

  // Enumeration order: axis, then k, j, i (i fastest).
  std::vector<Location> edges;
  std::vector<Location> faces;
  for (int a = 0; a < 3; ++a) {
    for (int k = 0; k <= cells[2]; ++k) {
      for (int j = 0; j <= cells[1]; ++j) {
        for (int i = 0; i <= cells[0]; ++i) {
          const Location loc{a, {i, j, k}};
          if (grid.edge_in_domain(loc) && !grid.edge_on_electric_boundary(loc)) {
            edges.push_back(loc);
          }
          if (grid.face_in_domain(loc)) faces.push_back(loc);
        }
      }
    }
  }
  grid.e_space_ = DofSpace(DofKind::e_edges, cells, std::move(edges));
  grid.h_space_ = DofSpace(DofKind::h_faces, cells, std::move(faces));
  return grid;
}

Grid build_grid(Index3 cells, double spacing, BoundarySplit split) {
  std::size_t n = 1;
  for (int d = 0; d < 3; ++d) n *= static_cast<std::size_t>(std::max(cells[d], 0));
  return build_grid(cells, spacing, std::vector<std::uint8_t>(n, 1), std::move(split));
}

StateVector::StateVector(const Grid& grid)
    : values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()))),
      e_count_(grid.e_count()) {}

StateVector::StateVector(Eigen::VectorXd values, std::size_t e_count)
    : values_(std::move(values)), e_count_(e_count) {
  if (e_count_ > static_cast<std::size_t>(values_.size())) {
    throw DimensionError("StateVector: E block larger than the state");
  }
}

double inner_product(const StateVector& x, const StateVector& y, const Grid& grid) {
  if (!x.conforms(grid) || !y.conforms(grid)) {
    throw DimensionError("inner_product: state does not conform to the grid");
  }
  return grid.cell_volume() * x.values().dot(y.values());
}

double norm(const StateVector& x, const Grid& grid) {
  return std::sqrt(inner_product(x, x, grid));
}

}  // namespace eddylab

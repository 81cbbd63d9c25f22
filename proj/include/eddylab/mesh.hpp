// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Voxelized domain with a staggered (Yee) placement of unknowns:
// the electric field lives on cell edges, the magnetic field on cell faces.
//
// Geometric locations are addressed by an axis and the integer node index
// of the lower corner:
//   edge (a, n)  runs from node n to node n + e_a
//   face (a, n)  has normal e_a and spans n + [0,1] e_b + [0,1] e_c
// with (a, b, c) a cyclic permutation of (0, 1, 2).

#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace eddylab {

using Index3 = std::array<int, 3>;

/// Edge or face address. `axis` is the edge direction or the face normal.
struct Location {
  int axis = 0;
  Index3 node{0, 0, 0};

  friend bool operator==(const Location&, const Location&) = default;
};

enum class DofKind { e_edges, h_faces, nodes, combined };

const char* to_string(DofKind kind);

/// Bijection between the retained geometric locations of one kind and
/// the contiguous range 0..size()-1.
class DofSpace {
 public:
  DofSpace() = default;
  DofSpace(DofKind kind, Index3 cells, std::vector<Location> locations);

  DofKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return locations_.size(); }
  const Location& location(std::size_t dof) const { return locations_.at(dof); }
  const std::vector<Location>& locations() const noexcept { return locations_; }

  /// DOF index of `loc`, or nullopt if the location carries no DOF.
  std::optional<std::size_t> find(const Location& loc) const;

 private:
  std::size_t slot(const Location& loc) const;

  DofKind kind_ = DofKind::e_edges;
  Index3 cells_{0, 0, 0};
  std::vector<Location> locations_;
  std::vector<std::int64_t> lookup_;
};

/// Gamma_1 carries the electric condition (tangential E = 0),
/// Gamma_2 the magnetic one.
enum class BoundaryLabel { electric, magnetic };

/// Labels for the boundary faces of the domain. Box sides are ordered
/// -x, +x, -y, +y, -z, +z. `interior` applies to faces between a masked and
/// an unmasked cell inside the box. Overrides pin individual faces and must
/// name actual boundary faces.
struct BoundarySplit {
  std::array<BoundaryLabel, 6> box_sides{
      BoundaryLabel::electric, BoundaryLabel::electric, BoundaryLabel::electric,
      BoundaryLabel::electric, BoundaryLabel::electric, BoundaryLabel::electric};
  BoundaryLabel interior = BoundaryLabel::electric;
  std::vector<std::pair<Location, BoundaryLabel>> overrides;

  static BoundarySplit all(BoundaryLabel label);
};

/// Uniform cubic voxel grid restricted to a cell mask. Immutable once built.
class Grid {
 public:
  const Index3& cells() const noexcept { return cells_; }
  double spacing() const noexcept { return spacing_; }
  double cell_volume() const noexcept { return spacing_ * spacing_ * spacing_; }
  std::size_t cell_count() const noexcept { return mask_.size(); }
  std::size_t cell_index(int i, int j, int k) const;

  /// False outside the box.
  bool masked(int i, int j, int k) const;
  bool masked(const Index3& c) const { return masked(c[0], c[1], c[2]); }
  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
  const BoundarySplit& boundary_split() const noexcept { return split_; }

  const DofSpace& e_space() const noexcept { return e_space_; }
  const DofSpace& h_space() const noexcept { return h_space_; }
  std::size_t e_count() const noexcept { return e_space_.size(); }
  std::size_t h_count() const noexcept { return h_space_.size(); }
  /// Size of the combined (E, H) state.
  std::size_t size() const noexcept { return e_count() + h_count(); }

  /// Cells sharing the edge (up to four), masked or not, inside the box.
  std::vector<Index3> edge_cells(const Location& edge) const;
  /// The two cells separated by the face, inside the box.
  std::vector<Index3> face_cells(const Location& face) const;

  bool edge_in_domain(const Location& edge) const;
  bool face_in_domain(const Location& face) const;
  bool is_boundary_face(const Location& face) const;
  /// Label of a boundary face; nullopt for non-boundary faces.
  std::optional<BoundaryLabel> face_label(const Location& face) const;
  /// True for edges on the boundary that touch a Gamma_1 face; these carry
  /// no E unknown.
  bool edge_on_electric_boundary(const Location& edge) const;

  friend Grid build_grid(Index3 cells, double spacing, std::vector<std::uint8_t> mask,
                         BoundarySplit split);

 private:
  Grid() = default;

  Index3 cells_{0, 0, 0};
  double spacing_ = 1.0;
  std::vector<std::uint8_t> mask_;
  BoundarySplit split_;
  std::vector<std::int8_t> override_labels_;  // per face slot; -1 = none
  DofSpace e_space_;
  DofSpace h_space_;
};

/// Builds the grid and its DOF spaces. Tangential edges on Gamma_1 are
/// dropped from the E space. Mask ordering is i fastest, then j, then k.
/// Throws DomainError on bad extents or an empty mask and ValidationError
/// on overrides that do not name boundary faces.
Grid build_grid(Index3 cells, double spacing, std::vector<std::uint8_t> mask,
                BoundarySplit split = {});

/// Full-box convenience overload.
Grid build_grid(Index3 cells, double spacing, BoundarySplit split = {});

/// Discrete (E, H) field. Stored contiguously with the E block first so the
/// combined vector can be handed directly to the linear algebra.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(const Grid& grid);
  StateVector(Eigen::VectorXd values, std::size_t e_count);

  std::size_t e_count() const noexcept { return e_count_; }
  std::size_t h_count() const noexcept { return static_cast<std::size_t>(values_.size()) - e_count_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

  auto e() { return values_.head(static_cast<Eigen::Index>(e_count_)); }
  auto e() const { return values_.head(static_cast<Eigen::Index>(e_count_)); }
  auto h() { return values_.tail(static_cast<Eigen::Index>(h_count())); }
  auto h() const { return values_.tail(static_cast<Eigen::Index>(h_count())); }

  Eigen::VectorXd& values() noexcept { return values_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }

  bool conforms(const Grid& grid) const noexcept {
    return e_count_ == grid.e_count() && h_count() == grid.h_count();
  }

 private:
  Eigen::VectorXd values_;
  std::size_t e_count_ = 0;
};

/// h^3 * (<e_x, e_y> + <h_x, h_y>).
double inner_product(const StateVector& x, const StateVector& y, const Grid& grid);
double norm(const StateVector& x, const Grid& grid);

}  // namespace eddylab

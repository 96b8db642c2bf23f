#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <json.hpp>

namespace pfl {

using Point = std::array<double, 3>;
using Index3 = std::array<std::size_t, 3>;

// Uniform node lattice in 1 to 3 dimensions. Unused axes carry a single node.
// Flat indices are row-major with axis 0 slowest.
struct Grid {
  int dim = 1;
  Index3 nodes{2, 1, 1};
  double spacing = 1.0;
  Point origin{0.0, 0.0, 0.0};

  // Validates dim, spacing and the node counts (at least two per used axis).
  static Grid make(int dim, Index3 nodes, double spacing, Point origin);

  std::size_t node_count() const { return nodes[0] * nodes[1] * nodes[2]; }
  // Cells along an axis; unused axes report one pseudo-cell so products work.
  std::size_t cells(int axis) const { return axis < dim ? nodes[axis] - 1 : 1; }
  std::size_t cell_count() const { return cells(0) * cells(1) * cells(2); }
  double cell_volume() const;

  std::size_t index(std::size_t i, std::size_t j = 0, std::size_t k = 0) const {
    return (i * nodes[1] + j) * nodes[2] + k;
  }
  std::size_t index(const Index3& m) const { return index(m[0], m[1], m[2]); }
  Index3 unravel(std::size_t flat) const;

  std::size_t cell_index(const Index3& c) const { return (c[0] * cells(1) + c[1]) * cells(2) + c[2]; }
  Index3 cell_unravel(std::size_t flat) const;
  // Node index of the lowest corner of a cell.
  std::size_t cell_base_node(std::size_t cell) const { return index(cell_unravel(cell)); }

  double coord(int axis, std::size_t i) const { return origin[axis] + static_cast<double>(i) * spacing; }
  double upper(int axis) const { return coord(axis, nodes[axis] - 1); }
  Point node_position(std::size_t flat) const;
  Point cell_center(std::size_t cell) const;

  // Flat-index offsets of the 2^dim cell corners, bit a of the corner id set
  // meaning the upper node along axis a.
  std::vector<std::size_t> corner_offsets() const;
  std::size_t stride(int axis) const;

  bool operator==(const Grid&) const = default;
};

enum class Side { Low = 0, High = 1 };
constexpr int face_id(int axis, Side side) { return 2 * axis + static_cast<int>(side); }

struct BoundaryData;

// Node values on the face come from sampled boundary data. A null pointer
// means the data is supplied later, by the solve that uses the grid.
struct DirichletData {
  std::shared_ptr<const BoundaryData> data;
};
struct DirichletConstant {
  double value = 1.0;
};
struct NeumannZero {};
struct Free {};

using FaceRole = std::variant<DirichletData, DirichletConstant, NeumannZero, Free>;

struct FaceRoles {
  std::array<FaceRole, 6> faces{Free{}, Free{}, Free{}, Free{}, Free{}, Free{}};

  static FaceRoles all(const FaceRole& role);
  const FaceRole& at(int axis, Side side) const { return faces[face_id(axis, side)]; }
  FaceRole& at(int axis, Side side) { return faces[face_id(axis, side)]; }
  bool prescribes(int axis, Side side) const;
};

// Nodes whose values are fixed by a Dirichlet face, in the given grid.
std::vector<char> prescribed_mask(const Grid& grid, const FaceRoles& roles);

// Truncated half-space [-R, R]^{n-1} x [0, R]. The last axis is the normal
// coordinate; its low face carries the boundary data and every other face is
// pinned to the far-field value.
struct HalfSpaceDomain {
  Grid grid;
  FaceRoles roles;
  double far_value = 1.0;
  double radius = 0.0;

  int n() const { return grid.dim; }
  int normal_axis() const { return grid.dim - 1; }
};

inline constexpr std::size_t kDefaultNodeBudget = 40'000'000;

// Throws std::invalid_argument on bad parameters and ResourceExhausted when
// the node count would exceed the budget.
HalfSpaceDomain make_half_space_grid(int n, double radius, double spacing, double far_value = 1.0,
                                     std::shared_ptr<const BoundaryData> data = nullptr,
                                     std::size_t node_budget = kDefaultNodeBudget);

// Upper bound theta^4 * 2 * int_R^inf e^{-2r} r^{n-1} dr for the energy of the
// exponential supersolution outside the ball of radius R.
double tail_bound(int n, double theta, double radius);
// Smallest R with tail_bound(n, theta, R) <= rel_tol * target_energy.
double truncation_radius(int n, double theta, double target_energy, double rel_tol = 1e-6);

nlohmann::json to_json(const Grid& grid);
Grid grid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FaceRoles& roles);
// Boundary data pointers are not serialized; DirichletData faces come back empty.
FaceRoles roles_from_json(const nlohmann::json& j);

}  // namespace pfl

#include "pfl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pfl/boundary_data.hpp"
#include "pfl/errors.hpp"

namespace pfl {

Grid Grid::make(int dim, Index3 nodes, double spacing, Point origin) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw std::invalid_argument("grid spacing must be positive and finite");
  for (int a = 0; a < 3; ++a) {
    if (a < dim && nodes[a] < 3)
      throw std::invalid_argument("every grid axis needs at least 3 nodes");
    if (a >= dim && nodes[a] != 1)
      throw std::invalid_argument("unused grid axes must carry exactly one node");
    if (!std::isfinite(origin[a])) throw std::invalid_argument("grid origin must be finite");
  }
  Grid g;
  g.dim = dim;
  g.nodes = nodes;
  g.spacing = spacing;
  g.origin = origin;
  for (int a = dim; a < 3; ++a) g.origin[a] = 0.0;
  return g;
}

double Grid::cell_volume() const { return std::pow(spacing, dim); }

Index3 Grid::unravel(std::size_t flat) const {
  Index3 m{};
  m[2] = flat % nodes[2];
  flat /= nodes[2];
  m[1] = flat % nodes[1];
  m[0] = flat / nodes[1];
  return m;
}

Index3 Grid::cell_unravel(std::size_t flat) const {
  Index3 c{};
  c[2] = flat % cells(2);
  flat /= cells(2);
  c[1] = flat % cells(1);
  c[0] = flat / cells(1);
  return c;
}

Point Grid::node_position(std::size_t flat) const {
  const Index3 m = unravel(flat);
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) p[a] = coord(a, m[a]);
  return p;
}

Point Grid::cell_center(std::size_t cell) const {
  const Index3 c = cell_unravel(cell);
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) p[a] = origin[a] + (static_cast<double>(c[a]) + 0.5) * spacing;
  return p;
}

std::size_t Grid::stride(int axis) const {
  if (axis == 0) return nodes[1] * nodes[2];
  if (axis == 1) return nodes[2];
  return 1;
}

std::vector<std::size_t> Grid::corner_offsets() const {
  std::vector<std::size_t> out(std::size_t{1} << dim, 0);
  for (std::size_t c = 0; c < out.size(); ++c)
    for (int a = 0; a < dim; ++a)
      if (c & (std::size_t{1} << a)) out[c] += stride(a);
  return out;
}

FaceRoles FaceRoles::all(const FaceRole& role) {
  FaceRoles r;
  r.faces.fill(role);
  return r;
}

bool FaceRoles::prescribes(int axis, Side side) const {
  const FaceRole& f = at(axis, side);
  return std::holds_alternative<DirichletData>(f) || std::holds_alternative<DirichletConstant>(f);
}

std::vector<char> prescribed_mask(const Grid& grid, const FaceRoles& roles) {
  std::vector<char> mask(grid.node_count(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const Index3 m = grid.unravel(i);
    for (int a = 0; a < grid.dim; ++a) {
      if ((m[a] == 0 && roles.prescribes(a, Side::Low)) ||
          (m[a] + 1 == grid.nodes[a] && roles.prescribes(a, Side::High))) {
        mask[i] = 1;
        break;
      }
    }
  }
  return mask;
}

HalfSpaceDomain make_half_space_grid(int n, double radius, double spacing, double far_value,
                                     std::shared_ptr<const BoundaryData> data,
                                     std::size_t node_budget) {
  if (n < 1 || n > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw std::invalid_argument("spacing must be positive and finite");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("truncation radius must be positive and finite");
  if (radius < 4.0 * spacing) throw std::invalid_argument("truncation radius must be at least 4 spacings");
  if (!std::isfinite(far_value)) throw std::invalid_argument("far value must be finite");

  const double steps = std::ceil(radius / spacing - 1e-9);
  double count = steps + 1.0;
  for (int a = 0; a + 1 < n; ++a) count *= 2.0 * steps + 1.0;
  if (count > static_cast<double>(node_budget))
    throw ResourceExhausted("half-space grid needs " + std::to_string(static_cast<long long>(count)) +
                            " nodes, budget is " + std::to_string(node_budget));

  const auto m = static_cast<std::size_t>(steps);
  Index3 nodes{1, 1, 1};
  Point origin{0.0, 0.0, 0.0};
  for (int a = 0; a + 1 < n; ++a) {
    nodes[a] = 2 * m + 1;
    origin[a] = -steps * spacing;
  }
  nodes[n - 1] = m + 1;

  HalfSpaceDomain d;
  d.grid = Grid::make(n, nodes, spacing, origin);
  d.roles = FaceRoles::all(Free{});
  for (int a = 0; a < n; ++a) {
    d.roles.at(a, Side::Low) = DirichletConstant{far_value};
    d.roles.at(a, Side::High) = DirichletConstant{far_value};
  }
  d.roles.at(n - 1, Side::Low) = DirichletData{data};
  d.far_value = far_value;
  d.radius = steps * spacing;
  if (data && !data->matches(d.grid))
    throw GridMismatch("boundary data does not match the boundary face of the grid");
  return d;
}

double tail_bound(int n, double theta, double radius) {
  if (n < 1 || n > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
  const double t2 = theta * theta;
  const double amp = std::max(t2, t2 * t2);
  double poly = 1.0;
  if (n == 2) poly = radius + 0.5;
  if (n == 3) poly = radius * radius + radius + 0.5;
  return amp * poly * std::exp(-2.0 * radius);
}

double truncation_radius(int n, double theta, double target_energy, double rel_tol) {
  if (!(target_energy > 0.0) || !(rel_tol > 0.0))
    throw std::invalid_argument("target energy and tolerance must be positive");
  const double goal = rel_tol * target_energy;
  if (tail_bound(n, theta, 0.0) <= goal) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (tail_bound(n, theta, hi) > goal) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw std::invalid_argument("tail bound cannot reach the requested tolerance");
  }
  // The bound is strictly decreasing in R, so bisection finds the crossing.
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (tail_bound(n, theta, mid) > goal)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

nlohmann::json to_json(const Grid& grid) {
  return {{"dim", grid.dim},
          {"nodes", {grid.nodes[0], grid.nodes[1], grid.nodes[2]}},
          {"spacing", grid.spacing},
          {"origin", {grid.origin[0], grid.origin[1], grid.origin[2]}}};
}

Grid grid_from_json(const nlohmann::json& j) {
  const auto nodes = j.at("nodes").get<std::vector<std::size_t>>();
  const auto origin = j.at("origin").get<std::vector<double>>();
  if (nodes.size() != 3 || origin.size() != 3)
    throw std::invalid_argument("grid nodes and origin need three entries");
  return Grid::make(j.at("dim").get<int>(), {nodes[0], nodes[1], nodes[2]}, j.at("spacing").get<double>(),
                    {origin[0], origin[1], origin[2]});
}

nlohmann::json to_json(const FaceRoles& roles) {
  nlohmann::json out = nlohmann::json::array();
  for (const FaceRole& f : roles.faces) {
    if (std::holds_alternative<DirichletData>(f))
      out.push_back({{"role", "dirichlet_data"}});
    else if (const auto* c = std::get_if<DirichletConstant>(&f))
      out.push_back({{"role", "dirichlet_constant"}, {"value", c->value}});
    else if (std::holds_alternative<NeumannZero>(f))
      out.push_back({{"role", "neumann_zero"}});
    else
      out.push_back({{"role", "free"}});
  }
  return out;
}

FaceRoles roles_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 6) throw std::invalid_argument("face roles need six entries");
  FaceRoles r;
  for (std::size_t i = 0; i < 6; ++i) {
    const std::string role = j[i].at("role").get<std::string>();
    if (role == "dirichlet_data")
      r.faces[i] = DirichletData{};
    else if (role == "dirichlet_constant")
      r.faces[i] = DirichletConstant{j[i].at("value").get<double>()};
    else if (role == "neumann_zero")
      r.faces[i] = NeumannZero{};
    else if (role == "free")
      r.faces[i] = Free{};
    else
      throw std::invalid_argument("unknown face role '" + role + "'");
  }
  return r;
}

}  // namespace pfl

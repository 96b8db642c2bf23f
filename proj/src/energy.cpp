#include "pfl/energy.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pfl {

double c0() { return 2.0 * std::sqrt(2.0) / 3.0; }

namespace {

void require_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be positive and finite");
}

// Corner pairs of a cell forming the edges parallel to each axis.
std::vector<std::vector<std::pair<std::size_t, std::size_t>>> cell_edges(const Grid& g) {
  const auto corners = g.corner_offsets();
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> edges(g.dim);
  for (int a = 0; a < g.dim; ++a)
    for (std::size_t c = 0; c < corners.size(); ++c)
      if (!(c & (std::size_t{1} << a))) edges[a].emplace_back(corners[c], corners[c | (std::size_t{1} << a)]);
  return edges;
}

// Per cell: sum over axes of the edge-mean of squared difference quotients,
// and the corner mean of W.
template <class Visit>
void for_each_cell(const ScalarField& u, const Potential& p, Visit&& visit) {
  const Grid& g = u.grid;
  const auto corners = g.corner_offsets();
  const auto edges = cell_edges(g);
  const double inv_h2 = 1.0 / (g.spacing * g.spacing);
  const double corner_w = 1.0 / static_cast<double>(corners.size());
  std::vector<double> wv(u.size());
  for (std::size_t i = 0; i < wv.size(); ++i) wv[i] = p.value(u.values[i]);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const std::size_t base = g.cell_base_node(c);
    double grad = 0.0;
    for (const auto& axis_edges : edges) {
      double s = 0.0;
      for (const auto& [lo, hi] : axis_edges) {
        const double d = u.values[base + hi] - u.values[base + lo];
        s += d * d;
      }
      grad += s / static_cast<double>(axis_edges.size());
    }
    double wm = 0.0;
    for (std::size_t off : corners) wm += wv[base + off];
    visit(c, grad * inv_h2, wm * corner_w);
  }
}

double second_difference(const ScalarField& u, std::size_t i, std::size_t k, std::size_t n_axis,
                         std::size_t s, const FaceRole& low, const FaceRole& high) {
  const auto& v = u.values;
  if (k > 0 && k + 1 < n_axis) return v[i - s] - 2.0 * v[i] + v[i + s];
  const bool at_low = k == 0;
  const FaceRole& role = at_low ? low : high;
  // Steps into the domain from the face.
  auto in = [&](std::size_t j) { return at_low ? v[i + j * s] : v[i - j * s]; };
  if (std::holds_alternative<NeumannZero>(role)) return 2.0 * in(1) - 2.0 * in(0);
  if (n_axis >= 4) return 2.0 * in(0) - 5.0 * in(1) + 4.0 * in(2) - in(3);
  return in(0) - 2.0 * in(1) + in(2);
}

double sum_cells(const CellField& f) { return stable_sum(f.values) * f.grid.cell_volume(); }

}  // namespace

ScalarField laplacian(const ScalarField& u) {
  const Grid& g = u.grid;
  require_finite(u.values, "laplacian input");
  ScalarField out(g, u.roles, 0.0);
  const auto fixed = prescribed_mask(g, u.roles);
  const double inv_h2 = 1.0 / (g.spacing * g.spacing);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (fixed[i]) continue;
    const Index3 m = g.unravel(i);
    double acc = 0.0;
    for (int a = 0; a < g.dim; ++a)
      acc += second_difference(u, i, m[a], g.nodes[a], g.stride(a), u.roles.at(a, Side::Low),
                               u.roles.at(a, Side::High));
    out.values[i] = acc * inv_h2;
  }
  return out;
}

DensityFields density_fields(const ScalarField& u, double eps, const Potential& p) {
  require_eps(eps);
  require_finite(u.values, "density input");
  const double k = 1.0 / c0();
  DensityFields d{CellField(u.grid), CellField(u.grid)};
  for_each_cell(u, p, [&](std::size_t c, double grad, double wm) {
    d.mu.values[c] = k * (0.5 * eps * grad + wm / eps);
  });

  const ScalarField lap = laplacian(u);
  const auto fixed = prescribed_mask(u.grid, u.roles);
  ScalarField nodal(u.grid, u.roles, 0.0);
  const double scale = 1.0 / (c0() * eps);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (fixed[i]) continue;
    const double r = eps * lap.values[i] - p.derivative(u.values[i]) / eps;
    nodal.values[i] = scale * r * r;
  }
  d.alpha = cell_average(nodal);
  require_finite(d.mu.values, "diffuse area density");
  require_finite(d.alpha.values, "diffuse Willmore density");
  return d;
}

double modica_mortola(const ScalarField& u, double eps, const Potential& p) {
  return sum_cells(density_fields(u, eps, p).mu);
}

double willmore_eps(const ScalarField& u, double eps, const Potential& p) {
  return sum_cells(density_fields(u, eps, p).alpha);
}

double half_space_energy(const ScalarField& u, const Potential& p) {
  require_finite(u.values, "energy input");
  std::vector<double> cells(u.grid.cell_count());
  for_each_cell(u, p, [&](std::size_t c, double grad, double wm) { cells[c] = 0.5 * grad + wm; });
  return stable_sum(cells) * u.grid.cell_volume();
}

double dirichlet_energy(const ScalarField& u) {
  require_finite(u.values, "energy input");
  std::vector<double> cells(u.grid.cell_count());
  for_each_cell(u, Potential::standard(), [&](std::size_t c, double grad, double) { cells[c] = grad; });
  return stable_sum(cells) * u.grid.cell_volume();
}

EnergyBreakdown energy_breakdown(const ScalarField& u, double eps, double sigma, double s_target,
                                 const Potential& p) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
  const DensityFields d = density_fields(u, eps, p);
  EnergyBreakdown e;
  e.eps = eps;
  e.sigma = sigma;
  e.s_target = s_target;
  e.s_eps = sum_cells(d.mu);
  e.w_eps = sum_cells(d.alpha);
  e.e_eps = e.s_eps + e.w_eps;
  const double gap = e.s_eps - s_target;
  e.penalty = std::pow(eps, -sigma) * gap * gap;
  e.f_eps = e.w_eps + e.penalty;
  return e;
}

double penalized_functional(const ScalarField& u, double eps, double sigma, double s_target,
                            const Potential& p) {
  return energy_breakdown(u, eps, sigma, s_target, p).f_eps;
}

}  // namespace pfl

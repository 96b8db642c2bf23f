#include "pfl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pfl/energy.hpp"
#include "pfl/errors.hpp"

namespace pfl {

double region_mass(const CellField& density, const Region& region) {
  const auto mask = region.cell_mask(density.grid);
  std::vector<double> picked;
  for (std::size_t c = 0; c < mask.size(); ++c)
    if (mask[c]) picked.push_back(density.values[c]);
  return stable_sum(picked) * density.grid.cell_volume();
}

double boundary_layer_mass(const ScalarField& u, double eps, double theta, const Potential& p) {
  if (!(theta >= 1.0)) throw std::invalid_argument("boundary layer threshold must be at least 1");
  const auto mu = density_fields(u, eps, p).mu;
  return region_mass(mu, Region::super_level(std::make_shared<const ScalarField>(u), theta, true));
}

ConcentrationReport concentration_scan(const CounterexampleFamily& family, Point x0,
                                       const std::vector<double>& radii) {
  ConcentrationReport rep;
  rep.x0 = x0;
  rep.radii = radii;
  for (std::size_t i = 0; i < family.members.size(); ++i) {
    const FamilyMember& m = family.members[i];
    const int nrm = m.field.grid.dim - 1;
    if (x0[nrm] != m.field.grid.origin[nrm]) throw std::invalid_argument("x0 must lie on the boundary face");
    const auto mu = density_fields(m.field, m.eps, family.potential).mu;
    ConcentrationRow row;
    row.eps = m.eps;
    row.total = region_mass(mu, Region::whole());
    for (double r : radii) {
      const double in = region_mass(mu, Region::ball(x0, r));
      row.in_ball.push_back(in);
      row.ratio.push_back(row.total > 0.0 ? std::clamp(in / row.total, 0.0, 1.0) : 0.0);
    }
    const double unit_r = i < family.schedule.observation_radius.size() ? family.schedule.observation_radius[i]
                                                                       : std::pow(m.eps, -0.5);
    row.observation_radius = m.eps * unit_r;
    row.outside_observation = region_mass(mu, Region::ball(x0, row.observation_radius).complement());
    rep.rows.push_back(std::move(row));
  }
  if (!rep.rows.empty() && !radii.empty()) rep.atom_estimate = rep.rows.back().in_ball.front();
  return rep;
}

std::vector<std::size_t> level_set(const ScalarField& u, double a, double b) {
  if (!(a <= b) || !(a > -1.0) || !(b < 1.0))
    throw std::invalid_argument("level-set interval must be a non-empty subset of (-1, 1)");
  const auto corners = u.grid.corner_offsets();
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < u.grid.cell_count(); ++c) {
    const std::size_t base = u.grid.cell_base_node(c);
    double lo = u.values[base];
    double hi = lo;
    for (std::size_t off : corners) {
      lo = std::min(lo, u.values[base + off]);
      hi = std::max(hi, u.values[base + off]);
    }
    if (lo <= b && hi >= a) out.push_back(c);
  }
  return out;
}

std::vector<Point> cell_centers(const Grid& grid, const std::vector<std::size_t>& cells) {
  std::vector<Point> out;
  out.reserve(cells.size());
  for (std::size_t c : cells) out.push_back(grid.cell_center(c));
  return out;
}

namespace {
double directed(std::span<const Point> from, std::span<const Point> to) {
  double worst = 0.0;
  for (const Point& p : from) {
    double best = kInfinity;
    for (const Point& q : to) {
      const double d = std::hypot(p[0] - q[0], p[1] - q[1], p[2] - q[2]);
      best = std::min(best, d);
    }
    worst = std::max(worst, best);
  }
  return worst;
}
}  // namespace

double hausdorff_distance(std::span<const Point> a, std::span<const Point> b) {
  if (a.empty() || b.empty()) throw EmptySet("Hausdorff distance of an empty set");
  return std::max(directed(a, b), directed(b, a));
}

double lp_norm(const ScalarField& u, double p) {
  if (p == kInfinity) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::abs(v));
    return m;
  }
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be at least 1 or infinite");
  const Grid& g = u.grid;
  std::vector<double> terms(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Index3 m = g.unravel(i);
    double w = 1.0;
    for (int a = 0; a < g.dim; ++a)
      if (m[a] == 0 || m[a] + 1 == g.nodes[a]) w *= 0.5;
    terms[i] = w * std::pow(std::abs(u.values[i]), p);
  }
  return std::pow(stable_sum(terms) * g.cell_volume(), 1.0 / p);
}

HoelderProbe hoelder_quotient(const ScalarField& u, double scale, double gamma, const Region& region) {
  if (!(gamma > 0.0) || gamma > 1.0) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (!(scale > 0.0)) throw std::invalid_argument("probe scale must be positive");
  const Grid& g = u.grid;
  const auto mask = region.node_mask(g);
  if (std::none_of(mask.begin(), mask.end(), [](char c) { return c != 0; }))
    throw EmptySet("Hoelder probe region is empty");

  // Offsets with |offset| <= scale, lexicographically positive so each pair is seen once.
  const long reach = static_cast<long>(std::floor(scale / g.spacing + 1e-9));
  std::vector<std::array<long, 3>> offsets;
  for (long i = -reach; i <= reach; ++i)
    for (long j = g.dim > 1 ? -reach : 0; j <= (g.dim > 1 ? reach : 0); ++j)
      for (long k = g.dim > 2 ? -reach : 0; k <= (g.dim > 2 ? reach : 0); ++k) {
        const bool positive = i > 0 || (i == 0 && (j > 0 || (j == 0 && k > 0)));
        const double d = g.spacing * std::sqrt(static_cast<double>(i * i + j * j + k * k));
        if (positive && d <= scale * (1.0 + 1e-12)) offsets.push_back({i, j, k});
      }

  HoelderProbe best;
  best.gamma = gamma;
  best.scale = scale;
  for (std::size_t y = 0; y < u.size(); ++y) {
    if (!mask[y]) continue;
    const Index3 m = g.unravel(y);
    for (const auto& off : offsets) {
      Index3 z{};
      bool inside = true;
      for (int a = 0; a < 3 && inside; ++a) {
        const long c = static_cast<long>(m[a]) + off[a];
        inside = c >= 0 && c < static_cast<long>(g.nodes[a]);
        z[a] = static_cast<std::size_t>(std::max(c, 0L));
      }
      if (!inside) continue;
      const std::size_t zi = g.index(z);
      if (!mask[zi]) continue;
      const double d = g.spacing * std::sqrt(static_cast<double>(off[0] * off[0] + off[1] * off[1] + off[2] * off[2]));
      const double q = std::abs(u.values[y] - u.values[zi]) / std::pow(d, gamma);
      if (q > best.quotient) {
        best.quotient = q;
        best.y = g.node_position(y);
        best.z = g.node_position(zi);
      }
    }
  }
  return best;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs two or more points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("log-log fit needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("slope fit needs distinct x values");
  return sxy / sxx;
}

}  // namespace pfl

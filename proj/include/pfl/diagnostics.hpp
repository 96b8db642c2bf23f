#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "pfl/counterexamples.hpp"
#include "pfl/field.hpp"
#include "pfl/grid.hpp"
#include "pfl/region.hpp"

namespace pfl {

// Sum of density times cell volume over the region's cells.
double region_mass(const CellField& density, const Region& region);

// mu_eps({|u| >= theta}).
double boundary_layer_mass(const ScalarField& u, double eps, double theta,
                           const Potential& p = Potential::standard());

struct ConcentrationRow {
  double eps = 0.0;
  double total = 0.0;
  std::vector<double> in_ball;
  std::vector<double> ratio;
  // Physical observation radius eps times the unit-scale radius.
  double observation_radius = 0.0;
  double outside_observation = 0.0;
};

struct ConcentrationReport {
  Point x0{};
  std::vector<double> radii;
  std::vector<ConcentrationRow> rows;
  // Mass in the smallest probe ball at the smallest eps.
  double atom_estimate = 0.0;
};

ConcentrationReport concentration_scan(const CounterexampleFamily& family, Point x0,
                                       const std::vector<double>& radii);

// Cells whose corner values reach into [a, b].
std::vector<std::size_t> level_set(const ScalarField& u, double a, double b);
std::vector<Point> cell_centers(const Grid& grid, const std::vector<std::size_t>& cells);

// Symmetric Hausdorff distance of two point clouds. Throws EmptySet.
double hausdorff_distance(std::span<const Point> a, std::span<const Point> b);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Cell-volume weighted p-norm with trapezoid weights; p = kInfinity gives max |u|.
double lp_norm(const ScalarField& u, double p);

struct HoelderProbe {
  double gamma = 0.5;
  double scale = 0.0;
  Point y{};
  Point z{};
  double quotient = 0.0;
};

// Largest |u(y) - u(z)| / |y - z|^gamma over node pairs in the region with
// 0 < |y - z| <= scale. Throws EmptySet for an empty region.
HoelderProbe hoelder_quotient(const ScalarField& u, double scale, double gamma, const Region& region);

// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace pfl

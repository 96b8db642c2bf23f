#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "pfl/diagnostics.hpp"
#include "pfl/energy.hpp"
#include "pfl/errors.hpp"

using namespace pfl;

namespace {

ScalarField tanh_profile_2d(double eps, double spacing) {
  const auto n = static_cast<std::size_t>(std::llround(2.0 / spacing)) + 1;
  const Grid g = Grid::make(2, {n, n, 1}, spacing, {-1.0, -1.0, 0.0});
  return ScalarField::from_function(g, FaceRoles::all(NeumannZero{}), [eps](const Point& x) {
    return std::tanh((std::hypot(x[0], x[1]) - 0.5) / (std::sqrt(2.0) * eps));
  });
}

}  // namespace

TEST_CASE("region mass reproduces the energy and is additive") {
  const double eps = 0.05;
  const ScalarField u = tanh_profile_2d(eps, eps / 8.0);
  const auto dens = density_fields(u, eps);
  CHECK(region_mass(dens.mu, Region::whole()) == doctest::Approx(modica_mortola(u, eps)).epsilon(1e-13));
  CHECK(region_mass(dens.alpha, Region::whole()) == doctest::Approx(willmore_eps(u, eps)).epsilon(1e-13));

  const Region ball = Region::ball({0.2, -0.1, 0.0}, 0.6);
  const double in = region_mass(dens.mu, ball);
  const double out = region_mass(dens.mu, ball.complement());
  CHECK(in + out == doctest::Approx(region_mass(dens.mu, Region::whole())).epsilon(1e-13));
  CHECK(in >= 0.0);
  CHECK(out >= 0.0);
}

TEST_CASE("boundary layer mass") {
  const ScalarField ones(Grid::make(2, {9, 9, 1}, 0.125, {}), FaceRoles::all(NeumannZero{}), 1.0);
  CHECK(boundary_layer_mass(ones, 0.1, 1.0) == 0.0);

  // The tanh profile never reaches |u| >= 1.
  const ScalarField u = tanh_profile_2d(0.05, 0.05 / 8.0);
  CHECK(boundary_layer_mass(u, 0.05, 1.0) == 0.0);
  CHECK_THROWS_AS(boundary_layer_mass(u, 0.05, 0.5), std::invalid_argument);

  // A bump above 1 carries positive mass, and less at a higher threshold.
  const ScalarField bumpy = ScalarField::from_function(ones.grid, ones.roles, [](const Point& x) {
    return 1.0 + 0.5 * std::exp(-8.0 * ((x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5)));
  });
  const double low = boundary_layer_mass(bumpy, 0.1, 1.0);
  const double high = boundary_layer_mass(bumpy, 0.1, 1.2);
  CHECK(low > 0.0);
  CHECK(high < low);
  CHECK(low == doctest::Approx(modica_mortola(bumpy, 0.1)).epsilon(1e-13));
}

TEST_CASE("concentration of a constant family is zero") {
  CounterexampleFamily fam;
  fam.schedule.eps = {0.2, 0.1};
  fam.schedule.observation_radius = {2.0, 3.0};
  for (double eps : fam.schedule.eps) {
    FamilyMember m;
    m.eps = eps;
    m.field = ScalarField(Grid::make(2, {17, 9, 1}, 0.125, {-1.0, 0.0, 0.0}), FaceRoles::all(NeumannZero{}), 1.0);
    fam.members.push_back(std::move(m));
  }
  const auto rep = concentration_scan(fam, {0.0, 0.0, 0.0}, {0.25, 0.5});
  REQUIRE(rep.rows.size() == 2);
  for (const auto& row : rep.rows) {
    CHECK(row.total == 0.0);
    CHECK(row.ratio == std::vector<double>{0.0, 0.0});
    CHECK(row.outside_observation == 0.0);
  }
  CHECK(rep.rows[1].observation_radius == doctest::Approx(0.3));
  CHECK(rep.atom_estimate == 0.0);
  CHECK_THROWS_AS(concentration_scan(fam, {0.0, 0.5, 0.0}, {0.25}), std::invalid_argument);
}

TEST_CASE("level sets") {
  const ScalarField ones(Grid::make(2, {9, 9, 1}, 0.125, {}), FaceRoles{}, 1.0);
  CHECK(level_set(ones, -0.5, 0.5).empty());
  CHECK_THROWS_AS(level_set(ones, 0.5, -0.5), std::invalid_argument);
  CHECK_THROWS_AS(level_set(ones, -1.0, 0.5), std::invalid_argument);

  // One-dimensional tanh: the set hugs the origin within the profile width.
  const double eps = 0.05;
  const double h = eps / 8.0;
  const auto n = static_cast<std::size_t>(std::llround(2.0 / h)) + 1;
  const Grid g = Grid::make(1, {n, 1, 1}, h, {-1.0, 0.0, 0.0});
  const ScalarField u = ScalarField::from_function(g, FaceRoles{}, [eps](const Point& x) {
    return std::tanh(x[0] / (std::sqrt(2.0) * eps));
  });
  const auto cells = level_set(u, -0.5, 0.5);
  REQUIRE_FALSE(cells.empty());
  const double half_width = std::sqrt(2.0) * eps * std::atanh(0.5);
  for (const Point& p : cell_centers(g, cells)) CHECK(std::abs(p[0]) <= half_width + h);
  const std::vector<Point> origin{{0.0, 0.0, 0.0}};
  const auto centers = cell_centers(g, cells);
  CHECK(hausdorff_distance(centers, origin) <= half_width + h);
}

TEST_CASE("Hausdorff distance") {
  const std::vector<Point> a{{0.0, 0.0, 0.0}};
  const std::vector<Point> b{{3.0, 4.0, 0.0}};
  CHECK(hausdorff_distance(a, a) == 0.0);
  CHECK(hausdorff_distance(a, b) == 5.0);
  CHECK_THROWS_AS(hausdorff_distance(a, std::vector<Point>{}), EmptySet);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto cloud = [&](std::size_t k) {
    std::vector<Point> p(k);
    for (auto& x : p) x = {U(rng), U(rng), U(rng)};
    return p;
  };
  for (int t = 0; t < 20; ++t) {
    const auto x = cloud(5), y = cloud(7), z = cloud(3);
    CHECK(hausdorff_distance(x, y) == hausdorff_distance(y, x));
    CHECK(hausdorff_distance(x, z) <= hausdorff_distance(x, y) + hausdorff_distance(y, z) + 1e-15);
  }
}

TEST_CASE("discrete p-norms") {
  const Grid box = Grid::make(2, {9, 9, 1}, 0.25, {});
  const ScalarField ones(box, FaceRoles{}, 1.0);
  CHECK(lp_norm(ones, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(lp_norm(ones, 4.0) == doctest::Approx(std::pow(4.0, 0.25)).epsilon(1e-14));
  CHECK(lp_norm(ones, kInfinity) == 1.0);
  CHECK_THROWS_AS(lp_norm(ones, 0.5), std::invalid_argument);

  // Trapezoid rule on x^2 over [0, 1]: 1/3 + h^2/6.
  const double h = 0.01;
  const Grid line = Grid::make(1, {101, 1, 1}, h, {});
  const ScalarField x = ScalarField::from_function(line, FaceRoles{}, [](const Point& p) { return p[0]; });
  CHECK(lp_norm(x, 2.0) == doctest::Approx(std::sqrt(1.0 / 3.0 + h * h / 6.0)).epsilon(1e-13));

  // On a unit-volume box the norm is nondecreasing in p.
  const Grid unit = Grid::make(2, {17, 17, 1}, 1.0 / 16.0, {});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  ScalarField r(unit, FaceRoles{});
  for (double& v : r.values) v = U(rng);
  double prev = 0.0;
  for (double p : {1.0, 2.0, 4.0, 8.0, kInfinity}) {
    const double val = lp_norm(r, p);
    CHECK(val >= prev - 1e-14);
    prev = val;
  }
}

TEST_CASE("Hoelder quotient") {
  const Grid g = Grid::make(2, {21, 21, 1}, 0.05, {-0.5, -0.5, 0.0});
  const ScalarField flat(g, FaceRoles{}, 0.3);
  CHECK(hoelder_quotient(flat, 0.2, 0.5, Region::whole()).quotient == 0.0);

  const double m = 3.0;
  const ScalarField lin = ScalarField::from_function(g, FaceRoles{}, [m](const Point& x) { return m * x[0]; });
  CHECK(hoelder_quotient(lin, 0.2, 1.0, Region::whole()).quotient == doctest::Approx(m).epsilon(1e-12));
  // With gamma = 1/2 the widest admissible x-step wins: m s / s^{1/2}.
  const auto half = hoelder_quotient(lin, 0.2, 0.5, Region::whole());
  CHECK(half.quotient == doctest::Approx(m * std::sqrt(0.2)).epsilon(1e-12));
  CHECK(std::abs(half.y[0] - half.z[0]) == doctest::Approx(0.2));

  CHECK_THROWS_AS(hoelder_quotient(lin, 0.2, 0.5, Region::ball({5.0, 5.0, 0.0}, 0.1)), EmptySet);
  CHECK_THROWS_AS(hoelder_quotient(lin, 0.2, 1.5, Region::whole()), std::invalid_argument);
}

TEST_CASE("log-log slope") {
  const std::vector<double> x{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 2.5));
  CHECK(loglog_slope(x, y) == doctest::Approx(2.5).epsilon(1e-12));
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(loglog_slope(one, one), std::invalid_argument);
  const std::vector<double> xs{1.0, 2.0};
  const std::vector<double> bad{1.0, -1.0};
  CHECK_THROWS_AS(loglog_slope(xs, bad), std::invalid_argument);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pfl/counterexamples.hpp"
#include "pfl/errors.hpp"

using namespace pfl;

namespace {

SolveConfig tight() {
  SolveConfig c;
  c.residual_tol = 1e-9;
  return c;
}

BumpSpec compact(double amplitude) {
  BumpSpec s;
  s.shape = BumpShape::CompactBump;
  s.amplitude = amplitude;
  s.width = 1.0;
  return s;
}

BoundaryData gaussian(const HalfSpaceDomain& d, double sigma) {
  BoundaryData h = BoundaryData::zeros_on(d.grid);
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double r = h.radius_of(i);
    h.samples[i] = std::exp(-r * r / (sigma * sigma));
  }
  return h;
}

}  // namespace

TEST_CASE("bump data") {
  const HalfSpaceDomain d = make_half_space_grid(2, 6.0, 0.125, 1.0);
  BumpSpec e;
  e.shape = BumpShape::ExpDecay;
  e.amplitude = 1.0;
  e.width = 0.25;
  for (double v : bump(0.0, e, d).samples) CHECK(v == 0.0);

  const BoundaryData one = bump(1.0, e, d);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one.samples[i] >= 0.0);
    CHECK(one.samples[i] <= std::exp(-one.radius_of(i)));
  }
  REQUIRE(one.envelope.has_value());
  CHECK(one.envelope->amplitude <= 1.0);

  const BoundaryData two = bump(2.0, e, d);
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(two.samples[i] == 2.0 * one.samples[i]);

  BumpSpec u;
  u.shape = BumpShape::UnitPeakBump;
  u.amplitude = 2.0;
  CHECK(bump_peak(u) == doctest::Approx(2.0));
  CHECK(bump_profile(u, 1.0) == 0.0);
  CHECK(bump_peak(compact(2.0)) == doctest::Approx(2.0 / std::numbers::e));
}

TEST_CASE("seminorm of a Gaussian matches its Fourier value") {
  // Harmonic-extension energy of e^{-x^2/s^2} is 1 for every s in one dimension.
  for (double sigma : {1.0, 2.0}) {
    const HalfSpaceDomain d = make_half_space_grid(2, 12.0, 1.0 / 32.0, 1.0);
    CHECK(h_half_seminorm(gaussian(d, sigma)) == doctest::Approx(1.0).epsilon(2e-5));
  }
  // Refinement shrinks the error by well over the first-order factor.
  const double coarse = h_half_seminorm(gaussian(make_half_space_grid(2, 8.0, 1.0 / 16.0, 1.0), 1.0)) - 1.0;
  const double fine = h_half_seminorm(gaussian(make_half_space_grid(2, 8.0, 1.0 / 32.0, 1.0), 1.0)) - 1.0;
  CHECK(std::abs(fine) * 4.0 < std::abs(coarse));

  // Two-dimensional face: (pi / 2)^{3/2}.
  const HalfSpaceDomain d3 = make_half_space_grid(3, 4.0, 0.125, 1.0);
  CHECK(h_half_seminorm(gaussian(d3, 1.0)) == doctest::Approx(std::pow(std::numbers::pi / 2.0, 1.5)).epsilon(1e-3));
}

TEST_CASE("seminorm constants and homogeneity") {
  CHECK(seminorm_constant(1, SeminormConstant::Sharp) == doctest::Approx(1.0 / (2.0 * std::numbers::pi)));
  CHECK(seminorm_constant(2, SeminormConstant::Sharp) == doctest::Approx(1.0 / (4.0 * std::numbers::pi)));
  CHECK(seminorm_constant(2, SeminormConstant::Unit) == 1.0);

  const HalfSpaceDomain d = make_half_space_grid(2, 4.0, 0.125, 1.0);
  const BoundaryData h = bump(1.0, compact(1.0), d);
  const double base = h_half_seminorm(h);
  for (double l : {0.5, 3.0, 10.0}) CHECK(h_half_seminorm(scaled(h, l)) == doctest::Approx(l * l * base).epsilon(1e-13));
  CHECK(h_half_seminorm(h, SeminormConstant::Unit) == doctest::Approx(2.0 * std::numbers::pi * base));
  CHECK(h_half_seminorm(BoundaryData::zeros_on(d.grid)) == 0.0);
}

TEST_CASE("the exterior correction makes the seminorm independent of the sampled window") {
  // The two windows differ only in midpoint rule versus exact integral for the
  // smooth far kernel, a second-order gap.
  auto gap = [](int n, double small_r, double large_r, double spacing) {
    const double a = h_half_seminorm(bump(1.0, compact(1.0), make_half_space_grid(n, small_r, spacing, 1.0)));
    const double b = h_half_seminorm(bump(1.0, compact(1.0), make_half_space_grid(n, large_r, spacing, 1.0)));
    return std::abs(a - b) / b;
  };
  const double g16 = gap(2, 2.0, 8.0, 1.0 / 16.0);
  const double g32 = gap(2, 2.0, 8.0, 1.0 / 32.0);
  CHECK(g16 < 1e-4);
  CHECK(g32 < g16 / 3.0);
  CHECK(gap(3, 1.5, 3.0, 0.125) < 1e-3);
}

TEST_CASE("oscillation raises the seminorm") {
  const HalfSpaceDomain d = make_half_space_grid(2, 2.0, 1.0 / 128.0, 1.0);
  double prev = 0.0;
  for (double k : {4.0, 16.0, 64.0}) {
    BoundaryData h = BoundaryData::zeros_on(d.grid);
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double x = h.position(i)[0];
      if (std::abs(x) < 1.0) h.samples[i] = 0.1 * 0.5 * (1.0 + std::sin(k * x)) * std::exp(1.0 - 1.0 / (1.0 - x * x));
    }
    const double s = h_half_seminorm(h);
    CHECK(s > 2.0 * prev);
    prev = s;
  }
}

TEST_CASE("oscillating boundary construction") {
  const HalfSpaceDomain d = make_half_space_grid(2, 3.0, 1.0 / 32.0, 1.0);
  const auto tiny = build_oscillating_boundary(1e-6, 0.1, d);
  CHECK(tiny.frequency == doctest::Approx(std::numbers::pi));
  CHECK(tiny.scale < 1.0);
  CHECK(tiny.seminorm >= 1e-6);
  CHECK(tiny.seminorm <= 1.1e-6);

  const auto target = build_oscillating_boundary(0.05, 0.2, d);
  CHECK(target.seminorm >= 0.05);
  CHECK(target.seminorm <= 0.055);
  for (std::size_t i = 0; i < target.data.size(); ++i) {
    CHECK(target.data.samples[i] >= 0.0);
    CHECK(target.data.samples[i] <= 0.2);
    if (target.data.radius_of(i) >= 1.0) CHECK(target.data.samples[i] == 0.0);
  }
  CHECK(target.seminorm == doctest::Approx(h_half_seminorm(target.data)));

  CHECK_THROWS_AS(build_oscillating_boundary(0.05, 0.3, d), std::invalid_argument);
  CHECK_THROWS_AS(build_oscillating_boundary(100.0, 0.2, d), ResolutionExhausted);
}

TEST_CASE("f(theta): zero, bounds, and the mass search") {
  const HalfSpaceDomain d = make_half_space_grid(2, 8.0, 0.125, 1.0);
  ThetaProblem prob{bump(1.0, compact(2.0), d), Potential::standard(), d, tight(), TraceSign::Plus,
                    std::make_shared<ThetaEnergyCache>()};
  CHECK(f_of_theta(0.0, prob) == 0.0);

  const double norm2 = boundary_l2_norm_sq(prob.base);
  const double f1 = f_of_theta(1.0, prob);
  const double f2 = f_of_theta(2.0, prob);
  CHECK(f1 >= norm2);
  CHECK(f2 >= 4.0 * norm2);
  CHECK(f2 >= 4.0 * f1 - 2e-9);
  CHECK(f2 <= 16.0 * f1 + 2e-9);

  // A target equal to a known value returns its theta.
  const auto back = find_theta_for_mass(f2, 1.0, prob);
  CHECK(back.theta == doctest::Approx(2.0).epsilon(1e-6));

  // S = 1, eps = 0.2 in two dimensions: f(theta) = 5, checked by a fresh solve.
  ThetaProblem fresh = prob;
  fresh.cache = std::make_shared<ThetaEnergyCache>();
  const auto hit = find_theta_for_mass(1.0, 0.2, prob);
  CHECK(f_of_theta(hit.theta, fresh) == doctest::Approx(5.0).epsilon(5e-3));

  const double t1 = find_theta_for_mass(1.0, 0.1, prob).theta;
  const double t2 = find_theta_for_mass(1.0, 0.05, prob).theta;
  CHECK(hit.theta < t1);
  CHECK(t1 < t2);

  ThetaSearchOptions low;
  low.theta_ceiling = 1.5;
  CHECK_THROWS_AS(find_theta_for_mass(1.0, 0.05, prob, low), BracketFailure);
}

TEST_CASE("theta cache keeps the first value") {
  ThetaEnergyCache c;
  c.insert(1.0, 2.0);
  c.insert(1.0, 3.0);
  c.insert(0.5, 1.0);
  CHECK(c.size() == 2);
  CHECK(*c.find(1.0) == 2.0);
  CHECK_FALSE(c.find(2.0).has_value());
  CHECK(c.pairs().front().first == 0.5);
}

TEST_CASE("physical rescaling is exact on aligned nodes") {
  const HalfSpaceDomain unit = make_half_space_grid(2, 4.0, 0.125, 1.0);
  const ScalarField u = ScalarField::from_function(unit.grid, unit.roles, [](const Point& x) {
    return 1.0 + std::exp(-std::hypot(x[0], x[1]));
  });
  const double eps = 0.1;
  const HalfSpaceDomain phys = physical_domain(2, 0.2, eps, 0.125);
  const ScalarField p = rescale_to_physical(u, eps, phys);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point x = phys.grid.node_position(i);
    CHECK(p[i] == doctest::Approx(1.0 + std::exp(-std::hypot(x[0], x[1]) / eps)).epsilon(1e-14));
  }
  // Everything beyond the unit grid takes the far value.
  const HalfSpaceDomain wide = physical_domain(2, 0.6, eps, 0.125);
  const ScalarField q = rescale_to_physical(u, eps, wide);
  for (std::size_t i = 0; i < q.size(); ++i)
    if (std::abs(wide.grid.node_position(i)[0]) > 0.4 + 1e-12) CHECK(q[i] == 1.0);
}

TEST_CASE("schedules validate") {
  EpsilonSchedule s = power_schedule({0.1, 0.05}, 0.125);
  CHECK_NOTHROW(s.validate());
  CHECK(s.parameter[1] == doctest::Approx(std::pow(0.05, -0.125)));
  CHECK(s.observation_radius[0] == doctest::Approx(std::pow(0.1, -0.5)));
  s.eps = {0.05, 0.1};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("a small boundary atom family") {
  FamilyParams p;
  p.base = compact(2.0);
  p.solver = tight();
  EpsilonSchedule s;
  s.eps = {0.2, 0.1};
  s.observation_radius = {std::pow(0.2, -0.5), std::pow(0.1, -0.5)};
  const auto fam = build_family(FamilyKind::BoundaryAtom, s, p);
  REQUIRE(fam.members.size() == 2);
  CHECK(fam.members[0].parameter < fam.members[1].parameter);
  for (const auto& m : fam.members) {
    CHECK(m.s_from_unit == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(m.willmore_certified);
    CHECK(m.unit->converged());
    CHECK(m.field.grid.spacing == doctest::Approx(m.eps * 0.125));
  }
  CHECK(fam.cache->size() >= 2);

  FamilyParams coarse = p;
  coarse.unit_spacing = 0.25;
  CHECK_THROWS_AS(build_family(FamilyKind::BoundaryAtom, s, coarse), std::invalid_argument);
}

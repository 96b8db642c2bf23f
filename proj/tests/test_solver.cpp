#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "pfl/counterexamples.hpp"
#include "pfl/energy.hpp"
#include "pfl/errors.hpp"
#include "pfl/solver.hpp"

using namespace pfl;

namespace {

SolveConfig tight() {
  SolveConfig c;
  c.residual_tol = 1e-9;
  return c;
}

// Pure e^{-|x|} up to a tiny smoothing width.
BumpSpec exp_spec(double amplitude) {
  BumpSpec s;
  s.shape = BumpShape::ExpDecay;
  s.amplitude = amplitude;
  s.width = 1e-6;
  return s;
}

}  // namespace

TEST_CASE("zero data gives the constant minimizer") {
  const HalfSpaceDomain d = make_half_space_grid(2, 4.0, 0.25, 1.0);
  const SolveResult r = solve_half_space(BoundaryData::zeros_on(d.grid), Potential::standard(), d, tight());
  CHECK(r.converged());
  CHECK(r.iterations <= 1);
  CHECK(r.final_energy == 0.0);
  for (double v : r.field.values) CHECK(v == 1.0);
}

TEST_CASE("decaying data: certificate properties") {
  const HalfSpaceDomain d = make_half_space_grid(2, 6.0, 0.125, 1.0);
  const BoundaryData h = bump(1.0, exp_spec(1.0), d);
  const SolveConfig cfg = tight();
  const SolveResult r = solve_half_space(h, Potential::standard(), d, cfg);
  REQUIRE(r.converged());
  CHECK(r.residual <= cfg.residual_tol);
  CHECK(residual_sup(r.field, Potential::standard()) == doctest::Approx(r.residual));

  // 1 <= u <= 1 + e^{-|x|} + 2 spacing at every node.
  for (std::size_t i = 0; i < r.field.size(); ++i) {
    const Point x = d.grid.node_position(i);
    CHECK(r.field[i] >= 1.0 - cfg.residual_tol);
    CHECK(r.field[i] <= 1.0 + std::exp(-std::hypot(x[0], x[1])) + 2.0 * d.grid.spacing);
  }

  // Energy bound against the boundary extension and monotone descent.
  CHECK(r.final_energy <= half_space_energy(initial_field(h, d, cfg)));
  for (std::size_t k = 1; k < r.energy_trace.size(); ++k)
    CHECK(r.energy_trace[k] <= r.energy_trace[k - 1] + 10.0 * std::numeric_limits<double>::epsilon() *
                                                           std::abs(r.energy_trace[k - 1]));

  // Dirichlet nodes keep their prescribed values exactly.
  const auto fixed = prescribed_mask(d.grid, d.roles);
  const std::size_t ny = d.grid.nodes[1];
  for (std::size_t i = 0; i < d.grid.nodes[0]; ++i) CHECK(r.field[i * ny] == 1.0 + h.samples[i]);
  for (std::size_t i = 0; i < r.field.size(); ++i) {
    const Index3 m = d.grid.unravel(i);
    if (fixed[i] && m[1] != 0) CHECK(r.field[i] == 1.0);
  }
}

TEST_CASE("both descent schemes reach the same minimizer") {
  const HalfSpaceDomain d = make_half_space_grid(2, 4.0, 0.25, 1.0);
  const BoundaryData h = bump(1.0, exp_spec(1.0), d);
  SolveConfig a = tight();
  SolveConfig b = tight();
  b.scheme = DescentScheme::ConvexSplitting;
  b.max_iterations = 5000;
  const SolveResult ra = solve_half_space(h, Potential::standard(), d, a);
  const SolveResult rb = solve_half_space(h, Potential::standard(), d, b);
  REQUIRE(ra.converged());
  REQUIRE(rb.converged());
  CHECK(rb.scheme == DescentScheme::ConvexSplitting);
  double diff = 0.0;
  for (std::size_t i = 0; i < ra.field.size(); ++i) diff = std::max(diff, std::abs(ra.field[i] - rb.field[i]));
  CHECK(diff <= 1e-7);
  CHECK(rb.final_energy == doctest::Approx(ra.final_energy).epsilon(1e-10));
}

TEST_CASE("non-convergence and bad data are reported") {
  const HalfSpaceDomain d = make_half_space_grid(2, 4.0, 0.25, 1.0);
  const BoundaryData h = bump(1.0, exp_spec(1.0), d);
  SolveConfig cfg = tight();
  cfg.scheme = DescentScheme::ConvexSplitting;
  cfg.max_iterations = 1;
  const SolveResult r = solve_half_space(h, Potential::standard(), d, cfg);
  CHECK_FALSE(r.converged());
  CHECK_THROWS_AS(require_converged(r, "test"), NonConvergence);

  BoundaryData bad = h;
  bad.samples[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_half_space(bad, Potential::standard(), d, tight()), InvalidBoundary);
}

TEST_CASE("uniqueness check") {
  const HalfSpaceDomain d = make_half_space_grid(2, 5.0, 0.25, 1.0);
  const auto zero = uniqueness_check(BoundaryData::zeros_on(d.grid), Potential::standard(), d, tight());
  CHECK(zero.status == UniquenessStatus::Unique);

  const auto two = uniqueness_check(bump(2.0, exp_spec(1.0), d), Potential::standard(), d, tight());
  CHECK(two.status == UniquenessStatus::Unique);
  CHECK(two.sup_difference <= two.threshold);

  BoundaryData mixed = bump(1.0, exp_spec(1.0), d);
  for (std::size_t i = 0; i < mixed.size(); i += 2) mixed.samples[i] = -mixed.samples[i];
  CHECK(uniqueness_check(mixed, Potential::standard(), d, tight()).status == UniquenessStatus::NotApplicable);
}

TEST_CASE("comparison with the scaled minimizer") {
  const HalfSpaceDomain d = make_half_space_grid(2, 6.0, 0.125, 1.0);
  BumpSpec gauss_like;
  gauss_like.shape = BumpShape::UnitPeakBump;
  gauss_like.amplitude = 1.0;
  gauss_like.width = 1.0;
  const BoundaryData h = bump(1.0, gauss_like, d);

  const auto same = comparison_check(1.0, h, Potential::standard(), d, tight());
  CHECK(same.holds);
  CHECK(std::abs(same.ordering_violation) <= 1e-8);

  const auto four = comparison_check(4.0, h, Potential::standard(), d, tight());
  CHECK(four.holds);
  CHECK(four.ordering_violation <= 1e-12);

  const BoundaryData e = bump(1.0, exp_spec(1.0), d);
  const auto env = comparison_check(3.0, e, Potential::standard(), d, tight());
  CHECK(env.envelope_holds);
}

TEST_CASE("the exponential barrier is a supersolution") {
  const HalfSpaceDomain d = make_half_space_grid(2, 6.0, 0.125, 1.0);
  const ScalarField psi = decay_envelope(d.grid, FaceRoles::all(Free{}), 1.0);
  const ScalarField res = residual_field(psi, Potential::standard());
  const double h2 = d.grid.spacing * d.grid.spacing;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const Point x = d.grid.node_position(i);
    if (std::hypot(x[0], x[1]) >= 1.0) CHECK(res[i] >= -h2);
  }
  const ScalarField ones(d.grid, d.roles, 1.0);
  CHECK(residual_sup(ones, Potential::standard()) == 0.0);
}

TEST_CASE("floored potential keeps the minimizer above the floor") {
  const double delta = 0.2;
  const HalfSpaceDomain d = make_half_space_grid(2, 4.0, 0.125, 1.0);
  BumpSpec s;
  s.shape = BumpShape::UnitPeakBump;
  s.amplitude = delta;
  const BoundaryData h = bump(1.0, s, d);
  const Potential p = Potential::modified_floor(delta);
  const SolveResult r = solve_half_space(h, p, d, tight(), TraceSign::Minus);
  REQUIRE(r.converged());
  for (double v : r.field.values) CHECK(v >= 1.0 - 2.0 * delta);
  CHECK(uniqueness_check(h, p, d, tight(), TraceSign::Minus).status == UniquenessStatus::Unique);
}

TEST_CASE("scheme names round-trip") {
  for (auto s : {DescentScheme::ShiftedNewton, DescentScheme::ConvexSplitting})
    CHECK(scheme_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(scheme_from_string("gradient"), std::invalid_argument);
}

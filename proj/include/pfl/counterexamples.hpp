#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pfl/boundary_data.hpp"
#include "pfl/energy.hpp"
#include "pfl/field.hpp"
#include "pfl/grid.hpp"
#include "pfl/potential.hpp"
#include "pfl/solver.hpp"

namespace pfl {

enum class BumpShape {
  // amplitude * exp(-sqrt(width^2 + r^2)), zeroed beyond the cutoff radius.
  ExpDecay,
  // amplitude * exp(1 / ((r / width)^2 - 1)) inside r < width.
  CompactBump,
  // Same bump rescaled so its peak equals amplitude.
  UnitPeakBump,
};

struct BumpSpec {
  BumpShape shape = BumpShape::CompactBump;
  double amplitude = 1.0;
  double width = 1.0;
  std::array<double, 2> center{0.0, 0.0};
  // ExpDecay only; zero keeps the full tail.
  double cutoff = 0.0;
};

double bump_profile(const BumpSpec& spec, double r);
double bump_peak(const BumpSpec& spec);

// theta times the base shape on the boundary face of the domain. When the base
// obeys 0 <= h <= e^{-|x|} an envelope (theta * C, 1) is attached.
BoundaryData bump(double theta, const BumpSpec& spec, const HalfSpaceDomain& d);

// 1 +- theta * profile(|x - c|), the radial extension of the trace into the domain.
ScalarField bump_extension(double theta, const BumpSpec& spec, const HalfSpaceDomain& d,
                           TraceSign sign = TraceSign::Plus);

// Insert-only map from theta to f(theta), safe to share between threads.
class ThetaEnergyCache {
 public:
  std::optional<double> find(double theta) const;
  // The first value stored for a theta wins.
  void insert(double theta, double energy);
  std::vector<std::pair<double, double>> pairs() const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<double, double> values_;
};

// Everything needed to evaluate f(theta) = F(u_theta) for traces 1 + theta h.
struct ThetaProblem {
  BoundaryData base;
  Potential potential = Potential::standard();
  HalfSpaceDomain domain;
  SolveConfig solver;
  TraceSign sign = TraceSign::Plus;
  std::shared_ptr<ThetaEnergyCache> cache;
};

// Fresh solve from the configured initial guess, so the result does not
// depend on which thetas were evaluated before.
SolveResult solve_at_theta(double theta, const ThetaProblem& problem);
// Throws NonConvergence if the solve fails.
double f_of_theta(double theta, const ThetaProblem& problem);

struct ThetaSearchOptions {
  double rel_tol = 1e-10;
  double theta_ceiling = 1e3;
  int max_evaluations = 80;
  // Demand 0 <= base <= e^{-|x|} before searching.
  bool require_envelope = true;
};

struct ThetaSearchResult {
  double theta = 0.0;
  double energy = 0.0;
  double target = 0.0;
  int evaluations = 0;
};

// theta with f(theta) = S * eps^{1-n}, n the domain dimension. Throws
// BracketFailure when the ceiling is reached below the target.
ThetaSearchResult find_theta_for_mass(double S, double eps, const ThetaProblem& problem,
                                      const ThetaSearchOptions& options = {});

enum class SeminormConstant {
  // 1 / |S^{n-1}|, the constant for which the seminorm equals the least
  // Dirichlet energy of the harmonic extension.
  Sharp,
  Unit,
};

double seminorm_constant(int boundary_dim, SeminormConstant c);

// c * sum over ordered pairs of distinct face nodes of |h(x) - h(y)|^2 / |x - y|^{n+1}
// times the squared face cell area, plus the exact contribution of points
// beyond the sampled face where h vanishes.
double h_half_seminorm(const BoundaryData& h, SeminormConstant c = SeminormConstant::Sharp);

struct OscillationOptions {
  double initial_frequency = 3.14159265358979323846;
  double frequency_growth = 1.25;
  // Largest k * spacing accepted before giving up.
  double max_phase_step = 0.7853981633974483;
  SeminormConstant constant = SeminormConstant::Sharp;
};

struct OscillatingBoundary {
  BoundaryData data;
  double target = 0.0;
  double frequency = 0.0;
  double scale = 1.0;
  double seminorm = 0.0;
};

// delta (1 + s_k(x)) / 2 * chi(x) times a factor <= 1, with s_k a product of
// sines of frequency k and chi a smooth cutoff supported in the unit ball.
// The frequency grows until the seminorm reaches S', then the factor brings it
// into [S', 1.1 S']. Throws ResolutionExhausted when the face grid is too coarse.
OscillatingBoundary build_oscillating_boundary(double S_prime, double delta,
                                               const HalfSpaceDomain& d,
                                               const OscillationOptions& options = {});

enum class FamilyKind { Unbounded, BoundaryAtom, HausdorffLevelSet, HoelderBlowup, OscillationAtom };

const char* to_string(FamilyKind k);

struct EpsilonSchedule {
  std::vector<double> eps;
  // theta_eps or omega_eps; filled in by the search for BoundaryAtom and
  // OscillationAtom.
  std::vector<double> parameter;
  // Blow-up observation radius in unit-scale coordinates.
  std::vector<double> observation_radius;

  // Strictly decreasing positive eps, finite positive parameters where given.
  void validate() const;
};

// eps list with parameter eps^{-exponent} and observation radius eps^{-1/2}.
EpsilonSchedule power_schedule(std::vector<double> eps, double exponent);

struct FamilyParams {
  int n = 2;
  BumpSpec base;
  // Unit-scale mesh width; the physical grid uses eps times this.
  double unit_spacing = 0.125;
  // Zero selects the radius from the tail bound and the physical box.
  double unit_radius = 0.0;
  // Physical box [-L, L]^{n-1} x [0, L].
  double physical_half_width = 0.5;
  // When set the box is [-L eps, L eps]^{n-1} x [0, L eps] instead, i.e. a
  // fixed window in unit-scale coordinates.
  bool box_scales_with_eps = false;
  double mass = 1.0;
  double delta = 0.1;
  // OscillationAtom: seminorm target as a multiple of the unit-scale energy
  // target, so that F(1 - h) >= [h]^2 / 2 can reach it.
  double seminorm_factor = 2.0;
  double sigma = 1.0;
  SolveConfig solver;
  ThetaSearchOptions search;
  OscillationOptions oscillation;
  std::size_t node_budget = kDefaultNodeBudget;
  int workers = 1;
};

struct FamilyMember {
  double eps = 0.0;
  double parameter = 0.0;
  HalfSpaceDomain unit_domain;
  std::shared_ptr<const SolveResult> unit;
  BoundaryData trace;
  ScalarField field;
  EnergyBreakdown energy;
  // F of the unit-scale minimizer and the matching eps^{n-1} F / c0.
  double f_unit = 0.0;
  double s_from_unit = 0.0;
  double willmore_bound = 0.0;
  bool willmore_certified = false;
  // OscillationAtom only: the constructed data before the mass scaling.
  std::optional<OscillatingBoundary> oscillation;
};

struct CounterexampleFamily {
  FamilyKind kind = FamilyKind::BoundaryAtom;
  EpsilonSchedule schedule;
  FamilyParams params;
  Potential potential = Potential::standard();
  std::vector<FamilyMember> members;
  std::shared_ptr<ThetaEnergyCache> cache;
};

// Physical half-space box for a given eps, with nodes aligned to the unit grid.
HalfSpaceDomain physical_domain(int n, double half_width, double eps, double unit_spacing);

// u(x) = unit(x / eps) by multilinear interpolation, far value outside the unit grid.
ScalarField rescale_to_physical(const ScalarField& unit, double eps, const HalfSpaceDomain& physical,
                                double far_value = 1.0);

CounterexampleFamily build_family(FamilyKind kind, EpsilonSchedule schedule,
                                  const FamilyParams& params);

}  // namespace pfl

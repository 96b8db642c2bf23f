#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pfl/boundary_data.hpp"
#include "pfl/field.hpp"
#include "pfl/grid.hpp"
#include "pfl/potential.hpp"

namespace pfl {

enum class DescentScheme {
  // Newton steps on -Lap + max(W'', 0) with an Armijo line search.
  ShiftedNewton,
  // Semi-implicit steps (-Lap + s) v = s u - W'(u), s doubled whenever the energy rises.
  ConvexSplitting,
};

enum class InitialGuess { FromBoundaryExtension, ConstantOne, UserField };

// Whether the prescribed trace is 1 + h or 1 - h.
enum class TraceSign { Plus, Minus };

struct SolveConfig {
  double residual_tol = 1e-8;
  int max_iterations = 200;
  DescentScheme scheme = DescentScheme::ShiftedNewton;
  InitialGuess initial_guess = InitialGuess::FromBoundaryExtension;
  std::optional<ScalarField> user_field;
  double linear_tol = 1e-10;
  // Energy rises smaller than this many machine epsilons of |F| count as flat.
  double rounding_slack = 10.0;
};

enum class SolveStatus { Converged, NonConvergence };

struct SolveResult {
  ScalarField field;
  SolveStatus status = SolveStatus::NonConvergence;
  double final_energy = 0.0;
  double initial_energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> energy_trace;
  DescentScheme scheme = DescentScheme::ShiftedNewton;
  double linear_tol = 0.0;

  bool converged() const { return status == SolveStatus::Converged; }
};

// Throws NonConvergence with the context if the result did not converge.
const SolveResult& require_converged(const SolveResult& r, const std::string& context);

// The field with the boundary trace and far values written into the
// prescribed nodes; interior values follow the requested initial guess.
ScalarField initial_field(const BoundaryData& h, const HalfSpaceDomain& d, const SolveConfig& cfg,
                          TraceSign sign = TraceSign::Plus);

// Minimizes the discrete half-space energy with trace 1 +- h on {x_n = 0} and
// the far value on every other face. All faces must be Dirichlet; the data
// must match the boundary face. Non-convergence is reported in the result.
SolveResult solve_half_space(const BoundaryData& h, const Potential& p, const HalfSpaceDomain& d,
                             const SolveConfig& cfg, TraceSign sign = TraceSign::Plus);

// -Lap u + W'(u) at every node, zero on prescribed nodes.
ScalarField residual_field(const ScalarField& u, const Potential& p);
double residual_sup(const ScalarField& u, const Potential& p);

// psi = 1 + amplitude * exp(-|x|) on the grid.
ScalarField decay_envelope(const Grid& g, const FaceRoles& roles, double amplitude);

enum class UniquenessStatus { Unique, NotUnique, NotApplicable };

struct UniquenessReport {
  UniquenessStatus status = UniquenessStatus::NotApplicable;
  double sup_difference = 0.0;
  double threshold = 0.0;
};

// Solves from the boundary extension and from the constant one. Applicable to
// Plus traces with h >= 0 under the standard potential, and to Minus traces
// with 0 <= h <= delta under the floored one.
UniquenessReport uniqueness_check(const BoundaryData& h, const Potential& p,
                                  const HalfSpaceDomain& d, const SolveConfig& cfg,
                                  TraceSign sign = TraceSign::Plus);

struct ComparisonReport {
  double theta = 1.0;
  // max(u_theta - 1 - theta (u_1 - 1)) over nodes.
  double ordering_violation = 0.0;
  // max(u_theta - 1 - theta e^{-|x|}) over nodes.
  double envelope_violation = 0.0;
  // 3 (residual_tol + spacing)
  double tolerance = 0.0;
  bool holds = false;
  bool envelope_holds = false;
};

// Compares minimizers for traces 1 + h and 1 + theta h with theta >= 1.
// Throws NonConvergence if either solve fails.
ComparisonReport comparison_check(double theta, const BoundaryData& h, const Potential& p,
                                  const HalfSpaceDomain& d, const SolveConfig& cfg);

const char* to_string(DescentScheme s);
DescentScheme scheme_from_string(const std::string& s);

}  // namespace pfl

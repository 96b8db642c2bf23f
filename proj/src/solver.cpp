#include "pfl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include "pfl/energy.hpp"
#include "pfl/errors.hpp"

namespace pfl {

namespace {

constexpr double kMachineEps = std::numeric_limits<double>::epsilon();

double trace_value(const BoundaryData& h, std::size_t face_index, TraceSign sign) {
  const double v = h.samples[face_index];
  return sign == TraceSign::Plus ? 1.0 + v : 1.0 - v;
}

// Index of the boundary sample below a node of a half-space grid.
std::size_t face_index_of(const Grid& g, const Index3& m) {
  if (g.dim == 1) return 0;
  if (g.dim == 2) return m[0];
  return m[0] * g.nodes[1] + m[1];
}

void check_domain(const BoundaryData& h, const HalfSpaceDomain& d) {
  for (int a = 0; a < d.grid.dim; ++a)
    if (!d.roles.prescribes(a, Side::Low) || !d.roles.prescribes(a, Side::High))
      throw std::invalid_argument("half-space solves need Dirichlet roles on every face");
  if (!h.matches(d.grid)) throw GridMismatch("boundary data does not match the boundary face of the grid");
  h.validate();
}

// Unknowns are the nodes not fixed by a Dirichlet face. Every unknown has
// all 2 dim neighbours inside the grid.
struct Interior {
  std::vector<std::size_t> node;
  std::vector<std::ptrdiff_t> unknown_of;
  std::vector<std::size_t> strides;
  double inv_h2 = 1.0;

  explicit Interior(const ScalarField& u) {
    const auto fixed = prescribed_mask(u.grid, u.roles);
    unknown_of.assign(u.size(), -1);
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (fixed[i]) continue;
      unknown_of[i] = static_cast<std::ptrdiff_t>(node.size());
      node.push_back(i);
    }
    for (int a = 0; a < u.grid.dim; ++a) strides.push_back(u.grid.stride(a));
    inv_h2 = 1.0 / (u.grid.spacing * u.grid.spacing);
  }

  std::size_t size() const { return node.size(); }

  double minus_laplacian(const std::vector<double>& v, std::size_t i) const {
    double acc = 0.0;
    for (std::size_t s : strides) acc += 2.0 * v[i] - v[i - s] - v[i + s];
    return acc * inv_h2;
  }

  Eigen::VectorXd residual(const ScalarField& u, const Potential& p) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(size()));
    for (std::size_t k = 0; k < size(); ++k) {
      const std::size_t i = node[k];
      r[static_cast<Eigen::Index>(k)] = minus_laplacian(u.values, i) + p.derivative(u.values[i]);
    }
    return r;
  }

  // -Lap restricted to the unknowns, diagonal entries always present.
  Eigen::SparseMatrix<double> stiffness() const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(size() * (1 + 2 * strides.size()));
    for (std::size_t k = 0; k < size(); ++k) {
      const std::size_t i = node[k];
      const auto row = static_cast<int>(k);
      t.emplace_back(row, row, 2.0 * static_cast<double>(strides.size()) * inv_h2);
      for (std::size_t s : strides) {
        for (std::size_t j : {i - s, i + s}) {
          const std::ptrdiff_t col = unknown_of[j];
          if (col >= 0) t.emplace_back(row, static_cast<int>(col), -inv_h2);
        }
      }
    }
    Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(size()));
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
  }
};

double sup_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

ScalarField step(const ScalarField& u, const Interior& in, const Eigen::VectorXd& d, double t) {
  ScalarField out = u;
  for (std::size_t k = 0; k < in.size(); ++k) out.values[in.node[k]] += t * d[static_cast<Eigen::Index>(k)];
  return out;
}

Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& rhs,
                             double tol) {
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>>
      cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(std::max<Eigen::Index>(1000, 4 * a.rows()));
  cg.compute(a);
  if (cg.info() != Eigen::Success) throw NonConvergence("preconditioner factorization failed");
  Eigen::VectorXd x = cg.solve(rhs);
  if (cg.info() != Eigen::Success && cg.error() > 1e3 * tol)
    throw NonConvergence("inner conjugate gradient solve did not converge");
  return x;
}

}  // namespace

const SolveResult& require_converged(const SolveResult& r, const std::string& context) {
  if (!r.converged())
    throw NonConvergence(context + ": residual " + std::to_string(r.residual) + " after " +
                         std::to_string(r.iterations) + " iterations");
  return r;
}

ScalarField initial_field(const BoundaryData& h, const HalfSpaceDomain& d, const SolveConfig& cfg,
                          TraceSign sign) {
  const Grid& g = d.grid;
  const int nrm = g.dim - 1;
  ScalarField u(g, d.roles, d.far_value);
  switch (cfg.initial_guess) {
    case InitialGuess::FromBoundaryExtension:
      for (std::size_t i = 0; i < u.size(); ++i) {
        const Index3 m = g.unravel(i);
        const double b = trace_value(h, face_index_of(g, m), sign);
        u.values[i] = d.far_value + (b - d.far_value) * std::exp(-g.coord(nrm, m[nrm]));
      }
      break;
    case InitialGuess::ConstantOne:
      std::fill(u.values.begin(), u.values.end(), 1.0);
      break;
    case InitialGuess::UserField:
      if (!cfg.user_field) throw std::invalid_argument("UserField initial guess needs a field");
      if (!(cfg.user_field->grid == g)) throw GridMismatch("user initial field lives on a different grid");
      u.values = cfg.user_field->values;
      break;
  }
  // Far faces first, then the data face, which wins on shared edges.
  const auto fixed = prescribed_mask(g, d.roles);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!fixed[i]) continue;
    const Index3 m = g.unravel(i);
    u.values[i] = m[nrm] == 0 ? trace_value(h, face_index_of(g, m), sign) : d.far_value;
  }
  require_finite(u.values, "initial field");
  return u;
}

SolveResult solve_half_space(const BoundaryData& h, const Potential& p, const HalfSpaceDomain& d,
                             const SolveConfig& cfg, TraceSign sign) {
  if (!(cfg.residual_tol > 0.0)) throw std::invalid_argument("residual_tol must be positive");
  if (cfg.max_iterations < 0) throw std::invalid_argument("max_iterations must be non-negative");
  check_domain(h, d);

  SolveResult res;
  res.scheme = cfg.scheme;
  res.linear_tol = cfg.linear_tol;
  res.field = initial_field(h, d, cfg, sign);
  const Interior in(res.field);
  const Eigen::SparseMatrix<double> base = in.stiffness();
  const double vol = d.grid.cell_volume();

  double energy = half_space_energy(res.field, p);
  Eigen::VectorXd r = in.residual(res.field, p);
  double rnorm = sup_norm(r);
  res.initial_energy = energy;
  res.energy_trace.push_back(energy);
  double shift = 1.0;

  while (rnorm > cfg.residual_tol && res.iterations < cfg.max_iterations) {
    const double slack = cfg.rounding_slack * kMachineEps * std::abs(energy);
    bool accepted = false;
    ScalarField next;
    double next_energy = 0.0;
    Eigen::VectorXd next_r;

    if (cfg.scheme == DescentScheme::ShiftedNewton) {
      Eigen::SparseMatrix<double> a = base;
      for (std::size_t k = 0; k < in.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        a.coeffRef(kk, kk) += std::max(p.second_derivative(res.field.values[in.node[k]]), 0.0);
      }
      const Eigen::VectorXd dir = solve_linear(a, -r, cfg.linear_tol);
      // Directional derivative of the discrete energy along dir.
      const double slope = vol * r.dot(dir);
      for (double t = 1.0; t >= 1e-10 && !accepted; t *= 0.5) {
        next = step(res.field, in, dir, t);
        next_energy = half_space_energy(next, p);
        const bool armijo = next_energy <= energy + 1e-4 * t * slope;
        // Near convergence the energy is flat to machine precision; such a
        // step is taken only if it improves the residual.
        const bool flat = next_energy <= energy + slack;
        if (armijo || flat) {
          next_r = in.residual(next, p);
          accepted = armijo || sup_norm(next_r) < rnorm;
        }
      }
    } else {
      double sup_w2 = 0.0;
      for (std::size_t i : in.node) sup_w2 = std::max(sup_w2, p.second_derivative(res.field.values[i]));
      shift = std::max(shift, sup_w2);
      for (int attempt = 0; attempt < 60 && !accepted; ++attempt, shift *= 2.0) {
        Eigen::SparseMatrix<double> a = base;
        for (std::size_t k = 0; k < in.size(); ++k) {
          const auto kk = static_cast<Eigen::Index>(k);
          a.coeffRef(kk, kk) += shift;
        }
        // (A + s) (v - u) = -r is the semi-implicit step written as an update.
        const Eigen::VectorXd dir = solve_linear(a, -r, cfg.linear_tol);
        next = step(res.field, in, dir, 1.0);
        next_energy = half_space_energy(next, p);
        if (next_energy <= energy + slack) {
          next_r = in.residual(next, p);
          accepted = next_energy < energy || sup_norm(next_r) < rnorm;
        }
        if (accepted) break;
      }
    }

    if (!accepted) break;
    res.field = std::move(next);
    energy = next_energy;
    r = std::move(next_r);
    rnorm = sup_norm(r);
    ++res.iterations;
    res.energy_trace.push_back(energy);
  }

  res.final_energy = energy;
  res.residual = rnorm;
  res.status = rnorm <= cfg.residual_tol ? SolveStatus::Converged : SolveStatus::NonConvergence;
  require_finite(res.field.values, "solver output");
  return res;
}

ScalarField residual_field(const ScalarField& u, const Potential& p) {
  const ScalarField lap = laplacian(u);
  const auto fixed = prescribed_mask(u.grid, u.roles);
  ScalarField out(u.grid, u.roles, 0.0);
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!fixed[i]) out.values[i] = -lap.values[i] + p.derivative(u.values[i]);
  return out;
}

double residual_sup(const ScalarField& u, const Potential& p) {
  double m = 0.0;
  for (double v : residual_field(u, p).values) m = std::max(m, std::abs(v));
  return m;
}

ScalarField decay_envelope(const Grid& g, const FaceRoles& roles, double amplitude) {
  return ScalarField::from_function(g, roles, [&](const Point& x) {
    return 1.0 + amplitude * std::exp(-std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
  });
}

UniquenessReport uniqueness_check(const BoundaryData& h, const Potential& p, const HalfSpaceDomain& d,
                                  const SolveConfig& cfg, TraceSign sign) {
  UniquenessReport rep;
  rep.threshold = 10.0 * cfg.residual_tol;
  bool applicable = false;
  const bool nonneg = std::all_of(h.samples.begin(), h.samples.end(), [](double v) { return v >= 0.0; });
  if (p.is_standard()) {
    // Traces 1 + h with h >= 0 keep the minimizer in u >= 1, where W'' >= 2.
    applicable = sign == TraceSign::Plus && nonneg;
  } else {
    // Floored branch: traces 1 - h with 0 <= h <= delta stay where W is convex.
    applicable = sign == TraceSign::Minus && nonneg && h.sup_abs() <= p.delta();
  }
  if (!applicable) return rep;

  SolveConfig a = cfg;
  a.initial_guess = InitialGuess::ConstantOne;
  SolveConfig b = cfg;
  b.initial_guess = InitialGuess::FromBoundaryExtension;
  const SolveResult ra = require_converged(solve_half_space(h, p, d, a, sign), "uniqueness check");
  const SolveResult rb = require_converged(solve_half_space(h, p, d, b, sign), "uniqueness check");
  for (std::size_t i = 0; i < ra.field.size(); ++i)
    rep.sup_difference = std::max(rep.sup_difference, std::abs(ra.field.values[i] - rb.field.values[i]));
  rep.status = rep.sup_difference <= rep.threshold ? UniquenessStatus::Unique : UniquenessStatus::NotUnique;
  return rep;
}

ComparisonReport comparison_check(double theta, const BoundaryData& h, const Potential& p,
                                  const HalfSpaceDomain& d, const SolveConfig& cfg) {
  if (!(theta >= 1.0)) throw std::invalid_argument("comparison needs theta >= 1");
  const SolveResult one = require_converged(solve_half_space(h, p, d, cfg), "comparison solve at theta 1");
  const SolveResult big =
      require_converged(solve_half_space(scaled(h, theta), p, d, cfg), "comparison solve at theta");
  ComparisonReport rep;
  rep.theta = theta;
  rep.tolerance = 3.0 * (cfg.residual_tol + d.grid.spacing);
  rep.ordering_violation = -std::numeric_limits<double>::infinity();
  rep.envelope_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < one.field.size(); ++i) {
    const Point x = d.grid.node_position(i);
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const double w = 1.0 + theta * (one.field.values[i] - 1.0);
    rep.ordering_violation = std::max(rep.ordering_violation, big.field.values[i] - w);
    rep.envelope_violation =
        std::max(rep.envelope_violation, big.field.values[i] - 1.0 - theta * std::exp(-r));
  }
  rep.holds = rep.ordering_violation <= rep.tolerance;
  rep.envelope_holds = rep.envelope_violation <= rep.tolerance;
  return rep;
}

const char* to_string(DescentScheme s) {
  return s == DescentScheme::ShiftedNewton ? "shifted_newton" : "convex_splitting";
}

DescentScheme scheme_from_string(const std::string& s) {
  if (s == "shifted_newton") return DescentScheme::ShiftedNewton;
  if (s == "convex_splitting") return DescentScheme::ConvexSplitting;
  throw std::invalid_argument("unknown descent scheme '" + s + "'");
}

}  // namespace pfl

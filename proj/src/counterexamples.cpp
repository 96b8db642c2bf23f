#include "pfl/counterexamples.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "pfl/errors.hpp"
#include "pfl/parallel.hpp"

namespace pfl {

namespace {

double mollifier(double r, double width) {
  const double q = r / width;
  if (!(q < 1.0)) return 0.0;
  return std::exp(1.0 / (q * q - 1.0));
}

double distance_to(const BumpSpec& spec, double x, double y) {
  return std::hypot(x - spec.center[0], y - spec.center[1]);
}

std::optional<double> support_of(const BumpSpec& spec) {
  const double c = std::hypot(spec.center[0], spec.center[1]);
  if (spec.shape != BumpShape::ExpDecay) return c + spec.width;
  if (spec.cutoff > 0.0) return c + spec.cutoff;
  return std::nullopt;
}

std::string eps_context(double eps) {
  std::ostringstream s;
  s << "eps = " << eps;
  return s.str();
}

}  // namespace

double bump_profile(const BumpSpec& spec, double r) {
  switch (spec.shape) {
    case BumpShape::ExpDecay:
      if (spec.cutoff > 0.0 && r >= spec.cutoff) return 0.0;
      return spec.amplitude * std::exp(-std::sqrt(spec.width * spec.width + r * r));
    case BumpShape::CompactBump:
      return spec.amplitude * mollifier(r, spec.width);
    case BumpShape::UnitPeakBump:
      return spec.amplitude * std::numbers::e * mollifier(r, spec.width);
  }
  return 0.0;
}

double bump_peak(const BumpSpec& spec) { return bump_profile(spec, 0.0); }

BoundaryData bump(double theta, const BumpSpec& spec, const HalfSpaceDomain& d) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw std::invalid_argument("theta must be non-negative");
  if (!(spec.width > 0.0)) throw std::invalid_argument("bump width must be positive");
  BoundaryData h = BoundaryData::zeros_on(d.grid);
  double envelope = 0.0;
  bool below = true;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto x = h.position(i);
    const double base = bump_profile(spec, distance_to(spec, x[0], x[1]));
    below = below && base >= 0.0;
    envelope = std::max(envelope, base * std::exp(h.radius_of(i)));
    h.samples[i] = theta * base;
  }
  h.support_radius = support_of(spec);
  if (below && envelope <= 1.0 && theta > 0.0 && envelope > 0.0) h.envelope = Envelope{theta * envelope, 1.0};
  return h;
}

ScalarField bump_extension(double theta, const BumpSpec& spec, const HalfSpaceDomain& d, TraceSign sign) {
  const double s = sign == TraceSign::Plus ? 1.0 : -1.0;
  const int nrm = d.grid.dim - 1;
  return ScalarField::from_function(d.grid, d.roles, [&](const Point& x) {
    double r2 = x[nrm] * x[nrm];
    for (int a = 0; a < nrm; ++a) r2 += (x[a] - spec.center[a]) * (x[a] - spec.center[a]);
    return 1.0 + s * theta * bump_profile(spec, std::sqrt(r2));
  });
}

std::optional<double> ThetaEnergyCache::find(double theta) const {
  std::lock_guard lock(mutex_);
  const auto it = values_.find(theta);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void ThetaEnergyCache::insert(double theta, double energy) {
  std::lock_guard lock(mutex_);
  values_.emplace(theta, energy);
}

std::vector<std::pair<double, double>> ThetaEnergyCache::pairs() const {
  std::lock_guard lock(mutex_);
  return {values_.begin(), values_.end()};
}

std::size_t ThetaEnergyCache::size() const {
  std::lock_guard lock(mutex_);
  return values_.size();
}

SolveResult solve_at_theta(double theta, const ThetaProblem& problem) {
  if (!(theta >= 0.0)) throw std::invalid_argument("theta must be non-negative");
  return solve_half_space(scaled(problem.base, theta), problem.potential, problem.domain, problem.solver,
                          problem.sign);
}

double f_of_theta(double theta, const ThetaProblem& problem) {
  if (!(theta >= 0.0)) throw std::invalid_argument("theta must be non-negative");
  if (problem.cache)
    if (auto hit = problem.cache->find(theta)) return *hit;
  double f = 0.0;
  if (theta > 0.0) {
    std::ostringstream ctx;
    ctx << "f(theta) at theta = " << theta;
    f = require_converged(solve_at_theta(theta, problem), ctx.str()).final_energy;
  }
  if (problem.cache) problem.cache->insert(theta, f);
  return f;
}

ThetaSearchResult find_theta_for_mass(double S, double eps, const ThetaProblem& problem,
                                      const ThetaSearchOptions& options) {
  if (!(S > 0.0) || !(eps > 0.0)) throw std::invalid_argument("mass and eps must be positive");
  const BoundaryData& base = problem.base;
  if (options.require_envelope) {
    const bool ok = base.envelope && base.envelope->amplitude <= 1.0 && base.envelope->rate >= 1.0 &&
                    std::all_of(base.samples.begin(), base.samples.end(), [](double v) { return v >= 0.0; });
    if (!ok) throw InvalidBoundary("theta search needs base data with 0 <= h <= e^{-|x|}");
  }
  const double norm2 = boundary_l2_norm_sq(base);
  if (!(norm2 > 0.0)) throw InvalidBoundary("theta search needs non-zero base data");

  ThetaSearchResult out;
  out.target = S * std::pow(eps, 1.0 - problem.domain.n());
  const double target = out.target;
  const double tol = options.rel_tol * target;
  auto eval = [&](double theta) {
    if (theta > options.theta_ceiling) {
      std::ostringstream msg;
      msg << "f(theta) stays below " << target << " up to the ceiling " << options.theta_ceiling;
      throw BracketFailure(msg.str());
    }
    ++out.evaluations;
    return f_of_theta(theta, problem);
  };

  // f(k t) lies between k^2 f(t) and k^4 f(t) for k >= 1 (reversed for
  // k <= 1), so one evaluation gives a guaranteed bracket.
  double t0 = std::min(std::sqrt(target / norm2), options.theta_ceiling);
  double f0 = eval(t0);
  if (std::abs(f0 - target) <= tol) {
    out.theta = t0;
    out.energy = f0;
    return out;
  }
  double lo, hi, flo, fhi;
  if (f0 < target) {
    if (!(f0 > 0.0)) throw BracketFailure("f(theta) vanishes at the initial guess");
    lo = t0 * std::pow(target / f0, 0.25);
    hi = t0 * std::sqrt(target / f0);
  } else {
    lo = t0 * std::sqrt(target / f0);
    hi = t0 * std::pow(target / f0, 0.25);
  }
  hi = std::min(hi, options.theta_ceiling);
  lo = std::min(lo, hi);
  flo = eval(lo);
  fhi = eval(hi);
  // Solver tolerance can blur the guaranteed ends; widen if needed.
  while (flo > target) {
    hi = lo;
    fhi = flo;
    lo *= 0.5;
    flo = eval(lo);
  }
  while (fhi < target) {
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    fhi = eval(hi);
  }

  // Illinois variant of regula falsi: a stale end has its value halved.
  double best = std::abs(flo - target) < std::abs(fhi - target) ? lo : hi;
  double fbest = best == lo ? flo : fhi;
  double glo = flo - target;
  double ghi = fhi - target;
  int side = 0;
  while (std::abs(fbest - target) > tol && out.evaluations < options.max_evaluations &&
         hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi) {
    double t = (lo * ghi - hi * glo) / (ghi - glo);
    if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
    const double ft = eval(t);
    if (std::abs(ft - target) < std::abs(fbest - target)) {
      best = t;
      fbest = ft;
    }
    if (ft < target) {
      lo = t;
      glo = ft - target;
      if (side == 1) ghi *= 0.5;
      side = 1;
    } else {
      hi = t;
      ghi = ft - target;
      if (side == -1) glo *= 0.5;
      side = -1;
    }
  }
  out.theta = best;
  out.energy = fbest;
  if (std::abs(fbest - target) > 5e-3 * target)
    throw BracketFailure("theta search stopped with f(theta) outside 0.5% of the target");
  return out;
}

double seminorm_constant(int boundary_dim, SeminormConstant c) {
  if (c == SeminormConstant::Unit) return 1.0;
  if (boundary_dim == 1) return 1.0 / (2.0 * std::numbers::pi);
  if (boundary_dim == 2) return 1.0 / (4.0 * std::numbers::pi);
  throw std::invalid_argument("seminorm needs a boundary of dimension 1 or 2");
}

namespace {

// Integral of |z|^{-3} over the quadrant [a, inf) x [b, inf).
double quadrant(double a, double b) { return 1.0 / a + 1.0 / b - std::hypot(a, b) / (a * b); }

// Integral of |x - y|^{-(d+1)} over y outside the box covered by the face cells.
double exterior_kernel(const BoundaryData& h, std::size_t i) {
  const auto x = h.position(i);
  double lo[2] = {0.0, 0.0};
  double hi[2] = {0.0, 0.0};
  for (int a = 0; a < h.face_dim; ++a) {
    const double left = h.origin[a] - 0.5 * h.spacing;
    const double right = h.origin[a] + (static_cast<double>(h.nodes[a]) - 0.5) * h.spacing;
    lo[a] = x[a] - left;
    hi[a] = right - x[a];
  }
  if (h.face_dim == 1) return 1.0 / lo[0] + 1.0 / hi[0];
  // Four half-planes minus the four doubly counted corner quadrants.
  return 2.0 * (1.0 / lo[0] + 1.0 / hi[0] + 1.0 / lo[1] + 1.0 / hi[1]) - quadrant(lo[0], lo[1]) -
         quadrant(lo[0], hi[1]) - quadrant(hi[0], lo[1]) - quadrant(hi[0], hi[1]);
}

// Squared face gradient by central differences, one-sided at the window edge.
double face_gradient_sq(const BoundaryData& h, std::size_t flat) {
  const std::size_t ij[2] = {flat / h.nodes[1], flat % h.nodes[1]};
  double g2 = 0.0;
  for (int a = 0; a < h.face_dim; ++a) {
    auto at = [&](std::size_t m) { return a == 0 ? h.samples[h.index(m, ij[1])] : h.samples[h.index(ij[0], m)]; };
    const std::size_t m = ij[a];
    const std::size_t lo = m > 0 ? m - 1 : m;
    const std::size_t hi = m + 1 < h.nodes[a] ? m + 1 : m;
    const double g = (at(hi) - at(lo)) / (static_cast<double>(hi - lo) * h.spacing);
    g2 += g * g;
  }
  return g2;
}

// The point sum skips the coincident pair. Near the diagonal the integrand is
// |g.z|^2 / |z|^{d+1} with g the face gradient, and the lattice defect of its
// angular mean is |g|^2 h c_d: c_1 = -2 zeta(0) = 1 and c_2 = -2 zeta(1/2) beta(1/2).
double diagonal_defect(int face_dim) { return face_dim == 1 ? 1.0 : 1.9501324601750; }

}  // namespace

double h_half_seminorm(const BoundaryData& h, SeminormConstant c) {
  if (h.face_dim != 1 && h.face_dim != 2) throw std::invalid_argument("seminorm needs n = 2 or n = 3");
  h.validate();
  const int power = h.face_dim + 1;
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h.samples[i] != 0.0) support.push_back(i);
  std::vector<char> in_support(h.size(), 0);
  for (std::size_t i : support) in_support[i] = 1;

  std::vector<double> rows(support.size());
  for (std::size_t k = 0; k < support.size(); ++k) {
    const std::size_t i = support[k];
    const auto x = h.position(i);
    std::vector<double> terms;
    terms.reserve(h.size());
    for (std::size_t j = 0; j < h.size(); ++j) {
      if (j == i) continue;
      const auto y = h.position(j);
      const double dist = std::hypot(x[0] - y[0], x[1] - y[1]);
      const double diff = h.samples[i] - h.samples[j];
      // Pairs with one end outside the support appear once here but twice
      // in the ordered double sum.
      const double weight = in_support[j] ? 1.0 : 2.0;
      terms.push_back(weight * diff * diff / std::pow(dist, power));
    }
    const double area = h.cell_area();
    const double hi2 = h.samples[i] * h.samples[i];
    const double diag = diagonal_defect(h.face_dim) * face_gradient_sq(h, i) * h.spacing * area;
    rows[k] = stable_sum(terms) * area * area + 2.0 * hi2 * exterior_kernel(h, i) * area + diag;
  }
  return seminorm_constant(h.face_dim, c) * stable_sum(rows);
}

OscillatingBoundary build_oscillating_boundary(double S_prime, double delta, const HalfSpaceDomain& d,
                                               const OscillationOptions& options) {
  if (!(S_prime > 0.0)) throw std::invalid_argument("S' must be positive");
  if (!(delta > 0.0) || !(delta < max_floor_delta()))
    throw std::invalid_argument("delta must lie in (0, (1 - 1/sqrt(3))/2)");
  const int fd = d.grid.dim - 1;
  if (fd != 1 && fd != 2) throw std::invalid_argument("oscillating data needs n = 2 or n = 3");
  if (d.radius < 1.0) throw std::invalid_argument("the domain must contain the unit ball");

  BoundaryData h = BoundaryData::zeros_on(d.grid);
  h.support_radius = 1.0;
  auto fill = [&](double k) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      const auto x = h.position(i);
      const double r = std::hypot(x[0], x[1]);
      if (!(r < 1.0)) {
        h.samples[i] = 0.0;
        continue;
      }
      const double chi = std::exp(1.0 - 1.0 / (1.0 - r * r));
      double s = std::sin(k * x[0]);
      if (fd == 2) s *= std::sin(k * x[1]);
      h.samples[i] = delta * 0.5 * (1.0 + s) * chi;
    }
  };

  OscillatingBoundary out;
  out.target = S_prime;
  double k = options.initial_frequency;
  double semi = 0.0;
  for (;;) {
    if (k * d.grid.spacing > options.max_phase_step) {
      std::ostringstream msg;
      msg << "frequency " << k << " is not resolved by spacing " << d.grid.spacing
          << " (seminorm " << semi << " < " << S_prime << ")";
      throw ResolutionExhausted(msg.str());
    }
    fill(k);
    semi = h_half_seminorm(h, options.constant);
    if (semi >= S_prime) break;
    k *= options.frequency_growth;
  }
  out.frequency = k;
  if (semi > 1.1 * S_prime) {
    out.scale = std::sqrt(1.05 * S_prime / semi);
    for (double& v : h.samples) v *= out.scale;
    semi = h_half_seminorm(h, options.constant);
  }
  out.seminorm = semi;
  for (double v : h.samples)
    if (v < 0.0 || v > delta) throw InvalidBoundary("oscillating data left [0, delta]");
  if (semi < S_prime || semi > 1.1 * S_prime) throw InvalidBoundary("oscillating data missed its seminorm window");
  h.validate();
  out.data = std::move(h);
  return out;
}

const char* to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::Unbounded: return "unbounded";
    case FamilyKind::BoundaryAtom: return "boundary_atom";
    case FamilyKind::HausdorffLevelSet: return "hausdorff_levelset";
    case FamilyKind::HoelderBlowup: return "hoelder_blowup";
    case FamilyKind::OscillationAtom: return "oscillation_atom";
  }
  return "unknown";
}

void EpsilonSchedule::validate() const {
  if (eps.empty()) throw std::invalid_argument("eps list is empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || !std::isfinite(eps[i])) throw std::invalid_argument("eps values must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw std::invalid_argument("eps must be strictly decreasing");
  }
  for (const auto* list : {&parameter, &observation_radius}) {
    if (list->empty()) continue;
    if (list->size() != eps.size()) throw std::invalid_argument("schedule lists must match the eps list");
    for (double v : *list)
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("schedule parameters must be positive");
  }
}

EpsilonSchedule power_schedule(std::vector<double> eps, double exponent) {
  EpsilonSchedule s;
  s.eps = std::move(eps);
  for (double e : s.eps) {
    s.parameter.push_back(std::pow(e, -exponent));
    s.observation_radius.push_back(std::pow(e, -0.5));
  }
  s.validate();
  return s;
}

HalfSpaceDomain physical_domain(int n, double half_width, double eps, double unit_spacing) {
  HalfSpaceDomain d = make_half_space_grid(n, half_width, eps * unit_spacing, 1.0);
  // The values are samples of a unit-scale field, so every face is data.
  d.roles = FaceRoles::all(Free{});
  for (int a = 0; a < n; ++a) {
    d.roles.at(a, Side::Low) = DirichletData{};
    d.roles.at(a, Side::High) = DirichletData{};
  }
  return d;
}

ScalarField rescale_to_physical(const ScalarField& unit, double eps, const HalfSpaceDomain& physical,
                                double far_value) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const Grid& ug = unit.grid;
  const Grid& pg = physical.grid;
  if (ug.dim != pg.dim) throw GridMismatch("unit and physical grids differ in dimension");
  ScalarField out(pg, physical.roles, far_value);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Point x = pg.node_position(i);
    std::size_t base[3] = {0, 0, 0};
    double frac[3] = {0.0, 0.0, 0.0};
    bool inside = true;
    for (int a = 0; a < ug.dim && inside; ++a) {
      const double q = (x[a] / eps - ug.origin[a]) / ug.spacing;
      const double r = std::round(q);
      const double last = static_cast<double>(ug.nodes[a] - 1);
      if (std::abs(q - r) <= 1e-9 * std::max(1.0, std::abs(q))) {
        if (r < 0.0 || r > last) inside = false;
        base[a] = static_cast<std::size_t>(std::max(r, 0.0));
        frac[a] = 0.0;
      } else {
        if (q < 0.0 || q > last) inside = false;
        const double f = std::floor(q);
        base[a] = static_cast<std::size_t>(std::max(f, 0.0));
        frac[a] = q - f;
      }
    }
    if (!inside) continue;
    double v = 0.0;
    for (std::size_t c = 0; c < (std::size_t{1} << ug.dim); ++c) {
      double w = 1.0;
      Index3 m{base[0], base[1], base[2]};
      for (int a = 0; a < ug.dim; ++a) {
        const bool up = c & (std::size_t{1} << a);
        w *= up ? frac[a] : 1.0 - frac[a];
        if (up) m[a] += 1;
      }
      if (w == 0.0) continue;
      v += w * unit.values[ug.index(m)];
    }
    out.values[i] = v;
  }
  return out;
}

namespace {

// Unit-scale radius: covers the physical box at the smallest eps and keeps
// the supersolution tail below 1e-6 of the expected energy.
double choose_radius(const FamilyParams& p, double eps_min, double theta, double energy) {
  const double cover = p.box_scales_with_eps ? p.physical_half_width : p.physical_half_width / eps_min;
  double r = std::max(cover, 4.0);
  if (theta > 0.0 && energy > 0.0) r = std::max(r, truncation_radius(p.n, theta, energy, 1e-6));
  if (p.unit_radius > 0.0) {
    if (p.unit_radius < cover * (1.0 - 1e-12))
      throw std::invalid_argument("unit radius does not cover the physical box at the smallest eps");
    r = p.unit_radius;
  }
  return r;
}

void finish_member(FamilyMember& m, const CounterexampleFamily& fam, double s_target) {
  const FamilyParams& p = fam.params;
  const double width = p.box_scales_with_eps ? p.physical_half_width * m.eps : p.physical_half_width;
  const HalfSpaceDomain phys = physical_domain(p.n, width, m.eps, m.unit_domain.grid.spacing);
  m.field = rescale_to_physical(m.unit->field, m.eps, phys);
  m.energy = energy_breakdown(m.field, m.eps, p.sigma, s_target, fam.potential);
  m.f_unit = m.unit->final_energy;
  m.s_from_unit = std::pow(m.eps, p.n - 1) * m.f_unit / c0();
  double volume = 1.0;
  for (int a = 0; a < p.n; ++a) volume *= phys.grid.upper(a) - phys.grid.origin[a];
  const double scale = volume / (c0() * std::pow(m.eps, 3));
  m.willmore_bound = m.unit->residual * m.unit->residual * scale;
  const double certificate = p.solver.residual_tol * p.solver.residual_tol * scale;
  m.willmore_certified = m.energy.w_eps <= certificate * (1.0 + 1e-9) + 1e-300;
}

}  // namespace

CounterexampleFamily build_family(FamilyKind kind, EpsilonSchedule schedule, const FamilyParams& params) {
  schedule.validate();
  if (params.n < 1 || params.n > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
  if (!(params.unit_spacing > 0.0) || params.unit_spacing > 0.125)
    throw std::invalid_argument("unit spacing must lie in (0, 1/8] so the physical spacing is at most eps/8");
  if (!(params.physical_half_width > 0.0)) throw std::invalid_argument("physical half width must be positive");

  CounterexampleFamily fam;
  fam.kind = kind;
  fam.params = params;
  fam.cache = std::make_shared<ThetaEnergyCache>();
  const std::size_t count = schedule.eps.size();
  const double eps_min = schedule.eps.back();
  const bool needs_parameter = kind == FamilyKind::Unbounded || kind == FamilyKind::HoelderBlowup;
  if (needs_parameter && schedule.parameter.size() != count)
    throw std::invalid_argument(std::string(to_string(kind)) + " needs a parameter for every eps");
  if (kind == FamilyKind::Unbounded) {
    for (std::size_t i = 1; i < count; ++i) {
      const double prev = std::pow(schedule.eps[i - 1], params.n - 1) * std::pow(schedule.parameter[i - 1], 4);
      const double cur = std::pow(schedule.eps[i], params.n - 1) * std::pow(schedule.parameter[i], 4);
      if (!(schedule.parameter[i] > schedule.parameter[i - 1]) || !(cur < prev))
        throw std::invalid_argument("unbounded schedule needs theta increasing with eps^{n-1} theta^4 decreasing");
    }
  }
  if (kind == FamilyKind::HoelderBlowup)
    for (std::size_t i = 1; i < count; ++i)
      if (!(schedule.parameter[i] > schedule.parameter[i - 1]))
        throw std::invalid_argument("omega must increase as eps decreases");
  if (kind == FamilyKind::HausdorffLevelSet || kind == FamilyKind::HoelderBlowup) {
    const auto& b = params.base;
    if (b.shape == BumpShape::ExpDecay || std::abs(bump_peak(b) - 2.0) > 1e-12 || b.width > 1.0 ||
        b.center[0] != 0.0 || b.center[1] != 0.0)
      throw std::invalid_argument("level-set families need a centered bump in B_1 with peak 2");
  }
  if (kind == FamilyKind::BoundaryAtom || kind == FamilyKind::OscillationAtom)
    if (!(params.mass > 0.0)) throw std::invalid_argument("mass S must be positive");
  if (kind == FamilyKind::OscillationAtom) fam.potential = Potential::modified_floor(params.delta);

  fam.members.resize(count);
  for (std::size_t i = 0; i < count; ++i) fam.members[i].eps = schedule.eps[i];

  if (kind == FamilyKind::OscillationAtom) {
    // Each eps gets its own unit grid fine enough for the oscillations.
    parallel_for(count, params.workers, [&](std::size_t i) {
      FamilyMember& m = fam.members[i];
      try {
        const double target = c0() * params.mass * std::pow(m.eps, 1 - params.n);
        const double cover =
            params.box_scales_with_eps ? params.physical_half_width : params.physical_half_width / m.eps;
        const double radius = std::max(params.unit_radius, std::max(cover, 3.0));
        double spacing = params.unit_spacing;
        for (;;) {
          m.unit_domain = make_half_space_grid(params.n, radius, spacing, 1.0, nullptr, params.node_budget);
          try {
            m.oscillation = build_oscillating_boundary(params.seminorm_factor * target, params.delta,
                                                       m.unit_domain, params.oscillation);
            break;
          } catch (const ResolutionExhausted&) {
            spacing *= 0.5;
          }
        }
        ThetaProblem prob{m.oscillation->data, fam.potential, m.unit_domain, params.solver, TraceSign::Minus,
                          std::make_shared<ThetaEnergyCache>()};
        ThetaSearchOptions opt = params.search;
        opt.require_envelope = false;
        opt.theta_ceiling = 1.0;
        const auto found = find_theta_for_mass(c0() * params.mass, m.eps, prob, opt);
        m.parameter = found.theta;
        m.trace = scaled(m.oscillation->data, found.theta);
        m.unit = std::make_shared<const SolveResult>(
            require_converged(solve_at_theta(found.theta, prob), "oscillation solve"));
      } catch (const Error&) {
        rethrow_with_context(eps_context(m.eps));
      }
    });
    for (auto& m : fam.members) finish_member(m, fam, params.mass);
    fam.schedule = schedule;
    fam.schedule.parameter.clear();
    for (const auto& m : fam.members) fam.schedule.parameter.push_back(m.parameter);
    return fam;
  }

  // Remaining kinds share one unit grid across the sweep.
  const double s = params.unit_spacing;
  double radius = 0.0;
  {
    const HalfSpaceDomain probe = make_half_space_grid(params.n, std::max(8.0, 4.0 * s), s, 1.0);
    const double norm2 = boundary_l2_norm_sq(bump(1.0, params.base, probe));
    if (kind == FamilyKind::BoundaryAtom) {
      const double target = c0() * params.mass * std::pow(eps_min, 1 - params.n);
      radius = choose_radius(params, eps_min, std::sqrt(target / norm2), target);
    } else if (kind == FamilyKind::Unbounded) {
      const double theta = schedule.parameter.back();
      radius = choose_radius(params, eps_min, theta, theta * theta * norm2);
    } else {
      radius = choose_radius(params, eps_min, 0.0, 0.0);
    }
  }
  const HalfSpaceDomain unit = make_half_space_grid(params.n, radius, s, 1.0, nullptr, params.node_budget);
  const BoundaryData base = bump(1.0, params.base, unit);
  ThetaProblem prob{base, fam.potential, unit, params.solver, TraceSign::Plus, fam.cache};

  if (kind == FamilyKind::HausdorffLevelSet) {
    // u_eps(x) = u(x / eps) with one unit-scale minimizer for the whole sweep.
    prob.sign = TraceSign::Minus;
    const auto sol = std::make_shared<const SolveResult>(
        require_converged(solve_at_theta(1.0, prob), "level-set family solve"));
    for (auto& m : fam.members) {
      m.unit_domain = unit;
      m.unit = sol;
      m.trace = base;
    }
  } else {
    parallel_for(count, params.workers, [&](std::size_t i) {
      FamilyMember& m = fam.members[i];
      m.unit_domain = unit;
      try {
        if (kind == FamilyKind::BoundaryAtom) {
          const auto found = find_theta_for_mass(c0() * params.mass, m.eps, prob, params.search);
          m.parameter = found.theta;
          m.trace = scaled(base, found.theta);
          m.unit = std::make_shared<const SolveResult>(
              require_converged(solve_at_theta(found.theta, prob), "boundary atom solve"));
        } else if (kind == FamilyKind::Unbounded) {
          m.parameter = schedule.parameter[i];
          m.trace = scaled(base, m.parameter);
          SolveResult r = require_converged(solve_at_theta(m.parameter, prob), "unbounded family solve");
          fam.cache->insert(m.parameter, r.final_energy);
          m.unit = std::make_shared<const SolveResult>(std::move(r));
        } else {
          // h(omega x): the same bump with width shrunk by omega.
          m.parameter = schedule.parameter[i];
          BumpSpec spec = params.base;
          spec.width /= m.parameter;
          m.trace = bump(1.0, spec, unit);
          m.unit = std::make_shared<const SolveResult>(require_converged(
              solve_half_space(m.trace, fam.potential, unit, params.solver, TraceSign::Minus),
              "Hoelder family solve"));
        }
      } catch (const Error&) {
        rethrow_with_context(eps_context(m.eps));
      }
    });
  }

  const double s_target = kind == FamilyKind::BoundaryAtom ? params.mass : 0.0;
  parallel_for(count, params.workers, [&](std::size_t i) { finish_member(fam.members[i], fam, s_target); });
  fam.schedule = schedule;
  if (kind == FamilyKind::BoundaryAtom) {
    fam.schedule.parameter.clear();
    for (const auto& m : fam.members) fam.schedule.parameter.push_back(m.parameter);
  }
  return fam;
}

}  // namespace pfl

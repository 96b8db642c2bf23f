#include "pfl/boundary_data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pfl/errors.hpp"
#include "pfl/field.hpp"

namespace pfl {

BoundaryData BoundaryData::zeros_on(const Grid& grid) {
  BoundaryData h;
  h.face_dim = grid.dim - 1;
  h.spacing = grid.spacing;
  for (int a = 0; a < h.face_dim; ++a) {
    h.nodes[a] = grid.nodes[a];
    h.origin[a] = grid.origin[a];
  }
  h.samples.assign(h.size(), 0.0);
  return h;
}

std::array<double, 2> BoundaryData::position(std::size_t flat) const {
  const std::size_t idx[2] = {flat / nodes[1], flat % nodes[1]};
  std::array<double, 2> p{0.0, 0.0};
  for (int a = 0; a < face_dim; ++a) p[a] = origin[a] + static_cast<double>(idx[a]) * spacing;
  return p;
}

double BoundaryData::radius_of(std::size_t flat) const {
  const auto p = position(flat);
  return std::hypot(p[0], p[1]);
}

double BoundaryData::cell_area() const { return std::pow(spacing, face_dim); }

bool BoundaryData::matches(const Grid& grid) const {
  if (face_dim != grid.dim - 1 || spacing != grid.spacing) return false;
  for (int a = 0; a < 2; ++a) {
    if (a < face_dim) {
      if (nodes[a] != grid.nodes[a] || origin[a] != grid.origin[a]) return false;
    } else if (nodes[a] != 1) {
      return false;
    }
  }
  return samples.size() == size();
}

void BoundaryData::validate() const {
  if (samples.size() != size()) throw InvalidBoundary("boundary sample count does not match the face grid");
  for (double v : samples)
    if (!std::isfinite(v)) throw InvalidBoundary("boundary samples must be finite");
  if (envelope) {
    if (!(envelope->amplitude > 0.0) || !std::isfinite(envelope->amplitude) || !(envelope->rate > 0.0))
      throw InvalidBoundary("envelope amplitude and rate must be positive");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double bound = envelope->amplitude * std::exp(-envelope->rate * radius_of(i));
      if (std::abs(samples[i]) > bound * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "sample " << i << " = " << samples[i] << " exceeds its envelope " << bound;
        throw InvalidBoundary(msg.str());
      }
    }
  }
  if (support_radius) {
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (radius_of(i) >= *support_radius && samples[i] != 0.0)
        throw InvalidBoundary("boundary sample outside the declared support is not zero");
  }
}

double BoundaryData::sup_abs() const {
  double m = 0.0;
  for (double v : samples) m = std::max(m, std::abs(v));
  return m;
}

double boundary_l2_norm_sq(const BoundaryData& h) {
  std::vector<double> sq(h.samples.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = h.samples[i] * h.samples[i];
  return stable_sum(sq) * h.cell_area();
}

BoundaryData scaled(const BoundaryData& h, double factor) {
  BoundaryData out = h;
  for (double& v : out.samples) v *= factor;
  if (out.envelope) out.envelope->amplitude *= std::abs(factor);
  if (out.envelope && !(out.envelope->amplitude > 0.0)) out.envelope.reset();
  return out;
}

}  // namespace pfl

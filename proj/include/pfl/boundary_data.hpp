#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "pfl/grid.hpp"

namespace pfl {

// |h(x)| <= amplitude * exp(-rate * |x|)
struct Envelope {
  double amplitude = 1.0;
  double rate = 1.0;
};

// Samples of h on the boundary face {x_n = 0}, lateral axes in grid order.
// For n = 1 the face is a single point.
struct BoundaryData {
  int face_dim = 0;
  std::array<std::size_t, 2> nodes{1, 1};
  double spacing = 1.0;
  std::array<double, 2> origin{0.0, 0.0};
  std::vector<double> samples;
  std::optional<Envelope> envelope;
  std::optional<double> support_radius;

  // Zero data laid out on the boundary face of a half-space grid.
  static BoundaryData zeros_on(const Grid& grid);

  std::size_t size() const { return nodes[0] * nodes[1]; }
  std::size_t index(std::size_t i, std::size_t j = 0) const { return i * nodes[1] + j; }
  // Lateral coordinates of a sample; unused components are zero.
  std::array<double, 2> position(std::size_t flat) const;
  double radius_of(std::size_t flat) const;
  double cell_area() const;

  bool matches(const Grid& grid) const;
  // Throws InvalidBoundary for non-finite samples, an envelope with amplitude
  // above one or samples breaking the declared envelope or support.
  void validate() const;
  double sup_abs() const;
};

// Sum of h^2 times the face cell area.
double boundary_l2_norm_sq(const BoundaryData& h);

BoundaryData scaled(const BoundaryData& h, double factor);

}  // namespace pfl

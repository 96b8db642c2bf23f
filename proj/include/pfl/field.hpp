#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pfl/grid.hpp"

namespace pfl {

// Nodal values on a grid together with the face roles they were produced under.
struct ScalarField {
  Grid grid;
  FaceRoles roles;
  std::vector<double> values;

  ScalarField() = default;
  ScalarField(Grid g, FaceRoles r, double fill = 0.0);
  ScalarField(Grid g, FaceRoles r, std::vector<double> v);

  template <class F>
  static ScalarField from_function(const Grid& g, const FaceRoles& r, F&& f) {
    ScalarField out(g, r);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = f(g.node_position(i));
    return out;
  }

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

// One value per grid cell.
struct CellField {
  Grid grid;
  std::vector<double> values;

  CellField() = default;
  explicit CellField(Grid g, double fill = 0.0) : grid(g), values(g.cell_count(), fill) {}
  std::size_t size() const { return values.size(); }
};

// Throws NonFinite naming the context if any value is NaN or infinite.
void require_finite(const std::vector<double>& values, const char* context);

// Mean of the corner values of every cell.
CellField cell_average(const ScalarField& u);

// Compensated sum of the values in ascending index order.
double stable_sum(const std::vector<double>& values);

// Binary field files: one JSON header line followed by little-endian doubles.
void write_field(const std::filesystem::path& path, const ScalarField& u);
ScalarField read_field(const std::filesystem::path& path);

}  // namespace pfl

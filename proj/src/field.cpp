#include "pfl/field.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "pfl/errors.hpp"

namespace pfl {

static_assert(std::endian::native == std::endian::little, "field files assume a little-endian host");

ScalarField::ScalarField(Grid g, FaceRoles r, double fill)
    : grid(g), roles(std::move(r)), values(g.node_count(), fill) {}

ScalarField::ScalarField(Grid g, FaceRoles r, std::vector<double> v)
    : grid(g), roles(std::move(r)), values(std::move(v)) {
  if (values.size() != grid.node_count()) throw GridMismatch("field value count does not match its grid");
}

void require_finite(const std::vector<double>& values, const char* context) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw NonFinite(std::string(context) + ": non-finite value at index " + std::to_string(i));
}

CellField cell_average(const ScalarField& u) {
  CellField out(u.grid);
  const auto corners = u.grid.corner_offsets();
  const double w = 1.0 / static_cast<double>(corners.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    const std::size_t base = u.grid.cell_base_node(c);
    double s = 0.0;
    for (std::size_t off : corners) s += u.values[base + off];
    out.values[c] = s * w;
  }
  return out;
}

double stable_sum(const std::vector<double>& values) {
  // Neumaier's variant of Kahan summation.
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

void write_field(const std::filesystem::path& path, const ScalarField& u) {
  nlohmann::json header = {{"format", "pfl-field"},
                           {"version", 1},
                           {"encoding", "f64le"},
                           {"count", u.values.size()},
                           {"grid", to_json(u.grid)},
                           {"roles", to_json(u.roles)}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const std::string line = header.dump() + "\n";
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.write(reinterpret_cast<const char*>(u.values.data()),
            static_cast<std::streamsize>(u.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ScalarField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  const auto header = nlohmann::json::parse(line);
  if (header.value("format", "") != "pfl-field") throw std::runtime_error(path.string() + " is not a field file");
  const Grid g = grid_from_json(header.at("grid"));
  const auto count = header.at("count").get<std::size_t>();
  if (count != g.node_count()) throw GridMismatch("field file count does not match its grid");
  std::vector<double> values(count);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("truncated field file " + path.string());
  return ScalarField(g, roles_from_json(header.at("roles")), std::move(values));
}

}  // namespace pfl

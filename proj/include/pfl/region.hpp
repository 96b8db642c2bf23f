#pragma once

#include <memory>
#include <vector>

#include "pfl/field.hpp"
#include "pfl/grid.hpp"

namespace pfl {

// Set-valued description of a part of the domain. Cells belong to a region
// when their center does; nodes are tested at their own position.
class Region {
 public:
  static Region whole();
  // Open ball |x - c| < r, so a zero radius gives the empty set.
  static Region ball(Point center, double radius);
  // Open ball restricted to the side x_n >= c_n of a center on the boundary face.
  static Region half_ball(Point center, double radius);
  // {f >= threshold}, or {|f| >= threshold} when absolute is set. The field
  // must live on the grid the region is evaluated on.
  static Region super_level(std::shared_ptr<const ScalarField> field, double threshold,
                            bool absolute = false);
  // Points at distance at least margin from every face of the grid box.
  static Region inset(double margin);

  Region complement() const;
  Region intersect(const Region& other) const;

  std::vector<char> cell_mask(const Grid& grid) const;
  std::vector<char> node_mask(const Grid& grid) const;

  struct Node;

 private:
  explicit Region(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

std::vector<std::size_t> region_cells(const Grid& grid, const Region& region);
std::vector<std::size_t> region_nodes(const Grid& grid, const Region& region);

}  // namespace pfl

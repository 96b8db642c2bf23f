#include "pfl/region.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pfl/errors.hpp"

namespace pfl {

struct Region::Node {
  enum class Kind { Whole, Ball, HalfBall, SuperLevel, Inset, Complement, Intersection };
  Kind kind = Kind::Whole;
  Point center{};
  double radius = 0.0;
  std::shared_ptr<const ScalarField> field;
  double threshold = 0.0;
  bool absolute = false;
  double margin = 0.0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using Node = Region::Node;

// Evaluation points are either cell centers or nodes; level values follow suit.
struct Sites {
  const Grid& grid;
  bool cells;
  std::size_t count() const { return cells ? grid.cell_count() : grid.node_count(); }
  Point at(std::size_t i) const { return cells ? grid.cell_center(i) : grid.node_position(i); }
};

std::vector<char> evaluate(const Node& node, const Sites& s) {
  const std::size_t n = s.count();
  std::vector<char> mask(n, 0);
  const int dim = s.grid.dim;
  switch (node.kind) {
    case Node::Kind::Whole:
      std::fill(mask.begin(), mask.end(), 1);
      break;
    case Node::Kind::Ball:
    case Node::Kind::HalfBall: {
      const double r2 = node.radius * node.radius;
      for (std::size_t i = 0; i < n; ++i) {
        const Point p = s.at(i);
        double d2 = 0.0;
        for (int a = 0; a < dim; ++a) d2 += (p[a] - node.center[a]) * (p[a] - node.center[a]);
        bool in = d2 < r2;
        if (node.kind == Node::Kind::HalfBall) in = in && p[dim - 1] >= node.center[dim - 1];
        mask[i] = in ? 1 : 0;
      }
      break;
    }
    case Node::Kind::SuperLevel: {
      if (!(node.field->grid == s.grid))
        throw GridMismatch("super-level region refers to a field on a different grid");
      const std::vector<double> level =
          s.cells ? cell_average(*node.field).values : node.field->values;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = node.absolute ? std::abs(level[i]) : level[i];
        mask[i] = v >= node.threshold ? 1 : 0;
      }
      break;
    }
    case Node::Kind::Inset:
      for (std::size_t i = 0; i < n; ++i) {
        const Point p = s.at(i);
        bool in = true;
        for (int a = 0; a < dim && in; ++a)
          in = p[a] - s.grid.origin[a] >= node.margin && s.grid.upper(a) - p[a] >= node.margin;
        mask[i] = in ? 1 : 0;
      }
      break;
    case Node::Kind::Complement: {
      mask = evaluate(*node.lhs, s);
      for (char& m : mask) m = m ? 0 : 1;
      break;
    }
    case Node::Kind::Intersection: {
      mask = evaluate(*node.lhs, s);
      const auto other = evaluate(*node.rhs, s);
      for (std::size_t i = 0; i < n; ++i) mask[i] = (mask[i] && other[i]) ? 1 : 0;
      break;
    }
  }
  return mask;
}

std::vector<std::size_t> indices_of(const std::vector<char>& mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(i);
  return out;
}

}  // namespace

Region Region::whole() { return Region(std::make_shared<Node>()); }

Region Region::ball(Point center, double radius) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw std::invalid_argument("ball radius must be finite and non-negative");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Ball;
  n->center = center;
  n->radius = radius;
  return Region(n);
}

Region Region::half_ball(Point center, double radius) {
  Region r = ball(center, radius);
  auto n = std::make_shared<Node>(*r.node_);
  n->kind = Node::Kind::HalfBall;
  return Region(n);
}

Region Region::super_level(std::shared_ptr<const ScalarField> field, double threshold, bool absolute) {
  if (!field) throw std::invalid_argument("super-level region needs a field");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::SuperLevel;
  n->field = std::move(field);
  n->threshold = threshold;
  n->absolute = absolute;
  return Region(n);
}

Region Region::inset(double margin) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Inset;
  n->margin = margin;
  return Region(n);
}

Region Region::complement() const {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Complement;
  n->lhs = node_;
  return Region(n);
}

Region Region::intersect(const Region& other) const {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Intersection;
  n->lhs = node_;
  n->rhs = other.node_;
  return Region(n);
}

std::vector<char> Region::cell_mask(const Grid& grid) const { return evaluate(*node_, Sites{grid, true}); }
std::vector<char> Region::node_mask(const Grid& grid) const { return evaluate(*node_, Sites{grid, false}); }

std::vector<std::size_t> region_cells(const Grid& grid, const Region& region) {
  return indices_of(region.cell_mask(grid));
}

std::vector<std::size_t> region_nodes(const Grid& grid, const Region& region) {
  return indices_of(region.node_mask(grid));
}

}  // namespace pfl

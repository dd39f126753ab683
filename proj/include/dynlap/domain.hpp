#pragma once

#include <array>
#include <string>
#include <vector>

#include "dynlap/types.hpp"

namespace dynlap {

struct AxisInterval {
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;

  double length() const { return hi - lo; }
};

enum class DomainKind { torus, cylinder, box };

std::string to_string(DomainKind kind);

// Flat 2-D computational domain: per-axis extent plus periodicity flags.
// Supplies the minimal-image metric used by every distance computation.
struct Domain {
  std::array<AxisInterval, 2> axes;

  DomainKind kind() const;
  double area() const;
  bool contains(const Vec2& p) const;

  // Signed minimal-image displacement from `from` to `to`; on periodic axes
  // the representative with the smallest magnitude is returned.
  Vec2 displacement(const Vec2& from, const Vec2& to) const;

  // Minimal-image Euclidean distance; throws std::domain_error when either
  // point lies outside the extent.
  double distance(const Vec2& x, const Vec2& y) const;

  // Reduce periodic coordinates into [lo, hi); bounded coordinates pass through.
  Vec2 wrap(Vec2 p) const;

  // Clamp bounded coordinates into [lo, hi]; periodic coordinates pass through.
  Vec2 clamp(Vec2 p) const;

  static Domain torus(double lx = two_pi, double ly = two_pi);
  static Domain cylinder(double lx = two_pi, double ly = two_pi / 2.0);
  static Domain box(double lx = 1.0, double ly = 1.0);
};

struct BoundaryNode {
  Vec2 position;
  Vec2 normal;  // unit outward normal at the node
};

struct NodePartition {
  std::vector<Vec2> interior;
  std::vector<BoundaryNode> boundary;
};

// Tensor grid over the domain, x-major (x varies slowest).
// Periodic axes: `count` points with spacing (length - 2*delta)/count starting
// at lo + delta (no duplicated seam point).
// Bounded axes: `count` endpoint-inclusive points with spacing length/(count-1);
// the first/last coordinates are shifted inward by delta when delta > 0.
std::vector<Vec2> regular_grid(const Domain& domain, std::array<int, 2> counts, double delta);

// Partition a grid by exact membership in the domain boundary (bounded-axis
// endpoints); boundary nodes carry outward normals.
NodePartition boundary_nodes(const Domain& domain, const std::vector<Vec2>& grid);

}  // namespace dynlap

#include "dynlap/domain.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dynlap {

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::torus: return "torus";
    case DomainKind::cylinder: return "cylinder";
    case DomainKind::box: return "box";
  }
  return "unknown";
}

DomainKind Domain::kind() const {
  const int periodic_axes = (axes[0].periodic ? 1 : 0) + (axes[1].periodic ? 1 : 0);
  if (periodic_axes == 2) return DomainKind::torus;
  if (periodic_axes == 1) return DomainKind::cylinder;
  return DomainKind::box;
}

double Domain::area() const { return axes[0].length() * axes[1].length(); }

bool Domain::contains(const Vec2& p) const {
  for (int a = 0; a < 2; ++a) {
    const double slack = 1e-9 * std::max(1.0, axes[a].length());
    if (p[a] < axes[a].lo - slack || p[a] > axes[a].hi + slack) return false;
  }
  return true;
}

Vec2 Domain::displacement(const Vec2& from, const Vec2& to) const {
  Vec2 d = to - from;
  for (int a = 0; a < 2; ++a) {
    if (!axes[a].periodic) continue;
    const double len = axes[a].length();
    d[a] -= len * std::round(d[a] / len);
  }
  return d;
}

double Domain::distance(const Vec2& x, const Vec2& y) const {
  if (!contains(x) || !contains(y)) throw std::domain_error("distance: point outside domain extent");
  return displacement(x, y).norm();
}

Vec2 Domain::wrap(Vec2 p) const {
  for (int a = 0; a < 2; ++a) {
    if (!axes[a].periodic) continue;
    const double len = axes[a].length();
    double t = std::fmod(p[a] - axes[a].lo, len);
    if (t < 0.0) t += len;
    if (t >= len) t = 0.0;  // guard the rounded-up seam case
    p[a] = axes[a].lo + t;
  }
  return p;
}

Vec2 Domain::clamp(Vec2 p) const {
  for (int a = 0; a < 2; ++a) {
    if (axes[a].periodic) continue;
    p[a] = std::min(std::max(p[a], axes[a].lo), axes[a].hi);
  }
  return p;
}

Domain Domain::torus(double lx, double ly) {
  return Domain{{AxisInterval{0.0, lx, true}, AxisInterval{0.0, ly, true}}};
}

Domain Domain::cylinder(double lx, double ly) {
  return Domain{{AxisInterval{0.0, lx, true}, AxisInterval{0.0, ly, false}}};
}

Domain Domain::box(double lx, double ly) {
  return Domain{{AxisInterval{0.0, lx, false}, AxisInterval{0.0, ly, false}}};
}

namespace {

std::vector<double> axis_coordinates(const AxisInterval& axis, int count, double delta) {
  if (count < 2) throw std::invalid_argument("regular_grid: counts must be >= 2 per axis");
  if (delta < 0.0) throw std::invalid_argument("regular_grid: boundary shift delta must be >= 0");
  const double len = axis.length();
  std::vector<double> coords(count);
  if (axis.periodic) {
    const double h = (len - 2.0 * delta) / count;
    if (delta > 0.5 * len / count)
      throw std::invalid_argument("regular_grid: delta exceeds half a grid cell");
    for (int i = 0; i < count; ++i) coords[i] = axis.lo + delta + i * h;
  } else {
    const double h = len / (count - 1);
    if (delta > 0.5 * h)
      throw std::invalid_argument("regular_grid: delta exceeds half a grid cell");
    for (int i = 0; i < count; ++i) coords[i] = axis.lo + i * h;
    if (delta > 0.0) {
      coords.front() = axis.lo + delta;
      coords.back() = axis.hi - delta;
    }
  }
  return coords;
}

}  // namespace

std::vector<Vec2> regular_grid(const Domain& domain, std::array<int, 2> counts, double delta) {
  const std::vector<double> xs = axis_coordinates(domain.axes[0], counts[0], delta);
  const std::vector<double> ys = axis_coordinates(domain.axes[1], counts[1], delta);
  std::vector<Vec2> grid;
  grid.reserve(xs.size() * ys.size());
  for (double x : xs)
    for (double y : ys) grid.emplace_back(x, y);
  return grid;
}

NodePartition boundary_nodes(const Domain& domain, const std::vector<Vec2>& grid) {
  NodePartition partition;
  for (const Vec2& p : grid) {
    Vec2 normal = Vec2::Zero();
    for (int a = 0; a < 2; ++a) {
      if (domain.axes[a].periodic) continue;
      // grids are constructed, not measured: exact endpoint comparison
      if (p[a] == domain.axes[a].lo) normal[a] -= 1.0;
      if (p[a] == domain.axes[a].hi) normal[a] += 1.0;
    }
    if (normal.isZero()) {
      partition.interior.push_back(p);
    } else {
      partition.boundary.push_back(BoundaryNode{p, normal.normalized()});
    }
  }
  return partition;
}

}  // namespace dynlap

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dynlap/domain.hpp"
#include "dynlap/types.hpp"

namespace dynlap {

// Compactly supported Wendland function psi_{d,k} on [0,1], normalized so
// psi(0) = 1, together with its exact first and second derivative polynomials.
// Evaluation happens in the factored form (1-r)^p q(r), which is numerically
// stable where the expanded coefficient tables would cancel catastrophically.
struct WendlandKernel {
  int space_dim = 0;    // d
  int smoothness = 0;   // k
  std::string name;
  std::vector<double> poly;    // ascending coefficients of psi on [0,1]
  std::vector<double> dpoly;   // formal derivative of poly
  std::vector<double> ddpoly;  // formal second derivative of poly
  double scale = 1.0;          // overall positive scaling of all tables

  struct Factored;
  std::shared_ptr<const Factored> factored;

  double value(double r) const;  // psi(r); exactly 0 for r >= 1
  double d1(double r) const;
  double d2(double r) const;

  // Kernel scaled by a positive constant (psi -> c*psi); every discrete
  // operator of the library is invariant under this.
  WendlandKernel scaled(double c) const;

  static const WendlandKernel& from_name(const std::string& name);
  static const std::vector<std::string>& names();
};

// Reciprocal support radius; support of each basis function is 1/eps.
struct ShapeParameter {
  double eps;
  explicit ShapeParameter(double e);
  double support_radius() const { return 1.0 / eps; }
};

double kernel_value(const WendlandKernel& kernel, double r);
double kernel_d1(const WendlandKernel& kernel, double r);
double kernel_d2(const WendlandKernel& kernel, double r);

// phi_j(x) = psi(eps * dist(x, center)) with the domain's minimal-image metric.
double basis_value(const WendlandKernel& kernel, double eps, const Vec2& center,
                   const Vec2& x, const Domain& metric);

// Gradient of phi_j at x: eps * psi'(eps r) * u with u the unit minimal-image
// displacement from center to x; the zero vector at r = 0.
Vec2 basis_gradient(const WendlandKernel& kernel, double eps, const Vec2& center,
                    const Vec2& x, const Domain& metric);

// Laplacian of phi_j at x in two dimensions:
// eps^2 psi''(eps r) + (eps / r) psi'(eps r), with limit 2 eps^2 psi''(0) at r = 0.
double basis_laplacian(const WendlandKernel& kernel, double eps, const Vec2& center,
                       const Vec2& x, const Domain& metric);

}  // namespace dynlap

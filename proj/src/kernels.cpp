#include "dynlap/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace dynlap {

namespace {

// Evaluate an ascending-coefficient polynomial by Horner's rule.
double horner(const std::vector<double>& coeffs, double r) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * r + *it;
  return acc;
}

std::vector<double> formal_derivative(const std::vector<double>& coeffs) {
  std::vector<double> out;
  for (std::size_t i = 1; i < coeffs.size(); ++i) out.push_back(coeffs[i] * static_cast<double>(i));
  return out;
}

// d/dr [(1-r)^p q(r)] = (1-r)^(p-1) [-p q(r) + (1-r) q'(r)]
std::vector<double> factored_derivative(int p, const std::vector<double>& q) {
  std::vector<double> out(q.size() + 1, 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) out[i] -= p * q[i];
  for (std::size_t i = 1; i < q.size(); ++i) {
    out[i - 1] += q[i] * static_cast<double>(i);  // q'(r)
    out[i] -= q[i] * static_cast<double>(i);      // -r q'(r)
  }
  while (out.size() > 1 && out.back() == 0.0) out.pop_back();
  return out;
}

std::vector<double> expand_factored(int p, const std::vector<double>& q) {
  // binomial expansion of (1-r)^p convolved with q
  std::vector<double> binom(p + 1);
  double b = 1.0;
  for (int i = 0; i <= p; ++i) {
    binom[i] = (i % 2 == 0 ? b : -b);
    b = b * (p - i) / (i + 1);
  }
  std::vector<double> out(binom.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < binom.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) out[i + j] += binom[i] * q[j];
  return out;
}

}  // namespace

// Factored representation (1-r)^p q(r) used for numerically stable evaluation;
// the small q coefficients avoid the cancellation the expanded tables suffer.
struct WendlandKernel::Factored {
  int p = 0, p1 = 0, p2 = 0;
  std::vector<double> q, q1, q2;
};

namespace {

WendlandKernel make_kernel(int d, int k, std::string name, int p, std::vector<double> q) {
  WendlandKernel kernel;
  kernel.space_dim = d;
  kernel.smoothness = k;
  kernel.name = std::move(name);
  kernel.poly = expand_factored(p, q);
  kernel.dpoly = formal_derivative(kernel.poly);
  kernel.ddpoly = formal_derivative(kernel.dpoly);
  auto factored = std::make_shared<WendlandKernel::Factored>();
  factored->p = p;
  factored->q = std::move(q);
  factored->p1 = factored->p - 1;
  factored->q1 = factored_derivative(factored->p, factored->q);
  factored->p2 = factored->p1 - 1;
  factored->q2 = factored_derivative(factored->p1, factored->q1);
  kernel.factored = std::move(factored);
  return kernel;
}

// Tables derived once from the classical construction
//   psi_{d,k} = I^k psi_l,  psi_l(r) = (1-r)^l_+,  l = floor(d/2) + k + 1,
//   (I psi)(r) = \int_r^1 t psi(t) dt,
// normalized so that psi(0) = 1 (any positive scaling leaves the discrete
// operators L_in A^{-1} E_0 unchanged). All coefficients are exact rationals:
//   psi31 = (1-r)^4  (1 + 4r)
//   psi42 = (1-r)^7  (1 + 7r + 16r^2)
//   psi53 = (1-r)^9  (5 + 45r + 159r^2 + 231r^3)/5
//   psi64 = (1-r)^12 (7 + 84r + 426r^2 + 1108r^3 + 1287r^4)/7
const std::vector<WendlandKernel>& kernel_table() {
  static const std::vector<WendlandKernel> table = {
      make_kernel(3, 1, "psi31", 4, {1.0, 4.0}),
      make_kernel(4, 2, "psi42", 7, {1.0, 7.0, 16.0}),
      make_kernel(5, 3, "psi53", 9, {1.0, 9.0, 159.0 / 5.0, 231.0 / 5.0}),
      make_kernel(6, 4, "psi64", 12, {1.0, 12.0, 426.0 / 7.0, 1108.0 / 7.0, 1287.0 / 7.0}),
  };
  return table;
}

void check_radius(double r) {
  if (r < 0.0 || !std::isfinite(r)) throw std::domain_error("kernel radius must be nonnegative");
}

double eval_factored(int p, const std::vector<double>& q, double r, double scale) {
  double s = 1.0 - r;
  double pw = 1.0;
  for (int i = 0; i < p; ++i) pw *= s;
  return scale * pw * horner(q, r);
}

}  // namespace

double WendlandKernel::value(double r) const {
  check_radius(r);
  if (r >= 1.0) return 0.0;
  return eval_factored(factored->p, factored->q, r, scale);
}

double WendlandKernel::d1(double r) const {
  check_radius(r);
  if (r >= 1.0) return 0.0;
  return eval_factored(factored->p1, factored->q1, r, scale);
}

double WendlandKernel::d2(double r) const {
  check_radius(r);
  if (r >= 1.0) return 0.0;
  return eval_factored(factored->p2, factored->q2, r, scale);
}

WendlandKernel WendlandKernel::scaled(double c) const {
  if (!(c > 0.0)) throw std::invalid_argument("kernel scaling must be positive");
  WendlandKernel out = *this;
  out.scale = scale * c;
  for (double& v : out.poly) v *= c;
  for (double& v : out.dpoly) v *= c;
  for (double& v : out.ddpoly) v *= c;
  return out;
}

const WendlandKernel& WendlandKernel::from_name(const std::string& name) {
  for (const WendlandKernel& kernel : kernel_table())
    if (kernel.name == name) return kernel;
  throw std::invalid_argument("unknown kernel '" + name + "' (supported: psi31, psi42, psi53, psi64)");
}

const std::vector<std::string>& WendlandKernel::names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const WendlandKernel& kernel : kernel_table()) out.push_back(kernel.name);
    return out;
  }();
  return names;
}

ShapeParameter::ShapeParameter(double e) : eps(e) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("shape parameter eps must be positive");
}

double kernel_value(const WendlandKernel& kernel, double r) { return kernel.value(r); }
double kernel_d1(const WendlandKernel& kernel, double r) { return kernel.d1(r); }
double kernel_d2(const WendlandKernel& kernel, double r) { return kernel.d2(r); }

double basis_value(const WendlandKernel& kernel, double eps, const Vec2& center,
                   const Vec2& x, const Domain& metric) {
  return kernel.value(eps * metric.distance(center, x));
}

Vec2 basis_gradient(const WendlandKernel& kernel, double eps, const Vec2& center,
                    const Vec2& x, const Domain& metric) {
  const Vec2 u = metric.displacement(center, x);
  const double r = u.norm();
  if (r == 0.0 || eps * r >= 1.0) return Vec2::Zero();
  return (eps * kernel.d1(eps * r) / r) * u;
}

double basis_laplacian(const WendlandKernel& kernel, double eps, const Vec2& center,
                       const Vec2& x, const Domain& metric) {
  const double r = metric.distance(center, x);
  const double s = eps * r;
  if (s >= 1.0) return 0.0;
  if (r == 0.0) return 2.0 * eps * eps * kernel.d2(0.0);
  return eps * eps * kernel.d2(s) + eps * kernel.d1(s) / r;
}

}  // namespace dynlap

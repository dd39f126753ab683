#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dynlap/kernels.hpp"

using namespace dynlap;

namespace {

// Independent oracle: reconstruct the Wendland polynomial from scratch via the
// integral recursion psi_{d,k} = I^k (1-r)^l, (I psi)(r) = \int_r^1 t psi(t) dt,
// l = floor(d/2)+k+1, normalized to psi(0)=1. This code path shares nothing
// with the library's hard-coded tables.
std::vector<double> reference_poly(int d, int k) {
  const int l = d / 2 + k + 1;
  std::vector<double> c(l + 1, 0.0);
  double binom = 1.0;
  for (int i = 0; i <= l; ++i) {
    c[i] = (i % 2 == 0 ? binom : -binom);
    binom = binom * (l - i) / (i + 1);
  }
  for (int pass = 0; pass < k; ++pass) {
    std::vector<double> tpsi(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) tpsi[i + 1] = c[i];
    std::vector<double> anti(tpsi.size() + 1, 0.0);
    for (std::size_t i = 0; i < tpsi.size(); ++i) anti[i + 1] = tpsi[i] / double(i + 1);
    double at_one = 0.0;
    for (double v : anti) at_one += v;
    for (double& v : anti) v = -v;
    anti[0] += at_one;
    c = anti;
  }
  const double scale = 1.0 / c[0];
  for (double& v : c) v *= scale;
  return c;
}

double eval_poly(const std::vector<double>& coeffs, double r) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * r + *it;
  return acc;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("coefficient tables match the independent integral-recursion oracle") {
  const std::pair<const char*, std::pair<int, int>> cases[] = {
      {"psi31", {3, 1}}, {"psi42", {4, 2}}, {"psi53", {5, 3}}, {"psi64", {6, 4}}};
  for (const auto& [name, dk] : cases) {
    const WendlandKernel& kernel = WendlandKernel::from_name(name);
    CHECK(kernel.space_dim == dk.first);
    CHECK(kernel.smoothness == dk.second);
    const std::vector<double> ref = reference_poly(dk.first, dk.second);
    REQUIRE(kernel.poly.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i)
      CHECK(kernel.poly[i] == doctest::Approx(ref[i]).epsilon(1e-10));
  }
}

TEST_CASE("frozen point values and second derivatives at zero") {
  CHECK(kernel_value(WendlandKernel::from_name("psi31"), 0.5) == doctest::Approx(0.1875).epsilon(1e-15));
  CHECK(kernel_d2(WendlandKernel::from_name("psi31"), 0.0) == doctest::Approx(-20.0));
  CHECK(kernel_d2(WendlandKernel::from_name("psi42"), 0.0) == doctest::Approx(-24.0));
  CHECK(kernel_d2(WendlandKernel::from_name("psi53"), 0.0) == doctest::Approx(-132.0 / 5.0));
  CHECK(kernel_d2(WendlandKernel::from_name("psi64"), 0.0) == doctest::Approx(-240.0 / 7.0));
}

TEST_CASE("compact support and smoothness at the origin") {
  for (const std::string& name : WendlandKernel::names()) {
    const WendlandKernel& kernel = WendlandKernel::from_name(name);
    CHECK(kernel.value(1.0) == 0.0);
    CHECK(kernel.value(2.3) == 0.0);
    CHECK(kernel.d1(1.7) == 0.0);
    CHECK(kernel.value(0.0) > 0.0);
    CHECK(kernel.d1(0.0) == 0.0);
    // support boundary is continuous: psi(1-) ~ 0
    CHECK(std::abs(kernel.value(1.0 - 1e-9)) < 1e-8);
  }
}

TEST_CASE("negative radius is a domain error") {
  const WendlandKernel& kernel = WendlandKernel::from_name("psi31");
  CHECK_THROWS_AS(kernel.value(-0.1), std::domain_error);
  CHECK_THROWS_AS(kernel.d1(-1e-12), std::domain_error);
  CHECK_THROWS_AS(kernel.d2(-3.0), std::domain_error);
}

TEST_CASE("unknown kernel name is rejected") {
  CHECK_THROWS_AS(WendlandKernel::from_name("psi99"), std::invalid_argument);
  CHECK(WendlandKernel::names().size() == 4);
}

TEST_CASE("dpoly/ddpoly are the formal derivatives of poly") {
  for (const std::string& name : WendlandKernel::names()) {
    const WendlandKernel& kernel = WendlandKernel::from_name(name);
    REQUIRE(kernel.dpoly.size() == kernel.poly.size() - 1);
    REQUIRE(kernel.ddpoly.size() == kernel.dpoly.size() - 1);
    for (std::size_t i = 1; i < kernel.poly.size(); ++i)
      CHECK(kernel.dpoly[i - 1] == doctest::Approx(kernel.poly[i] * double(i)));
    for (std::size_t i = 1; i < kernel.dpoly.size(); ++i)
      CHECK(kernel.ddpoly[i - 1] == doctest::Approx(kernel.dpoly[i] * double(i)));
  }
}

TEST_CASE("derivatives match central finite differences at 1000 random radii") {
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double h = 1e-5;
  for (const std::string& name : WendlandKernel::names()) {
    const WendlandKernel& kernel = WendlandKernel::from_name(name);
    double worst_d1 = 0.0, worst_d2 = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const double r = h + (1.0 - 2.0 * h) * unit(rng);
      const double fd1 = (kernel.value(r + h) - kernel.value(r - h)) / (2.0 * h);
      const double fd2 = (kernel.d1(r + h) - kernel.d1(r - h)) / (2.0 * h);
      worst_d1 = std::max(worst_d1, std::abs(kernel.d1(r) - fd1));
      worst_d2 = std::max(worst_d2, std::abs(kernel.d2(r) - fd2));
    }
    CHECK(worst_d1 <= 1e-7);
    CHECK(worst_d2 <= 1e-7);
  }
}

TEST_CASE("basis_value uses the minimal-image metric") {
  const Domain torus = Domain::torus();
  const WendlandKernel& kernel = WendlandKernel::from_name("psi31");
  const Vec2 center(0.1, 0.0), x(6.2, 0.0);
  const double expected_r = two_pi - 6.1;
  CHECK(basis_value(kernel, 1.0, center, x, torus) ==
        doctest::Approx(kernel.value(expected_r)).epsilon(1e-14));
  CHECK(basis_value(kernel, 1.0, center, center, torus) == doctest::Approx(kernel.value(0.0)));
  // eps*dist >= 1 -> outside support
  CHECK(basis_value(kernel, 1.0, Vec2(0.0, 0.0), Vec2(3.0, 0.0), torus) == 0.0);
}

TEST_CASE("basis_gradient matches finite differences and vanishes at the center") {
  const Domain torus = Domain::torus();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coord(0.0, two_pi);
  const double h = 1e-6;
  for (const std::string& name : WendlandKernel::names()) {
    const WendlandKernel& kernel = WendlandKernel::from_name(name);
    const double eps = 0.7;
    CHECK(basis_gradient(kernel, eps, Vec2(1.0, 2.0), Vec2(1.0, 2.0), torus).norm() == 0.0);
    CHECK(basis_gradient(kernel, eps, Vec2(0.0, 0.0), Vec2(3.0, 1.0), torus).norm() == 0.0);
    for (int trial = 0; trial < 200; ++trial) {
      const Vec2 center(coord(rng), coord(rng));
      Vec2 x = center + Vec2(0.9 * (coord(rng) / two_pi - 0.5), 0.9 * (coord(rng) / two_pi - 0.5));
      x = torus.wrap(x);
      const Vec2 grad = basis_gradient(kernel, eps, center, x, torus);
      const Vec2 fd(
          (basis_value(kernel, eps, center, torus.wrap(x + Vec2(h, 0)), torus) -
           basis_value(kernel, eps, center, torus.wrap(x - Vec2(h, 0)), torus)) / (2 * h),
          (basis_value(kernel, eps, center, torus.wrap(x + Vec2(0, h)), torus) -
           basis_value(kernel, eps, center, torus.wrap(x - Vec2(0, h)), torus)) / (2 * h));
      const double scale = std::max(1.0, grad.norm());
      CHECK((grad - fd).norm() / scale <= 1e-6);
    }
  }
}

TEST_CASE("basis_laplacian matches the 5-point stencil away from the center") {
  const Domain torus = Domain::torus();
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> coord(0.0, two_pi);
  const double h = 1e-4;
  for (const std::string& name : WendlandKernel::names()) {
    const WendlandKernel& kernel = WendlandKernel::from_name(name);
    const double eps = 0.7;
    for (int trial = 0; trial < 200; ++trial) {
      const Vec2 center(coord(rng), coord(rng));
      Vec2 x = center + Vec2(0.2 + 0.7 * coord(rng) / two_pi, 0.2 + 0.7 * coord(rng) / two_pi);
      x = torus.wrap(x);
      const double lap = basis_laplacian(kernel, eps, center, x, torus);
      const double c = basis_value(kernel, eps, center, x, torus);
      const double fd =
          (basis_value(kernel, eps, center, torus.wrap(x + Vec2(h, 0)), torus) +
           basis_value(kernel, eps, center, torus.wrap(x - Vec2(h, 0)), torus) +
           basis_value(kernel, eps, center, torus.wrap(x + Vec2(0, h)), torus) +
           basis_value(kernel, eps, center, torus.wrap(x - Vec2(0, h)), torus) - 4.0 * c) /
          (h * h);
      const double scale = std::max(1.0, std::abs(lap));
      CHECK(std::abs(lap - fd) / scale <= 1e-5);
    }
  }
}

TEST_CASE("basis_laplacian limit value and continuity at r = 0") {
  const Domain torus = Domain::torus();
  const WendlandKernel& psi31 = WendlandKernel::from_name("psi31");
  // 2 * eps^2 * psi''(0) with psi''(0) = -20
  CHECK(basis_laplacian(psi31, 1.0, Vec2(1, 1), Vec2(1, 1), torus) == doctest::Approx(-40.0));
  for (const std::string& name : WendlandKernel::names()) {
    const WendlandKernel& kernel = WendlandKernel::from_name(name);
    const double eps = 1.3;
    const double limit = basis_laplacian(kernel, eps, Vec2(2, 2), Vec2(2, 2), torus);
    const double near = basis_laplacian(kernel, eps, Vec2(2, 2), Vec2(2 + 1e-9, 2), torus);
    CHECK(std::abs(near - limit) <= 1e-5);
  }
}

TEST_CASE("basis_value is symmetric under center/point swap") {
  const Domain torus = Domain::torus();
  const WendlandKernel& kernel = WendlandKernel::from_name("psi42");
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> coord(0.0, two_pi);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec2 a(coord(rng), coord(rng)), b(coord(rng), coord(rng));
    CHECK(basis_value(kernel, 0.8, a, b, torus) == doctest::Approx(basis_value(kernel, 0.8, b, a, torus)));
  }
}

TEST_CASE("scaled kernel multiplies all tables") {
  const WendlandKernel scaled = WendlandKernel::from_name("psi31").scaled(3.5);
  CHECK(scaled.value(0.5) == doctest::Approx(3.5 * 0.1875));
  CHECK(scaled.d2(0.0) == doctest::Approx(3.5 * -20.0));
  CHECK_THROWS_AS(WendlandKernel::from_name("psi31").scaled(0.0), std::invalid_argument);
}

}  // TEST_SUITE

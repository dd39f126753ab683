#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "dynlap/collocation.hpp"
#include "dynlap/domain.hpp"
#include "dynlap/dynamics.hpp"
#include "dynlap/kernels.hpp"
#include "dynlap/spectral.hpp"

using namespace dynlap;

namespace {

struct StdMapOperators {
    CollocationSetup setup;
    Matrix D;
    Matrix P;
    Matrix M;
};

// Standard-map experiment: 20x20 torus grid, psi_{6,4}, eps = 0.4, map
// iterated twice.  Assembled once and shared across test cases.
const StdMapOperators& std_map_operators() {
    static const StdMapOperators ops = [] {
        const Domain dom = Domain::torus();
        const FlowSystem dyn = FlowSystem::standard_map(0.971635, 2);
        const auto grid = regular_grid(dom, {20, 20}, 0.0);
        StdMapOperators out{assemble(dom, dyn, grid, grid,
                                     WendlandKernel::from_name("psi64"),
                                     ShapeParameter(0.4)),
                            {}, {}, {}};
        out.D = discrete_operator(out.setup, laplacian_rows(out.setup));
        out.P = discrete_operator(out.setup, transfer_rows(out.setup, dyn));
        out.M = dynamic_laplacian(out.D, {out.P}).matrix;
        return out;
    }();
    return ops;
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("dynamic laplacian assembly") {
    Matrix D(2, 2);
    D << -1.0, 0.5, 0.5, -2.0;
    const Matrix I = Matrix::Identity(2, 2);

    SUBCASE("identity transfer returns D") {
        const auto M = dynamic_laplacian(D, {I});
        CHECK((M.matrix - D).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK(M.formulation == DynamicLaplacian::Formulation::fixed_domain);
    }
    SUBCASE("three times with identity transfers return D") {
        const auto M = dynamic_laplacian(D, {I, I});
        CHECK((M.matrix - D).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK(M.formulation == DynamicLaplacian::Formulation::multi_time);
    }
    SUBCASE("two times gives the average of D and P^T D P") {
        Matrix P(2, 2);
        P << 0.0, 1.0, 1.0, 0.0;
        const auto M = dynamic_laplacian(D, {P});
        const Matrix expected = 0.5 * (D + P.transpose() * D * P);
        CHECK((M.matrix - expected).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("explicit adjoints replace the transpose") {
        Matrix P(2, 2);
        P << 0.0, 1.0, 1.0, 0.0;
        const auto via_transpose = dynamic_laplacian(D, {P});
        const auto via_adjoint =
            dynamic_laplacian(D, {P}, {Matrix(P.transpose())});
        CHECK((via_transpose.matrix - via_adjoint.matrix).cwiseAbs().maxCoeff() ==
              0.0);
    }
    SUBCASE("dimension mismatch throws") {
        CHECK_THROWS_AS(dynamic_laplacian(D, {Matrix::Identity(3, 3)}),
                        std::invalid_argument);
        CHECK_THROWS_AS(dynamic_laplacian(D, {I}, {I, I}),
                        std::invalid_argument);
    }
}

TEST_CASE("diagonal toy eigenproblem") {
    Matrix M = Matrix::Zero(4, 4);
    M.diagonal() << -5.0, -1.0, 0.0, -3.0;
    const auto result = smallest_magnitude_eigs(M, 2, 1e-10);
    REQUIRE(result.eigenvalues.size() == 2);
    CHECK(std::abs(result.eigenvalues[0]) <= 1e-14);
    CHECK(result.eigenvalues[1].real() == doctest::Approx(-1.0));
    CHECK(result.eigenvalues[1].imag() == doctest::Approx(0.0));
    // Normalized eigenvectors are signed unit basis vectors.
    CHECK(result.eigenvectors[0][2] == doctest::Approx(1.0));
    CHECK(result.eigenvectors[1][1] == doctest::Approx(1.0));
    CHECK(result.residuals[0] <= 1e-14);
}

TEST_CASE("arnoldi agrees with the dense path on a nonsingular toy") {
    Matrix M = Matrix::Zero(60, 60);
    for (int i = 0; i < 60; ++i) M(i, i) = -0.1 * (i + 1);
    M(0, 59) = 0.05;  // break normality
    const auto dense = smallest_magnitude_eigs(M, 3, 1e-10, EigMethod::dense);
    const auto arnoldi =
        smallest_magnitude_eigs(M, 3, 1e-10, EigMethod::arnoldi);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(dense.eigenvalues[static_cast<std::size_t>(i)] -
                       arnoldi.eigenvalues[static_cast<std::size_t>(i)]) <=
              1e-9);
    }
}

TEST_CASE("torus identity dynamics reproduces the Laplace spectrum") {
    const Domain dom = Domain::torus();
    const FlowSystem dyn = FlowSystem::identity(dom);
    const auto grid = regular_grid(dom, {20, 20}, 0.0);
    const auto setup = assemble(dom, dyn, grid, grid,
                                WendlandKernel::from_name("psi64"),
                                ShapeParameter(0.4));
    const Matrix D = discrete_operator(setup, laplacian_rows(setup));
    const Matrix P = discrete_operator(setup, transfer_rows(setup, dyn));
    const Matrix M = dynamic_laplacian(D, {P}).matrix;

    const auto result = smallest_magnitude_eigs(M, 5, 1e-8);
    // Analytic Laplace spectrum on the 2pi-torus: 0, then -1 with
    // multiplicity 4 (modes cos x, sin x, cos y, sin y).
    CHECK(std::abs(result.eigenvalues[0]) <= 2e-2);
    for (int i = 1; i <= 4; ++i) {
        CHECK(result.eigenvalues[static_cast<std::size_t>(i)].real() ==
              doctest::Approx(-1.0).epsilon(2e-2));
        CHECK(std::abs(result.eigenvalues[static_cast<std::size_t>(i)].imag()) <=
              1e-6);
    }
}

TEST_CASE("standard map spectrum matches the reference values") {
    const auto& ops = std_map_operators();
    const auto result = smallest_magnitude_eigs(ops.M, 4, 1e-8);

    REQUIRE(result.eigenvalues.size() == 4);
    CHECK(std::abs(result.eigenvalues[0]) <= 1e-2);
    CHECK(result.eigenvalues[1].real() == doctest::Approx(-1.15).epsilon(0.05));
    CHECK(result.eigenvalues[2].real() == doctest::Approx(-1.17).epsilon(0.05));
    CHECK(result.eigenvalues[3].real() == doctest::Approx(-2.10).epsilon(0.05));
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& lambda = result.eigenvalues[i];
        CHECK(std::abs(lambda.imag()) <=
              1e-6 * std::max(1.0, std::abs(lambda.real())));
        CHECK(result.residuals[i] <= 1e-8);
    }

    // The leading eigenfunction is constant up to 1e-3 relative variation.
    const Vector& f1 = result.eigenvectors[0];
    const double mean = f1.mean();
    CHECK((f1.array() - mean).abs().maxCoeff() <= 1e-3 * std::abs(mean));

    // Normalization contract: max-magnitude entry is +1.
    for (const Vector& f : result.eigenvectors) {
        CHECK(f.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
        Eigen::Index idx;
        f.cwiseAbs().maxCoeff(&idx);
        CHECK(f[idx] > 0.0);
    }
}

TEST_CASE("rayleigh quotient diagnostics") {
    const auto& ops = std_map_operators();
    const auto result = smallest_magnitude_eigs(ops.M, 2, 1e-8);

    // Eigenpair self-consistency: quotient of f2 recovers -lambda_2.
    const double q = rayleigh_check(ops.D, ops.P, result.eigenvectors[1]);
    CHECK(std::abs(q + result.eigenvalues[1].real()) <= 1e-3);

    // Constant vectors sit in the kernel.
    CHECK(std::abs(rayleigh_check(ops.M, Vector::Ones(ops.M.rows()))) <= 1e-3);

    // Symmetric negative semidefinite toy.
    Matrix toy = Matrix::Zero(2, 2);
    toy(1, 1) = -2.0;
    Vector f = Vector::Zero(2);
    f[1] = 1.0;
    CHECK(rayleigh_check(toy, f) == doctest::Approx(2.0));

    CHECK_THROWS_AS(rayleigh_check(toy, Vector::Zero(2)),
                    std::invalid_argument);
}

TEST_CASE("dense and arnoldi agree on the standard-map operator") {
    const auto& ops = std_map_operators();
    const auto dense = smallest_magnitude_eigs(ops.M, 4, 1e-8, EigMethod::dense);
    const auto arnoldi =
        smallest_magnitude_eigs(ops.M, 4, 1e-8, EigMethod::arnoldi);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(dense.eigenvalues[i] - arnoldi.eigenvalues[i]) <= 1e-7);
        // Eigenfunctions with symmetric +/- cells have |min| ~ |max|, so the
        // max-magnitude normalization node can differ between backends;
        // compare up to a global sign.
        const double diff = (dense.eigenvectors[i] - arnoldi.eigenvectors[i])
                                .cwiseAbs()
                                .maxCoeff();
        const double flip = (dense.eigenvectors[i] + arnoldi.eigenvectors[i])
                                .cwiseAbs()
                                .maxCoeff();
        CHECK(std::min(diff, flip) <= 1e-5);
    }
}

TEST_CASE("eigensolve is deterministic") {
    const auto& ops = std_map_operators();
    const auto a = smallest_magnitude_eigs(ops.M, 4, 1e-8);
    const auto b = smallest_magnitude_eigs(ops.M, 4, 1e-8);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a.eigenvalues[i] == b.eigenvalues[i]);
        CHECK((a.eigenvectors[i] - b.eigenvectors[i]).cwiseAbs().maxCoeff() ==
              0.0);
    }
}

TEST_CASE("moving-domain path agrees with the fixed-domain path") {
    const Domain dom = Domain::torus();
    const FlowSystem dyn = FlowSystem::standard_map(0.971635, 2);
    const auto grid = regular_grid(dom, {20, 20}, 0.0);
    const WendlandKernel kernel = WendlandKernel::from_name("psi64");
    const ShapeParameter eps(0.4);
    const auto setup = assemble(dom, dyn, grid, grid, kernel, eps);

    std::vector<Vec2> image_grid;
    image_grid.reserve(grid.size());
    for (const Vec2& p : grid) image_grid.push_back(dyn.forward(p));
    const auto image = assemble(dom, dyn, image_grid, image_grid, kernel, eps);

    const auto [D, Dhat] = moving_domain_operators(setup, image);
    const Matrix M_moving = 0.5 * (D + Dhat);
    const auto moving = smallest_magnitude_eigs(M_moving, 4, 1e-6);

    const auto& ops = std_map_operators();
    const auto fixed = smallest_magnitude_eigs(ops.M, 4, 1e-8);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(moving.eigenvalues[i].real() -
                       fixed.eigenvalues[i].real()) <= 1e-2);
    }
}

TEST_CASE("eigensolver argument validation") {
    const Matrix M = Matrix::Identity(5, 5);
    CHECK_THROWS_AS(smallest_magnitude_eigs(M, 0, 1e-8), std::invalid_argument);
    CHECK_THROWS_AS(smallest_magnitude_eigs(M, 6, 1e-8), std::invalid_argument);
    CHECK_THROWS_AS(smallest_magnitude_eigs(M, 2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(smallest_magnitude_eigs(Matrix::Zero(2, 3), 1, 1e-8),
                    std::invalid_argument);
}

}  // TEST_SUITE

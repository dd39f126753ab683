#include "dynlap/collocation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dynlap/log.hpp"

namespace dynlap {

namespace {

// Solve A^T X = B with the factorization of A (A = P^{-1} L U, so
// A^T = U^T L^T P): two transposed triangular solves plus the permutation.
Matrix solve_transposed(const Eigen::PartialPivLU<Matrix>& lu,
                        const Matrix& b) {
    Matrix z = lu.matrixLU()
                   .triangularView<Eigen::Upper>()
                   .transpose()
                   .solve(b);
    lu.matrixLU()
        .triangularView<Eigen::UnitLower>()
        .transpose()
        .solveInPlace(z);
    return lu.permutationP().transpose() * z;
}

double mean_support_overlap(const Domain& domain,
                            const std::vector<Vec2>& centers, double radius) {
    const std::size_t n = centers.size();
    if (n < 2) return 0.0;
    long total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (domain.distance(centers[i], centers[j]) < radius) total += 2;
        }
    }
    return static_cast<double>(total) / static_cast<double>(n);
}

}  // namespace

CollocationSetup assemble(const Domain& domain, const FlowSystem& dynamics,
                          std::vector<Vec2> centers,
                          const std::vector<Vec2>& nodes,
                          WendlandKernel kernel, ShapeParameter eps,
                          std::vector<double> times,
                          double cond_warn_threshold) {
    if (centers.empty()) throw std::invalid_argument("assemble: no centers");
    if (nodes.size() != centers.size())
        throw std::invalid_argument(
            "assemble: collocation node count must equal the center count");
    for (const Vec2& c : centers)
        if (!domain.contains(c))
            throw std::invalid_argument("assemble: center outside the domain");
    for (const Vec2& x : nodes)
        if (!domain.contains(x))
            throw std::invalid_argument("assemble: node outside the domain");

    CollocationSetup setup;
    setup.domain = domain;
    setup.centers = std::move(centers);
    setup.kernel = std::move(kernel);
    setup.eps = eps;

    NodePartition part = boundary_nodes(domain, nodes);
    setup.interior = std::move(part.interior);
    setup.boundary = std::move(part.boundary);

    if (times.empty()) {
        times.push_back(dynamics.tf());
    }
    setup.boundary_times = times;

    const int n = setup.n();
    const int l_in = setup.l_in();

    setup.A.resize(n, n);
    // Interior interpolation rows A_in.
    for (int i = 0; i < l_in; ++i) {
        const Vec2& x = setup.interior[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            setup.A(i, j) = basis_value(setup.kernel, eps.eps,
                                        setup.centers[static_cast<std::size_t>(j)],
                                        x, domain);
        }
    }
    // Boundary rows L_bd: directional derivative along (I + sum C^{-1}) n(x).
    for (std::size_t b = 0; b < setup.boundary.size(); ++b) {
        const BoundaryNode& node = setup.boundary[b];
        Mat2 weight = Mat2::Identity();
        for (double t : setup.boundary_times)
            weight += dynamics.cauchy_green_inverse(node.position, t).matrix;
        const Vec2 direction = weight * node.normal;
        const int i = l_in + static_cast<int>(b);
        for (int j = 0; j < n; ++j) {
            const Vec2 grad = basis_gradient(
                setup.kernel, eps.eps,
                setup.centers[static_cast<std::size_t>(j)], node.position,
                domain);
            setup.A(i, j) = grad.dot(direction);
        }
    }

    setup.lu.compute(setup.A);
    const double rcond = setup.lu.rcond();
    setup.cond_estimate =
        (rcond > 0.0 && std::isfinite(rcond)) ? 1.0 / rcond
                                              : std::numeric_limits<double>::infinity();
    if (!std::isfinite(setup.cond_estimate) || rcond == 0.0) {
        std::ostringstream msg;
        msg << "assemble: collocation matrix is numerically singular "
            << "(rcond = " << rcond << ", n = " << n << ")";
        throw std::runtime_error(msg.str());
    }
    if (setup.cond_estimate > cond_warn_threshold) {
        logging::warn("assemble: condition estimate ", setup.cond_estimate,
                      " exceeds threshold ", cond_warn_threshold);
    }
    logging::info("assemble: n = ", n, ", interior = ", l_in,
                  ", cond estimate = ", setup.cond_estimate);

    // Z = A^{-1} E0 with E0 = [I_{l_in}; 0] (interior value injection).
    Matrix e0 = Matrix::Zero(n, l_in);
    e0.topLeftCorner(l_in, l_in).setIdentity();
    setup.Z = setup.lu.solve(e0);

    setup.mean_overlap =
        mean_support_overlap(domain, setup.centers, eps.support_radius());
    return setup;
}

Matrix discrete_operator(const CollocationSetup& setup, const Matrix& rows) {
    if (rows.cols() != setup.n())
        throw std::invalid_argument(
            "discrete_operator: row matrix has the wrong number of columns");
    Matrix result = rows * setup.Z;
    if (!result.allFinite())
        throw std::runtime_error(
            "discrete_operator: solve produced non-finite entries");
    return result;
}

Matrix laplacian_rows(const CollocationSetup& setup) {
    const int n = setup.n();
    const int l_in = setup.l_in();
    Matrix rows(l_in, n);
    for (int i = 0; i < l_in; ++i) {
        const Vec2& x = setup.interior[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            rows(i, j) = basis_laplacian(
                setup.kernel, setup.eps.eps,
                setup.centers[static_cast<std::size_t>(j)], x, setup.domain);
        }
    }
    return rows;
}

Matrix transfer_rows(const CollocationSetup& setup,
                     const FlowSystem& dynamics) {
    const int n = setup.n();
    const int l_in = setup.l_in();
    Matrix rows(l_in, n);
    for (int i = 0; i < l_in; ++i) {
        const Vec2 mapped =
            dynamics.backward(setup.interior[static_cast<std::size_t>(i)]);
        for (int j = 0; j < n; ++j) {
            rows(i, j) = basis_value(
                setup.kernel, setup.eps.eps,
                setup.centers[static_cast<std::size_t>(j)], mapped, setup.domain);
        }
    }
    return rows;
}

Matrix transfer_rows(const CollocationSetup& setup, const FlowSystem& dynamics,
                     double time) {
    const int n = setup.n();
    const int l_in = setup.l_in();
    Matrix rows(l_in, n);
    for (int i = 0; i < l_in; ++i) {
        const Vec2 mapped = dynamics.backward_from(
            setup.interior[static_cast<std::size_t>(i)], time);
        for (int j = 0; j < n; ++j) {
            rows(i, j) = basis_value(
                setup.kernel, setup.eps.eps,
                setup.centers[static_cast<std::size_t>(j)], mapped, setup.domain);
        }
    }
    return rows;
}

Matrix koopman_rows(const CollocationSetup& setup, const FlowSystem& dynamics) {
    const int n = setup.n();
    const int l_in = setup.l_in();
    Matrix rows(l_in, n);
    for (int i = 0; i < l_in; ++i) {
        const Vec2 mapped =
            dynamics.forward(setup.interior[static_cast<std::size_t>(i)]);
        for (int j = 0; j < n; ++j) {
            rows(i, j) = basis_value(
                setup.kernel, setup.eps.eps,
                setup.centers[static_cast<std::size_t>(j)], mapped, setup.domain);
        }
    }
    return rows;
}

Matrix koopman_rows(const CollocationSetup& setup, const FlowSystem& dynamics,
                    double time) {
    const int n = setup.n();
    const int l_in = setup.l_in();
    Matrix rows(l_in, n);
    for (int i = 0; i < l_in; ++i) {
        const Vec2 mapped = dynamics.forward_to(
            setup.interior[static_cast<std::size_t>(i)], time);
        for (int j = 0; j < n; ++j) {
            rows(i, j) = basis_value(
                setup.kernel, setup.eps.eps,
                setup.centers[static_cast<std::size_t>(j)], mapped, setup.domain);
        }
    }
    return rows;
}

std::pair<Matrix, Matrix> moving_domain_operators(
    const CollocationSetup& setup_initial,
    const CollocationSetup& setup_image) {
    if (!setup_initial.boundary.empty() || !setup_image.boundary.empty())
        throw std::logic_error(
            "moving_domain_operators: only boundaryless domains are supported");
    if (setup_initial.n() != setup_image.n())
        throw std::invalid_argument(
            "moving_domain_operators: setups have different sizes");

    // D = D' A^{-1}: solve A^T D^T = D'^T with the stored factorization.
    const Matrix d_rows = laplacian_rows(setup_initial);
    const Matrix dhat_rows = laplacian_rows(setup_image);
    Matrix D = solve_transposed(setup_initial.lu, d_rows.transpose()).transpose();
    Matrix Dhat = solve_transposed(setup_image.lu, dhat_rows.transpose()).transpose();
    if (!D.allFinite() || !Dhat.allFinite())
        throw std::runtime_error(
            "moving_domain_operators: solve produced non-finite entries");
    return {std::move(D), std::move(Dhat)};
}

}  // namespace dynlap

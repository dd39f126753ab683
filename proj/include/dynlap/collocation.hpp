#pragma once

#include <Eigen/LU>
#include <utility>
#include <vector>

#include "dynlap/domain.hpp"
#include "dynlap/dynamics.hpp"
#include "dynlap/kernels.hpp"
#include "dynlap/types.hpp"

namespace dynlap {

// Dense collocation system A = [A_in ; L_bd] over centers Y and collocation
// nodes X_in (interior) / X_bd (boundary), factorized once; every discrete
// operator is formed through solves with the stored factorization, never by
// inverting A.
struct CollocationSetup {
    Domain domain;
    std::vector<Vec2> centers;            // Y (n points)
    std::vector<Vec2> interior;           // X_in (l_in points)
    std::vector<BoundaryNode> boundary;   // X_bd (n - l_in nodes)
    WendlandKernel kernel;
    ShapeParameter eps{1.0};
    std::vector<double> boundary_times;   // comparison times entering L_bd

    Matrix A;                             // n x n
    Eigen::PartialPivLU<Matrix> lu;       // factorization of A
    Matrix Z;                             // A^{-1} E0, n x l_in (via solves)
    double cond_estimate = 0.0;           // 1 / rcond of A
    double mean_overlap = 0.0;            // mean # neighbouring supports

    int n() const { return static_cast<int>(centers.size()); }
    int l_in() const { return static_cast<int>(interior.size()); }
};

// Assemble and factorize the collocation system.  `nodes` is partitioned by
// exact boundary membership; boundary rows discretize the dynamic boundary
// condition grad phi_j(x) . [(I + sum_i C^{-1}_{x,t0,ti}) n(x)] with the
// Cauchy-Green inverses taken at `times` (empty -> the single full window
// {tf}).  Singular A raises std::runtime_error with a condition diagnostic;
// condition estimates above `cond_warn_threshold` log a warning only.
CollocationSetup assemble(const Domain& domain, const FlowSystem& dynamics,
                          std::vector<Vec2> centers,
                          const std::vector<Vec2>& nodes,
                          WendlandKernel kernel, ShapeParameter eps,
                          std::vector<double> times = {},
                          double cond_warn_threshold = 1e14);

// L_in -> L_in A^{-1} E0 through the stored factorization.
Matrix discrete_operator(const CollocationSetup& setup, const Matrix& rows);

// D_in = (lap phi_j(x_i))_{ij} over interior nodes (l_in x n).
Matrix laplacian_rows(const CollocationSetup& setup);

// P_in = (phi_j(Phi(x_i, t, t0)))_{ij} over interior nodes (l_in x n); exactly
// l_in backward evaluations of the dynamics.  `time` defaults to the full
// window (backward from tf).
Matrix transfer_rows(const CollocationSetup& setup, const FlowSystem& dynamics);
Matrix transfer_rows(const CollocationSetup& setup, const FlowSystem& dynamics,
                     double time);

// K_in = (phi_j(Phi(x_i, t0, t)))_{ij} over interior nodes (l_in x n): the
// collocated Koopman rows, used when the adjoint is collocated directly
// instead of taking the transpose of P.
Matrix koopman_rows(const CollocationSetup& setup, const FlowSystem& dynamics);
Matrix koopman_rows(const CollocationSetup& setup, const FlowSystem& dynamics,
                    double time);

// Moving-domain (coefficient-space) operators for boundaryless domains:
// D = D' A^{-1} and D_hat = D_hat' A_hat^{-1}, both via transposed
// factorization solves.  setup_image is assembled over the forward images of
// the centers/nodes of setup_initial with the same kernel and eps.  A
// boundary in either setup raises std::logic_error (unsupported).
std::pair<Matrix, Matrix> moving_domain_operators(
    const CollocationSetup& setup_initial, const CollocationSetup& setup_image);

}  // namespace dynlap

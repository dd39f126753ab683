#pragma once

#include <complex>
#include <vector>

#include "dynlap/types.hpp"

namespace dynlap {

// Discrete dynamic Laplacian (1/n)(D + sum_i P_i^T D P_i) over the comparison
// times t_0 < t_1 < ... < t_{n-1} = tf; the i = 0 term is D itself (identity
// transfer).
struct DynamicLaplacian {
    enum class Formulation { fixed_domain, moving_domain, multi_time };

    Matrix matrix;
    Formulation formulation = Formulation::fixed_domain;
    std::vector<double> times;
};

// Assemble from D and the transfer matrices P_1..P_{n-1}.  By default the
// adjoint factors are the real transposes P_i^T; passing `adjoints` instead
// uses separately collocated adjoint transfer matrices (the resulting
// operator is then not necessarily self-adjoint).
DynamicLaplacian dynamic_laplacian(const Matrix& D,
                                   const std::vector<Matrix>& transfers);
DynamicLaplacian dynamic_laplacian(const Matrix& D,
                                   const std::vector<Matrix>& transfers,
                                   const std::vector<Matrix>& adjoints);

struct SpectralResult {
    std::vector<std::complex<double>> eigenvalues;  // ascending by magnitude
    std::vector<Vector> eigenvectors;  // real parts, ||f||_inf = 1, positive
                                       // at the max-magnitude node
    std::vector<double> residuals;     // ||M v - lambda v||_2 / ||v||_2
};

enum class EigMethod {
    automatic,  // dense below the size threshold, shift-invert Arnoldi above
    dense,
    arnoldi,
};

// k eigenpairs of smallest magnitude with per-pair residual <= tol.
// Residuals are computed with the full complex eigenvectors; the stored
// eigenvectors are their phase-aligned real parts.  Non-convergence raises
// std::runtime_error carrying the achieved residuals.
SpectralResult smallest_magnitude_eigs(const Matrix& matrix, int k, double tol,
                                       EigMethod method = EigMethod::automatic);

// Discrete Rayleigh quotient -<f, M f> / <f, f> with uniform node weights.
double rayleigh_check(const Matrix& matrix, const Vector& f);
// Convenience overload forming the fixed-domain dynamic Laplacian from D, P.
double rayleigh_check(const Matrix& D, const Matrix& P, const Vector& f);

}  // namespace dynlap

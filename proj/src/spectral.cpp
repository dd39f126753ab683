#include "dynlap/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dynlap/log.hpp"

namespace dynlap {

namespace {

constexpr int kDenseThreshold = 1024;

void check_square_match(const Matrix& D, const std::vector<Matrix>& list) {
    if (D.rows() != D.cols())
        throw std::invalid_argument("dynamic_laplacian: D must be square");
    for (const Matrix& P : list) {
        if (P.rows() != D.rows() || P.cols() != D.cols())
            throw std::invalid_argument(
                "dynamic_laplacian: transfer matrix dimensions do not match D");
    }
}

// Phase-align so the entry of largest magnitude is positive real, then take
// the real part and rescale to ||f||_inf = 1 with a positive maximum.
Vector normalize_eigenvector(const ComplexVector& v) {
    Eigen::Index max_idx = 0;
    double max_abs = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > max_abs) {
            max_abs = a;
            max_idx = i;
        }
    }
    if (max_abs <= 0.0) throw std::runtime_error("eigenvector is zero");
    const std::complex<double> phase = std::conj(v[max_idx]) / max_abs;
    Vector f = (v * phase).real();
    double best = 0.0;
    Eigen::Index best_idx = 0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (std::abs(f[i]) > std::abs(best)) {
            best = f[i];
            best_idx = i;
        }
    }
    if (best == 0.0) throw std::runtime_error("eigenvector is zero");
    f /= f[best_idx];  // max-magnitude entry becomes +1
    return f;
}

struct RitzPair {
    std::complex<double> lambda;
    ComplexVector vector;
    double residual = 0.0;
};

// Deterministic ordering: ascending |lambda|, ties by descending real part,
// final ties by lexicographic comparison of the normalized real parts.
void sort_pairs(std::vector<RitzPair>& pairs) {
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const RitzPair& a, const RitzPair& b) {
                         const double ma = std::abs(a.lambda);
                         const double mb = std::abs(b.lambda);
                         if (ma != mb) return ma < mb;
                         if (a.lambda.real() != b.lambda.real())
                             return a.lambda.real() > b.lambda.real();
                         const Vector fa = normalize_eigenvector(a.vector);
                         const Vector fb = normalize_eigenvector(b.vector);
                         for (Eigen::Index i = 0; i < fa.size(); ++i) {
                             if (fa[i] != fb[i]) return fa[i] < fb[i];
                         }
                         return false;
                     });
}

double pair_residual(const Matrix& M, const std::complex<double>& lambda,
                     const ComplexVector& v) {
    const ComplexVector r = M * v - lambda * v;
    return r.norm() / v.norm();
}

SpectralResult finalize(const Matrix& M, std::vector<RitzPair> pairs, int k,
                        double tol, const char* method) {
    sort_pairs(pairs);
    pairs.resize(static_cast<std::size_t>(k));
    double worst = 0.0;
    for (RitzPair& p : pairs) {
        p.residual = pair_residual(M, p.lambda, p.vector);
        worst = std::max(worst, p.residual);
    }
    if (worst > tol) {
        std::ostringstream msg;
        msg << method << " eigensolve did not reach the residual tolerance "
            << tol << "; achieved residuals:";
        for (const RitzPair& p : pairs) msg << " " << p.residual;
        throw std::runtime_error(msg.str());
    }
    SpectralResult result;
    for (RitzPair& p : pairs) {
        result.eigenvalues.push_back(p.lambda);
        result.eigenvectors.push_back(normalize_eigenvector(p.vector));
        result.residuals.push_back(p.residual);
    }
    return result;
}

SpectralResult dense_eigs(const Matrix& M, int k, double tol) {
    Eigen::EigenSolver<Matrix> solver(M);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("dense eigensolver failed to converge");
    std::vector<RitzPair> pairs(static_cast<std::size_t>(M.rows()));
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        pairs[static_cast<std::size_t>(i)].lambda = solver.eigenvalues()[i];
        pairs[static_cast<std::size_t>(i)].vector =
            solver.eigenvectors().col(i);
    }
    return finalize(M, std::move(pairs), k, tol, "dense");
}

// Shift-invert Arnoldi at sigma = 0: build a Krylov space of M^{-1} with full
// reorthogonalization, extract Ritz pairs of largest magnitude (1/lambda),
// and expand the space until the k pairs meet the M-space residual bound.
SpectralResult arnoldi_eigs(const Matrix& M, int k, double tol) {
    const Eigen::Index n = M.rows();
    Eigen::PartialPivLU<Matrix> lu(M);

    const int max_dim = static_cast<int>(
        std::min<Eigen::Index>(n, std::max<Eigen::Index>(4 * k + 40, 80)));
    Matrix V(n, max_dim + 1);
    Matrix H = Matrix::Zero(max_dim + 1, max_dim);

    V.col(0) = Vector::Ones(n).normalized();
    int m = 0;
    std::vector<RitzPair> best;

    auto extract = [&](int dim) -> std::vector<RitzPair> {
        Eigen::EigenSolver<Matrix> hsolver(H.topLeftCorner(dim, dim));
        if (hsolver.info() != Eigen::Success)
            throw std::runtime_error("arnoldi: Hessenberg eigensolve failed");
        std::vector<RitzPair> pairs(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) {
            const std::complex<double> theta = hsolver.eigenvalues()[i];
            RitzPair& p = pairs[static_cast<std::size_t>(i)];
            p.lambda = 1.0 / theta;
            p.vector = V.leftCols(dim) * hsolver.eigenvectors().col(i);
        }
        return pairs;
    };

    while (m < max_dim) {
        Vector w = lu.solve(V.col(m));
        if (!w.allFinite())
            throw std::runtime_error(
                "arnoldi: shift-invert solve produced non-finite values");
        // Modified Gram-Schmidt with a full second pass.
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j <= m; ++j) {
                const double c = V.col(j).dot(w);
                if (pass == 0) H(j, m) = c;
                else H(j, m) += c;
                w -= c * V.col(j);
            }
        }
        const double beta = w.norm();
        H(m + 1, m) = beta;
        if (beta < 1e-14) {
            m += 1;
            break;  // invariant subspace found
        }
        V.col(m + 1) = w / beta;
        m += 1;

        if (m >= std::max(2 * k, 20) && m % 10 == 0) {
            std::vector<RitzPair> pairs = extract(m);
            sort_pairs(pairs);
            if (static_cast<int>(pairs.size()) < k) continue;
            double worst = 0.0;
            for (int i = 0; i < k; ++i)
                worst = std::max(worst,
                                 pair_residual(M, pairs[static_cast<std::size_t>(i)].lambda,
                                               pairs[static_cast<std::size_t>(i)].vector));
            if (worst <= tol) {
                best = std::move(pairs);
                return finalize(M, std::move(best), k, tol, "arnoldi");
            }
        }
    }
    std::vector<RitzPair> pairs = extract(m);
    if (static_cast<int>(pairs.size()) < k)
        throw std::runtime_error("arnoldi: Krylov space too small for k pairs");
    return finalize(M, std::move(pairs), k, tol, "arnoldi");
}

}  // namespace

DynamicLaplacian dynamic_laplacian(const Matrix& D,
                                   const std::vector<Matrix>& transfers) {
    check_square_match(D, transfers);
    DynamicLaplacian result;
    const double count = static_cast<double>(transfers.size()) + 1.0;
    Matrix sum = D;
    for (const Matrix& P : transfers) sum += P.transpose() * D * P;
    result.matrix = sum / count;
    result.formulation = transfers.size() > 1
                             ? DynamicLaplacian::Formulation::multi_time
                             : DynamicLaplacian::Formulation::fixed_domain;
    return result;
}

DynamicLaplacian dynamic_laplacian(const Matrix& D,
                                   const std::vector<Matrix>& transfers,
                                   const std::vector<Matrix>& adjoints) {
    check_square_match(D, transfers);
    check_square_match(D, adjoints);
    if (adjoints.size() != transfers.size())
        throw std::invalid_argument(
            "dynamic_laplacian: adjoint list size must match the transfer list");
    DynamicLaplacian result;
    const double count = static_cast<double>(transfers.size()) + 1.0;
    Matrix sum = D;
    for (std::size_t i = 0; i < transfers.size(); ++i)
        sum += adjoints[i] * D * transfers[i];
    result.matrix = sum / count;
    result.formulation = transfers.size() > 1
                             ? DynamicLaplacian::Formulation::multi_time
                             : DynamicLaplacian::Formulation::fixed_domain;
    return result;
}

SpectralResult smallest_magnitude_eigs(const Matrix& matrix, int k, double tol,
                                       EigMethod method) {
    if (matrix.rows() != matrix.cols())
        throw std::invalid_argument("smallest_magnitude_eigs: matrix not square");
    if (k < 1 || k > matrix.rows())
        throw std::invalid_argument(
            "smallest_magnitude_eigs: k must be in [1, n]");
    if (!(tol > 0.0))
        throw std::invalid_argument("smallest_magnitude_eigs: tol must be > 0");

    switch (method) {
        case EigMethod::dense:
            return dense_eigs(matrix, k, tol);
        case EigMethod::arnoldi:
            return arnoldi_eigs(matrix, k, tol);
        case EigMethod::automatic:
        default:
            if (matrix.rows() <= kDenseThreshold) return dense_eigs(matrix, k, tol);
            logging::info("smallest_magnitude_eigs: using shift-invert Arnoldi, n = ",
                          matrix.rows());
            return arnoldi_eigs(matrix, k, tol);
    }
}

double rayleigh_check(const Matrix& matrix, const Vector& f) {
    if (matrix.rows() != matrix.cols() || f.size() != matrix.rows())
        throw std::invalid_argument("rayleigh_check: dimension mismatch");
    const double denom = f.dot(f);
    if (denom == 0.0)
        throw std::invalid_argument("rayleigh_check: zero vector");
    return -f.dot(matrix * f) / denom;
}

double rayleigh_check(const Matrix& D, const Matrix& P, const Vector& f) {
    const DynamicLaplacian M = dynamic_laplacian(D, {P});
    return rayleigh_check(M.matrix, f);
}

}  // namespace dynlap

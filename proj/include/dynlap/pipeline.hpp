#pragma once

#include <complex>
#include <string>
#include <vector>

#include "dynlap/coherent.hpp"
#include "dynlap/config.hpp"
#include "dynlap/spectral.hpp"

namespace dynlap {

// In-memory view of a completed run; the same values are written to the
// artifact files in the configured output directory.
struct RunResult {
    std::vector<std::complex<double>> eigenvalues;
    std::vector<double> residuals;
    CheegerEvaluation best;
    std::vector<CheegerEvaluation> evaluations;
    double cond_estimate = 0.0;
    double mean_overlap = 0.0;
    std::vector<std::string> files;  // artifact paths written, in order
};

// Execute the full run: grids, dynamics, collocation, discrete operators,
// dynamic Laplacian, eigensolve, level-set scan, artifact files.  Module
// errors are rethrown with the failing stage named.
RunResult run_pipeline(const RunConfig& config);

struct SweepPoint {
    double value = 0.0;   // mesh width h, or support radius 1/eps (shape sweep)
    int count = 0;
    double eps = 0.0;
    double max_err = 0.0;
    bool ok = false;
    std::string note;     // diagnostic when the point failed
};

struct KernelSweep {
    std::string kernel;
    std::vector<SweepPoint> points;
    bool slope_defined = false;
    double slope = 0.0;   // log-log least-squares order over the fit window
    int fit_points = 0;
    std::string note;     // why the slope is undefined, when it is
};

struct ConvergenceResult {
    std::vector<KernelSweep> kernels;
    std::vector<std::string> files;
};

// Eigenvalue-error sweep against the reference spectrum; failed sweep points
// are recorded as missing and skipped by the slope fit.
ConvergenceResult run_convergence(const ConvergenceConfig& config);

}  // namespace dynlap

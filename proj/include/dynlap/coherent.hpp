#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "dynlap/collocation.hpp"
#include "dynlap/domain.hpp"
#include "dynlap/dynamics.hpp"
#include "dynlap/types.hpp"

namespace dynlap {

// Samples of an RBF interpolant on a regular tensor grid (x-major, same
// layout as regular_grid).
struct FieldGrid {
    Domain domain;
    int nx = 0;
    int ny = 0;
    std::vector<double> xs;      // axis coordinates
    std::vector<double> ys;
    std::vector<double> values;  // values[i * ny + j]

    double value(int i, int j) const {
        return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(ny) +
                      static_cast<std::size_t>(j)];
    }
};

// Polyline representation of the level set {f = level}.
struct LevelCurve {
    double level = 0.0;
    std::vector<std::vector<Vec2>> polylines;
    double total_length = 0.0;

    bool empty() const { return polylines.empty(); }
};

// One level evaluation of the dynamic Cheeger ratio (Eq. (1) of the method):
// ratio = (length_initial + length_final) / (2 * volume_min), +inf when one
// side of the level set is empty.
struct CheegerEvaluation {
    double gamma = 0.0;
    double length_initial = 0.0;
    double length_final = 0.0;
    double volume_min = 0.0;
    double ratio = std::numeric_limits<double>::infinity();
};

struct CheegerScan {
    std::vector<CheegerEvaluation> evaluations;
    CheegerEvaluation best;
};

// Interpolation coefficients alpha = A^{-1} [node_values; 0] through the
// stored factorization (one iterative-refinement pass for accuracy).
Vector rbf_coefficients(const CollocationSetup& setup,
                        const Vector& node_values);

// Sigma_j alpha_j phi_j(p).
double rbf_evaluate(const CollocationSetup& setup, const Vector& alpha,
                    const Vec2& p);

// Sample the interpolant of `node_values` (length l_in) on a regular
// resolution x resolution grid.
FieldGrid evaluate_field(const CollocationSetup& setup,
                         const Vector& node_values, int resolution);

// Marching-squares contour of the grid at `gamma`; periodic axes are closed
// through ghost cells so seam-crossing contours stitch correctly.  Levels
// outside the value range yield an empty curve of length zero.
LevelCurve extract_level_curve(const FieldGrid& grid, double gamma);

// Cell-counting volumes of {f <= gamma} and {f > gamma} by cell-center
// (corner-average) classification; the two sides sum to the domain area
// exactly.
std::pair<double, double> sublevel_volume(const FieldGrid& grid, double gamma);

// Map every polyline vertex forward with the full-window flow map.  With
// `refine` enabled, source segments whose images exceed `max_image_segment`
// get a midpoint inserted once and are remapped.  Image polylines are split
// where they cross a periodic seam; lengths always use the minimal image.
LevelCurve advect_curve(const FlowSystem& dynamics, const LevelCurve& curve,
                        bool refine = false,
                        double max_image_segment =
                            std::numeric_limits<double>::infinity());

// Image curve via the transfer operator: interpolate P f2 on a grid and
// extract the same level.
LevelCurve image_curve_via_Pf(const CollocationSetup& setup, const Matrix& P,
                              const Vector& f2, double gamma, int resolution);

// Evaluate the dynamic Cheeger ratio at `levels` equally spaced levels in the
// open interval (min f2, max f2); `image_curve` maps an initial curve at a
// level to its final-time image (option (a): advection; option (b): transfer
// interpolation).  Levels whose sub/super level set is empty are excluded
// from the argmin; if every level is excluded, throws std::runtime_error.
CheegerScan scan_cheeger(
    const FieldGrid& f2_grid, int levels,
    const std::function<LevelCurve(const LevelCurve&, double)>& image_curve);

}  // namespace dynlap

#include "dynlap/coherent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "dynlap/kernels.hpp"

namespace dynlap {

namespace {

std::vector<double> axis_coordinates(const AxisInterval& axis, int count) {
    std::vector<double> coords(static_cast<std::size_t>(count));
    const double step =
        axis.periodic ? axis.length() / count : axis.length() / (count - 1);
    for (int i = 0; i < count; ++i) coords[static_cast<std::size_t>(i)] = axis.lo + i * step;
    return coords;
}

struct CellGeometry {
    int cells_x = 0;
    int cells_y = 0;
    double dx = 0.0;
    double dy = 0.0;
};

CellGeometry cell_geometry(const FieldGrid& grid) {
    CellGeometry g;
    const auto& ax = grid.domain.axes[0];
    const auto& ay = grid.domain.axes[1];
    g.cells_x = ax.periodic ? grid.nx : grid.nx - 1;
    g.cells_y = ay.periodic ? grid.ny : grid.ny - 1;
    g.dx = ax.periodic ? ax.length() / grid.nx : ax.length() / (grid.nx - 1);
    g.dy = ay.periodic ? ay.length() / grid.ny : ay.length() / (grid.ny - 1);
    return g;
}

// Edge identifier: axis 0 edges run along x from node (i, j), axis 1 edges
// along y.  Indices are wrapped, so the two cells sharing an edge (including
// the ghost cells that close a periodic seam) agree on the key.
std::int64_t edge_key(int axis, int i, int j, int nx, int ny) {
    return (static_cast<std::int64_t>(axis) * nx + i) * ny + j;
}

struct Segment {
    std::int64_t a;
    std::int64_t b;
};

}  // namespace

Vector rbf_coefficients(const CollocationSetup& setup, const Vector& node_values) {
    const int n = setup.n();
    const int l = setup.l_in();
    if (node_values.size() != l) {
        throw std::invalid_argument(
            "rbf_coefficients: node_values must match the interior node count");
    }
    Vector rhs = Vector::Zero(n);
    rhs.head(l) = node_values;
    Vector alpha = setup.lu.solve(rhs);
    // One iterative-refinement pass keeps node reproduction near machine
    // precision even when the interpolation matrix is poorly conditioned.
    alpha += setup.lu.solve(rhs - setup.A * alpha);
    if (!alpha.allFinite()) {
        throw std::runtime_error("rbf_coefficients: interpolation solve produced non-finite values");
    }
    return alpha;
}

double rbf_evaluate(const CollocationSetup& setup, const Vector& alpha, const Vec2& p) {
    const double radius = setup.eps.support_radius();
    double total = 0.0;
    for (int j = 0; j < setup.n(); ++j) {
        const Vec2& center = setup.centers[static_cast<std::size_t>(j)];
        if (setup.domain.distance(center, p) >= radius) continue;
        total += alpha[j] * basis_value(setup.kernel, setup.eps.eps, center, p, setup.domain);
    }
    return total;
}

FieldGrid evaluate_field(const CollocationSetup& setup, const Vector& node_values,
                         int resolution) {
    if (resolution < 8) {
        throw std::invalid_argument("evaluate_field: resolution must be at least 8");
    }
    const Vector alpha = rbf_coefficients(setup, node_values);

    FieldGrid grid;
    grid.domain = setup.domain;
    grid.nx = resolution;
    grid.ny = resolution;
    grid.xs = axis_coordinates(setup.domain.axes[0], resolution);
    grid.ys = axis_coordinates(setup.domain.axes[1], resolution);
    grid.values.resize(static_cast<std::size_t>(resolution) * resolution);
    for (int i = 0; i < resolution; ++i) {
        for (int j = 0; j < resolution; ++j) {
            const Vec2 p(grid.xs[static_cast<std::size_t>(i)], grid.ys[static_cast<std::size_t>(j)]);
            grid.values[static_cast<std::size_t>(i) * resolution + j] =
                rbf_evaluate(setup, alpha, p);
        }
    }
    return grid;
}

LevelCurve extract_level_curve(const FieldGrid& grid, double gamma) {
    if (grid.nx < 2 || grid.ny < 2 || grid.values.empty()) {
        throw std::invalid_argument("extract_level_curve: grid is not populated");
    }
    LevelCurve curve;
    curve.level = gamma;

    const CellGeometry geo = cell_geometry(grid);
    const int nx = grid.nx;
    const int ny = grid.ny;

    // Crossing point for each cut edge, shared between adjacent cells.
    std::unordered_map<std::int64_t, Vec2> cut_points;
    std::vector<Segment> segments;

    auto cut_edge = [&](int axis, int i, int j) -> std::int64_t {
        const std::int64_t key = edge_key(axis, i, j, nx, ny);
        if (cut_points.find(key) == cut_points.end()) {
            const double va = grid.value(i, j);
            const double vb = axis == 0 ? grid.value((i + 1) % nx, j)
                                        : grid.value(i, (j + 1) % ny);
            double t = (gamma - va) / (vb - va);
            t = std::clamp(t, 0.0, 1.0);
            Vec2 p(grid.xs[static_cast<std::size_t>(i)], grid.ys[static_cast<std::size_t>(j)]);
            if (axis == 0) {
                p.x() += t * geo.dx;
            } else {
                p.y() += t * geo.dy;
            }
            cut_points.emplace(key, grid.domain.wrap(p));
        }
        return key;
    };

    for (int i = 0; i < geo.cells_x; ++i) {
        for (int j = 0; j < geo.cells_y; ++j) {
            const int i1 = (i + 1) % nx;
            const int j1 = (j + 1) % ny;
            const double v00 = grid.value(i, j);
            const double v10 = grid.value(i1, j);
            const double v11 = grid.value(i1, j1);
            const double v01 = grid.value(i, j1);
            const int code = (v00 > gamma ? 1 : 0) | (v10 > gamma ? 2 : 0) |
                             (v11 > gamma ? 4 : 0) | (v01 > gamma ? 8 : 0);
            if (code == 0 || code == 15) continue;

            auto bottom = [&] { return cut_edge(0, i, j); };
            auto top = [&] { return cut_edge(0, i, j1); };
            auto left = [&] { return cut_edge(1, i, j); };
            auto right = [&] { return cut_edge(1, i1, j); };
            auto emit = [&](std::int64_t a, std::int64_t b) {
                segments.push_back({a, b});
            };

            switch (code) {
                case 1:  emit(bottom(), left());  break;
                case 2:  emit(bottom(), right()); break;
                case 3:  emit(left(), right());   break;
                case 4:  emit(top(), right());    break;
                case 6:  emit(bottom(), top());   break;
                case 7:  emit(top(), left());     break;
                case 8:  emit(top(), left());     break;
                case 9:  emit(bottom(), top());   break;
                case 11: emit(top(), right());    break;
                case 12: emit(left(), right());   break;
                case 13: emit(bottom(), right()); break;
                case 14: emit(bottom(), left());  break;
                case 5:
                case 10: {
                    // Saddle: connect through the side the cell-centre
                    // average lies on.
                    const double center = 0.25 * (v00 + v10 + v11 + v01);
                    const bool center_above = center > gamma;
                    const bool diagonal_00 = (code == 5);
                    if (diagonal_00 == center_above) {
                        emit(bottom(), right());
                        emit(top(), left());
                    } else {
                        emit(bottom(), left());
                        emit(top(), right());
                    }
                    break;
                }
                default: break;
            }
        }
    }

    // Stitch segments into polylines through shared edge keys.
    std::unordered_map<std::int64_t, std::vector<std::size_t>> incidence;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        incidence[segments[s].a].push_back(s);
        incidence[segments[s].b].push_back(s);
    }
    std::vector<bool> used(segments.size(), false);

    auto next_segment = [&](std::int64_t key, std::size_t current) -> std::size_t {
        for (std::size_t s : incidence[key]) {
            if (s != current && !used[s]) return s;
        }
        return segments.size();
    };

    for (std::size_t start = 0; start < segments.size(); ++start) {
        if (used[start]) continue;
        used[start] = true;
        std::vector<std::int64_t> chain = {segments[start].a, segments[start].b};

        // Extend forward from the tail, then backward from the head.
        for (int direction = 0; direction < 2; ++direction) {
            while (true) {
                const std::int64_t tail = chain.back();
                if (tail == chain.front() && chain.size() > 2) break;  // closed
                const std::size_t s = next_segment(tail, segments.size());
                if (s == segments.size()) break;
                used[s] = true;
                chain.push_back(segments[s].a == tail ? segments[s].b : segments[s].a);
            }
            if (chain.back() == chain.front() && chain.size() > 2) break;
            std::reverse(chain.begin(), chain.end());
        }

        std::vector<Vec2> polyline;
        polyline.reserve(chain.size());
        for (std::int64_t key : chain) {
            const Vec2& p = cut_points.at(key);
            if (!polyline.empty() && (polyline.back() - p).norm() < 1e-14) continue;
            polyline.push_back(p);
        }
        if (polyline.size() < 2) continue;
        curve.polylines.push_back(std::move(polyline));
    }

    for (const auto& polyline : curve.polylines) {
        for (std::size_t k = 0; k + 1 < polyline.size(); ++k) {
            curve.total_length += grid.domain.distance(polyline[k], polyline[k + 1]);
        }
    }
    return curve;
}

std::pair<double, double> sublevel_volume(const FieldGrid& grid, double gamma) {
    if (grid.nx < 2 || grid.ny < 2 || grid.values.empty()) {
        throw std::invalid_argument("sublevel_volume: grid is not populated");
    }
    const CellGeometry geo = cell_geometry(grid);
    const int nx = grid.nx;
    const int ny = grid.ny;
    long below = 0;
    for (int i = 0; i < geo.cells_x; ++i) {
        for (int j = 0; j < geo.cells_y; ++j) {
            const int i1 = (i + 1) % nx;
            const int j1 = (j + 1) % ny;
            const double center = 0.25 * (grid.value(i, j) + grid.value(i1, j) +
                                          grid.value(i1, j1) + grid.value(i, j1));
            if (center <= gamma) ++below;
        }
    }
    const double volume_below = static_cast<double>(below) * geo.dx * geo.dy;
    return {volume_below, grid.domain.area() - volume_below};
}

namespace {

// Split a polyline wherever a segment's minimal image crosses a periodic
// seam, inserting the exact boundary points so piecewise lengths are
// preserved.  Original vertices pass through verbatim; only the crossing
// points are synthesized.  A closed input whose first/last pieces meet away
// from the seam is re-joined there.
std::vector<std::vector<Vec2>> split_at_seams(const Domain& domain,
                                              const std::vector<Vec2>& polyline) {
    std::vector<std::vector<Vec2>> pieces;
    std::vector<Vec2> current = {polyline.front()};

    auto push_point = [&](const Vec2& p) {
        if ((current.back() - p).norm() > 1e-14) current.push_back(p);
    };

    // Translate q by the exact periodic offset that puts the probe point
    // in-domain, then snap near-boundary coordinates onto the boundary.
    auto synthesize = [&](Vec2 q, const Vec2& probe) {
        for (int axis = 0; axis < 2; ++axis) {
            const auto& interval = domain.axes[static_cast<std::size_t>(axis)];
            if (!interval.periodic) continue;
            const double length = interval.length();
            q[axis] -= std::round((probe[axis] - domain.wrap(probe)[axis]) / length) * length;
            if (std::abs(q[axis] - interval.lo) < 1e-12) q[axis] = interval.lo;
            if (std::abs(q[axis] - interval.hi) < 1e-12) q[axis] = interval.hi;
        }
        return q;
    };

    for (std::size_t k = 0; k + 1 < polyline.size(); ++k) {
        const Vec2 a = polyline[k];
        const Vec2 b = polyline[k + 1];
        const Vec2 d = domain.displacement(a, b);
        const Vec2 target = a + d;

        // Interior crossing parameters along the minimal-image segment.
        std::vector<double> crossings;
        for (int axis = 0; axis < 2; ++axis) {
            const auto& interval = domain.axes[static_cast<std::size_t>(axis)];
            if (!interval.periodic || d[axis] == 0.0) continue;
            double t = 2.0;
            if (target[axis] > interval.hi) {
                t = (interval.hi - a[axis]) / d[axis];
            } else if (target[axis] < interval.lo) {
                t = (interval.lo - a[axis]) / d[axis];
            }
            if (t > 1e-12 && t < 1.0 - 1e-12) crossings.push_back(t);
        }
        std::sort(crossings.begin(), crossings.end());

        double t_prev = 0.0;
        for (std::size_t c = 0; c < crossings.size(); ++c) {
            const double t = crossings[c];
            const double t_next = c + 1 < crossings.size() ? crossings[c + 1] : 1.0;
            const Vec2 q = a + t * d;
            // Exit point shares the wrap offset of the piece before the
            // crossing, the re-entry point that of the piece after.
            push_point(synthesize(q, a + 0.5 * (t_prev + t) * d));
            if (current.size() >= 2) pieces.push_back(std::move(current));
            current = {synthesize(q, a + 0.5 * (t + t_next) * d)};
            t_prev = t;
        }
        push_point(b);
    }
    if (current.size() >= 2) pieces.push_back(std::move(current));

    const bool closed = (polyline.front() - polyline.back()).norm() < 1e-14;
    if (closed && pieces.size() > 1) {
        // The head and tail pieces abut at the original start vertex; merge
        // them so the seam crossings remain the only breaks.
        std::vector<Vec2>& head = pieces.front();
        std::vector<Vec2>& tail = pieces.back();
        if ((tail.back() - head.front()).norm() < 1e-14) {
            tail.insert(tail.end(), head.begin() + 1, head.end());
            head = std::move(tail);
            pieces.pop_back();
        }
    }
    return pieces;
}

}  // namespace

LevelCurve advect_curve(const FlowSystem& dynamics, const LevelCurve& curve,
                        bool refine, double max_image_segment) {
    const Domain& domain = dynamics.domain();
    LevelCurve image;
    image.level = curve.level;

    for (const auto& polyline : curve.polylines) {
        std::vector<Vec2> source = polyline;
        std::vector<Vec2> mapped(source.size());
        std::transform(source.begin(), source.end(), mapped.begin(),
                       [&](const Vec2& p) { return dynamics.forward(p); });

        if (refine) {
            // One level of midpoint insertion on segments whose image is long.
            std::vector<Vec2> refined_source;
            std::vector<Vec2> refined_mapped;
            refined_source.reserve(source.size() * 2);
            refined_mapped.reserve(source.size() * 2);
            for (std::size_t k = 0; k + 1 < source.size(); ++k) {
                refined_source.push_back(source[k]);
                refined_mapped.push_back(mapped[k]);
                if (domain.distance(mapped[k], mapped[k + 1]) > max_image_segment) {
                    const Vec2 mid = domain.wrap(
                        source[k] + 0.5 * domain.displacement(source[k], source[k + 1]));
                    refined_source.push_back(mid);
                    refined_mapped.push_back(dynamics.forward(mid));
                }
            }
            refined_source.push_back(source.back());
            refined_mapped.push_back(mapped.back());
            source = std::move(refined_source);
            mapped = std::move(refined_mapped);
        }

        std::vector<Vec2> deduped;
        deduped.reserve(mapped.size());
        for (const Vec2& p : mapped) {
            if (!deduped.empty() && (deduped.back() - p).norm() < 1e-14) continue;
            deduped.push_back(p);
        }
        if (deduped.size() < 2) continue;
        for (auto& piece : split_at_seams(domain, deduped)) {
            image.polylines.push_back(std::move(piece));
        }
    }

    for (const auto& polyline : image.polylines) {
        for (std::size_t k = 0; k + 1 < polyline.size(); ++k) {
            image.total_length += domain.distance(polyline[k], polyline[k + 1]);
        }
    }
    return image;
}

LevelCurve image_curve_via_Pf(const CollocationSetup& setup, const Matrix& P,
                              const Vector& f2, double gamma, int resolution) {
    if (P.rows() != setup.l_in() || P.cols() != setup.l_in()) {
        throw std::invalid_argument("image_curve_via_Pf: P must be l_in x l_in");
    }
    if (f2.size() != setup.l_in()) {
        throw std::invalid_argument("image_curve_via_Pf: f2 must have l_in entries");
    }
    const Vector pushed = P * f2;
    const FieldGrid grid = evaluate_field(setup, pushed, resolution);
    return extract_level_curve(grid, gamma);
}

CheegerScan scan_cheeger(
    const FieldGrid& f2_grid, int levels,
    const std::function<LevelCurve(const LevelCurve&, double)>& image_curve) {
    if (levels < 1) {
        throw std::invalid_argument("scan_cheeger: levels must be positive");
    }
    if (!image_curve) {
        throw std::invalid_argument("scan_cheeger: image_curve callback is required");
    }
    const auto [lo_it, hi_it] =
        std::minmax_element(f2_grid.values.begin(), f2_grid.values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;

    CheegerScan scan;
    scan.evaluations.reserve(static_cast<std::size_t>(levels));
    bool have_best = false;

    for (int i = 0; i < levels; ++i) {
        const double gamma = lo + (i + 1) * (hi - lo) / (levels + 1);
        CheegerEvaluation eval;
        eval.gamma = gamma;

        const LevelCurve initial = extract_level_curve(f2_grid, gamma);
        const auto [vol_below, vol_above] = sublevel_volume(f2_grid, gamma);
        eval.volume_min = std::min(vol_below, vol_above);
        eval.length_initial = initial.total_length;

        if (!initial.empty() && eval.volume_min > 0.0) {
            const LevelCurve final_curve = image_curve(initial, gamma);
            eval.length_final = final_curve.total_length;
            eval.ratio =
                0.5 * (eval.length_initial + eval.length_final) / eval.volume_min;
            if (!have_best || eval.ratio < scan.best.ratio) {
                scan.best = eval;
                have_best = true;
            }
        }
        scan.evaluations.push_back(eval);
    }

    if (!have_best) {
        throw std::runtime_error(
            "scan_cheeger: every level had an empty side; no ratio to minimize");
    }
    return scan;
}

}  // namespace dynlap

#include "dynlap/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <stdexcept>

#include "dynlap/collocation.hpp"

namespace dynlap {

namespace {

namespace fs = std::filesystem;

// Rethrow any stage failure with the stage named, per the CLI error contract.
template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
    try {
        log_info("stage: " + name);
        return fn();
    } catch (const std::exception& error) {
        throw std::runtime_error("stage '" + name + "' failed: " + error.what());
    }
}

std::ofstream open_output(const std::string& path) {
    std::ofstream stream(path, std::ios::binary);
    if (!stream) throw std::runtime_error("cannot open output file: " + path);
    return stream;
}

void write_spectrum_csv(const std::string& path, const SpectralResult& eigs) {
    auto out = open_output(path);
    out << "k,re_lambda,im_lambda,residual\n";
    for (std::size_t k = 0; k < eigs.eigenvalues.size(); ++k) {
        out << (k + 1) << ',' << format_g17(eigs.eigenvalues[k].real()) << ','
            << format_g17(eigs.eigenvalues[k].imag()) << ','
            << format_g17(eigs.residuals[k]) << '\n';
    }
}

// Grid samples, row-major (row = x index), after a two-line header carrying
// the resolution and the domain extents.
void write_field_csv(const std::string& path, const FieldGrid& grid) {
    auto out = open_output(path);
    out << "nx,ny,x_lo,x_hi,y_lo,y_hi\n";
    out << grid.nx << ',' << grid.ny << ','
        << format_g17(grid.domain.axes[0].lo) << ','
        << format_g17(grid.domain.axes[0].hi) << ','
        << format_g17(grid.domain.axes[1].lo) << ','
        << format_g17(grid.domain.axes[1].hi) << '\n';
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.ny; ++j) {
            out << (j ? "," : "") << format_g17(grid.value(i, j));
        }
        out << '\n';
    }
}

void write_contour_csv(const std::string& path, const LevelCurve& curve) {
    auto out = open_output(path);
    out << "polyline,x,y\n";
    for (std::size_t p = 0; p < curve.polylines.size(); ++p) {
        for (const Vec2& vertex : curve.polylines[p]) {
            out << p << ',' << format_g17(vertex.x()) << ','
                << format_g17(vertex.y()) << '\n';
        }
    }
}

void write_cheeger_csv(const std::string& path,
                       const std::vector<CheegerEvaluation>& evaluations) {
    auto out = open_output(path);
    out << "gamma,len0,len1,vol_min,ratio\n";
    for (const auto& eval : evaluations) {
        out << format_g17(eval.gamma) << ',' << format_g17(eval.length_initial)
            << ',' << format_g17(eval.length_final) << ','
            << format_g17(eval.volume_min) << ',' << format_g17(eval.ratio)
            << '\n';
    }
}

}  // namespace

RunResult run_pipeline(const RunConfig& config) {
    const Domain domain = config.make_domain();
    const FlowSystem dynamics = stage("dynamics", [&] { return config.make_system(); });

    const auto centers = stage("grids", [&] {
        return regular_grid(domain, config.grid.counts, config.grid.delta_centers);
    });
    const auto nodes =
        regular_grid(domain, config.grid.counts, config.grid.delta_collocation);

    const CollocationSetup setup = stage("collocation", [&] {
        return assemble(domain, dynamics, centers, nodes,
                        WendlandKernel::from_name(config.rbf.kernel),
                        ShapeParameter(config.rbf.eps));
    });
    log_debug("cond_estimate = " + format_g17(setup.cond_estimate) +
              ", mean_overlap = " + format_g17(setup.mean_overlap));

    Matrix D = stage("discrete operators", [&] {
        return discrete_operator(setup, laplacian_rows(setup));
    });
    if (config.eig.symmetrize_D) D = ((D + D.transpose()) * 0.5).eval();
    const Matrix P = discrete_operator(setup, transfer_rows(setup, dynamics));

    const DynamicLaplacian laplacian = stage("dynamic laplacian", [&] {
        if (config.eig.use_transpose_adjoint) return dynamic_laplacian(D, {P});
        const Matrix K = discrete_operator(setup, koopman_rows(setup, dynamics));
        return dynamic_laplacian(D, {P}, {K});
    });

    const SpectralResult eigs = stage("eigensolve", [&] {
        return smallest_magnitude_eigs(laplacian.matrix, config.eig.count,
                                       config.eig.tol);
    });
    for (std::size_t k = 0; k < eigs.eigenvalues.size(); ++k) {
        log_info("lambda_" + std::to_string(k + 1) + " = " +
                 format_g17(eigs.eigenvalues[k].real()) + " + " +
                 format_g17(eigs.eigenvalues[k].imag()) + "i");
    }

    const Vector& f2 = eigs.eigenvectors[1];
    const int resolution = config.cheeger.resolution;
    const FieldGrid f2_grid =
        stage("field evaluation", [&] { return evaluate_field(setup, f2, resolution); });
    const FieldGrid pf2_grid =
        evaluate_field(setup, Vector(P * f2), resolution);

    const CheegerScan scan = stage("cheeger scan", [&] {
        if (config.cheeger.image_option == 'a') {
            return scan_cheeger(f2_grid, config.cheeger.levels,
                                [&](const LevelCurve& curve, double) {
                                    return advect_curve(dynamics, curve);
                                });
        }
        return scan_cheeger(f2_grid, config.cheeger.levels,
                            [&](const LevelCurve&, double gamma) {
                                return extract_level_curve(pf2_grid, gamma);
                            });
    });
    log_info("gamma* = " + format_g17(scan.best.gamma) +
             ", h* = " + format_g17(scan.best.ratio));

    const LevelCurve best_initial = extract_level_curve(f2_grid, scan.best.gamma);
    const LevelCurve best_final =
        config.cheeger.image_option == 'a'
            ? advect_curve(dynamics, best_initial)
            : extract_level_curve(pf2_grid, scan.best.gamma);

    RunResult result;
    result.eigenvalues = eigs.eigenvalues;
    result.residuals = eigs.residuals;
    result.best = scan.best;
    result.evaluations = scan.evaluations;
    result.cond_estimate = setup.cond_estimate;
    result.mean_overlap = setup.mean_overlap;

    stage("artifacts", [&] {
        fs::create_directories(config.output.directory);
        const auto path = [&](const std::string& name) {
            return (fs::path(config.output.directory) / name).string();
        };
        if (config.output.csv) {
            write_spectrum_csv(path("spectrum.csv"), eigs);
            result.files.push_back(path("spectrum.csv"));
            write_field_csv(path("eigvec_2.csv"), f2_grid);
            result.files.push_back(path("eigvec_2.csv"));
            write_field_csv(path("eigvec_2_image.csv"), pf2_grid);
            result.files.push_back(path("eigvec_2_image.csv"));
            if (config.eig.count >= 3) {
                const Vector& f3 = eigs.eigenvectors[2];
                write_field_csv(path("eigvec_3.csv"),
                                evaluate_field(setup, f3, resolution));
                result.files.push_back(path("eigvec_3.csv"));
                write_field_csv(path("eigvec_3_image.csv"),
                                evaluate_field(setup, Vector(P * f3), resolution));
                result.files.push_back(path("eigvec_3_image.csv"));
            }
            write_cheeger_csv(path("cheeger.csv"), scan.evaluations);
            result.files.push_back(path("cheeger.csv"));
            write_contour_csv(path("contour_initial.csv"), best_initial);
            result.files.push_back(path("contour_initial.csv"));
            write_contour_csv(path("contour_final.csv"), best_final);
            result.files.push_back(path("contour_final.csv"));
        }
        if (config.output.json) {
            nlohmann::json summary;
            summary["config"] = config.echo;
            auto& lambdas = summary["eigenvalues"];
            for (std::size_t k = 0; k < eigs.eigenvalues.size(); ++k) {
                lambdas.push_back({{"k", k + 1},
                                   {"re", eigs.eigenvalues[k].real()},
                                   {"im", eigs.eigenvalues[k].imag()},
                                   {"residual", eigs.residuals[k]}});
            }
            summary["gamma_star"] = scan.best.gamma;
            summary["h_star"] = scan.best.ratio;
            summary["length_initial"] = scan.best.length_initial;
            summary["length_final"] = scan.best.length_final;
            summary["volume_min"] = scan.best.volume_min;
            summary["cheeger_bound"] =
                2.0 * std::sqrt(std::max(0.0, -eigs.eigenvalues[1].real()));
            summary["diagnostics"] = {
                {"cond_estimate", setup.cond_estimate},
                {"mean_overlap", setup.mean_overlap},
                {"forward_evaluations", dynamics.forward_evaluations()},
                {"backward_evaluations", dynamics.backward_evaluations()},
            };
            summary["effective"] = {
                {"system", config.system.name},
                {"kernel", config.rbf.kernel},
                {"eps", config.rbf.eps},
                {"grid_counts", {config.grid.counts[0], config.grid.counts[1]}},
                {"eig_count", config.eig.count},
                {"levels", config.cheeger.levels},
                {"image_option", std::string(1, config.cheeger.image_option)},
                {"resolution", resolution},
                {"output_directory", config.output.directory},
            };
            auto out = open_output(path("summary.json"));
            out << summary.dump(2) << '\n';
            result.files.push_back(path("summary.json"));
        }
        return 0;
    });

    return result;
}

ConvergenceResult run_convergence(const ConvergenceConfig& config) {
    const Domain domain = Domain::torus();
    const FlowSystem dynamics =
        FlowSystem::standard_map(config.system.a, config.system.iterates);
    const bool mesh_sweep = config.sweep == "mesh";
    const std::size_t n_points =
        mesh_sweep ? config.counts.size() : config.eps_values.size();

    ConvergenceResult result;
    for (const auto& kernel_name : config.kernels) {
        KernelSweep sweep;
        sweep.kernel = kernel_name;
        const WendlandKernel& kernel = WendlandKernel::from_name(kernel_name);

        for (std::size_t p = 0; p < n_points; ++p) {
            SweepPoint point;
            point.count = mesh_sweep ? config.counts[p] : config.count;
            point.eps = mesh_sweep ? config.eps : config.eps_values[p];
            point.value = mesh_sweep ? two_pi / point.count : 1.0 / point.eps;
            try {
                const auto grid =
                    regular_grid(domain, {point.count, point.count}, 0.0);
                const CollocationSetup setup =
                    assemble(domain, dynamics, grid, grid, kernel,
                             ShapeParameter(point.eps));
                const Matrix D = discrete_operator(setup, laplacian_rows(setup));
                const Matrix P =
                    discrete_operator(setup, transfer_rows(setup, dynamics));
                const DynamicLaplacian laplacian = dynamic_laplacian(D, {P});
                const SpectralResult eigs = smallest_magnitude_eigs(
                    laplacian.matrix, 4, config.eig_tol);
                double max_err = 0.0;
                for (int k = 0; k < 4; ++k) {
                    max_err = std::max(
                        max_err, std::abs(eigs.eigenvalues[static_cast<std::size_t>(k)] -
                                          config.reference[static_cast<std::size_t>(k)]));
                }
                point.max_err = max_err;
                point.ok = true;
            } catch (const std::exception& error) {
                point.ok = false;
                point.note = error.what();
                log_info("sweep point failed (" + kernel_name + ", value " +
                         format_g17(point.value) + "): " + point.note);
            }
            log_debug(kernel_name + ": value " + format_g17(point.value) +
                      " -> max_err " +
                      (point.ok ? format_g17(point.max_err) : "missing"));
            sweep.points.push_back(std::move(point));
        }

        // Least-squares slope of log(err) vs log(sweep value) over the
        // configured error window; zero errors have no logarithm and are
        // excluded, as are missing points.
        std::vector<double> xs;
        std::vector<double> ys;
        for (const auto& point : sweep.points) {
            if (!point.ok || point.max_err <= 0.0) continue;
            if (point.max_err < config.fit_err_lo || point.max_err > config.fit_err_hi)
                continue;
            xs.push_back(std::log(point.value));
            ys.push_back(std::log(point.max_err));
        }
        sweep.fit_points = static_cast<int>(xs.size());
        if (xs.size() >= 2) {
            const double x_mean =
                std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
            const double y_mean =
                std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
            double sxy = 0.0;
            double sxx = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                sxy += (xs[i] - x_mean) * (ys[i] - y_mean);
                sxx += (xs[i] - x_mean) * (xs[i] - x_mean);
            }
            if (sxx > 0.0) {
                sweep.slope = sxy / sxx;
                sweep.slope_defined = true;
            } else {
                sweep.note = "sweep values are not distinct within the fit window";
            }
        } else {
            const bool all_zero = std::all_of(
                sweep.points.begin(), sweep.points.end(),
                [](const SweepPoint& p) { return p.ok && p.max_err == 0.0; });
            sweep.note = all_zero ? "errors identically zero; slope undefined"
                                  : "fewer than 2 points inside the fit window";
        }
        result.kernels.push_back(std::move(sweep));
    }

    fs::create_directories(config.directory);
    const auto csv_path = (fs::path(config.directory) / "convergence.csv").string();
    {
        auto out = open_output(csv_path);
        out << "kernel,sweep_value,max_err\n";
        for (const auto& sweep : result.kernels) {
            for (const auto& point : sweep.points) {
                out << sweep.kernel << ',' << format_g17(point.value) << ','
                    << (point.ok ? format_g17(point.max_err) : "nan") << '\n';
            }
        }
    }
    result.files.push_back(csv_path);

    const auto json_path = (fs::path(config.directory) / "slopes.json").string();
    {
        nlohmann::json doc;
        doc["reference_source"] = config.reference_source;
        doc["sweep"] = config.sweep;
        auto& kernels = doc["kernels"];
        for (const auto& sweep : result.kernels) {
            nlohmann::json entry;
            entry["kernel"] = sweep.kernel;
            entry["fit_points"] = sweep.fit_points;
            if (sweep.slope_defined) {
                entry["slope"] = sweep.slope;
            } else {
                entry["slope"] = nullptr;
                entry["note"] = sweep.note;
            }
            kernels.push_back(entry);
        }
        auto out = open_output(json_path);
        out << doc.dump(2) << '\n';
    }
    result.files.push_back(json_path);
    return result;
}

}  // namespace dynlap

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>

#include "dynlap/config.hpp"
#include "dynlap/pipeline.hpp"

namespace {

int run_command(const std::string& config_path, const CLI::App* cmd,
                const std::string& output_dir, int eig_count, int levels,
                const std::string& image_option) {
    dynlap::RunConfig config = dynlap::RunConfig::from_file(config_path);

    // Command-line overrides, validated to the same ranges as the file keys.
    std::vector<std::string> violations;
    if (!output_dir.empty()) config.output.directory = output_dir;
    if (cmd->count("--eig-count") > 0) {
        if (eig_count < 2) {
            violations.push_back("--eig-count must be at least 2");
        } else {
            config.eig.count = eig_count;
        }
    }
    if (cmd->count("--levels") > 0) {
        if (levels < 1) {
            violations.push_back("--levels must be at least 1");
        } else {
            config.cheeger.levels = levels;
        }
    }
    if (cmd->count("--image-option") > 0) {
        if (image_option != "a" && image_option != "b") {
            violations.push_back("--image-option must be a or b");
        } else {
            config.cheeger.image_option = image_option[0];
        }
    }
    if (!violations.empty()) throw dynlap::ConfigError(std::move(violations));

    const dynlap::RunResult result = dynlap::run_pipeline(config);

    for (std::size_t k = 0; k < result.eigenvalues.size(); ++k) {
        std::printf("lambda_%zu = %.6g + %.2gi  (residual %.2g)\n", k + 1,
                    result.eigenvalues[k].real(), result.eigenvalues[k].imag(),
                    result.residuals[k]);
    }
    std::printf("gamma*         = %.6g\n", result.best.gamma);
    std::printf("h*             = %.6g\n", result.best.ratio);
    std::printf("length_initial = %.6g\n", result.best.length_initial);
    std::printf("length_final   = %.6g\n", result.best.length_final);
    std::printf("volume_min     = %.6g\n", result.best.volume_min);
    for (const auto& file : result.files) std::printf("wrote %s\n", file.c_str());
    return 0;
}

int converge_command(const std::string& config_path, const std::string& output_dir) {
    dynlap::ConvergenceConfig config = dynlap::ConvergenceConfig::from_file(config_path);
    if (!output_dir.empty()) config.directory = output_dir;

    const dynlap::ConvergenceResult result = dynlap::run_convergence(config);

    std::printf("%-8s %-22s %s\n", "kernel", "sweep_value -> max_err", "");
    for (const auto& sweep : result.kernels) {
        for (const auto& point : sweep.points) {
            if (point.ok) {
                std::printf("%-8s %-12.6g %.6g\n", sweep.kernel.c_str(), point.value,
                            point.max_err);
            } else {
                std::printf("%-8s %-12.6g missing (%s)\n", sweep.kernel.c_str(),
                            point.value, point.note.c_str());
            }
        }
    }
    std::printf("\nfitted log-log orders (window [%g, %g]):\n", config.fit_err_lo,
                config.fit_err_hi);
    for (const auto& sweep : result.kernels) {
        if (sweep.slope_defined) {
            std::printf("%-8s slope %.3f  (%d points)\n", sweep.kernel.c_str(),
                        sweep.slope, sweep.fit_points);
        } else {
            std::printf("%-8s slope undefined: %s\n", sweep.kernel.c_str(),
                        sweep.note.c_str());
        }
    }
    for (const auto& file : result.files) std::printf("wrote %s\n", file.c_str());
    return 0;
}

int systems_command() {
    std::printf("built-in systems:\n");
    std::printf(
        "  standard_map   torus [0,2pi)^2; area-preserving kicked-rotor map\n"
        "                 keys: system.a (default 0.971635), system.iterates\n");
    std::printf(
        "  cylinder_flow  cylinder [0,2pi) x [0,pi]; periodically forced\n"
        "                 travelling-wave flow, integrated with classical RK4\n"
        "                 keys: system.t0, system.tf, system.rk4_steps\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "dynlap: coherent-set analysis of volume-preserving dynamics via "
        "RBF collocation of the dynamic Laplace operator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::string image_option;
    int eig_count = 0;
    int levels = 0;

    CLI::App* run_cmd =
        app.add_subcommand("run", "execute a full analysis run from a config file");
    run_cmd->add_option("config", config_path, "path to the run configuration")
        ->required();
    run_cmd->add_option("--output-dir", output_dir, "override output.directory");
    run_cmd->add_option("--eig-count", eig_count, "override eig.count");
    run_cmd->add_option("--levels", levels, "override cheeger.levels");
    run_cmd->add_option("--image-option", image_option,
                        "override cheeger.image_option (a|b)");

    CLI::App* converge_cmd = app.add_subcommand(
        "converge", "run an eigenvalue convergence study from a config file");
    converge_cmd->add_option("config", config_path, "path to the sweep configuration")
        ->required();
    converge_cmd->add_option("--output-dir", output_dir, "override output.directory");

    CLI::App* systems_cmd =
        app.add_subcommand("systems", "list the built-in dynamical systems");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(run_cmd)) {
            return run_command(config_path, run_cmd, output_dir, eig_count, levels,
                               image_option);
        }
        if (app.got_subcommand(converge_cmd)) {
            return converge_command(config_path, output_dir);
        }
        if (app.got_subcommand(systems_cmd)) {
            return systems_command();
        }
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 0;
}

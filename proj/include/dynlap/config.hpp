#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynlap/domain.hpp"
#include "dynlap/dynamics.hpp"
#include "dynlap/types.hpp"

namespace dynlap {

// Carries every violation found while parsing/validating a configuration so
// a user can fix them all in one pass.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

  private:
    std::vector<std::string> violations_;
};

// Flat-section key/value configuration for a full pipeline run.  Every field
// has a documented default; the raw file text is kept for the verbatim echo
// into summary.json.
struct RunConfig {
    struct System {
        std::string name = "standard_map";  // standard_map | cylinder_flow
        double a = 0.971635;                // standard-map kick strength
        int iterates = 1;
        double t0 = 0.0;                    // flow window (cylinder_flow)
        double tf = 40.0;
        int rk4_steps = 400;
    };
    struct DomainBlock {
        std::string kind = "torus";  // torus | cylinder | box
        std::array<double, 2> extent{two_pi, two_pi};
    };
    struct Grid {
        std::array<int, 2> counts{20, 20};
        double delta_centers = 0.0;
        double delta_collocation = 0.0;
    };
    struct Rbf {
        std::string kernel = "psi64";
        double eps = 1.0;
    };
    struct Eig {
        int count = 4;
        double tol = 1e-8;
        bool use_transpose_adjoint = true;
        bool symmetrize_D = false;
    };
    struct Cheeger {
        int levels = 1000;
        char image_option = 'a';  // a: advect the curve, b: transfer-interpolate
        int resolution = 100;
    };
    struct Output {
        std::string directory = "out";
        bool csv = true;
        bool json = true;
    };

    System system;
    DomainBlock domain;
    Grid grid;
    Rbf rbf;
    Eig eig;
    Cheeger cheeger;
    Output output;
    std::string echo;  // raw configuration text, echoed verbatim

    Domain make_domain() const;
    FlowSystem make_system() const;

    static RunConfig from_text(const std::string& text);
    static RunConfig from_file(const std::string& path);
};

// Configuration of a convergence study: sweep mesh counts at fixed eps or
// shape parameters at a fixed count, against external reference eigenvalues.
struct ConvergenceConfig {
    std::string sweep = "mesh";                         // mesh | shape
    std::vector<int> counts = {14, 16, 18, 20, 22, 24, 26, 28, 30};
    double eps = 0.8;                                   // fixed eps (mesh sweep)
    std::vector<double> eps_values;                     // shape sweep values
    int count = 20;                                     // fixed count (shape sweep)
    std::vector<std::string> kernels = {"psi31", "psi42", "psi53", "psi64"};
    std::array<double, 4> reference{6e-5, -1.15, -1.17, -2.10};
    std::string reference_source = "published standard-map eigenvalues";
    double fit_err_lo = 1e-2;  // slope fit uses points with err in [lo, hi]
    double fit_err_hi = 1.0;
    RunConfig::System system{.name = "standard_map", .a = 0.971635, .iterates = 2};
    double eig_tol = 1e-8;
    std::string directory = "out";
    std::string echo;

    static ConvergenceConfig from_text(const std::string& text);
    static ConvergenceConfig from_file(const std::string& path);
};

// All floating-point CSV output uses 17 significant digits.
std::string format_g17(double value);

// Log verbosity from the DYNLAP_LOG environment variable:
// unset/"quiet" -> 0, "info" -> 1, "debug" -> 2.
int log_level();
void log_info(const std::string& message);
void log_debug(const std::string& message);

std::string read_text_file(const std::string& path);

}  // namespace dynlap

#include <doctest.h>

#include <cmath>
#include <string>

#include "dynlap/config.hpp"
#include "dynlap/types.hpp"

using namespace dynlap;

namespace {

bool mentions(const ConfigError& error, const std::string& needle) {
    for (const auto& violation : error.violations()) {
        if (violation.find(needle) != std::string::npos) return true;
    }
    return false;
}

const char* kStandardMapText = R"(# sample
[system]
name = standard_map
a = 0.971635
iterates = 2

[domain]
kind = torus

[grid]
counts = 20 20

[rbf]
kernel = psi64
eps = 0.4

[eig]
count = 4
tol = 1e-8

[cheeger]
levels = 1000
image_option = b
resolution = 100

[output]
directory = out/sm
formats = csv json
)";

}  // namespace

TEST_SUITE("config") {

TEST_CASE("run config round-trips every block") {
    const RunConfig config = RunConfig::from_text(kStandardMapText);
    CHECK(config.system.name == "standard_map");
    CHECK(config.system.a == doctest::Approx(0.971635).epsilon(1e-15));
    CHECK(config.system.iterates == 2);
    CHECK(config.domain.kind == "torus");
    CHECK(config.domain.extent[0] == doctest::Approx(two_pi).epsilon(1e-15));
    CHECK(config.grid.counts[0] == 20);
    CHECK(config.grid.counts[1] == 20);
    CHECK(config.rbf.kernel == "psi64");
    CHECK(config.rbf.eps == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(config.eig.count == 4);
    CHECK(config.eig.tol == doctest::Approx(1e-8).epsilon(1e-15));
    CHECK(config.cheeger.levels == 1000);
    CHECK(config.cheeger.image_option == 'b');
    CHECK(config.cheeger.resolution == 100);
    CHECK(config.output.directory == "out/sm");
    CHECK(config.output.csv);
    CHECK(config.output.json);
    // The raw text is preserved verbatim for the summary echo.
    CHECK(config.echo == kStandardMapText);
}

TEST_CASE("defaults apply when keys are omitted") {
    const RunConfig config = RunConfig::from_text(
        "[system]\nname = standard_map\n[rbf]\neps = 0.4\n");
    CHECK(config.system.iterates == 1);
    CHECK(config.domain.kind == "torus");
    CHECK(config.domain.extent[0] == doctest::Approx(two_pi).epsilon(1e-15));
    CHECK(config.domain.extent[1] == doctest::Approx(two_pi).epsilon(1e-15));
    CHECK(config.grid.counts[0] == 20);
    CHECK(config.grid.delta_centers == 0.0);
    CHECK(config.rbf.kernel == "psi64");
    CHECK(config.eig.count == 4);
    CHECK(config.eig.tol == doctest::Approx(1e-8).epsilon(1e-12));
    CHECK(config.eig.use_transpose_adjoint);
    CHECK_FALSE(config.eig.symmetrize_D);
    CHECK(config.cheeger.levels == 1000);
    CHECK(config.cheeger.image_option == 'a');
    CHECK(config.cheeger.resolution == 100);
    CHECK(config.output.csv);
    CHECK(config.output.json);
}

TEST_CASE("cylinder domain extent defaults by kind") {
    const RunConfig config = RunConfig::from_text(
        "[system]\nname = cylinder_flow\n[domain]\nkind = cylinder\n"
        "[grid]\ncounts = 50\n[rbf]\nkernel = psi64\neps = 2\n");
    CHECK(config.domain.extent[0] == doctest::Approx(two_pi).epsilon(1e-15));
    CHECK(config.domain.extent[1] == doctest::Approx(pi).epsilon(1e-15));
    CHECK(config.grid.counts[0] == 50);
    CHECK(config.grid.counts[1] == 50);  // single token broadcasts
    const Domain domain = config.make_domain();
    CHECK(domain.axes[0].periodic);
    CHECK_FALSE(domain.axes[1].periodic);
}

TEST_CASE("every violation is listed in one error") {
    const std::string bad = R"(
stray line without equals
[system]
name = rotor
iterates = 0
[grid]
counts = 20
counts = 22
[rbf]
kernel = gauss
eps = -1
[eig]
count = 0
[cheeger]
image_option = q
resolution = 4
[mystery]
knob = 7
[output]
formats = csv yaml
)";
    try {
        RunConfig::from_text(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& error) {
        CHECK(error.violations().size() >= 9);
        CHECK(mentions(error, "expected 'key = value'"));
        CHECK(mentions(error, "system.name"));
        CHECK(mentions(error, "system.iterates"));
        CHECK(mentions(error, "duplicate key 'grid.counts'"));
        CHECK(mentions(error, "rbf.kernel"));
        CHECK(mentions(error, "rbf.eps"));
        CHECK(mentions(error, "eig.count"));
        CHECK(mentions(error, "cheeger.image_option"));
        CHECK(mentions(error, "cheeger.resolution"));
        CHECK(mentions(error, "unknown key 'mystery.knob'"));
        CHECK(mentions(error, "output.formats"));
        // The what() string carries the full list too.
        CHECK(std::string(error.what()).find("violation") != std::string::npos);
    }
}

TEST_CASE("eig.count zero alone is rejected") {
    const std::string text =
        "[system]\nname = standard_map\n[rbf]\neps = 0.4\n[eig]\ncount = 0\n";
    try {
        RunConfig::from_text(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& error) {
        CHECK(error.violations().size() == 1);
        CHECK(mentions(error, "eig.count"));
    }
}

TEST_CASE("numbers and booleans are validated with line context") {
    try {
        RunConfig::from_text(
            "[system]\nname = standard_map\n[rbf]\neps = fast\n"
            "[eig]\nuse_transpose_adjoint = maybe\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& error) {
        CHECK(mentions(error, "line 4"));
        CHECK(mentions(error, "not a valid number"));
        CHECK(mentions(error, "expects a boolean"));
    }
}

TEST_CASE("system and domain must be compatible") {
    CHECK_THROWS_AS(
        RunConfig::from_text("[system]\nname = standard_map\n[domain]\nkind = box\n"
                             "[rbf]\neps = 0.4\n"),
        ConfigError);
    CHECK_THROWS_AS(
        RunConfig::from_text("[system]\nname = cylinder_flow\n[domain]\nkind = torus\n"
                             "[rbf]\neps = 2\n"),
        ConfigError);
    // Comment-only and trailing-comment syntax parses cleanly.
    const RunConfig ok = RunConfig::from_text(
        "; leading comment\n[system]\nname = standard_map  # trailing\n"
        "[rbf]\neps = 0.4\n");
    CHECK(ok.system.name == "standard_map");
}

TEST_CASE("convergence config defaults and validation") {
    const ConvergenceConfig defaults = ConvergenceConfig::from_text("");
    CHECK(defaults.sweep == "mesh");
    CHECK(defaults.counts.size() == 9);
    CHECK(defaults.counts.front() == 14);
    CHECK(defaults.counts.back() == 30);
    CHECK(defaults.eps == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(defaults.kernels.size() == 4);
    CHECK(defaults.reference[0] == doctest::Approx(6e-5).epsilon(1e-15));
    CHECK(defaults.reference[3] == doctest::Approx(-2.10).epsilon(1e-15));
    CHECK(defaults.reference_source == "published standard-map eigenvalues");
    CHECK(defaults.system.iterates == 2);
    CHECK(defaults.fit_err_lo == doctest::Approx(1e-2).epsilon(1e-15));

    const ConvergenceConfig shape = ConvergenceConfig::from_text(
        "[convergence]\nsweep = shape\neps_values = 0.5 0.8 1.2 2.0\ncount = 16\n");
    CHECK(shape.eps_values.size() == 4);
    CHECK(shape.count == 16);

    try {
        ConvergenceConfig::from_text(
            "[convergence]\nsweep = shape\neps_values = 0.5 0.8\n"
            "kernels = psi64 gauss\nreference = 1 2 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& error) {
        CHECK(mentions(error, "at least 3 sweep points"));
        CHECK(mentions(error, "unknown kernel 'gauss'"));
        CHECK(mentions(error, "exactly 4 eigenvalues"));
    }
    CHECK_THROWS_AS(
        ConvergenceConfig::from_text("[convergence]\ncounts = 14 16\n"),
        ConfigError);
}

TEST_CASE("g17 formatting round-trips doubles exactly") {
    for (double value : {std::exp(1.0), -1.1499999999999999, 6.03e-05,
                         1.0 / 3.0, 2.0 * pi * pi, 1e-300, -7.25}) {
        const std::string text = format_g17(value);
        CHECK(std::stod(text) == value);
    }
    CHECK(format_g17(0.0) == "0");
    CHECK(format_g17(0.5) == "0.5");
}

TEST_CASE("missing config files raise a readable error") {
    CHECK_THROWS_WITH_AS(RunConfig::from_file("/nonexistent/path.cfg"),
                         doctest::Contains("cannot open config file"),
                         std::runtime_error);
}

}  // TEST_SUITE

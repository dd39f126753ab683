#include "dynlap/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "dynlap/kernels.hpp"

namespace dynlap {

namespace {

std::string join_violations(const std::vector<std::string>& violations) {
    std::string message = "configuration invalid (" +
                          std::to_string(violations.size()) + " violation" +
                          (violations.size() == 1 ? "" : "s") + "):";
    for (const auto& v : violations) message += "\n  - " + v;
    return message;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_tokens(const std::string& s) {
    std::vector<std::string> tokens;
    std::istringstream stream(s);
    std::string token;
    while (stream >> token) tokens.push_back(token);
    return tokens;
}

struct IniEntry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
};

// Parse the flat-section key/value format: `[section]` headers, `key = value`
// lines, `#` or `;` comments, blank lines.  Malformed lines are reported, not
// fatal, so every problem surfaces in one pass.
std::vector<IniEntry> parse_ini(const std::string& text,
                                std::vector<std::string>& violations) {
    std::vector<IniEntry> entries;
    std::istringstream stream(text);
    std::string line;
    std::string section;
    int number = 0;
    while (std::getline(stream, line)) {
        ++number;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']' || stripped.size() < 3) {
                violations.push_back("line " + std::to_string(number) +
                                     ": malformed section header '" + stripped + "'");
                continue;
            }
            section = trim(stripped.substr(1, stripped.size() - 2));
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            violations.push_back("line " + std::to_string(number) +
                                 ": expected 'key = value', got '" + stripped + "'");
            continue;
        }
        const std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        // Trailing comments after the value.
        const auto hash = value.find_first_of("#;");
        if (hash != std::string::npos) value = trim(value.substr(0, hash));
        if (key.empty()) {
            violations.push_back("line " + std::to_string(number) + ": empty key");
            continue;
        }
        if (section.empty()) {
            violations.push_back("line " + std::to_string(number) + ": key '" + key +
                                 "' appears before any [section] header");
            continue;
        }
        entries.push_back({section, key, value, number});
    }
    return entries;
}

// Typed access over the parsed entries with full violation accounting:
// duplicate keys, unparsable numbers, out-of-range values, and unknown
// sections/keys are all reported.
class ConfigReader {
  public:
    ConfigReader(std::vector<IniEntry> entries, std::vector<std::string>& violations)
        : entries_(std::move(entries)), violations_(violations) {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const auto key = entries_[i].section + "." + entries_[i].key;
            if (index_.count(key)) {
                violations_.push_back("line " + std::to_string(entries_[i].line) +
                                      ": duplicate key '" + key + "'");
            }
            index_[key] = i;
        }
    }

    bool has(const std::string& section, const std::string& key) const {
        return index_.count(section + "." + key) > 0;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           std::string fallback) {
        const auto* entry = take(section, key);
        return entry ? entry->value : fallback;
    }

    double get_real(const std::string& section, const std::string& key,
                    double fallback) {
        const auto* entry = take(section, key);
        if (!entry) return fallback;
        double value = fallback;
        if (!parse_real(entry->value, value)) report_number(*entry);
        return value;
    }

    int get_int(const std::string& section, const std::string& key, int fallback) {
        const auto* entry = take(section, key);
        if (!entry) return fallback;
        int value = fallback;
        if (!parse_int(entry->value, value)) report_number(*entry);
        return value;
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) {
        const auto* entry = take(section, key);
        if (!entry) return fallback;
        std::string v = entry->value;
        std::transform(v.begin(), v.end(), v.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        violations_.push_back("line " + std::to_string(entry->line) + ": '" +
                              entry->section + "." + entry->key +
                              "' expects a boolean, got '" + entry->value + "'");
        return fallback;
    }

    std::vector<double> get_reals(const std::string& section, const std::string& key,
                                  std::vector<double> fallback) {
        const auto* entry = take(section, key);
        if (!entry) return fallback;
        std::vector<double> values;
        for (const auto& token : split_tokens(entry->value)) {
            double v = 0.0;
            if (!parse_real(token, v)) {
                report_number(*entry);
                return fallback;
            }
            values.push_back(v);
        }
        if (values.empty()) {
            violations_.push_back("line " + std::to_string(entry->line) + ": '" +
                                  entry->section + "." + entry->key + "' is empty");
            return fallback;
        }
        return values;
    }

    std::vector<int> get_ints(const std::string& section, const std::string& key,
                              std::vector<int> fallback) {
        const auto* entry = take(section, key);
        if (!entry) return fallback;
        std::vector<int> values;
        for (const auto& token : split_tokens(entry->value)) {
            int v = 0;
            if (!parse_int(token, v)) {
                report_number(*entry);
                return fallback;
            }
            values.push_back(v);
        }
        if (values.empty()) {
            violations_.push_back("line " + std::to_string(entry->line) + ": '" +
                                  entry->section + "." + entry->key + "' is empty");
            return fallback;
        }
        return values;
    }

    std::vector<std::string> get_strings(const std::string& section,
                                         const std::string& key,
                                         std::vector<std::string> fallback) {
        const auto* entry = take(section, key);
        if (!entry) return fallback;
        auto tokens = split_tokens(entry->value);
        return tokens.empty() ? fallback : tokens;
    }

    // Report every entry never consumed by a typed getter.
    void finish() {
        for (const auto& entry : entries_) {
            const auto key = entry.section + "." + entry.key;
            if (!consumed_.count(key)) {
                violations_.push_back("line " + std::to_string(entry.line) +
                                      ": unknown key '" + key + "'");
            }
        }
    }

  private:
    const IniEntry* take(const std::string& section, const std::string& key) {
        const auto full = section + "." + key;
        consumed_.insert(full);
        const auto it = index_.find(full);
        return it == index_.end() ? nullptr : &entries_[it->second];
    }

    static bool parse_real(const std::string& text, double& out) {
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size() || !std::isfinite(v)) return false;
            out = v;
            return true;
        } catch (const std::exception&) {
            return false;
        }
    }

    static bool parse_int(const std::string& text, int& out) {
        try {
            std::size_t used = 0;
            const long v = std::stol(text, &used);
            if (used != text.size()) return false;
            out = static_cast<int>(v);
            return out == v;
        } catch (const std::exception&) {
            return false;
        }
    }

    void report_number(const IniEntry& entry) {
        violations_.push_back("line " + std::to_string(entry.line) + ": '" +
                              entry.section + "." + entry.key +
                              "' is not a valid number: '" + entry.value + "'");
    }

    std::vector<IniEntry> entries_;
    std::vector<std::string>& violations_;
    std::map<std::string, std::size_t> index_;
    std::set<std::string> consumed_;
};

std::array<double, 2> default_extent(const std::string& kind) {
    if (kind == "cylinder") return {two_pi, pi};
    if (kind == "box") return {1.0, 1.0};
    return {two_pi, two_pi};
}

void require(bool ok, std::vector<std::string>& violations, const std::string& message) {
    if (!ok) violations.push_back(message);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)),
      violations_(std::move(violations)) {}

Domain RunConfig::make_domain() const {
    Domain d;
    if (domain.kind == "torus") {
        d = Domain::torus(domain.extent[0], domain.extent[1]);
    } else if (domain.kind == "cylinder") {
        d = Domain::cylinder(domain.extent[0], domain.extent[1]);
    } else {
        d = Domain::box(domain.extent[0], domain.extent[1]);
    }
    return d;
}

FlowSystem RunConfig::make_system() const {
    if (system.name == "standard_map") {
        return FlowSystem::standard_map(system.a, system.iterates);
    }
    return FlowSystem::cylinder_flow(system.t0, system.tf, system.rk4_steps);
}

RunConfig RunConfig::from_text(const std::string& text) {
    std::vector<std::string> violations;
    ConfigReader reader(parse_ini(text, violations), violations);

    RunConfig config;
    config.echo = text;

    config.system.name = reader.get_string("system", "name", config.system.name);
    config.system.a = reader.get_real("system", "a", config.system.a);
    config.system.iterates = reader.get_int("system", "iterates", config.system.iterates);
    config.system.t0 = reader.get_real("system", "t0", config.system.t0);
    config.system.tf = reader.get_real("system", "tf", config.system.tf);
    config.system.rk4_steps = reader.get_int("system", "rk4_steps", config.system.rk4_steps);

    config.domain.kind = reader.get_string("domain", "kind", config.domain.kind);
    config.domain.extent = default_extent(config.domain.kind);
    if (reader.has("domain", "extent")) {
        const auto extent = reader.get_reals("domain", "extent", {});
        if (extent.size() == 1) {
            config.domain.extent = {extent[0], extent[0]};
        } else if (extent.size() == 2) {
            config.domain.extent = {extent[0], extent[1]};
        } else if (!extent.empty()) {
            violations.push_back("'domain.extent' expects one or two lengths");
        }
    }

    const auto counts = reader.get_ints("grid", "counts",
                                        {config.grid.counts[0], config.grid.counts[1]});
    if (counts.size() == 1) {
        config.grid.counts = {counts[0], counts[0]};
    } else if (counts.size() == 2) {
        config.grid.counts = {counts[0], counts[1]};
    } else {
        violations.push_back("'grid.counts' expects one or two integers");
    }
    config.grid.delta_centers =
        reader.get_real("grid", "delta_centers", config.grid.delta_centers);
    config.grid.delta_collocation =
        reader.get_real("grid", "delta_collocation", config.grid.delta_collocation);

    config.rbf.kernel = reader.get_string("rbf", "kernel", config.rbf.kernel);
    config.rbf.eps = reader.get_real("rbf", "eps", config.rbf.eps);

    config.eig.count = reader.get_int("eig", "count", config.eig.count);
    config.eig.tol = reader.get_real("eig", "tol", config.eig.tol);
    config.eig.use_transpose_adjoint =
        reader.get_bool("eig", "use_transpose_adjoint", config.eig.use_transpose_adjoint);
    config.eig.symmetrize_D =
        reader.get_bool("eig", "symmetrize_D", config.eig.symmetrize_D);

    config.cheeger.levels = reader.get_int("cheeger", "levels", config.cheeger.levels);
    const std::string option =
        reader.get_string("cheeger", "image_option", std::string(1, config.cheeger.image_option));
    config.cheeger.resolution =
        reader.get_int("cheeger", "resolution", config.cheeger.resolution);

    config.output.directory =
        reader.get_string("output", "directory", config.output.directory);
    const auto formats = reader.get_strings("output", "formats", {"csv", "json"});

    reader.finish();

    // Cross-field validation; every failed check is reported.
    const bool known_system =
        config.system.name == "standard_map" || config.system.name == "cylinder_flow";
    require(known_system, violations,
            "'system.name' must be standard_map or cylinder_flow, got '" +
                config.system.name + "'");
    require(config.system.iterates >= 1, violations,
            "'system.iterates' must be at least 1");
    require(config.system.rk4_steps >= 1, violations,
            "'system.rk4_steps' must be at least 1");
    require(config.system.tf > config.system.t0 || config.system.name == "standard_map",
            violations, "'system.tf' must exceed 'system.t0'");

    const bool known_kind = config.domain.kind == "torus" ||
                            config.domain.kind == "cylinder" ||
                            config.domain.kind == "box";
    require(known_kind, violations,
            "'domain.kind' must be torus, cylinder, or box, got '" +
                config.domain.kind + "'");
    require(config.domain.extent[0] > 0 && config.domain.extent[1] > 0, violations,
            "'domain.extent' lengths must be positive");
    if (known_system && known_kind) {
        if (config.system.name == "standard_map") {
            require(config.domain.kind == "torus" &&
                        std::abs(config.domain.extent[0] - two_pi) < 1e-9 &&
                        std::abs(config.domain.extent[1] - two_pi) < 1e-9,
                    violations,
                    "standard_map requires the 2pi x 2pi torus domain");
        } else {
            require(config.domain.kind == "cylinder" &&
                        std::abs(config.domain.extent[0] - two_pi) < 1e-9 &&
                        std::abs(config.domain.extent[1] - pi) < 1e-9,
                    violations,
                    "cylinder_flow requires the 2pi x pi cylinder domain");
        }
    }

    require(config.grid.counts[0] >= 4 && config.grid.counts[1] >= 4, violations,
            "'grid.counts' must be at least 4 per axis");
    require(config.grid.delta_centers >= 0, violations,
            "'grid.delta_centers' must be non-negative");
    require(config.grid.delta_collocation >= 0, violations,
            "'grid.delta_collocation' must be non-negative");

    const auto& names = WendlandKernel::names();
    require(std::find(names.begin(), names.end(), config.rbf.kernel) != names.end(),
            violations, "'rbf.kernel' must be one of psi31, psi42, psi53, psi64");
    require(config.rbf.eps > 0, violations, "'rbf.eps' must be positive");

    require(config.eig.count >= 2, violations,
            "'eig.count' must be at least 2 (the level-set scan needs f2)");
    require(config.eig.tol > 0, violations, "'eig.tol' must be positive");

    require(config.cheeger.levels >= 1, violations,
            "'cheeger.levels' must be at least 1");
    require(config.cheeger.resolution >= 8, violations,
            "'cheeger.resolution' must be at least 8");
    if (option == "a" || option == "b") {
        config.cheeger.image_option = option[0];
    } else {
        violations.push_back("'cheeger.image_option' must be a or b, got '" + option + "'");
    }

    require(!config.output.directory.empty(), violations,
            "'output.directory' must not be empty");
    config.output.csv = false;
    config.output.json = false;
    for (const auto& format : formats) {
        if (format == "csv") {
            config.output.csv = true;
        } else if (format == "json") {
            config.output.json = true;
        } else {
            violations.push_back("'output.formats' entries must be csv or json, got '" +
                                 format + "'");
        }
    }
    require(config.output.csv || config.output.json, violations,
            "'output.formats' must request at least one format");

    if (!violations.empty()) throw ConfigError(std::move(violations));
    return config;
}

RunConfig RunConfig::from_file(const std::string& path) {
    return from_text(read_text_file(path));
}

ConvergenceConfig ConvergenceConfig::from_text(const std::string& text) {
    std::vector<std::string> violations;
    ConfigReader reader(parse_ini(text, violations), violations);

    ConvergenceConfig config;
    config.echo = text;

    config.sweep = reader.get_string("convergence", "sweep", config.sweep);
    config.counts = reader.get_ints("convergence", "counts", config.counts);
    config.eps = reader.get_real("convergence", "eps", config.eps);
    config.eps_values = reader.get_reals("convergence", "eps_values", config.eps_values);
    config.count = reader.get_int("convergence", "count", config.count);
    config.kernels = reader.get_strings("convergence", "kernels", config.kernels);
    const auto reference = reader.get_reals(
        "convergence", "reference",
        {config.reference[0], config.reference[1], config.reference[2], config.reference[3]});
    config.reference_source =
        reader.get_string("convergence", "reference_source", config.reference_source);
    config.fit_err_lo = reader.get_real("convergence", "fit_err_lo", config.fit_err_lo);
    config.fit_err_hi = reader.get_real("convergence", "fit_err_hi", config.fit_err_hi);

    config.system.name = reader.get_string("system", "name", config.system.name);
    config.system.a = reader.get_real("system", "a", config.system.a);
    config.system.iterates = reader.get_int("system", "iterates", config.system.iterates);
    config.eig_tol = reader.get_real("eig", "tol", config.eig_tol);
    config.directory = reader.get_string("output", "directory", config.directory);

    reader.finish();

    require(config.sweep == "mesh" || config.sweep == "shape", violations,
            "'convergence.sweep' must be mesh or shape, got '" + config.sweep + "'");
    if (config.sweep == "mesh") {
        require(config.counts.size() >= 3, violations,
                "'convergence.counts' needs at least 3 sweep points");
        for (int c : config.counts) {
            require(c >= 4, violations, "'convergence.counts' entries must be at least 4");
        }
        require(config.eps > 0, violations, "'convergence.eps' must be positive");
    } else if (config.sweep == "shape") {
        require(config.eps_values.size() >= 3, violations,
                "'convergence.eps_values' needs at least 3 sweep points");
        for (double e : config.eps_values) {
            require(e > 0, violations, "'convergence.eps_values' entries must be positive");
        }
        require(config.count >= 4, violations, "'convergence.count' must be at least 4");
    }
    require(!config.kernels.empty(), violations,
            "'convergence.kernels' must list at least one kernel");
    const auto& names = WendlandKernel::names();
    for (const auto& kernel : config.kernels) {
        require(std::find(names.begin(), names.end(), kernel) != names.end(), violations,
                "unknown kernel '" + kernel + "' in 'convergence.kernels'");
    }
    if (reference.size() == 4) {
        std::copy(reference.begin(), reference.end(), config.reference.begin());
    } else {
        violations.push_back("'convergence.reference' expects exactly 4 eigenvalues");
    }
    require(config.fit_err_lo > 0 && config.fit_err_hi > config.fit_err_lo, violations,
            "'convergence.fit_err_lo/hi' must satisfy 0 < lo < hi");
    require(config.system.name == "standard_map", violations,
            "convergence studies support only the standard_map system");
    require(config.system.iterates >= 1, violations,
            "'system.iterates' must be at least 1");
    require(config.eig_tol > 0, violations, "'eig.tol' must be positive");
    require(!config.directory.empty(), violations,
            "'output.directory' must not be empty");

    if (!violations.empty()) throw ConfigError(std::move(violations));
    return config;
}

ConvergenceConfig ConvergenceConfig::from_file(const std::string& path) {
    return from_text(read_text_file(path));
}

std::string format_g17(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

int log_level() {
    const char* env = std::getenv("DYNLAP_LOG");
    if (env == nullptr) return 0;
    const std::string value(env);
    if (value == "debug") return 2;
    if (value == "info") return 1;
    return 0;
}

void log_info(const std::string& message) {
    if (log_level() >= 1) std::cerr << "[dynlap] " << message << "\n";
}

void log_debug(const std::string& message) {
    if (log_level() >= 2) std::cerr << "[dynlap:debug] " << message << "\n";
}

std::string read_text_file(const std::string& path) {
    std::ifstream stream(path, std::ios::binary);
    if (!stream) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << stream.rdbuf();
    return buffer.str();
}

}  // namespace dynlap

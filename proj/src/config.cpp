#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fabdry/errors.hpp"
#include "fabdry/workbench.hpp"

namespace fabdry {

namespace {

enum class Kind { Real, Temperature, Count, List, Averaging, Text, Units };

struct Entry {
    std::string_view key;
    Kind kind;
    std::function<double&(RunConfig&)> real;             // Real, Temperature
    std::function<std::size_t&(RunConfig&)> count;       // Count
    std::function<std::string&(RunConfig&)> text;       // Text
};

Entry real(std::string_view key, std::function<double&(RunConfig&)> f, Kind kind = Kind::Real) {
    return Entry{key, kind, std::move(f), {}, {}};
}

Entry temperature(std::string_view key, std::function<double&(RunConfig&)> f) {
    return real(key, std::move(f), Kind::Temperature);
}

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = [] {
        std::vector<Entry> t;
        t.push_back({"units.temperature", Kind::Units, {}, {}, {}});

        t.push_back(real("fluid.c_l", [](RunConfig& c) -> double& { return c.machine.materials.fluid.c_l; }));
        t.push_back(real("fluid.lambda_l", [](RunConfig& c) -> double& { return c.machine.materials.fluid.lambda_l; }));
        t.push_back(real("fluid.rho_l", [](RunConfig& c) -> double& { return c.machine.materials.fluid.rho_l; }));
        t.push_back(real("fluid.h_lv", [](RunConfig& c) -> double& { return c.machine.materials.fluid.h_lv; }));
        t.push_back(temperature("fluid.T_evap", [](RunConfig& c) -> double& { return c.machine.materials.fluid.T_evap; }));
        t.push_back(real("fluid.lambda_vap", [](RunConfig& c) -> double& { return c.machine.materials.fluid.lambda_vap; }));

        t.push_back(real("fabric.c_f", [](RunConfig& c) -> double& { return c.machine.materials.fabric.c_f; }));
        t.push_back(real("fabric.lambda_f", [](RunConfig& c) -> double& { return c.machine.materials.fabric.lambda_f; }));
        t.push_back(real("fabric.rho_f", [](RunConfig& c) -> double& { return c.machine.materials.fabric.rho_f; }));
        t.push_back(real("fabric.M_c", [](RunConfig& c) -> double& { return c.machine.materials.fabric.M_c; }));

        t.push_back(real("exchange.D_cyl", [](RunConfig& c) -> double& { return c.machine.exchange.D_cyl; }));
        t.push_back(real("exchange.D_env", [](RunConfig& c) -> double& { return c.machine.exchange.D_env; }));
        t.push_back(real("exchange.eps_cyl", [](RunConfig& c) -> double& { return c.machine.exchange.eps_cyl; }));
        t.push_back(real("exchange.eps_env", [](RunConfig& c) -> double& { return c.machine.exchange.eps_env; }));
        t.push_back(real("exchange.Re", [](RunConfig& c) -> double& { return c.machine.exchange.Re; }));
        t.push_back(real("exchange.Gr", [](RunConfig& c) -> double& { return c.machine.exchange.Gr; }));
        t.push_back(real("exchange.Pr", [](RunConfig& c) -> double& { return c.machine.exchange.Pr; }));
        t.push_back(temperature("exchange.T_env", [](RunConfig& c) -> double& { return c.machine.exchange.T_env; }));

        t.push_back(temperature("operating.T0", [](RunConfig& c) -> double& { return c.machine.T0; }));
        t.push_back(temperature("operating.T_cyl", [](RunConfig& c) -> double& { return c.operating.T_cyl; }));
        t.push_back(real("operating.pressure_bar", [](RunConfig& c) -> double& { return c.pressure_bar; }));
        t.push_back(real("operating.tau", [](RunConfig& c) -> double& { return c.operating.tau; }));
        t.push_back(real("operating.thickness", [](RunConfig& c) -> double& { return c.operating.thickness; }));
        t.push_back(real("operating.M0", [](RunConfig& c) -> double& { return c.operating.M0; }));

        t.push_back({"solver.n_nodes", Kind::Count, {}, [](RunConfig& c) -> std::size_t& { return c.machine.n_nodes; }, {}});
        t.push_back(real("solver.dt", [](RunConfig& c) -> double& { return c.machine.dt; }));
        t.push_back({"solver.stage_fractions", Kind::List, {}, {}, {}});
        t.push_back({"solver.averaging", Kind::Averaging, {}, {}, {}});

        t.push_back(real("kinetics.k", [](RunConfig& c) -> double& { return c.kinetics.k; }));
        t.push_back(real("kinetics.M_b", [](RunConfig& c) -> double& { return c.kinetics.M_b; }));
        t.push_back(real("kinetics.gamma", [](RunConfig& c) -> double& { return c.kinetics.gamma; }));
        t.push_back(real("kinetics.beta", [](RunConfig& c) -> double& { return c.kinetics.beta; }));

        t.push_back(real("fit.k_min", [](RunConfig& c) -> double& { return c.bounds.lower[0]; }));
        t.push_back(real("fit.k_max", [](RunConfig& c) -> double& { return c.bounds.upper[0]; }));
        t.push_back(real("fit.M_b_min", [](RunConfig& c) -> double& { return c.bounds.lower[1]; }));
        t.push_back(real("fit.M_b_max", [](RunConfig& c) -> double& { return c.bounds.upper[1]; }));
        t.push_back(real("fit.gamma_min", [](RunConfig& c) -> double& { return c.bounds.lower[2]; }));
        t.push_back(real("fit.gamma_max", [](RunConfig& c) -> double& { return c.bounds.upper[2]; }));
        t.push_back(real("fit.init_k", [](RunConfig& c) -> double& { return c.fit_init.k; }));
        t.push_back(real("fit.init_M_b", [](RunConfig& c) -> double& { return c.fit_init.M_b; }));
        t.push_back(real("fit.init_gamma", [](RunConfig& c) -> double& { return c.fit_init.gamma; }));
        t.push_back(real("fit.beta", [](RunConfig& c) -> double& { return c.fit_init.beta; }));
        t.push_back(real("fit.ftol", [](RunConfig& c) -> double& { return c.fit_options.ftol; }));
        t.push_back(real("fit.xtol", [](RunConfig& c) -> double& { return c.fit_options.xtol; }));
        t.push_back(real("fit.gtol", [](RunConfig& c) -> double& { return c.fit_options.gtol; }));
        t.push_back({"fit.max_iterations", Kind::Count, {},
                     [](RunConfig& c) -> std::size_t& { return c.fit_options.max_iterations; }, {}});
        t.push_back({"fit.threads", Kind::Count, {}, {}, {}});

        t.push_back({"paths.dataset", Kind::Text, {}, {}, [](RunConfig& c) -> std::string& { return c.dataset_path; }});
        t.push_back({"paths.output", Kind::Text, {}, {}, [](RunConfig& c) -> std::string& { return c.output_dir; }});
        return t;
    }();
    return table;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string format_real(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
    return std::string(buf, res.ptr);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double to_real(const std::string& s, std::size_t line, std::string_view key) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
        fail(line, std::string(key) + ": expected a finite number, got '" + s + "'");
    }
    return v;
}

std::size_t to_count(const std::string& s, std::size_t line, std::string_view key) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        fail(line, std::string(key) + ": expected a non-negative integer, got '" + s + "'");
    }
    errno = 0;
    const unsigned long long v = std::strtoull(s.c_str(), nullptr, 10);
    if (errno == ERANGE) fail(line, std::string(key) + ": integer out of range");
    return static_cast<std::size_t>(v);
}

}  // namespace

std::span<const std::string_view> config_keys() {
    static const std::vector<std::string_view> keys = [] {
        std::vector<std::string_view> k;
        for (const Entry& e : entries()) k.push_back(e.key);
        return k;
    }();
    return keys;
}

void RunConfig::validate() const {
    try {
        machine.validate();
        kinetics.validate();
        fit_init.validate();
        bounds.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    if (!std::isfinite(pressure_bar) || pressure_bar <= 0.0) {
        throw ConfigError("invalid configuration: operating.pressure_bar must be > 0");
    }
    if (!std::isfinite(operating.tau) || operating.tau < 0.0) {
        throw ConfigError("invalid configuration: operating.tau must be >= 0");
    }
    if (!std::isfinite(operating.thickness) || operating.thickness <= 0.0) {
        throw ConfigError("invalid configuration: operating.thickness must be > 0");
    }
    if (!std::isfinite(operating.T_cyl) || operating.T_cyl <= 0.0) {
        throw ConfigError("invalid configuration: operating.T_cyl must be a positive absolute temperature");
    }
    if (!std::isfinite(operating.M0) || operating.M0 < 0.0) {
        throw ConfigError("invalid configuration: operating.M0 must be >= 0");
    }
    if (!bounds.contains(fit_init.fitted())) {
        throw ConfigError("invalid configuration: fit.init_* lies outside the fit bounds");
    }
    for (double tol : {fit_options.ftol, fit_options.xtol, fit_options.gtol}) {
        if (!std::isfinite(tol) || tol < 0.0) throw ConfigError("invalid configuration: fit tolerances must be >= 0");
    }
}

RunConfig parse_config(std::string_view text) {
    struct Raw {
        std::string value;
        std::size_t line;
    };
    std::map<std::string, Raw> raw;

    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) fail(line_no, "missing key");
        const auto& keys = config_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) fail(line_no, "unknown key '" + key + "'");
        if (raw.count(key) != 0) fail(line_no, "duplicate key '" + key + "'");
        raw.emplace(key, Raw{value, line_no});
    }

    bool celsius = false;
    if (const auto it = raw.find("units.temperature"); it != raw.end()) {
        if (it->second.value == "celsius") {
            celsius = true;
        } else if (it->second.value != "kelvin") {
            fail(it->second.line, "units.temperature must be 'kelvin' or 'celsius'");
        }
    }

    RunConfig config;
    for (const Entry& e : entries()) {
        const auto it = raw.find(std::string(e.key));
        if (it == raw.end()) continue;
        const std::string& v = it->second.value;
        const std::size_t ln = it->second.line;
        switch (e.kind) {
            case Kind::Units:
                break;
            case Kind::Real:
                e.real(config) = to_real(v, ln, e.key);
                break;
            case Kind::Temperature:
                e.real(config) = celsius ? celsius_to_kelvin(to_real(v, ln, e.key)) : to_real(v, ln, e.key);
                break;
            case Kind::Count:
                if (e.key == "fit.threads") {
                    const std::size_t n = to_count(v, ln, e.key);
                    if (n > 4096) fail(ln, "fit.threads is unreasonably large");
                    config.fit_options.threads = static_cast<unsigned>(n);
                } else {
                    e.count(config) = to_count(v, ln, e.key);
                }
                break;
            case Kind::List: {
                std::vector<double> values;
                std::istringstream parts(v);
                std::string item;
                while (std::getline(parts, item, ',')) values.push_back(to_real(trim(item), ln, e.key));
                config.machine.stage_fractions = std::move(values);
                break;
            }
            case Kind::Averaging:
                if (v == "interior") {
                    config.machine.averaging = MoistureAverage::InteriorNodes;
                } else if (v == "all") {
                    config.machine.averaging = MoistureAverage::AllNodes;
                } else {
                    fail(ln, "solver.averaging must be 'interior' or 'all'");
                }
                break;
            case Kind::Text:
                e.text(config) = v;
                break;
        }
    }
    config.validate();
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string serialize_config(const RunConfig& config) {
    RunConfig& c = const_cast<RunConfig&>(config);  // accessors are shared with the parser; nothing is written
    std::ostringstream out;
    std::string_view section;
    for (const Entry& e : entries()) {
        const std::string_view sec = e.key.substr(0, e.key.find('.'));
        if (sec != section) {
            if (!section.empty()) out << '\n';
            section = sec;
        }
        out << e.key << " = ";
        switch (e.kind) {
            case Kind::Units:
                out << "kelvin";
                break;
            case Kind::Real:
            case Kind::Temperature:
                out << format_real(e.real(c));
                break;
            case Kind::Count:
                if (e.key == "fit.threads") {
                    out << config.fit_options.threads;
                } else {
                    out << e.count(c);
                }
                break;
            case Kind::List:
                for (std::size_t i = 0; i < config.machine.stage_fractions.size(); ++i) {
                    out << (i ? ", " : "") << format_real(config.machine.stage_fractions[i]);
                }
                break;
            case Kind::Averaging:
                out << (config.machine.averaging == MoistureAverage::AllNodes ? "all" : "interior");
                break;
            case Kind::Text:
                out << e.text(c);
                break;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace fabdry

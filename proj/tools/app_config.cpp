#include "app_config.hpp"

#include "vsm/errors.hpp"
#include "vsm/format.hpp"
#include "vsm/hash.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

namespace vsm::app {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double d = 0.0;
    if (!parse_double(v, d) || !std::isfinite(d)) throw ConfigError(key, "expected a finite number, got '" + v + "'");
    return d;
}

long to_long(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    long out = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    if (t == "true") return true;
    if (t == "false") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_floating_point_v<T>)
            out += format_double(v[i]);
        else
            out += std::to_string(v[i]);
    }
    return out;
}

struct Binding {
    std::function<void(const std::string&)> set;
    std::function<std::string()> get;
};

using Table = std::map<std::string, Binding>;

Binding real(const std::string& key, double& ref) {
    return {[&ref, key](const std::string& v) { ref = to_double(key, v); }, [&ref] { return format_double(ref); }};
}

template <class I>
Binding integer(const std::string& key, I& ref) {
    return {[&ref, key](const std::string& v) {
                const long x = to_long(key, v);
                if (x < 0 && std::is_unsigned_v<I>) throw ConfigError(key, "must be nonnegative");
                ref = static_cast<I>(x);
            },
            [&ref] { return std::to_string(ref); }};
}

Binding boolean(const std::string& key, bool& ref) {
    return {[&ref, key](const std::string& v) { ref = to_bool(key, v); }, [&ref] { return ref ? "true" : "false"; }};
}

Binding text(std::string& ref) {
    return {[&ref](const std::string& v) { ref = trim(v); }, [&ref] { return ref; }};
}

Binding real_list(const std::string& key, std::vector<double>& ref) {
    return {[&ref, key](const std::string& v) { ref = parse_double_list(key, v); }, [&ref] { return join(ref); }};
}

Binding int_list(const std::string& key, std::vector<int>& ref) {
    return {[&ref, key](const std::string& v) { ref = parse_int_list(key, v); }, [&ref] { return join(ref); }};
}

Table bindings(AppConfig& c) {
    Table t;
    auto add = [&](const std::string& key, auto make) { t.emplace(key, make(key)); };
    BuildConfig& b = c.build;
    add("grids.xi_min", [&](const std::string& k) { return real(k, b.grid.xi_min); });
    add("grids.xi_max", [&](const std::string& k) { return real(k, b.grid.xi_max); });
    add("grids.xi_n", [&](const std::string& k) { return integer(k, b.grid.xi_n); });
    add("grids.x_min", [&](const std::string& k) { return real(k, b.grid.x_min); });
    add("grids.x_max", [&](const std::string& k) { return real(k, b.grid.x_max); });
    add("grids.x_n", [&](const std::string& k) { return integer(k, b.grid.x_n); });
    add("stencil.u_max", [&](const std::string& k) { return real(k, b.u_max); });
    add("stencil.nodes", [&](const std::string& k) { return integer(k, b.u_nodes); });
    add("forcing.family", [&](const std::string&) { return text(b.forcing.family); });
    add("forcing.amplitude", [&](const std::string& k) { return real(k, b.forcing.amplitude); });
    add("forcing.center", [&](const std::string& k) { return real(k, b.forcing.center); });
    add("forcing.width", [&](const std::string& k) { return real(k, b.forcing.width); });
    add("forcing.ratio", [&](const std::string& k) { return real(k, b.forcing.ratio); });
    add("forcing.max_order", [&](const std::string& k) { return integer(k, b.forcing.max_order); });
    add("forcing.csv_path", [&](const std::string&) { return text(b.forcing.csv_path); });
    add("cutoff.Xi", [&](const std::string& k) { return real(k, b.Xi); });
    add("cutoff.margin", [&](const std::string& k) { return real(k, b.cutoff_margin); });
    add("solver.alpha", [&](const std::string& k) { return integer(k, b.solver.alpha); });
    add("solver.orthogonality_weighted", [&](const std::string& k) { return boolean(k, b.solver.orthogonality_weighted); });
    add("solver.tolerance", [&](const std::string& k) { return real(k, b.solver.tolerance); });
    add("solver.condition_bound", [&](const std::string& k) { return real(k, b.solver.condition_bound); });
    add("solver.max_refinement_steps", [&](const std::string& k) { return integer(k, b.solver.max_refinement_steps); });
    add("manifold.order", [&](const std::string& k) { return integer(k, b.order); });
    add("manifold.divergence_factor", [&](const std::string& k) { return real(k, b.divergence_factor); });
    add("manifold.bound_floor", [&](const std::string& k) { return real(k, b.bound_floor); });
    add("manifold.eps_cap", [&](const std::string& k) { return real(k, b.eps_cap); });
    add("manifold.tail_tolerance", [&](const std::string& k) { return real(k, b.tail_tolerance); });
    add("manifold.eps_samples", [&](const std::string& k) { return integer(k, b.eps_samples); });
    add("manifold.residual_eps", [&](const std::string& k) { return real_list(k, c.residual_eps); });
    add("manifold.residual_orders", [&](const std::string& k) { return int_list(k, c.residual_orders); });
    DynamicsConfig& d = c.dynamics;
    add("dynamics.xi_s", [&](const std::string& k) { return real(k, d.xi_s); });
    add("dynamics.u_s", [&](const std::string& k) { return real(k, d.u_s); });
    add("dynamics.eps", [&](const std::string& k) { return real(k, d.eps); });
    add("dynamics.T", [&](const std::string& k) { return real(k, d.invariance.T); });
    add("dynamics.dt", [&](const std::string& k) { return real(k, d.invariance.dt); });
    add("dynamics.sample_every", [&](const std::string& k) { return integer(k, d.invariance.sample_every); });
    add("dynamics.c_tilde", [&](const std::string& k) { return real(k, d.invariance.c_tilde); });
    add("dynamics.rescaled_eps", [&](const std::string& k) { return real_list(k, d.rescaled_eps); });
    add("dynamics.rescaled_S", [&](const std::string& k) { return real(k, d.rescaled.S); });
    add("dynamics.rescaled_ds", [&](const std::string& k) { return real(k, d.rescaled.ds); });
    add("dynamics.rescaled_uhat_s", [&](const std::string& k) { return real(k, d.rescaled.uhat_s); });
    add("dynamics.integrator_tolerance", [&](const std::string& k) { return real(k, d.rescaled.tolerance); });
    VerifyConfig& v = c.verify;
    add("verify.orders", [&](const std::string& k) { return int_list(k, v.orders); });
    add("verify.eps_sweep", [&](const std::string& k) { return real_list(k, v.eps_sweep); });
    add("verify.sweep_order", [&](const std::string& k) { return integer(k, v.sweep_order); });
    add("verify.min_eps_slope", [&](const std::string& k) { return real(k, v.min_eps_slope); });
    add("verify.noise_tolerance", [&](const std::string& k) { return real(k, v.noise_tolerance); });
    return t;
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
}

void validate(const AppConfig& c) {
    const BuildConfig& b = c.build;
    require(b.grid.xi_max > b.grid.xi_min, "grids.xi_max", "must exceed grids.xi_min");
    require(b.grid.x_max > b.grid.x_min, "grids.x_max", "must exceed grids.x_min");
    require(b.grid.xi_n >= 8, "grids.xi_n", "must be at least 8");
    require(b.grid.x_n >= 8, "grids.x_n", "must be at least 8");
    require(b.u_max > 0.0 && b.u_max < 1.0, "stencil.u_max", "must lie in (0, 1)");
    require(b.u_nodes >= 2, "stencil.nodes", "must be at least 2");
    require(b.Xi > 0.0, "cutoff.Xi", "must be positive");
    require(b.cutoff_margin >= 2.0, "cutoff.margin", "must be at least 2");
    require(b.grid.xi_max >= b.Xi + 1.0 + b.cutoff_margin && -b.grid.xi_min >= b.Xi + 1.0 + b.cutoff_margin,
            "cutoff.Xi", "cutoff support plus margin does not fit the xi-range");
    require(b.solver.alpha >= 0, "solver.alpha", "must be nonnegative");
    require(b.solver.tolerance > 0.0, "solver.tolerance", "must be positive");
    require(b.solver.condition_bound > 1.0, "solver.condition_bound", "must exceed 1");
    require(b.solver.max_refinement_steps >= 0, "solver.max_refinement_steps", "must be nonnegative");
    require(b.order >= 0 && b.order <= 12, "manifold.order", "must lie in [0, 12]");
    require(b.divergence_factor > 0.0, "manifold.divergence_factor", "must be positive");
    require(b.bound_floor > 0.0, "manifold.bound_floor", "must be positive");
    require(b.eps_cap > 0.0, "manifold.eps_cap", "must be positive");
    require(b.tail_tolerance > 0.0, "manifold.tail_tolerance", "must be positive");
    require(b.eps_samples >= 1, "manifold.eps_samples", "must be at least 1");
    for (double e : c.residual_eps) require(e > 0.0, "manifold.residual_eps", "values must be positive");
    for (int m : c.residual_orders) require(m >= 0, "manifold.residual_orders", "values must be nonnegative");
    const DynamicsConfig& d = c.dynamics;
    require(d.invariance.T > 0.0, "dynamics.T", "must be positive");
    require(d.invariance.dt > 0.0, "dynamics.dt", "must be positive");
    require(d.invariance.sample_every >= 1, "dynamics.sample_every", "must be at least 1");
    require(d.invariance.c_tilde >= 0.0, "dynamics.c_tilde", "must be nonnegative");
    require(d.rescaled.S > 0.0, "dynamics.rescaled_S", "must be positive");
    require(d.rescaled.ds > 0.0, "dynamics.rescaled_ds", "must be positive");
    require(d.rescaled.tolerance > 0.0, "dynamics.integrator_tolerance", "must be positive");
    for (double e : d.rescaled_eps) require(e > 0.0, "dynamics.rescaled_eps", "values must be positive");
    require(c.verify.min_eps_slope > 0.0, "verify.min_eps_slope", "must be positive");
    require(c.verify.noise_tolerance >= 0.0, "verify.noise_tolerance", "must be nonnegative");
    require(c.verify.sweep_order >= 0, "verify.sweep_order", "must be nonnegative");
    // The forcing family validates its own keys.
    ForcingFamily check(b.forcing);
    (void)check;
}

}  // namespace

std::vector<double> parse_double_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(to_double(key, cell));
    if (out.empty()) throw ConfigError(key, "list is empty");
    return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(static_cast<int>(to_long(key, cell)));
    if (out.empty()) throw ConfigError(key, "list is empty");
    return out;
}

AppConfig load_config(const std::filesystem::path& path) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("", "cannot parse " + path.string() + ": " + e.message() + " (line " +
                                  std::to_string(e.line()) + ")");
    }
    AppConfig cfg;
    Table t = bindings(cfg);
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside of any section");
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            const auto it = t.find(full);
            if (it == t.end()) throw ConfigError(full, "unknown configuration key");
            if (!value.empty()) throw ConfigError(full, "nested keys are not supported");
            it->second.set(value.data());
        }
    }
    if (!cfg.build.forcing.csv_path.empty() && std::filesystem::path(cfg.build.forcing.csv_path).is_relative())
        cfg.build.forcing.csv_path = (path.parent_path() / cfg.build.forcing.csv_path).lexically_normal().string();
    validate(cfg);
    return cfg;
}

std::map<std::string, std::string> canonical(const AppConfig& cfg) {
    AppConfig copy = cfg;
    std::map<std::string, std::string> out;
    for (const auto& [key, b] : bindings(copy)) out[key] = b.get();
    return out;
}

std::string config_hash(const AppConfig& cfg) {
    std::string text;
    for (const auto& [k, v] : canonical(cfg)) text += k + "=" + v + "\n";
    return sha256_hex(text);
}

std::string to_ini(const AppConfig& cfg) {
    std::string out, section;
    for (const auto& [k, v] : canonical(cfg)) {
        const auto dot = k.find('.');
        const std::string s = k.substr(0, dot);
        if (s != section) {
            out += (section.empty() ? "" : "\n") + std::string("[") + s + "]\n";
            section = s;
        }
        out += k.substr(dot + 1) + " = " + v + "\n";
    }
    return out;
}

}  // namespace vsm::app

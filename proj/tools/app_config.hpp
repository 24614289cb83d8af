#pragma once

// Experiment configuration: a flat INI file with sections grids, stencil,
// forcing, cutoff, solver, manifold, dynamics and verify.

#include "vsm/dynamics.hpp"
#include "vsm/manifold_builder.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vsm::app {

struct DynamicsConfig {
    double xi_s = 0.0;
    double u_s = 0.0;
    double eps = 0.05;
    InvarianceOptions invariance;
    RescaledOptions rescaled;
    std::vector<double> rescaled_eps{0.08, 0.04, 0.02};
};

struct VerifyConfig {
    std::vector<int> orders{2, 3, 4};
    std::vector<double> eps_sweep{0.03, 0.05, 0.08};
    int sweep_order = 3;
    double min_eps_slope = 3.5;
    /// Floor-subtracted deviations at or below this count as zero.
    double noise_tolerance = 1e-10;
};

struct AppConfig {
    BuildConfig build;
    DynamicsConfig dynamics;
    VerifyConfig verify;
    std::vector<double> residual_eps{0.02, 0.03, 0.05, 0.08};
    std::vector<int> residual_orders{2, 3, 4};
};

/// Parses an INI file; unknown sections or keys, bad values and violated
/// ranges throw ConfigError carrying "section.key".
AppConfig load_config(const std::filesystem::path& path);

/// Effective configuration as sorted "section.key" -> value strings.
std::map<std::string, std::string> canonical(const AppConfig& cfg);
/// SHA-256 of the canonical form, one "key=value" line per entry.
std::string config_hash(const AppConfig& cfg);
/// The canonical form as INI text (loads back to the same configuration).
std::string to_ini(const AppConfig& cfg);

/// Comma-separated lists.
std::vector<double> parse_double_list(const std::string& key, const std::string& text);
std::vector<int> parse_int_list(const std::string& key, const std::string& text);

}  // namespace vsm::app

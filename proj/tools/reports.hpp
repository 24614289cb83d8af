#pragma once

// Output helpers shared by the command-line tool and the acceptance runner.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace vsm::app {

/// Writes through a temporary file and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// CSV with a leading "# config_sha256=..., model_sha256=..." comment line.
class Csv {
public:
    Csv(const std::string& config_hash, const std::string& model_hash, std::vector<std::string> columns);
    void row(const std::vector<std::string>& cells);
    void row(const std::vector<double>& cells);
    const std::string& text() const noexcept { return text_; }

private:
    std::size_t columns_;
    std::string text_;
};

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    /// Text placed in an SVG comment (hashes).
    std::string note;
};

/// Standalone SVG line plot. Non-positive values are dropped on log axes.
std::string svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

/// Least-squares slope of log y against log x over entries with x, y > 0.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace vsm::app

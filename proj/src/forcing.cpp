#include "vsm/forcing.hpp"

#include "vsm/errors.hpp"
#include "vsm/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vsm {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

ForcingFamily::ForcingFamily(ForcingSpec spec) : spec_(std::move(spec)) {
    const std::string& f = spec_.family;
    if (f != "zero" && f != "gaussian" && f != "sech2" && f != "polynomial" && f != "csv")
        throw ConfigError("forcing.family", "unknown forcing family '" + f + "'");
    if (!std::isfinite(spec_.amplitude)) throw ConfigError("forcing.amplitude", "must be finite");
    if (!std::isfinite(spec_.center)) throw ConfigError("forcing.center", "must be finite");
    if (!(spec_.width > 0.0)) throw ConfigError("forcing.width", "must be positive");
    if (!std::isfinite(spec_.ratio)) throw ConfigError("forcing.ratio", "must be finite");
    if (f == "polynomial" && (spec_.max_order < 2 || spec_.max_order > 16))
        throw ConfigError("forcing.max_order", "must lie in [2, 16]");
    if (f != "csv") return;

    std::ifstream in(spec_.csv_path);
    if (!in) throw ConfigError("forcing.csv_path", "cannot open '" + spec_.csv_path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("forcing.csv_path", "empty CSV file");
    const auto header = split_csv(line);
    if (header.empty() || trim(header[0]) != "x") throw ConfigError("forcing.csv_path", "first column must be 'x'");
    std::vector<int> orders;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const std::string h = trim(header[c]);
        int n = -1;
        if (h.size() >= 2 && h[0] == 'F') {
            try {
                std::size_t used = 0;
                n = std::stoi(h.substr(1), &used);
                if (used != h.size() - 1) n = -1;
            } catch (const std::exception&) {
                n = -1;
            }
        }
        if (n < 0) throw ConfigError("forcing.csv_path", "column '" + h + "' is not of the form F<N>");
        if (n < 2) throw ConfigError("forcing.csv_path", "orders 0 and 1 of the forcing must vanish");
        orders.push_back(n);
        table_[n];
    }
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw ConfigError("forcing.csv_path", "row " + std::to_string(row) + " has wrong column count");
        double x = 0.0;
        if (!parse_double(cells[0], x)) throw ConfigError("forcing.csv_path", "bad number in row " + std::to_string(row));
        if (!table_x_.empty() && !(x > table_x_.back()))
            throw ConfigError("forcing.csv_path", "x column must be strictly increasing");
        table_x_.push_back(x);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            double v = 0.0;
            if (!parse_double(cells[c], v) || !std::isfinite(v))
                throw ConfigError("forcing.csv_path", "bad number in row " + std::to_string(row));
            table_[orders[c - 1]].push_back(v);
        }
    }
    if (table_x_.size() < 2) throw ConfigError("forcing.csv_path", "need at least two rows");
}

ForcingFamily ForcingFamily::zero() {
    ForcingSpec s;
    s.family = "zero";
    return ForcingFamily(s);
}

bool ForcingFamily::is_zero() const noexcept {
    if (spec_.family == "zero") return true;
    if (spec_.family == "csv") {
        for (const auto& [n, v] : table_)
            for (double d : v)
                if (d != 0.0) return false;
        return true;
    }
    return spec_.amplitude == 0.0;
}

int ForcingFamily::max_order() const noexcept {
    if (is_zero()) return 1;
    if (spec_.family == "gaussian" || spec_.family == "sech2") return 2;
    if (spec_.family == "polynomial") return spec_.ratio == 0.0 ? 2 : spec_.max_order;
    int m = 1;
    for (const auto& [n, v] : table_) m = std::max(m, n);
    return m;
}

double ForcingFamily::shape(double x) const {
    if (spec_.family == "sech2") {
        const double s = 1.0 / std::cosh((x - spec_.center) / spec_.width);
        return s * s;
    }
    const double d = (x - spec_.center) / spec_.width;
    return std::exp(-0.5 * d * d);
}

ArrayX ForcingFamily::coefficient(int n, const Grid1D& x) const {
    ArrayX out = ArrayX::Zero(static_cast<Eigen::Index>(x.size()));
    if (n < 2 || n > max_order() || is_zero()) return out;
    if (spec_.family == "csv") {
        const auto it = table_.find(n);
        if (it == table_.end()) return out;
        const std::vector<double>& v = it->second;
        for (Eigen::Index j = 0; j < out.size(); ++j) {
            const double xv = x.nodes()[j];
            if (xv < table_x_.front() || xv > table_x_.back()) continue;
            auto up = std::upper_bound(table_x_.begin(), table_x_.end(), xv);
            std::size_t k = static_cast<std::size_t>(up - table_x_.begin());
            if (k >= table_x_.size()) k = table_x_.size() - 1;
            const std::size_t k0 = k - 1;
            const double t = (xv - table_x_[k0]) / (table_x_[k] - table_x_[k0]);
            out[j] = (1.0 - t) * v[k0] + t * v[k];
        }
        return out;
    }
    double scale = spec_.amplitude;
    if (spec_.family == "polynomial") scale *= std::pow(spec_.ratio, n - 2);
    for (Eigen::Index j = 0; j < out.size(); ++j) out[j] = scale * shape(x.nodes()[j]);
    return out;
}

ArrayX ForcingFamily::truncated_profile(double eps, int order, const Grid1D& x) const {
    ArrayX out = ArrayX::Zero(static_cast<Eigen::Index>(x.size()));
    for (int n = std::min(order, max_order()); n >= 2; --n) out += std::pow(eps, n) * coefficient(n, x);
    return out;
}

ArrayX ForcingFamily::profile(double eps, const Grid1D& x) const { return truncated_profile(eps, max_order(), x); }

std::vector<double> ForcingFamily::coefficient_norms(int order, const Grid1D& x, int alpha) const {
    std::vector<double> out;
    for (int n = 0; n <= order; ++n) out.push_back(weighted_norm(coefficient(n, x), x, 0, alpha));
    return out;
}

double ForcingFamily::growth_constant(int order, const Grid1D& x, int alpha) const {
    // Un-normalized derivatives are N! F_N.
    double c = 0.0;
    const auto norms = coefficient_norms(order, x, alpha);
    for (int n = 2; n <= order; ++n) {
        const double d = factorial(n) * norms[static_cast<std::size_t>(n)];
        if (d > 0.0) c = std::max(c, std::pow(d / factorial(n - 2), 1.0 / n));
    }
    return c;
}

std::map<std::string, std::string> ForcingFamily::describe() const {
    std::map<std::string, std::string> d;
    d["family"] = spec_.family;
    if (spec_.family == "zero") return d;
    if (spec_.family == "csv") {
        d["csv_path"] = spec_.csv_path;
        return d;
    }
    d["amplitude"] = format_double(spec_.amplitude);
    d["center"] = format_double(spec_.center);
    d["width"] = format_double(spec_.width);
    if (spec_.family == "polynomial") {
        d["ratio"] = format_double(spec_.ratio);
        d["max_order"] = std::to_string(spec_.max_order);
    }
    return d;
}

}  // namespace vsm

#pragma once

// Forcing families F(eps, x) = sum_N eps^N F_N(x) with F_0 = F_1 = 0.

#include "vsm/fields.hpp"

#include <map>
#include <string>
#include <vector>

namespace vsm {

struct ForcingSpec {
    /// zero | gaussian | sech2 | polynomial | csv
    std::string family = "polynomial";
    double amplitude = 1.0;
    double center = 0.0;
    double width = 1.0;
    /// Polynomial family: F_N = amplitude * ratio^(N-2) * gaussian, N = 2..max_order.
    double ratio = 1.0;
    int max_order = 8;
    std::string csv_path;
};

class ForcingFamily {
public:
    ForcingFamily() : ForcingFamily(ForcingSpec{}) {}
    /// Throws ConfigError on an unknown family or bad parameters; reads the CSV for family csv.
    explicit ForcingFamily(ForcingSpec spec);

    static ForcingFamily zero();

    const ForcingSpec& spec() const noexcept { return spec_; }
    bool is_zero() const noexcept;
    /// Highest order with a nonzero profile (1 for the zero family).
    int max_order() const noexcept;

    /// Normalized Taylor coefficient F_N sampled on the grid; zero above max_order.
    ArrayX coefficient(int n, const Grid1D& x) const;
    /// Full F(eps, x) on the grid.
    ArrayX profile(double eps, const Grid1D& x) const;
    /// Sum of eps^N F_N for N <= order.
    ArrayX truncated_profile(double eps, int order, const Grid1D& x) const;

    /// ||F_N||_{H^{0,alpha}} for N = 0..order.
    std::vector<double> coefficient_norms(int order, const Grid1D& x, int alpha) const;
    /// Smallest c with ||F_N|| <= c^N (N-2)! for 2 <= N <= order.
    double growth_constant(int order, const Grid1D& x, int alpha) const;

    /// Flat key/value description for manifests and hashes.
    std::map<std::string, std::string> describe() const;

private:
    double shape(double x) const;

    ForcingSpec spec_;
    // csv family: order -> (x, F_N) table
    std::vector<double> table_x_;
    std::map<int, std::vector<double>> table_;
};

}  // namespace vsm

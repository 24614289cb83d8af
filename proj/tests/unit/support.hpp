#pragma once

#include "vsm/manifold_builder.hpp"

#include <random>

namespace vsm::test {

/// Small grid that still leaves room for the cutoff: builds in about a second.
inline BuildConfig small_config(int order = 4, const std::string& family = "polynomial") {
    BuildConfig c;
    c.grid = GridSpec{-8.0, 8.0, 65, -12.0, 12.0, 97};
    c.u_nodes = 5;
    c.order = order;
    c.forcing.family = family;
    return c;
}

/// Shared order-4 polynomial-forcing build (handles reused by other builds).
inline const BuildResult& small_build() {
    static const BuildResult r = build_manifold(small_config());
    return r;
}

inline double rel_diff(const ArrayX& a, const ArrayX& b) {
    const double scale = std::max(a.abs().maxCoeff(), b.abs().maxCoeff());
    return scale == 0.0 ? 0.0 : (a - b).abs().maxCoeff() / scale;
}

/// Smooth random field vanishing on the grid boundary.
inline GridFn2D smooth_random(const GridPtr& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const double a = d(rng), b = d(rng), c = 0.5 + 0.5 * std::abs(d(rng)), s = d(rng);
    GridFn2D f(g);
    const Grid1D& xi = g->xi();
    const Grid1D& x = g->x();
    for (std::size_t i = 1; i + 1 < xi.size(); ++i)
        for (std::size_t j = 1; j + 1 < x.size(); ++j) {
            const double p = xi[i] - 2.0 * a, q = x[j] - 3.0 * b;
            f.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::exp(-c * (p * p + q * q) / 4.0) * (1.0 + s * std::sin(q));
        }
    return f;
}

}  // namespace vsm::test

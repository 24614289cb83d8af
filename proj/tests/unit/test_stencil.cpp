#include "vsm/stencil.hpp"

#include <doctest.h>

#include <cmath>

using namespace vsm;

TEST_CASE("stencil nodes") {
    const UStencil s(0.1, 9);
    CHECK(s.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) CHECK(s[i] == doctest::Approx(-s[8 - i]).epsilon(1e-15));
    for (std::size_t i = 1; i < 9; ++i) CHECK(s[i] > s[i - 1]);
    CHECK(s[0] == doctest::Approx(-0.1));
    CHECK(s.node_index(0.0) == 4);
    CHECK(s.node_index(0.05) == -1);
}

TEST_CASE("spectral differentiation") {
    const UStencil s(0.1, 9);
    Eigen::VectorXd f(9), g(9);
    for (std::size_t i = 0; i < 9; ++i) {
        f[static_cast<Eigen::Index>(i)] = s[i] * s[i];
        g[static_cast<Eigen::Index>(i)] = std::sin(10.0 * s[i]);
    }
    const Eigen::VectorXd df = s.diff_matrix() * f;
    for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(df[static_cast<Eigen::Index>(i)] - 2.0 * s[i]) <= 1e-10);
    const Eigen::VectorXd d2 = s.diff_matrix(2) * f;
    CHECK((d2.array() - 2.0).abs().maxCoeff() <= 1e-8);
    const Eigen::VectorXd dg = s.diff_matrix() * g;
    for (std::size_t i = 0; i < 9; ++i)
        CHECK(std::abs(dg[static_cast<Eigen::Index>(i)] - 10.0 * std::cos(10.0 * s[i])) <= 1e-4);
}

TEST_CASE("barycentric basis") {
    const UStencil s(0.2, 7);
    const Eigen::VectorXd l = s.basis(0.037);
    CHECK(l.sum() == doctest::Approx(1.0).epsilon(1e-14));
    const Eigen::VectorXd at_node = s.basis(s[2]);
    for (Eigen::Index j = 0; j < 7; ++j) CHECK(at_node[j] == (j == 2 ? 1.0 : 0.0));
    double cubic = 0.0, dcubic = 0.0;
    const Eigen::VectorXd dl = s.basis_derivative(0.037);
    for (std::size_t j = 0; j < 7; ++j) {
        cubic += l[static_cast<Eigen::Index>(j)] * std::pow(s[j], 3);
        dcubic += dl[static_cast<Eigen::Index>(j)] * std::pow(s[j], 3);
    }
    CHECK(cubic == doctest::Approx(std::pow(0.037, 3)).epsilon(1e-12));
    CHECK(dcubic == doctest::Approx(3 * 0.037 * 0.037).epsilon(1e-10));
}

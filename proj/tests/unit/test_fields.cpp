#include "support.hpp"
#include "vsm/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace vsm;

TEST_CASE("Grid1D invariants") {
    const Grid1D g = Grid1D::uniform(-2.0, 2.0, 9);
    CHECK(g.size() == 9);
    CHECK(g.spacing() == doctest::Approx(0.5));
    CHECK(g[8] == 2.0);
    CHECK(g.node_index(0.5) == 5);
    CHECK(g.node_index(0.3) == -1);
    CHECK(g.trapezoid_weights().sum() == doctest::Approx(4.0));
    CHECK_THROWS_AS(Grid1D::uniform(0.0, 1.0, 7), DomainError);
    CHECK_THROWS_AS(Grid1D::uniform(1.0, 0.0, 9), DomainError);
}

TEST_CASE("Grid2D cutoff room") {
    const auto g = make_grid(-6.0, 6.0, 25, -8.0, 8.0, 33);
    CHECK_NOTHROW(g->require_cutoff_room(3.0, 2.0));
    CHECK_THROWS_AS(g->require_cutoff_room(4.0, 2.0), DomainError);
}

TEST_CASE("kink profile") {
    const double pi = std::numbers::pi;
    CHECK(kink_theta(0.0) == doctest::Approx(pi).epsilon(1e-15));
    for (double x : {0.5, 1.0, 3.0}) CHECK(kink_theta(x) == doctest::Approx(2.0 * pi - kink_theta(-x)).epsilon(1e-14));
    const double h = 1e-5;
    CHECK((kink_theta(h) - kink_theta(-h)) / (2 * h) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(kink_theta(-20.0) < 1e-8);
    CHECK(2.0 * pi - kink_theta(20.0) < 1e-8);
    for (double x : {-2.0, -0.3, 0.7, 4.0}) {
        CHECK(kink_d1(x) == doctest::Approx(2.0 / std::cosh(x)).epsilon(1e-13));
        CHECK(kink_d2(x) == doctest::Approx((kink_d1(x + h) - kink_d1(x - h)) / (2 * h)).epsilon(1e-8));
        CHECK(kink_d3(x) == doctest::Approx((kink_d2(x + h) - kink_d2(x - h)) / (2 * h)).epsilon(1e-8));
        CHECK(kink_d2(x) == doctest::Approx(std::sin(kink_theta(x))).epsilon(1e-13));
    }
}

TEST_CASE("lorentz factor") {
    CHECK(lorentz_gamma(0.6) == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(lorentz_gamma(0.0) == 1.0);
    CHECK_THROWS_AS(lorentz_gamma(1.0), DomainError);
    CHECK_THROWS_AS(lorentz_gamma(-1.2), DomainError);
}

TEST_CASE("soliton state") {
    const Grid1D x = Grid1D::uniform(-10.0, 10.0, 81);
    const auto s0 = soliton_state(1.3, 0.0, x);
    CHECK(s0.psi.abs().maxCoeff() == 0.0);

    // translation by two nodes
    const double a = 2.0 * x.spacing();
    const auto s = soliton_state(0.2, 0.3, x);
    const auto t = soliton_state(0.2 + a, 0.3, x);
    for (std::size_t j = 2; j < x.size(); ++j) {
        CHECK(t.theta[static_cast<Eigen::Index>(j)] == doctest::Approx(s.theta[static_cast<Eigen::Index>(j - 2)]).epsilon(1e-13));
        CHECK(t.psi[static_cast<Eigen::Index>(j)] == doctest::Approx(s.psi[static_cast<Eigen::Index>(j - 2)]).epsilon(1e-13));
    }

    // u d_xi theta_0 - psi_0 = 0
    for (double u : {-0.1, 0.05, 0.6})
        for (double xv : {-3.0, 0.0, 1.5}) {
            const KinkPoint p = kink_point(0.4, u, xv);
            CHECK(std::abs(u * p.dxi_theta - p.psi) <= 1e-12);
        }
}

TEST_CASE("zero modes and kink point derivatives") {
    const Grid1D x = Grid1D::uniform(-10.0, 10.0, 81);
    const double xi = 0.7;
    const auto zm = zero_modes(xi, 0.0, x);
    for (std::size_t j = 0; j < x.size(); ++j) {
        const auto k = static_cast<Eigen::Index>(j);
        CHECK(zm.t1.theta[k] == doctest::Approx(-kink_d1(x[j] - xi)).epsilon(1e-14));
        CHECK(zm.t1.psi[k] == 0.0);
    }
    const double h = 1e-5;
    const auto p = soliton_state(xi, h, x), m = soliton_state(xi, -h, x);
    CHECK(((p.theta - m.theta) / (2 * h) - zm.t2.theta).abs().maxCoeff() <= 1e-8);
    CHECK(((p.psi - m.psi) / (2 * h) - zm.t2.psi).abs().maxCoeff() <= 1e-8);

    // every closed-form u-derivative against centred differences
    const double e = 1e-5;
    for (double u : {-0.15, 0.0, 0.1})
        for (double xv : {-2.5, -0.2, 1.1}) {
            const KinkPoint c = kink_point(xi, u, xv), a = kink_point(xi, u + e, xv), b = kink_point(xi, u - e, xv);
            const KinkPoint r = kink_point(xi + e, u, xv), l = kink_point(xi - e, u, xv);
            auto fd = [&](double KinkPoint::*f) { return (a.*f - b.*f) / (2 * e); };
            CHECK(c.du_theta == doctest::Approx(fd(&KinkPoint::theta)).epsilon(1e-7));
            CHECK(c.du_psi == doctest::Approx(fd(&KinkPoint::psi)).epsilon(1e-7));
            CHECK(c.du2_theta == doctest::Approx(fd(&KinkPoint::du_theta)).epsilon(1e-7));
            CHECK(c.du2_psi == doctest::Approx(fd(&KinkPoint::du_psi)).epsilon(1e-7));
            CHECK(c.du_cos_theta == doctest::Approx(fd(&KinkPoint::cos_theta)).epsilon(1e-7));
            CHECK(c.du_normal_theta == doctest::Approx(fd(&KinkPoint::normal_theta)).epsilon(1e-7));
            CHECK(c.du_normal_psi == doctest::Approx(fd(&KinkPoint::normal_psi)).epsilon(1e-7));
            CHECK(c.dxi_theta == doctest::Approx((r.theta - l.theta) / (2 * e)).epsilon(1e-7));
            CHECK(c.dxi_psi == doctest::Approx((r.psi - l.psi) / (2 * e)).epsilon(1e-7));
        }
}

TEST_CASE("static kink identity converges at second order") {
    auto residual = [](std::size_t n) {
        const Grid1D x = Grid1D::uniform(-10.0, 10.0, n);
        const auto s = soliton_state(0.0, 0.0, x);
        const double h = x.spacing();
        double r = 0.0;
        for (Eigen::Index j = 1; j + 1 < s.theta.size(); ++j)
            r = std::max(r, std::abs((s.theta[j + 1] - 2 * s.theta[j] + s.theta[j - 1]) / (h * h) - std::sin(s.theta[j])));
        return r;
    };
    const double ratio = residual(81) / residual(161);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("weighted norms") {
    const auto g = make_grid(-4.0, 4.0, 33, -5.0, 5.0, 41);
    CHECK(weighted_norm(GridFn2D(g), 2, 1) == 0.0);

    auto gauss = [](const GridPtr& grid) {
        GridFn2D f(grid);
        for (std::size_t i = 0; i < grid->xi().size(); ++i)
            for (std::size_t j = 0; j < grid->x().size(); ++j) {
                const double a = grid->xi()[i], b = grid->x()[j];
                f.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::exp(-a * a - b * b);
            }
        return f;
    };
    // int int e^{-2 xi^2 - 2 x^2} = pi / 2
    const double exact = std::sqrt(std::numbers::pi / 2.0);
    const double coarse = weighted_norm(gauss(make_grid(-6.0, 6.0, 49, -6.0, 6.0, 49)), 0, 0);
    const double fine = weighted_norm(gauss(make_grid(-6.0, 6.0, 193, -6.0, 6.0, 193)), 0, 0);
    const double extrapolated = std::sqrt((16.0 * fine * fine - coarse * coarse) / 15.0);
    CHECK(std::abs(extrapolated - exact) / exact <= 1e-6);

    const GridFn2D f = gauss(g);
    CHECK(weighted_norm(f, 0, 1) >= weighted_norm(f, 0, 0));
    CHECK(weighted_norm(f, 0, 2) >= weighted_norm(f, 0, 1));
    CHECK(weighted_norm(f, 1, 0) >= weighted_norm(f, 0, 0));

    // alpha = 0 is the plain trapezoidal L2 norm
    const ArrayX wx = g->x().trapezoid_weights(), wxi = g->xi().trapezoid_weights();
    double s = 0.0;
    for (Eigen::Index i = 0; i < f.values().rows(); ++i)
        for (Eigen::Index j = 0; j < f.values().cols(); ++j) s += wxi[i] * wx[j] * f.values()(i, j) * f.values()(i, j);
    CHECK(weighted_norm(f, 0, 0) == doctest::Approx(std::sqrt(s)).epsilon(1e-14));
    CHECK_THROWS_AS(weighted_norm(f, 3, 0), DomainError);
}

TEST_CASE("slice_at_xi") {
    const auto g = make_grid(-4.0, 4.0, 33, -5.0, 5.0, 41);
    GridFn2D lin(g);
    for (Eigen::Index i = 0; i < lin.values().rows(); ++i) lin.values().row(i).setConstant(g->xi()[static_cast<std::size_t>(i)]);
    const ArrayX row = slice_at_xi(lin, g->xi()[7]);
    CHECK((row - lin.values().row(7).transpose()).abs().maxCoeff() == 0.0);
    const double mid = 0.5 * (g->xi()[10] + g->xi()[11]);
    CHECK((slice_at_xi(lin, mid) - mid).abs().maxCoeff() <= 1e-14);
    CHECK_THROWS_AS(slice_at_xi(lin, 4.5), DomainError);

    auto err = [](std::size_t n) {
        const auto grid = make_grid(-4.0, 4.0, n, -5.0, 5.0, 41);
        GridFn2D f(grid);
        for (std::size_t i = 0; i < grid->xi().size(); ++i)
            f.values().row(static_cast<Eigen::Index>(i)).setConstant(std::exp(-grid->xi()[i] * grid->xi()[i]));
        double e = 0.0;
        for (double at : {-1.03, 0.217, 0.61, 1.49}) e = std::max(e, std::abs(slice_at_xi(f, at)[3] - std::exp(-at * at)));
        return e;
    };
    const double slope = std::log2(err(33) / err(65));
    CHECK(slope >= 3.0);
}

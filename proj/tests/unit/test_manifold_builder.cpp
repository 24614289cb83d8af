#include "support.hpp"
#include "vsm/errors.hpp"
#include "vsm/manifold_eval.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace vsm;

namespace {

double rel(const TripleY& a, const TripleY& b) {
    const double s = std::max({b.theta.max_abs(), b.psi.max_abs(), b.lambda.max_abs()});
    const double d = std::max({(a.theta - b.theta).max_abs(), (a.psi - b.psi).max_abs(), (a.lambda - b.lambda).max_abs()});
    return s == 0.0 ? d : d / s;
}

PairZ forcing_rhs(const ManifoldModel& m, int n) {
    GridFn2D f = assemble_forcing_coeff(n, m.forcing, m.chi, m.grid);
    Array2D& v = f.values();
    v.row(0).setZero();
    v.row(v.rows() - 1).setZero();
    v.col(0).setZero();
    v.col(v.cols() - 1).setZero();
    return PairZ{GridFn2D(m.grid), f};
}

}  // namespace

TEST_CASE("low orders vanish and every coefficient lies in Y") {
    const BuildResult& r = test::small_build();
    const ManifoldModel& m = r.model;
    CHECK(m.order == 4);
    CHECK(m.series.size() == 5);
    for (std::size_t p = 0; p < m.series.size(); ++p) {
        for (int n : {0, 1}) {
            CHECK(m.coeff(p, n).theta.max_abs() == 0.0);
            CHECK(m.coeff(p, n).psi.max_abs() == 0.0);
            CHECK(m.coeff(p, n).lambda.max_abs() == 0.0);
        }
        for (int n = 2; n <= 4; ++n) {
            CHECK(m.coeff(p, n).all_finite());
            CHECK(r.handles[p]->membership_defect(m.coeff(p, n)) <= 1e-10);
        }
    }
    CHECK(r.stats.max_membership_defect <= 1e-10);
    CHECK(r.stats.max_solve_residual <= 1e-10);
    CHECK(m.warnings.empty());
}

TEST_CASE("orders two and three reduce to a forcing solve") {
    const BuildResult& r = test::small_build();
    const ManifoldModel& m = r.model;
    for (std::size_t p = 0; p < m.series.size(); ++p)
        for (int n : {2, 3}) CHECK(rel(r.handles[p]->solve(forcing_rhs(m, n)), m.coeff(p, n)) <= 1e-12);
}

TEST_CASE("order-four right-hand side") {
    const auto g = make_grid(-6.0, 6.0, 25, -8.0, 8.0, 33);
    std::mt19937_64 rng(2);
    std::vector<TripleY> lower(4, TripleY::zeros(g));
    lower[2].theta = test::smooth_random(g, rng);
    lower[2].psi = test::smooth_random(g, rng);
    lower[2].lambda.values() = ArrayX::LinSpaced(25, 0.0, 1.0);
    lower[3].theta = test::smooth_random(g, rng);
    const GridFn2D theta0 = kink_fields(0.03, g).theta;
    const GridFn2D f4 = test::smooth_random(g, rng);

    const PairZ plain = order_rhs(4, lower, [](int) -> const TripleY* { return nullptr; }, theta0, f4);
    CHECK(plain.v.max_abs() == 0.0);
    // [sin(theta0 + theta_hat)]_4 minus the cos(theta0) theta_4 part is -sin(theta0) theta_2^2 / 2
    Array2D expect = f4.values() + 0.5 * theta0.values().sin() * lower[2].theta.values().square();
    const Eigen::Index R = expect.rows() - 1, C = expect.cols() - 1;
    CHECK((plain.w.values().block(1, 1, R - 1, C - 1) - expect.block(1, 1, R - 1, C - 1)).abs().maxCoeff() <= 1e-14);

    // the same term from a finite difference of sin in eps
    auto sin_at = [&](double e) {
        return (theta0.values() + e * e * lower[2].theta.values() + e * e * e * lower[3].theta.values()).sin();
    };
    const double h = 0.05;
    const Array2D d4 = (sin_at(2 * h) - 4 * sin_at(h) + 6 * sin_at(0.0) - 4 * sin_at(-h) + sin_at(-2 * h)) / std::pow(h, 4) / 24.0;
    CHECK((d4.block(1, 1, R - 1, C - 1) + plain.w.values().block(1, 1, R - 1, C - 1) -
           f4.values().block(1, 1, R - 1, C - 1))
              .abs()
              .maxCoeff() <= 2e-2);

    TripleY du = TripleY::zeros(g);
    du.theta = test::smooth_random(g, rng);
    du.psi = test::smooth_random(g, rng);
    const PairZ with = order_rhs(4, lower, [&](int k) -> const TripleY* { return k == 2 ? &du : nullptr; }, theta0, f4);
    const Array2D ev = -(du.theta.values().colwise() * lower[2].lambda.values());
    CHECK((with.v.values().block(1, 1, R - 1, C - 1) - ev.block(1, 1, R - 1, C - 1)).abs().maxCoeff() <= 1e-14);
    CHECK_THROWS_AS(order_rhs(1, lower, [](int) -> const TripleY* { return nullptr; }, theta0, f4), DomainError);
}

TEST_CASE("zero forcing gives the classical manifold") {
    const BuildResult& base = test::small_build();
    BuildConfig c = test::small_config(4, "zero");
    const BuildResult z = build_manifold(c, base.handles);
    double sup = 0.0;
    for (const auto& s : z.model.series)
        for (const auto& y : s.coeffs()) sup = std::max({sup, y.theta.max_abs(), y.psi.max_abs(), y.lambda.max_abs()});
    CHECK(sup <= 1e-12);
    CHECK_FALSE(z.model.eps_diagnosed);
    const BoundsReport b = bounds_report(z.model, 3, 1.0);
    CHECK(b.fitted_c == 1.0);
    for (const auto& e : b.entries) CHECK(e.norm == 0.0);
}

TEST_CASE("handle reuse is checked") {
    const BuildResult& base = test::small_build();
    BuildConfig c = test::small_config();
    c.u_nodes = 7;
    CHECK_THROWS_AS(build_manifold(c, base.handles), DomainError);
    BuildConfig d = test::small_config();
    d.grid.x_n = 101;
    CHECK_THROWS_AS(build_manifold(d, base.handles), DomainError);
}

TEST_CASE("truncation and validated eps") {
    const BuildResult& r = test::small_build();
    const BuildConfig c = test::small_config();
    const ManifoldModel t = truncate(r.model, 2, c);
    CHECK(t.order == 2);
    CHECK(t.series[0].order() == 2);
    CHECK(rel(t.coeff(1, 2), r.model.coeff(1, 2)) == 0.0);
    CHECK_THROWS_AS(truncate(r.model, 5, c), DomainError);

    CHECK(r.model.eps_diagnosed);
    CHECK(r.model.validated_eps_max > 0.0);
    CHECK(r.model.validated_eps_max <= c.eps_cap);
    for (const auto& s : r.model.series) CHECK(tail_ratio(s, r.model.validated_eps_max) <= c.tail_tolerance);

    // tail ratio shrinks with the order at eps = 0.05
    const std::size_t mid = r.model.series.size() / 2;
    double prev = 1e300;
    for (int M = 2; M <= 4; ++M) {
        const double tr = tail_ratio(truncate(r.model, M, c).series[mid], 0.05);
        CHECK(tr < prev);
        prev = tr;
    }
}

TEST_CASE("literal two-index iteration agrees with the diagonal recursion") {
    const BuildResult& r = test::small_build();
    const LiteralCheckReport rep = literal_iteration_check(4, r.model, r.handles, DerivativeMode::chebyshev);
    CHECK(rep.passed);
    CHECK(rep.max_rel_diff <= 1e-9);
    for (const auto& e : rep.entries) {
        CHECK(e.compared == (e.k <= e.iteration - 1));
        if (e.iteration == 2 && e.k <= 1) CHECK(e.norm_literal == 0.0);
        if (e.iteration == 3 && e.k == 2) CHECK(e.rel_diff <= 1e-10);
    }
    const LiteralCheckReport orc = literal_iteration_check(4, r.model, r.handles, DerivativeMode::oracle);
    CHECK(orc.passed);
    CHECK(orc.derivative_cross_check < 1e-2);
}

TEST_CASE("spectral u-derivative against a perturbed-velocity rebuild") {
    auto gap = [](std::size_t nodes) {
        BuildConfig c = test::small_config(2);
        c.u_nodes = nodes;
        const BuildResult r = build_manifold(c);
        const ManifoldModel& m = r.model;
        const std::size_t mid = m.stencil.size() / 2;
        REQUIRE(m.stencil[mid] == 0.0);
        std::vector<std::vector<TripleY>> coeffs;
        for (const auto& s : m.series) coeffs.push_back(s.coeffs());
        const TripleY spectral = u_derivative(m.stencil, coeffs, 2)[mid];

        const double du = 1e-4;
        const PairZ rhs = forcing_rhs(m, 2);
        const TripleY a = OperatorHandle::assemble(du, m.grid)->solve(rhs);
        const TripleY b = OperatorHandle::assemble(-du, m.grid)->solve(rhs);
        const TripleY fd = (1.0 / (2 * du)) * (a - b);
        const TripleY oracle = oracle_u_derivative(*r.handles[mid], m.coeff(mid, 2));
        CHECK(rel(oracle, fd) <= 1e-6);
        return rel(spectral, fd);
    };
    const double g5 = gap(5), g9 = gap(9);
    MESSAGE("spectral derivative gap: 5 nodes " << g5 << ", 9 nodes " << g9);
    CHECK(g9 < 0.1 * g5);
}

TEST_CASE("corrections decay toward the xi boundary") {
    const ManifoldModel& m = test::small_build().model;
    const double lim = 0.9 * m.grid->xi().max();
    for (std::size_t p = 0; p < m.series.size(); ++p)
        for (int n = 2; n <= m.order; ++n) {
            const TripleY& c = m.coeff(p, n);
            GridFn2D outer = c.theta;
            for (std::size_t i = 0; i < m.grid->xi().size(); ++i)
                if (std::abs(m.grid->xi()[i]) <= lim) outer.values().row(static_cast<Eigen::Index>(i)).setZero();
            CHECK(weighted_norm(outer, 0, m.alpha) < 0.05 * weighted_norm(c.theta, 0, m.alpha));
        }
}

TEST_CASE("factorial bounds") {
    const ManifoldModel& m = test::small_build().model;
    const BoundsReport b = bounds_report(m, 3, 1.0);
    CHECK(b.fitted_c >= 1.0);
    CHECK(b.entries.size() == 3 * 4);
    for (const auto& e : b.entries) {
        CHECK(e.ratio <= 1.0 + 1e-12);
        if (e.k == 0) CHECK(e.c_needed <= b.fitted_c * (1 + 1e-12));
    }
    CHECK(b.max_ratio == doctest::Approx(1.0));
}

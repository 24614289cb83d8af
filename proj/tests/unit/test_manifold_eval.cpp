#include "support.hpp"
#include "vsm/errors.hpp"
#include "vsm/manifold_eval.hpp"

#include <doctest.h>

#include <cmath>

using namespace vsm;

namespace {

const ManifoldModel& zero_model() {
    static const ManifoldModel m = build_manifold(test::small_config(4, "zero"), test::small_build().handles).model;
    return m;
}

}  // namespace

TEST_CASE("eps = 0 gives the soliton") {
    const ManifoldModel& m = test::small_build().model;
    const Grid1D& x = m.grid->x();
    for (double xi : {0.0, 0.37, -2.1})
        for (double u : {0.0, 0.031, -0.1}) {
            const SolitonSlice s = eval_state(m, xi, u, 0.0);
            const SolitonSlice k = soliton_state(xi, u, x);
            CHECK((s.theta - k.theta).abs().maxCoeff() == 0.0);
            CHECK((s.psi - k.psi).abs().maxCoeff() == 0.0);
            CHECK(eval_lambda(m, xi, u, 0.0) == 0.0);
        }
}

TEST_CASE("zero forcing model is the soliton at every eps") {
    const ManifoldModel& z = zero_model();
    for (double eps : {0.02, 0.1}) {
        const SolitonSlice s = eval_state(z, 0.4, 0.05, eps);
        const SolitonSlice k = soliton_state(0.4, 0.05, z.grid->x());
        CHECK((s.theta - k.theta).abs().maxCoeff() <= 1e-12);
        CHECK(eval_lambda(z, 0.4, 0.05, eps) == 0.0);
        CHECK(rescaled_lambda(z, eps).max_abs() == 0.0);
    }
}

TEST_CASE("node evaluation is the series sum") {
    const ManifoldModel& m = test::small_build().model;
    const std::size_t p = 1, i = 30;
    const double xi = m.grid->xi()[i], u = m.stencil[p], eps = 0.07;
    const SolitonSlice c = eval_correction(m, xi, u, eps);
    ArrayX expect = ArrayX::Zero(static_cast<Eigen::Index>(m.grid->x().size()));
    double lam = 0.0;
    for (int n = 4; n >= 0; --n) {
        expect = expect * eps + m.coeff(p, n).theta.values().row(static_cast<Eigen::Index>(i)).transpose();
        lam = lam * eps + m.coeff(p, n).lambda[i];
    }
    CHECK((c.theta - expect).abs().maxCoeff() <= 1e-15);
    CHECK(eval_lambda(m, xi, u, eps) == doctest::Approx(lam).epsilon(1e-14));
}

TEST_CASE("order-two model scales with eps squared") {
    const BuildConfig cfg = test::small_config();
    const ManifoldModel m2 = truncate(test::small_build().model, 2, cfg);
    for (double xi : {0.0, 0.61})
        for (double u : {0.0, 0.043}) {
            const double a = eval_lambda(m2, xi, u, 0.03), b = eval_lambda(m2, xi, u, 0.06);
            CHECK(a != 0.0);
            CHECK(b == doctest::Approx(4.0 * a).epsilon(1e-13));
            const SolitonSlice c1 = eval_correction(m2, xi, u, 0.03), c2 = eval_correction(m2, xi, u, 0.06);
            CHECK(test::rel_diff(c2.theta, 4.0 * c1.theta) <= 1e-13);
        }
    const GridFn1D r1 = rescaled_lambda(m2, 0.02), r2 = rescaled_lambda(m2, 0.04);
    CHECK(r1.max_abs() > 0.0);
    CHECK(test::rel_diff(r1.values(), r2.values()) <= 1e-13);
    CHECK(r1.grid().min() >= -m2.Xi - 1e-12);
    CHECK(r1.grid().max() <= m2.Xi + 1e-12);
}

TEST_CASE("range checks") {
    const ManifoldModel& m = test::small_build().model;
    CHECK_THROWS_AS(eval_state(m, 0.0, 0.2, 0.01), DomainError);
    CHECK_THROWS_AS(eval_state(m, 9.0, 0.0, 0.01), DomainError);
    CHECK_THROWS_AS(eval_state(m, 0.0, 0.0, m.validated_eps_max * 1.5), DomainError);
    CHECK_NOTHROW(eval_state(m, 0.0, m.stencil.u_max(), 0.01));
    CHECK_THROWS_AS(residual(m, m.stencil.u_max(), 0.01), DomainError);
}

TEST_CASE("evaluation is Lipschitz on the interior") {
    const ManifoldModel& m = test::small_build().model;
    const double eps = 0.05;
    for (double xi : {-1.3, 0.2, 2.2})
        for (double u : {-0.06, 0.013, 0.07}) {
            const SolitonSlice a = eval_state(m, xi, u, eps);
            for (double d : {1e-3, 1e-4}) {
                const SolitonSlice bx = eval_state(m, xi + d, u, eps);
                const SolitonSlice bu = eval_state(m, xi, u + d, eps);
                CHECK((bx.theta - a.theta).abs().maxCoeff() <= 5.0 * d);
                CHECK((bu.theta - a.theta).abs().maxCoeff() <= 5.0 * d);
                CHECK(std::abs(eval_lambda(m, xi + d, u, eps) - eval_lambda(m, xi, u, eps)) <= 5.0 * d);
            }
        }
}

TEST_CASE("residual floor and order") {
    const ManifoldModel& m = test::small_build().model;
    const BuildConfig cfg = test::small_config();
    const ResidualResult floor = residual(m, 0.0, 0.0);
    CHECK(floor.znorm > 0.0);

    // zero forcing: the residual is the eps = 0 floor at every eps
    const ManifoldModel& z = zero_model();
    const ResidualResult zf = residual(z, 0.0, 0.0);
    CHECK(residual(z, 0.0, 0.07).znorm == doctest::Approx(zf.znorm).epsilon(1e-14));
    CHECK(floor_subtracted_residual(z, 0.0, 0.07, zf) <= 1e-15);

    const ManifoldModel m3 = truncate(m, 3, cfg);
    const double r4 = floor_subtracted_residual(m3, 0.0, 0.04, floor);
    const double r8 = floor_subtracted_residual(m3, 0.0, 0.08, floor);
    CHECK(r8 / r4 >= 8.0);
    CHECK(r8 / r4 <= 32.0);

    double prev = 1e300;
    for (int M = 2; M <= 4; ++M) {
        const double r = floor_subtracted_residual(truncate(m, M, cfg), 0.0, 0.05, floor);
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("eps = 0 residual converges at second order") {
    auto floor_at = [](std::size_t refine) {
        BuildConfig c = test::small_config(0);
        c.grid.xi_n = 64 * refine + 1;
        c.grid.x_n = 96 * refine + 1;
        const ManifoldModel m = build_manifold(c).model;
        return residual(m, 0.0, 0.0).znorm;
    };
    const double slope = std::log2(floor_at(1) / floor_at(2));
    CHECK(slope == doctest::Approx(2.0).epsilon(0.15));
}

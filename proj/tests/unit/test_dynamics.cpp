#include "support.hpp"
#include "vsm/dynamics.hpp"
#include "vsm/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace vsm;

namespace {

const ManifoldModel& zero_model() {
    static const ManifoldModel m = build_manifold(test::small_config(4, "zero"), test::small_build().handles).model;
    return m;
}

FieldState kink_state(double xi, double u, const Grid1D& x) {
    const SolitonSlice s = soliton_state(xi, u, x);
    return FieldState{s.theta, s.psi, 0.0};
}

}  // namespace

TEST_CASE("RK4 is exact on polynomial dynamics") {
    const Trajectory free = integrate_modulation([](double, double) { return 0.0; }, 0.5, 0.02, 20.0, 0.01, 3.0, 0.1);
    CHECK(free.exit_reason == ExitReason::completed);
    for (const auto& s : free.states) {
        CHECK(std::abs(s.xi_bar - (0.5 + 0.02 * s.t)) <= 1e-13);
        CHECK(s.u_bar == 0.02);
    }
    const double a = 1e-3;
    const Trajectory acc = integrate_modulation([a](double, double) { return a; }, -1.0, -0.01, 20.0, 0.01, 3.0, 0.1);
    CHECK(acc.exit_reason == ExitReason::completed);
    for (const auto& s : acc.states) {
        CHECK(std::abs(s.u_bar - (-0.01 + a * s.t)) <= 1e-13);
        CHECK(std::abs(s.xi_bar - (-1.0 - 0.01 * s.t + 0.5 * a * s.t * s.t)) <= 1e-13);
    }
    for (std::size_t k = 1; k < acc.states.size(); ++k) CHECK(acc.states[k].t > acc.states[k - 1].t);
    CHECK(acc.states.back().t == 20.0);
}

TEST_CASE("exit reasons") {
    const Trajectory out = integrate_modulation([](double, double) { return 0.0; }, 2.5, 0.09, 20.0, 0.01, 3.0, 0.1);
    CHECK(out.exit_reason == ExitReason::left_plateau);
    const auto& st = out.states;
    CHECK(std::abs(st.back().xi_bar) > 3.0);
    CHECK(std::abs(st[st.size() - 2].xi_bar) <= 3.0);

    const Trajectory fast = integrate_modulation([](double, double) { return 0.05; }, 0.0, 0.0, 20.0, 0.01, 3.0, 0.1);
    CHECK(fast.exit_reason == ExitReason::velocity_bound);
    CHECK(std::abs(fast.states.back().u_bar) >= 0.1);

    const Trajectory thrown = integrate_modulation(
        [](double xi, double) -> double {
            if (xi > 0.1) throw DomainError("outside");
            return 0.0;
        },
        0.0, 0.05, 20.0, 0.01, 3.0, 0.1);
    CHECK(thrown.exit_reason == ExitReason::velocity_bound);
    CHECK_FALSE(thrown.message.empty());

    CHECK_THROWS_AS(integrate_modulation([](double, double) { return 0.0; }, 3.5, 0.0, 1.0, 0.01, 3.0, 0.1), DomainError);
    CHECK(to_string(ExitReason::left_plateau) == "left_plateau");
}

TEST_CASE("model-driven modulation") {
    const ManifoldModel& z = zero_model();
    const Trajectory t = integrate_modulation(z, 0.2, 0.03, 0.05, 20.0);
    CHECK(t.exit_reason == ExitReason::completed);
    CHECK(t.states.size() == 2001);
    for (const auto& s : t.states) CHECK(std::abs(s.xi_bar - (0.2 + 0.03 * s.t)) <= 1e-13);

    // step halving with forcing, started at u_s = c eps
    const ManifoldModel& m = test::small_build().model;
    const double eps = 0.05, u_s = 0.5 * eps;
    const Trajectory a = integrate_modulation(m, 0.0, u_s, eps, 1.0 / (0.5 * eps), 0.01);
    const Trajectory b = integrate_modulation(m, 0.0, u_s, eps, 1.0 / (0.5 * eps), 0.005);
    CHECK(a.exit_reason == b.exit_reason);
    const std::size_t n = std::min(a.states.size(), (b.states.size() + 1) / 2);
    double diff = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        diff = std::max(diff, std::abs(a.states[k].xi_bar - b.states[2 * k].xi_bar));
        diff = std::max(diff, std::abs(a.states[k].u_bar - b.states[2 * k].u_bar));
    }
    CHECK(diff <= 1e-8);
}

TEST_CASE("Verlet basics") {
    const Grid1D x = Grid1D::uniform(-20.0, 20.0, 321);
    const ArrayX none = ArrayX::Zero(321);
    FieldState z{ArrayX::Zero(321), ArrayX::Zero(321), 0.0};
    verlet_steps(z, none, x, 0.005, 400);
    CHECK(z.theta.abs().maxCoeff() == 0.0);
    CHECK(z.psi.abs().maxCoeff() == 0.0);
    CHECK(z.t == doctest::Approx(2.0));

    // forward, flip the velocity, forward again, flip back
    FieldState s = kink_state(-1.0, 0.3, x);
    const FieldState start = s;
    verlet_steps(s, none, x, 0.005, 2000);
    s.psi = -s.psi;
    verlet_steps(s, none, x, 0.005, 2000);
    s.psi = -s.psi;
    CHECK((s.theta - start.theta).abs().maxCoeff() <= 1e-10);
    CHECK((s.psi - start.psi).abs().maxCoeff() <= 1e-10);

    CHECK_THROWS_AS(verlet_steps(s, none, x, 0.2, 1), DomainError);
    FieldState wild{ArrayX::Constant(321, 50.0), ArrayX::Zero(321), 0.0};
    CHECK_THROWS_AS(verlet_steps(wild, ArrayX::Constant(321, 1e6), x, 0.005, 100, 100.0), NumericalError);
}

TEST_CASE("energy is conserved without forcing") {
    const Grid1D x = Grid1D::uniform(-20.0, 20.0, 321);
    const ArrayX none = ArrayX::Zero(321);
    PdeOptions o;
    o.sample_every = 400;
    const auto states = solve_pde(kink_state(0.0, 0.1, x), none, x, 20.0, o);
    CHECK(states.front().t == 0.0);
    CHECK(states.back().t == doctest::Approx(20.0));
    const double e0 = energy(states.front(), x);
    CHECK(e0 == doctest::Approx(8.0 * lorentz_gamma(0.1)).epsilon(1e-3));
    double drift = 0.0;
    for (const auto& s : states) drift = std::max(drift, std::abs(energy(s, x) - e0) / e0);
    CHECK(drift <= 1e-6);
}

TEST_CASE("travelling kink converges at second order") {
    auto err = [](std::size_t refine) {
        const Grid1D x = Grid1D::uniform(-20.0, 20.0, 160 * refine + 1);
        const double u = 0.1, T = 10.0;
        FieldState s = kink_state(-0.5, u, x);
        verlet_steps(s, ArrayX::Zero(s.theta.size()), x, 0.02 / static_cast<double>(refine),
                     static_cast<std::size_t>(500 * refine));
        const SolitonSlice exact = soliton_state(-0.5 + u * T, u, x);
        return deviation_norm(s.theta - exact.theta, s.psi - exact.psi, x);
    };
    const double slope = std::log2(err(1) / err(2));
    CHECK(slope == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("grid kink offset is second order") {
    auto size = [](std::size_t n) {
        const Grid1D x = Grid1D::uniform(-20.0, 20.0, n);
        return grid_kink_offset(x, 0.3).abs().maxCoeff();
    };
    const double a = size(161), b = size(321);
    CHECK(a > 0.0);
    CHECK(a / b == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("invariance run on the classical manifold") {
    const ManifoldModel& z = zero_model();
    InvarianceOptions o;
    o.T = 5.0;
    const InvarianceRun r = verify_invariance(z, 0.0, 0.05, 0.05, o);
    CHECK(r.exit_reason == ExitReason::completed);
    CHECK(r.horizon == 5.0);
    CHECK(r.samples.front().d <= 1e-14);
    CHECK(r.samples.back().xi_bar == doctest::Approx(0.25).epsilon(1e-12));
    const InvarianceRun base = verify_invariance(z, 0.0, 0.05, 0.0, o);
    CHECK(floor_subtracted_sup(r, base, z.grid->x()) <= 1e-13);

    // the deviation is the discretization error of the travelling kink
    auto sup_d = [&](std::size_t refine) {
        BuildConfig c = test::small_config(0, "zero");
        c.grid.x_n = 96 * refine + 1;
        const ManifoldModel m = build_manifold(c).model;
        InvarianceOptions oo = o;
        oo.dt = 0.02 / static_cast<double>(refine);
        oo.sample_every = 10 * refine;
        return verify_invariance(m, 0.0, 0.05, 0.0, oo).sup_d;
    };
    CHECK(std::log2(sup_d(1) / sup_d(2)) == doctest::Approx(2.0).epsilon(0.15));
    CHECK_THROWS_AS(verify_invariance(z, 3.5, 0.0, 0.05, o), DomainError);
}

TEST_CASE("rescaled dynamics") {
    const ManifoldModel& z = zero_model();
    RescaledOptions o;
    o.uhat_s = 0.5;
    const RescaledReport zr = rescaled_dynamics_check(z, {0.08, 0.04, 0.02}, o);
    for (double p : zr.pairwise) CHECK(p <= 1e-13);
    CHECK_FALSE(zr.nontrivial);
    for (const auto& t : zr.runs)
        for (std::size_t k = 0; k < t.s.size(); ++k) CHECK(std::abs(t.xi_hat[k] - 0.5 * t.s[k]) <= 1e-12);

    const ManifoldModel m2 = truncate(test::small_build().model, 2, test::small_config());
    const RescaledReport r2 = rescaled_dynamics_check(m2, {0.08, 0.04, 0.02});
    // lambda_2 is even in u, so the eps u_hat argument only enters at second order
    REQUIRE(r2.pairwise.size() == 2);
    CHECK(r2.pairwise[1] < r2.pairwise[0] / 3.0);
    CHECK(r2.strictly_decreasing);
    CHECK(r2.nontrivial);
    CHECK(r2.max_integrator_error <= o.tolerance);
    CHECK_THROWS_AS(rescaled_dynamics_check(m2, {0.02, 0.04}), DomainError);
    CHECK_THROWS_AS(rescaled_dynamics_check(m2, {}), DomainError);
}

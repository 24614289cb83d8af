#include "support.hpp"
#include "vsm/errors.hpp"
#include "vsm/linearized_solver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace vsm;

namespace {

GridPtr solver_grid() {
    static const GridPtr g = make_grid(-6.0, 6.0, 25, -8.0, 8.0, 33);
    return g;
}

PairZ random_rhs(const GridPtr& g, std::mt19937_64& rng) {
    return PairZ{test::smooth_random(g, rng), test::smooth_random(g, rng)};
}

double rel_z(const PairZ& a, const PairZ& b) {
    const double scale = std::max(a.v.max_abs(), a.w.max_abs());
    return std::max((a.v - b.v).max_abs(), (a.w - b.w).max_abs()) / scale;
}

void zero_boundary(GridFn2D& f) {
    Array2D& v = f.values();
    v.row(0).setZero();
    v.row(v.rows() - 1).setZero();
    v.col(0).setZero();
    v.col(v.cols() - 1).setZero();
}

}  // namespace

TEST_CASE("system shape and trivial solves") {
    const auto h = OperatorHandle::assemble(0.05, solver_grid());
    const auto& g = *solver_grid();
    CHECK(h->rows() == 2 * 25 * 33 + 25);
    CHECK(static_cast<std::size_t>(h->matrix().rows()) == h->rows());
    CHECK(static_cast<std::size_t>(h->matrix().cols()) == h->rows());
    CHECK(h->factored());
    CHECK(h->condition() > 1.0);

    const TripleY zero = TripleY::zeros(solver_grid());
    const PairZ a = h->apply(zero);
    CHECK(a.v.max_abs() == 0.0);
    CHECK(a.w.max_abs() == 0.0);
    const TripleY y = h->solve(PairZ::zeros(solver_grid()));
    CHECK(y.theta.max_abs() == 0.0);
    CHECK(y.psi.max_abs() == 0.0);
    CHECK(y.lambda.max_abs() == 0.0);
    CHECK(g.size() == 25 * 33);
    CHECK_THROWS_AS(OperatorHandle::assemble(1.0, solver_grid()), DomainError);
}

TEST_CASE("roundtrip, constraints and manufactured solutions") {
    std::mt19937_64 rng(42);
    for (double u : {0.0, 0.07, -0.1}) {
        const auto h = OperatorHandle::assemble(u, solver_grid());
        for (int k = 0; k < 4; ++k) {
            const PairZ rhs = random_rhs(solver_grid(), rng);
            const TripleY y = h->solve(rhs);
            CHECK(rel_z(rhs, h->apply(y)) <= 1e-8);
            CHECK(h->membership_defect(y) <= 1e-10);
            CHECK(h->in_y(y));
            CHECK(OperatorHandle::last_residual() <= 1e-10);

            const TripleY back = h->solve(h->apply(y));
            CHECK(test::rel_diff(back.theta.values().reshaped(), y.theta.values().reshaped()) <= 1e-8);
            CHECK(test::rel_diff(back.psi.values().reshaped(), y.psi.values().reshaped()) <= 1e-8);
            CHECK(test::rel_diff(back.lambda.values(), y.lambda.values()) <= 1e-8);
        }
    }
}

TEST_CASE("matrix-free apply matches the assembled matrix") {
    std::mt19937_64 rng(9);
    const auto free = OperatorHandle::assemble(0.08, solver_grid(), {}, Assembly::matrix_free);
    const auto full = OperatorHandle::assemble(0.08, solver_grid(), {}, Assembly::assembled);
    CHECK_FALSE(full->factored());
    CHECK_THROWS_AS(free->matrix(), DomainError);
    TripleY y{test::smooth_random(solver_grid(), rng), test::smooth_random(solver_grid(), rng),
              GridFn1D(xi_axis(solver_grid()))};
    y.lambda.values() = ArrayX::LinSpaced(25, -1.0, 1.0).sin();
    const PairZ a = free->apply(y);
    const Eigen::VectorXd m = full->matrix() * full->pack(y);
    const Eigen::VectorXd b = full->pack_rhs(a, nullptr);
    const auto n = static_cast<Eigen::Index>(2 * solver_grid()->size());
    CHECK((m.head(n) - b.head(n)).cwiseAbs().maxCoeff() <= 1e-12 * b.head(n).cwiseAbs().maxCoeff());
    const ArrayX c = free->constraint_values(y);
    for (Eigen::Index i = 1; i + 1 < 25; ++i) CHECK(m[n + i] == doctest::Approx(c[i]).epsilon(1e-12));
}

TEST_CASE("u = 0 first block and velocity sign symmetry") {
    const auto h0 = OperatorHandle::assemble(0.0, solver_grid(), {}, Assembly::matrix_free);
    std::mt19937_64 rng(1);
    TripleY y = TripleY::zeros(solver_grid());
    y.psi = test::smooth_random(solver_grid(), rng);
    y.theta = test::smooth_random(solver_grid(), rng);
    y.lambda.values().setConstant(0.3);
    PairZ a = h0->apply(y);
    // v = -psi + lambda d_u theta_0 at u = 0
    const KinkFields kf = kink_fields(0.0, solver_grid());
    GridFn2D expect = (-1.0) * y.psi + 0.3 * kf.t2_theta;
    zero_boundary(a.v);
    zero_boundary(expect);
    CHECK((a.v - expect).max_abs() <= 1e-13);

    const auto p = OperatorHandle::assemble(0.06, solver_grid(), {}, Assembly::assembled);
    const auto m = OperatorHandle::assemble(-0.06, solver_grid(), {}, Assembly::assembled);
    const int nx = 33, nn = 25 * 33;
    const int i = 12, j = 20;
    const int row_w = i * nx + j, row_v = nn + i * nx + j;
    const int th = i * nx + j, psi_next = nn + (i + 1) * nx + j, th_next = (i + 1) * nx + j, lam = 2 * nn + i;
    const auto& A = p->matrix();
    const auto& B = m->matrix();
    CHECK(A.coeff(row_w, th) == doctest::Approx(B.coeff(row_w, th)).epsilon(1e-14));
    CHECK(A.coeff(row_w, psi_next) != 0.0);
    CHECK(A.coeff(row_w, psi_next) == doctest::Approx(-B.coeff(row_w, psi_next)).epsilon(1e-14));
    CHECK(A.coeff(row_v, th_next) == doctest::Approx(-B.coeff(row_v, th_next)).epsilon(1e-14));
    CHECK(A.coeff(row_w, lam) == doctest::Approx(B.coeff(row_w, lam)).epsilon(1e-14));
    CHECK(A.coeff(row_v, lam) == doctest::Approx(-B.coeff(row_v, lam)).epsilon(1e-14));
}

TEST_CASE("zero mode t1 is an approximate kernel direction") {
    auto defect = [](std::size_t refine) {
        const auto g = make_grid(-6.0, 6.0, 24 * refine + 1, -8.0, 8.0, 32 * refine + 1);
        const auto h = OperatorHandle::assemble(0.07, g, {}, Assembly::matrix_free);
        const KinkFields kf = kink_fields(0.07, g);
        TripleY y = TripleY::zeros(g);
        y.theta = kf.t1_theta;
        y.psi = kf.t1_psi;
        PairZ a = h->apply(y);
        zero_boundary(a.v);
        zero_boundary(a.w);
        return z_norm(a, 1);
    };
    const double d1 = defect(1), d2 = defect(2);
    CHECK(std::log2(d1 / d2) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("apply_du matches a difference in u") {
    std::mt19937_64 rng(4);
    TripleY y{test::smooth_random(solver_grid(), rng), test::smooth_random(solver_grid(), rng),
              GridFn1D(xi_axis(solver_grid()))};
    y.lambda.values().setConstant(0.2);
    const double u = 0.04, e = 1e-5;
    const auto c = OperatorHandle::assemble(u, solver_grid(), {}, Assembly::matrix_free);
    const auto a = OperatorHandle::assemble(u + e, solver_grid(), {}, Assembly::matrix_free);
    const auto b = OperatorHandle::assemble(u - e, solver_grid(), {}, Assembly::matrix_free);
    const PairZ fd = (1.0 / (2 * e)) * (a->apply(y) - b->apply(y));
    const PairZ du = c->apply_du(y);
    CHECK((fd.v - du.v).max_abs() <= 1e-6 * std::max(1.0, du.v.max_abs()));
    CHECK((fd.w - du.w).max_abs() <= 1e-6 * std::max(1.0, du.w.max_abs()));
    const ArrayX cfd = (a->constraint_values(y) - b->constraint_values(y)) / (2 * e);
    CHECK((cfd - c->du_constraint_values(y)).abs().maxCoeff() <= 1e-6);
}

TEST_CASE("solutions depend continuously on u") {
    std::mt19937_64 rng(8);
    const PairZ rhs = random_rhs(solver_grid(), rng);
    const TripleY y0 = OperatorHandle::assemble(0.05, solver_grid())->solve(rhs);
    const TripleY y1 = OperatorHandle::assemble(0.051, solver_grid())->solve(rhs);
    const TripleY y2 = OperatorHandle::assemble(0.0505, solver_grid())->solve(rhs);
    const double d1 = y_norm(y1 - y0, 1), d2 = y_norm(y2 - y0, 1);
    CHECK(d1 / d2 == doctest::Approx(2.0).epsilon(0.05));
    CHECK(d1 < 1e-2 * y_norm(y0, 1));
}

TEST_CASE("condition bound is enforced") {
    OperatorOptions o;
    o.condition_bound = 10.0;
    CHECK_THROWS_AS(OperatorHandle::assemble(0.0, solver_grid(), o), IllConditionedError);
}

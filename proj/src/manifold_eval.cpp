#include "vsm/manifold_eval.hpp"

#include "vsm/errors.hpp"

#include <cmath>
#include <sstream>

namespace vsm {

namespace {

constexpr double kRangeSlack = 1e-12;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Horner in eps of the cubic xi-slices of one node's coefficients.
template <class Slice>
auto horner(const ManifoldModel& model, std::size_t p, double eps, Slice slice) {
    auto acc = slice(model.coeff(p, model.order));
    for (int n = model.order - 1; n >= 0; --n) acc = acc * eps + slice(model.coeff(p, n));
    return acc;
}

}  // namespace

void check_eval_range(const ManifoldModel& model, double xi_bar, double u, double eps) {
    if (!std::isfinite(xi_bar) || !std::isfinite(u) || !std::isfinite(eps))
        throw DomainError("evaluation parameters must be finite");
    if (std::abs(u) > model.stencil.u_max() * (1.0 + kRangeSlack))
        throw DomainError("u=" + fmt(u) + " outside the stencil range |u| <= " + fmt(model.stencil.u_max()));
    if (!model.grid->xi().contains(xi_bar)) throw DomainError("xi=" + fmt(xi_bar) + " outside the xi-grid");
    if (std::abs(eps) > model.validated_eps_max * (1.0 + kRangeSlack))
        throw DomainError("eps=" + fmt(eps) + " above validated_eps_max=" + fmt(model.validated_eps_max));
}

SolitonSlice eval_correction(const ManifoldModel& model, double xi_bar, double u, double eps) {
    check_eval_range(model, xi_bar, u, eps);
    const Eigen::VectorXd l = model.stencil.basis(u);
    const auto nx = static_cast<Eigen::Index>(model.grid->x().size());
    SolitonSlice out{ArrayX::Zero(nx), ArrayX::Zero(nx)};
    for (std::size_t p = 0; p < model.stencil.size(); ++p) {
        const double w = l[static_cast<Eigen::Index>(p)];
        if (w == 0.0) continue;
        out.theta += w * horner(model, p, eps, [&](const TripleY& c) { return ArrayX(slice_at_xi(c.theta, xi_bar)); });
        out.psi += w * horner(model, p, eps, [&](const TripleY& c) { return ArrayX(slice_at_xi(c.psi, xi_bar)); });
    }
    return out;
}

SolitonSlice eval_state(const ManifoldModel& model, double xi_bar, double u, double eps) {
    SolitonSlice s = eval_correction(model, xi_bar, u, eps);
    const SolitonSlice bg = soliton_state(xi_bar, u, model.grid->x());
    s.theta += bg.theta;
    s.psi += bg.psi;
    return s;
}

double eval_lambda(const ManifoldModel& model, double xi_bar, double u, double eps) {
    check_eval_range(model, xi_bar, u, eps);
    const Eigen::VectorXd l = model.stencil.basis(u);
    double out = 0.0;
    for (std::size_t p = 0; p < model.stencil.size(); ++p) {
        const double w = l[static_cast<Eigen::Index>(p)];
        if (w == 0.0) continue;
        out += w * horner(model, p, eps, [&](const TripleY& c) { return interpolate_cubic(c.lambda, xi_bar); });
    }
    return out;
}

double plateau_znorm(const ManifoldModel& model, const PairZ& z) {
    return z_norm(PairZ{restrict_xi(z.v, -model.Xi, model.Xi), restrict_xi(z.w, -model.Xi, model.Xi)}, model.alpha);
}

ResidualResult residual(const ManifoldModel& model, double u, double eps) {
    check_eval_range(model, 0.0, u, eps);
    if (std::abs(u) >= model.stencil.u_max()) throw DomainError("residual needs |u| < u_*");
    const GridPtr& grid = model.grid;
    const Eigen::VectorXd l = model.stencil.basis(u);
    const Eigen::VectorXd dl = model.stencil.basis_derivative(u);
    const KinkFields bg = kink_fields(u, grid);

    Array2D th = bg.theta.values(), ps = bg.psi.values();
    Array2D du_th = bg.t2_theta.values(), du_ps = bg.t2_psi.values();
    ArrayX lam = ArrayX::Zero(static_cast<Eigen::Index>(grid->xi().size()));
    for (std::size_t p = 0; p < model.stencil.size(); ++p) {
        const double w = l[static_cast<Eigen::Index>(p)];
        const double dw = dl[static_cast<Eigen::Index>(p)];
        if (w == 0.0 && dw == 0.0) continue;
        const TripleY h = evaluate(model.series[p], eps).value;
        th += w * h.theta.values();
        ps += w * h.psi.values();
        lam += w * h.lambda.values();
        du_th += dw * h.theta.values();
        du_ps += dw * h.psi.values();
    }
    const double hxi = grid->xi().spacing();
    const double hx = grid->x().spacing();
    const Array2D f = assemble_forcing(eps, model.forcing, model.chi, grid).values();
    Array2D v = u * centered_dxi(th, hxi) - ps + du_th.colwise() * lam;
    Array2D w = u * centered_dxi(ps, hxi) - centered_dxx(th, hx) + th.sin() - f + du_ps.colwise() * lam;
    for (Array2D* a : {&v, &w}) {
        a->row(0).setZero();
        a->row(a->rows() - 1).setZero();
        a->col(0).setZero();
        a->col(a->cols() - 1).setZero();
    }
    ResidualResult r{PairZ{GridFn2D(grid, std::move(v)), GridFn2D(grid, std::move(w))}, 0.0};
    r.znorm = plateau_znorm(model, r.fields);
    return r;
}

double floor_subtracted_residual(const ManifoldModel& model, double u, double eps, const ResidualResult& floor) {
    const ResidualResult r = residual(model, u, eps);
    return plateau_znorm(model, r.fields - floor.fields);
}

GridFn1D rescaled_lambda(const ManifoldModel& model, double eps) {
    if (eps == 0.0) throw DomainError("rescaled lambda needs eps != 0");
    if (model.order < 2) throw DomainError("rescaled lambda needs a model of order >= 2");
    const Grid1D& xi = model.grid->xi();
    std::size_t i0 = xi.size(), i1 = 0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        if (std::abs(xi[i]) <= model.Xi) {
            i0 = std::min(i0, i);
            i1 = i;
        }
    }
    if (i0 >= i1) throw DomainError("plateau holds fewer than two xi-nodes");
    auto sub = std::make_shared<const Grid1D>(Grid1D::uniform(xi[i0], xi[i1], i1 - i0 + 1));
    ArrayX v(static_cast<Eigen::Index>(i1 - i0 + 1));
    for (std::size_t i = i0; i <= i1; ++i)
        v[static_cast<Eigen::Index>(i - i0)] = eval_lambda(model, xi[i], 0.0, eps) / (eps * eps);
    return GridFn1D(std::move(sub), std::move(v));
}

}  // namespace vsm

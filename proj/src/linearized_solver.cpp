#include "vsm/linearized_solver.hpp"

#include "vsm/errors.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

namespace vsm {

namespace {

thread_local double g_last_residual = 0.0;

}  // namespace

OperatorHandle::OperatorHandle(double u, GridPtr grid, const OperatorOptions& opts)
    : u_(u), grid_(std::move(grid)), opts_(opts) {
    if (!(std::abs(u) < 1.0)) throw DomainError("operator velocity must satisfy |u| < 1");
    if (opts.alpha < 0) throw DomainError("alpha must be nonnegative");
    const auto nxi = static_cast<Eigen::Index>(grid_->xi().size());
    const auto nx = static_cast<Eigen::Index>(grid_->x().size());
    const ArrayX wx = grid_->x().trapezoid_weights();
    for (Array2D* a : {&t2_theta_, &t2_psi_, &potential_, &du2_theta_, &du2_psi_, &du_potential_, &n_theta_,
                       &n_psi_, &du_n_theta_, &du_n_psi_})
        a->resize(nxi, nx);
    for (Eigen::Index i = 0; i < nxi; ++i) {
        const double xi = grid_->xi().nodes()[i];
        for (Eigen::Index j = 0; j < nx; ++j) {
            const double x = grid_->x().nodes()[j];
            const KinkPoint p = kink_point(xi, u, x);
            t2_theta_(i, j) = p.du_theta;
            t2_psi_(i, j) = p.du_psi;
            potential_(i, j) = p.cos_theta;
            du2_theta_(i, j) = p.du2_theta;
            du2_psi_(i, j) = p.du2_psi;
            du_potential_(i, j) = p.du_cos_theta;
            double w = wx[j];
            if (opts.orthogonality_weighted && opts.alpha > 0) w *= std::pow(1.0 + xi * xi + x * x, opts.alpha);
            n_theta_(i, j) = w * p.normal_theta;
            n_psi_(i, j) = w * p.normal_psi;
            du_n_theta_(i, j) = w * p.du_normal_theta;
            du_n_psi_(i, j) = w * p.du_normal_psi;
        }
    }
}

std::shared_ptr<const OperatorHandle> OperatorHandle::assemble(double u, GridPtr grid, const OperatorOptions& opts,
                                                               Assembly level, SymbolicPtr reuse) {
    if (!grid) throw DomainError("operator needs a grid");
    using Clock = std::chrono::steady_clock;
    auto t0 = Clock::now();
    std::shared_ptr<OperatorHandle> h(new OperatorHandle(u, std::move(grid), opts));
    if (level != Assembly::matrix_free) h->build_matrix();
    h->assemble_seconds_ = std::chrono::duration<double>(Clock::now() - t0).count();
    if (level == Assembly::factored) {
        t0 = Clock::now();
        h->factorize(std::move(reuse));
        h->factor_seconds_ = std::chrono::duration<double>(Clock::now() - t0).count();
    }
    return h;
}

const SparseMatrix& OperatorHandle::matrix() const {
    if (!matrix_) throw DomainError("operator handle was assembled matrix-free");
    return *matrix_;
}

long OperatorHandle::factor_nonzeros() const noexcept { return lu_ ? lu_->factor_nonzeros() : 0; }

SymbolicPtr OperatorHandle::symbolic() const noexcept { return lu_ ? lu_->symbolic() : nullptr; }

void OperatorHandle::build_matrix() {
    const int nxi = static_cast<int>(grid_->xi().size());
    const int nx = static_cast<int>(grid_->x().size());
    const int nn = nxi * nx;
    const int n = 2 * nn + nxi;
    const double cxi = u_ / (2.0 * grid_->xi().spacing());
    const double hx2 = grid_->x().spacing() * grid_->x().spacing();

    std::vector<Eigen::Triplet<double, int>> trip;
    trip.reserve(static_cast<std::size_t>(nn) * 12 + static_cast<std::size_t>(nn) * 2);
    auto add = [&](int r, int c, double v) {
        if (v != 0.0) trip.emplace_back(r, c, v);
    };
    auto th = [nx](int i, int j) { return i * nx + j; };
    auto ps = [nx, nn](int i, int j) { return nn + i * nx + j; };
    const int lam = 2 * nn;

    for (int i = 0; i < nxi; ++i) {
        for (int j = 0; j < nx; ++j) {
            const bool boundary = i == 0 || i == nxi - 1 || j == 0 || j == nx - 1;
            if (boundary) {
                add(th(i, j), th(i, j), 1.0);
                add(ps(i, j), ps(i, j), 1.0);
                continue;
            }
            // Rows are stored swapped (second equation first) so the diagonal is nonzero.
            const int r1 = ps(i, j);
            add(r1, th(i + 1, j), cxi);
            add(r1, th(i - 1, j), -cxi);
            add(r1, ps(i, j), -1.0);
            add(r1, lam + i, t2_theta_(i, j));

            const int r2 = th(i, j);
            add(r2, th(i, j - 1), -1.0 / hx2);
            add(r2, th(i, j + 1), -1.0 / hx2);
            add(r2, th(i, j), 2.0 / hx2 + potential_(i, j));
            add(r2, ps(i + 1, j), cxi);
            add(r2, ps(i - 1, j), -cxi);
            add(r2, lam + i, t2_psi_(i, j));
        }
    }
    for (int i = 0; i < nxi; ++i) {
        if (i == 0 || i == nxi - 1) {
            add(lam + i, lam + i, 1.0);
            continue;
        }
        for (int j = 0; j < nx; ++j) {
            add(lam + i, th(i, j), n_theta_(i, j));
            add(lam + i, ps(i, j), n_psi_(i, j));
        }
    }
    SparseMatrix a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    matrix_ = std::move(a);
}

void OperatorHandle::factorize(SymbolicPtr reuse) {
    lu_ = std::make_unique<SparseLU>(*matrix_, std::move(reuse));
    condition_ = condition_estimate_1norm(*matrix_, *lu_);
    if (!std::isfinite(condition_) || condition_ > opts_.condition_bound) {
        std::ostringstream os;
        os << "condition estimate " << condition_ << " exceeds bound " << opts_.condition_bound;
        throw IllConditionedError(os.str(), std::numeric_limits<double>::quiet_NaN(), condition_);
    }
}

Eigen::VectorXd OperatorHandle::pack(const TripleY& y) const {
    const auto nn = static_cast<Eigen::Index>(grid_->size());
    const auto nxi = static_cast<Eigen::Index>(grid_->xi().size());
    if (!(y.theta.grid() == *grid_) || !(y.psi.grid() == *grid_) || !(y.lambda.grid() == grid_->xi()))
        throw DomainError("TripleY grid does not match operator grid");
    Eigen::VectorXd v(2 * nn + nxi);
    v.segment(0, nn) = Eigen::Map<const Eigen::VectorXd>(y.theta.values().data(), nn);
    v.segment(nn, nn) = Eigen::Map<const Eigen::VectorXd>(y.psi.values().data(), nn);
    v.segment(2 * nn, nxi) = y.lambda.values().matrix();
    return v;
}

TripleY OperatorHandle::unpack(const Eigen::VectorXd& v) const {
    const auto nn = static_cast<Eigen::Index>(grid_->size());
    const auto nxi = static_cast<Eigen::Index>(grid_->xi().size());
    const auto nx = static_cast<Eigen::Index>(grid_->x().size());
    if (v.size() != 2 * nn + nxi) throw DomainError("vector length does not match operator");
    Array2D th = Eigen::Map<const Array2D>(v.data(), nxi, nx);
    Array2D ps = Eigen::Map<const Array2D>(v.data() + nn, nxi, nx);
    ArrayX la = v.segment(2 * nn, nxi).array();
    return TripleY{GridFn2D(grid_, std::move(th)), GridFn2D(grid_, std::move(ps)),
                   GridFn1D(xi_axis(grid_), std::move(la))};
}

Eigen::VectorXd OperatorHandle::pack_rhs(const PairZ& rhs, const ArrayX* constraint_rhs) const {
    const auto nn = static_cast<Eigen::Index>(grid_->size());
    const auto nxi = static_cast<Eigen::Index>(grid_->xi().size());
    const auto nx = static_cast<Eigen::Index>(grid_->x().size());
    if (!(rhs.v.grid() == *grid_) || !(rhs.w.grid() == *grid_))
        throw DomainError("right-hand side grid does not match operator grid");
    Eigen::VectorXd b(2 * nn + nxi);
    b.segment(0, nn) = Eigen::Map<const Eigen::VectorXd>(rhs.w.values().data(), nn);
    b.segment(nn, nn) = Eigen::Map<const Eigen::VectorXd>(rhs.v.values().data(), nn);
    // Boundary identity rows are not swapped.
    for (Eigen::Index i = 0; i < nxi; ++i) {
        for (Eigen::Index j = 0; j < nx; ++j) {
            if (i == 0 || i == nxi - 1 || j == 0 || j == nx - 1) {
                b[i * nx + j] = rhs.v.values()(i, j);
                b[nn + i * nx + j] = rhs.w.values()(i, j);
            }
        }
    }
    if (constraint_rhs) {
        if (constraint_rhs->size() != nxi) throw DomainError("constraint right-hand side has wrong length");
        b.segment(2 * nn, nxi) = constraint_rhs->matrix();
    } else {
        b.segment(2 * nn, nxi).setZero();
    }
    return b;
}

PairZ OperatorHandle::apply(const TripleY& y) const {
    const Eigen::Index nxi = static_cast<Eigen::Index>(grid_->xi().size());
    const Eigen::Index nx = static_cast<Eigen::Index>(grid_->x().size());
    if (!(y.theta.grid() == *grid_) || !(y.psi.grid() == *grid_) || !(y.lambda.grid() == grid_->xi()))
        throw DomainError("TripleY grid does not match operator grid");
    const Array2D& t = y.theta.values();
    const Array2D& p = y.psi.values();
    const ArrayX& l = y.lambda.values();
    const double cxi = u_ / (2.0 * grid_->xi().spacing());
    const double hx2 = grid_->x().spacing() * grid_->x().spacing();

    Array2D v = t;
    Array2D w = p;
    for (Eigen::Index i = 1; i + 1 < nxi; ++i) {
        for (Eigen::Index j = 1; j + 1 < nx; ++j) {
            v(i, j) = cxi * (t(i + 1, j) - t(i - 1, j)) - p(i, j) + l[i] * t2_theta_(i, j);
            w(i, j) = -(t(i, j + 1) - 2.0 * t(i, j) + t(i, j - 1)) / hx2 + potential_(i, j) * t(i, j) +
                      cxi * (p(i + 1, j) - p(i - 1, j)) + l[i] * t2_psi_(i, j);
        }
    }
    return PairZ{GridFn2D(grid_, std::move(v)), GridFn2D(grid_, std::move(w))};
}

PairZ OperatorHandle::apply_du(const TripleY& y) const {
    const Eigen::Index nxi = static_cast<Eigen::Index>(grid_->xi().size());
    const Eigen::Index nx = static_cast<Eigen::Index>(grid_->x().size());
    const Array2D& t = y.theta.values();
    const Array2D& p = y.psi.values();
    const ArrayX& l = y.lambda.values();
    const double c = 1.0 / (2.0 * grid_->xi().spacing());
    Array2D v = Array2D::Zero(nxi, nx);
    Array2D w = Array2D::Zero(nxi, nx);
    for (Eigen::Index i = 1; i + 1 < nxi; ++i) {
        for (Eigen::Index j = 1; j + 1 < nx; ++j) {
            v(i, j) = c * (t(i + 1, j) - t(i - 1, j)) + l[i] * du2_theta_(i, j);
            w(i, j) = du_potential_(i, j) * t(i, j) + c * (p(i + 1, j) - p(i - 1, j)) + l[i] * du2_psi_(i, j);
        }
    }
    return PairZ{GridFn2D(grid_, std::move(v)), GridFn2D(grid_, std::move(w))};
}

ArrayX OperatorHandle::constraint_values(const TripleY& y) const {
    return (n_theta_ * y.theta.values() + n_psi_ * y.psi.values()).rowwise().sum();
}

ArrayX OperatorHandle::du_constraint_values(const TripleY& y) const {
    ArrayX c = (du_n_theta_ * y.theta.values() + du_n_psi_ * y.psi.values()).rowwise().sum();
    c[0] = 0.0;
    c[c.size() - 1] = 0.0;
    return c;
}

double OperatorHandle::membership_defect(const TripleY& y) const {
    const ArrayX c = constraint_values(y);
    const double scale =
        ((n_theta_ * y.theta.values()).abs() + (n_psi_ * y.psi.values()).abs()).rowwise().sum().maxCoeff();
    if (scale == 0.0) return 0.0;
    return c.abs().maxCoeff() / scale;
}

double OperatorHandle::last_residual() noexcept { return g_last_residual; }

TripleY OperatorHandle::solve(const PairZ& rhs, const ArrayX* constraint_rhs) const {
    if (!lu_) throw DomainError("operator handle is not factored");
    if (!rhs.v.all_finite() || !rhs.w.all_finite()) throw DomainError("right-hand side is not finite");
    const Eigen::VectorXd b = pack_rhs(rhs, constraint_rhs);
    const double b_norm = b.lpNorm<Eigen::Infinity>();
    if (b_norm == 0.0) {
        g_last_residual = 0.0;
        return TripleY::zeros(grid_);
    }
    Eigen::VectorXd x = lu_->solve(b);
    Eigen::VectorXd r = b - *matrix_ * x;
    double rel = r.lpNorm<Eigen::Infinity>() / b_norm;
    for (int step = 0; step < opts_.max_refinement_steps && rel > opts_.tolerance; ++step) {
        x += lu_->solve(r);
        r = b - *matrix_ * x;
        rel = r.lpNorm<Eigen::Infinity>() / b_norm;
    }
    g_last_residual = rel;
    if (!(rel <= opts_.tolerance) || !x.allFinite()) {
        std::ostringstream os;
        os << "relative residual " << rel << " above tolerance " << opts_.tolerance;
        throw IllConditionedError(os.str(), rel, condition_);
    }
    return unpack(x);
}

}  // namespace vsm

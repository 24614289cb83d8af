#include "vsm/fields.hpp"

#include "vsm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace vsm {

namespace {

void require_same_grid(const GridPtr& a, const GridPtr& b) {
    if (a != b && !(a && b && *a == *b)) throw DomainError("grid functions live on different grids");
}

void require_same_grid(const Grid1DPtr& a, const Grid1DPtr& b) {
    if (a != b && !(a && b && *a == *b)) throw DomainError("grid functions live on different grids");
}

// Differences along axis 0 (xi) with second-order one-sided stencils on the
// two boundary lines; axis 1 goes through a transpose.
Array2D d1_rows(const Array2D& f, double h) {
    const Eigen::Index n = f.rows();
    Array2D out(f.rows(), f.cols());
    for (Eigen::Index i = 1; i + 1 < n; ++i) out.row(i) = (f.row(i + 1) - f.row(i - 1)) / (2.0 * h);
    out.row(0) = (-3.0 * f.row(0) + 4.0 * f.row(1) - f.row(2)) / (2.0 * h);
    out.row(n - 1) = (3.0 * f.row(n - 1) - 4.0 * f.row(n - 2) + f.row(n - 3)) / (2.0 * h);
    return out;
}

Array2D d2_rows(const Array2D& f, double h) {
    const Eigen::Index n = f.rows();
    const double h2 = h * h;
    Array2D out(f.rows(), f.cols());
    for (Eigen::Index i = 1; i + 1 < n; ++i) out.row(i) = (f.row(i + 1) - 2.0 * f.row(i) + f.row(i - 1)) / h2;
    out.row(0) = (2.0 * f.row(0) - 5.0 * f.row(1) + 4.0 * f.row(2) - f.row(3)) / h2;
    out.row(n - 1) = (2.0 * f.row(n - 1) - 5.0 * f.row(n - 2) + 4.0 * f.row(n - 3) - f.row(n - 4)) / h2;
    return out;
}

Array2D d1(const Array2D& f, double h, int axis) {
    if (axis == 0) return d1_rows(f, h);
    return d1_rows(f.transpose(), h).transpose();
}

Array2D d2(const Array2D& f, double h, int axis) {
    if (axis == 0) return d2_rows(f, h);
    return d2_rows(f.transpose(), h).transpose();
}

double quad2(const Array2D& f2, const ArrayX& wxi, const ArrayX& wx) {
    return (wxi.matrix().transpose() * f2.matrix() * wx.matrix()).value();
}

}  // namespace

// ---------------------------------------------------------------------------

Grid1D::Grid1D(double min, double max, ArrayX nodes)
    : min_(min), max_(max), h_((max - min) / static_cast<double>(nodes.size() - 1)), nodes_(std::move(nodes)) {}

Grid1D Grid1D::uniform(double min, double max, std::size_t n) {
    if (n < 8) throw DomainError("Grid1D needs at least 8 nodes");
    if (!(max > min) || !std::isfinite(min) || !std::isfinite(max))
        throw DomainError("Grid1D needs finite min < max");
    ArrayX nodes(static_cast<Eigen::Index>(n));
    const double h = (max - min) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) nodes[static_cast<Eigen::Index>(i)] = min + h * static_cast<double>(i);
    nodes[static_cast<Eigen::Index>(n - 1)] = max;
    return Grid1D(min, max, std::move(nodes));
}

bool Grid1D::contains(double v) const noexcept {
    const double tol = 1e-12 * h_;
    return v >= min_ - tol && v <= max_ + tol;
}

long Grid1D::node_index(double v) const noexcept {
    if (!contains(v)) return -1;
    const double t = (v - min_) / h_;
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-12) return -1;
    return static_cast<long>(r);
}

ArrayX Grid1D::trapezoid_weights() const {
    ArrayX w = ArrayX::Constant(nodes_.size(), h_);
    w[0] *= 0.5;
    w[w.size() - 1] *= 0.5;
    return w;
}

void Grid2D::require_cutoff_room(double Xi, double margin) const {
    if (margin < 2.0) throw DomainError("cutoff margin must be at least 2");
    const double need = Xi + 1.0 + margin;
    if (xi_.max() < need || -xi_.min() < need) {
        std::ostringstream os;
        os << "xi-range [" << xi_.min() << ", " << xi_.max() << "] too small for cutoff support Xi+1="
           << Xi + 1.0 << " with margin " << margin;
        throw DomainError(os.str());
    }
}

GridPtr make_grid(double xi_min, double xi_max, std::size_t xi_n, double x_min, double x_max, std::size_t x_n) {
    return std::make_shared<const Grid2D>(Grid1D::uniform(xi_min, xi_max, xi_n), Grid1D::uniform(x_min, x_max, x_n));
}

Grid1DPtr xi_axis(const GridPtr& grid) { return Grid1DPtr(grid, &grid->xi()); }

// ---------------------------------------------------------------------------

GridFn2D::GridFn2D(GridPtr grid)
    : grid_(std::move(grid)),
      values_(Array2D::Zero(static_cast<Eigen::Index>(grid_->xi().size()),
                            static_cast<Eigen::Index>(grid_->x().size()))) {}

GridFn2D::GridFn2D(GridPtr grid, Array2D values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.rows() != static_cast<Eigen::Index>(grid_->xi().size()) ||
        values_.cols() != static_cast<Eigen::Index>(grid_->x().size()))
        throw DomainError("GridFn2D shape does not match grid");
    if (!values_.allFinite()) throw DomainError("GridFn2D values must be finite");
}

GridFn2D& GridFn2D::operator+=(const GridFn2D& o) {
    require_same_grid(grid_, o.grid_);
    values_ += o.values_;
    return *this;
}

GridFn2D& GridFn2D::operator-=(const GridFn2D& o) {
    require_same_grid(grid_, o.grid_);
    values_ -= o.values_;
    return *this;
}

GridFn2D& GridFn2D::operator*=(double s) {
    values_ *= s;
    return *this;
}

GridFn2D operator*(const GridFn2D& a, const GridFn2D& b) {
    require_same_grid(a.grid_, b.grid_);
    GridFn2D out = a;
    out.values_ *= b.values_;
    return out;
}

GridFn1D::GridFn1D(Grid1DPtr grid)
    : grid_(std::move(grid)), values_(ArrayX::Zero(static_cast<Eigen::Index>(grid_->size()))) {}

GridFn1D::GridFn1D(Grid1DPtr grid, ArrayX values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != static_cast<Eigen::Index>(grid_->size()))
        throw DomainError("GridFn1D shape does not match grid");
    if (!values_.allFinite()) throw DomainError("GridFn1D values must be finite");
}

GridFn1D& GridFn1D::operator+=(const GridFn1D& o) {
    require_same_grid(grid_, o.grid_);
    values_ += o.values_;
    return *this;
}

GridFn1D& GridFn1D::operator-=(const GridFn1D& o) {
    require_same_grid(grid_, o.grid_);
    values_ -= o.values_;
    return *this;
}

GridFn1D& GridFn1D::operator*=(double s) {
    values_ *= s;
    return *this;
}

GridFn1D operator*(const GridFn1D& a, const GridFn1D& b) {
    require_same_grid(a.grid_, b.grid_);
    GridFn1D out = a;
    out.values_ *= b.values_;
    return out;
}

TripleY TripleY::zeros(const GridPtr& grid) {
    return TripleY{GridFn2D(grid), GridFn2D(grid), GridFn1D(xi_axis(grid))};
}

TripleY& TripleY::operator+=(const TripleY& o) {
    theta += o.theta;
    psi += o.psi;
    lambda += o.lambda;
    return *this;
}

TripleY& TripleY::operator-=(const TripleY& o) {
    theta -= o.theta;
    psi -= o.psi;
    lambda -= o.lambda;
    return *this;
}

TripleY& TripleY::operator*=(double s) {
    theta *= s;
    psi *= s;
    lambda *= s;
    return *this;
}

PairZ PairZ::zeros(const GridPtr& grid) { return PairZ{GridFn2D(grid), GridFn2D(grid)}; }

PairZ& PairZ::operator+=(const PairZ& o) {
    v += o.v;
    w += o.w;
    return *this;
}

PairZ& PairZ::operator-=(const PairZ& o) {
    v -= o.v;
    w -= o.w;
    return *this;
}

PairZ& PairZ::operator*=(double s) {
    v *= s;
    w *= s;
    return *this;
}

// ---------------------------------------------------------------------------

double kink_theta(double x) {
    // Evaluate through the small exponential on either side for accuracy near 0 and 2 pi.
    if (x > 0.0) return 2.0 * std::numbers::pi - 4.0 * std::atan(std::exp(-x));
    return 4.0 * std::atan(std::exp(x));
}

double kink_d1(double x) { return 2.0 / std::cosh(x); }

double kink_d2(double x) { return -2.0 * std::tanh(x) / std::cosh(x); }

double kink_d3(double x) {
    const double s = 1.0 / std::cosh(x);
    const double t = std::tanh(x);
    return 2.0 * s * (t * t - s * s);
}

double lorentz_gamma(double u) {
    if (!(std::abs(u) < 1.0)) throw DomainError("velocity must satisfy |u| < 1");
    return 1.0 / std::sqrt(1.0 - u * u);
}

KinkPoint kink_point(double xi, double u, double x) {
    const double g = lorentz_gamma(u);
    const double g2 = g * g;
    const double g3 = g2 * g;
    const double g4 = g2 * g2;
    const double g5 = g4 * g;
    const double z = g * (x - xi);
    const double k0 = kink_theta(z);
    const double k1 = kink_d1(z);
    const double k2 = kink_d2(z);
    const double k3 = kink_d3(z);
    const double zu = u * g2 * z;  // dz/du

    KinkPoint p{};
    p.theta = k0;
    p.psi = -u * g * k1;
    p.dxi_theta = -g * k1;
    p.dxi_psi = u * g2 * k2;
    p.du_theta = k1 * zu;
    p.du_psi = -g3 * k1 - u * u * g3 * z * k2;
    p.du2_theta = (g2 + 3.0 * u * u * g4) * z * k1 + u * u * g4 * z * z * k2;
    p.du2_psi = -3.0 * u * g5 * k1 - (u * g5 + 2.0 * u * g3 + 4.0 * u * u * u * g5) * z * k2 -
                u * u * u * g5 * z * z * k3;
    p.cos_theta = std::cos(k0);
    p.du_cos_theta = -std::sin(k0) * p.du_theta;
    p.normal_theta = k1;
    p.normal_psi = -u * g * k2;
    p.du_normal_theta = k2 * zu;
    p.du_normal_psi = -g3 * k2 - u * u * g3 * z * k3;
    return p;
}

SolitonSlice soliton_state(double xi, double u, const Grid1D& x) {
    const double g = lorentz_gamma(u);
    SolitonSlice s{ArrayX(x.nodes().size()), ArrayX(x.nodes().size())};
    for (Eigen::Index j = 0; j < x.nodes().size(); ++j) {
        const double z = g * (x.nodes()[j] - xi);
        s.theta[j] = kink_theta(z);
        s.psi[j] = -u * g * kink_d1(z);
    }
    return s;
}

ZeroModes zero_modes(double xi, double u, const Grid1D& x) {
    lorentz_gamma(u);
    const Eigen::Index n = x.nodes().size();
    ZeroModes m{{ArrayX(n), ArrayX(n)}, {ArrayX(n), ArrayX(n)}};
    for (Eigen::Index j = 0; j < n; ++j) {
        const KinkPoint p = kink_point(xi, u, x.nodes()[j]);
        m.t1.theta[j] = p.dxi_theta;
        m.t1.psi[j] = p.dxi_psi;
        m.t2.theta[j] = p.du_theta;
        m.t2.psi[j] = p.du_psi;
    }
    return m;
}

KinkFields kink_fields(double u, const GridPtr& grid) {
    lorentz_gamma(u);
    const auto nxi = static_cast<Eigen::Index>(grid->xi().size());
    const auto nx = static_cast<Eigen::Index>(grid->x().size());
    Array2D th(nxi, nx), ps(nxi, nx), a(nxi, nx), b(nxi, nx), c(nxi, nx), d(nxi, nx), v(nxi, nx);
    for (Eigen::Index i = 0; i < nxi; ++i) {
        for (Eigen::Index j = 0; j < nx; ++j) {
            const KinkPoint p = kink_point(grid->xi().nodes()[i], u, grid->x().nodes()[j]);
            th(i, j) = p.theta;
            ps(i, j) = p.psi;
            a(i, j) = p.dxi_theta;
            b(i, j) = p.dxi_psi;
            c(i, j) = p.du_theta;
            d(i, j) = p.du_psi;
            v(i, j) = p.cos_theta;
        }
    }
    return KinkFields{GridFn2D(grid, std::move(th)), GridFn2D(grid, std::move(ps)), GridFn2D(grid, std::move(a)),
                      GridFn2D(grid, std::move(b)),  GridFn2D(grid, std::move(c)),  GridFn2D(grid, std::move(d)),
                      GridFn2D(grid, std::move(v))};
}

// ---------------------------------------------------------------------------

double weighted_norm(const Array2D& f, const Grid1D& xi, const Grid1D& x, int k, int alpha) {
    if (k < 0 || k > 2) throw DomainError("weighted_norm supports k = 0, 1, 2");
    if (alpha < 0) throw DomainError("weight exponent alpha must be nonnegative");
    Array2D g = f;
    if (alpha != 0) {
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
            const double a = xi.nodes()[i] * xi.nodes()[i];
            g.row(i) *= (1.0 + a + x.nodes().square().transpose()).pow(0.5 * alpha);
        }
    }
    const ArrayX wxi = xi.trapezoid_weights();
    const ArrayX wx = x.trapezoid_weights();
    double total = quad2(g.square(), wxi, wx);
    if (k >= 1) {
        const Array2D gxi = d1(g, xi.spacing(), 0);
        const Array2D gx = d1(g, x.spacing(), 1);
        total += quad2(gxi.square(), wxi, wx) + quad2(gx.square(), wxi, wx);
        if (k == 2) {
            total += quad2(d2(g, xi.spacing(), 0).square(), wxi, wx);
            total += quad2(d2(g, x.spacing(), 1).square(), wxi, wx);
            total += quad2(d1(gxi, x.spacing(), 1).square(), wxi, wx);
        }
    }
    return std::sqrt(total);
}

double weighted_norm(const ArrayX& f, const Grid1D& grid, int k, int alpha) {
    if (k < 0 || k > 2) throw DomainError("weighted_norm supports k = 0, 1, 2");
    if (alpha < 0) throw DomainError("weight exponent alpha must be nonnegative");
    if (f.size() != static_cast<Eigen::Index>(grid.size())) throw DomainError("profile does not match grid");
    Array2D g = f.transpose();  // one row
    if (alpha != 0) g.row(0) *= (1.0 + grid.nodes().square().transpose()).pow(0.5 * alpha);
    const ArrayX w = grid.trapezoid_weights();
    auto q = [&](const Array2D& a) { return (a.row(0).transpose() * w).sum(); };
    double total = q(g.square());
    if (k >= 1) total += q(d1(g, grid.spacing(), 1).square());
    if (k == 2) total += q(d2(g, grid.spacing(), 1).square());
    return std::sqrt(total);
}

double weighted_norm(const GridFn2D& f, int k, int alpha) {
    return weighted_norm(f.values(), f.grid().xi(), f.grid().x(), k, alpha);
}

double weighted_norm(const GridFn1D& f, int k, int alpha) { return weighted_norm(f.values(), f.grid(), k, alpha); }

double y_norm(const TripleY& y, int alpha) {
    return weighted_norm(y.theta, 2, alpha) + weighted_norm(y.psi, 1, alpha) + weighted_norm(y.lambda, 2, alpha);
}

double z_norm(const PairZ& z, int alpha) { return weighted_norm(z.v, 1, alpha) + weighted_norm(z.w, 0, alpha); }

GridFn2D restrict_xi(const GridFn2D& f, double lo, double hi) {
    const Grid1D& xi = f.grid().xi();
    Eigen::Index first = -1, last = -1;
    for (Eigen::Index i = 0; i < xi.nodes().size(); ++i) {
        const double v = xi.nodes()[i];
        if (v >= lo - 1e-12 && v <= hi + 1e-12) {
            if (first < 0) first = i;
            last = i;
        }
    }
    if (first < 0 || last - first + 1 < 8) throw DomainError("restriction keeps fewer than 8 xi-rows");
    auto sub = std::make_shared<const Grid2D>(
        Grid1D::uniform(xi.nodes()[first], xi.nodes()[last], static_cast<std::size_t>(last - first + 1)),
        f.grid().x());
    return GridFn2D(sub, f.values().middleRows(first, last - first + 1));
}

Array2D centered_dxi(const Array2D& f, double h) {
    Array2D out = Array2D::Zero(f.rows(), f.cols());
    if (f.rows() >= 3)
        out.middleRows(1, f.rows() - 2) = (f.bottomRows(f.rows() - 2) - f.topRows(f.rows() - 2)) / (2.0 * h);
    return out;
}

Array2D centered_dxx(const Array2D& f, double h) {
    Array2D out = Array2D::Zero(f.rows(), f.cols());
    if (f.cols() >= 3)
        out.middleCols(1, f.cols() - 2) =
            (f.rightCols(f.cols() - 2) - 2.0 * f.middleCols(1, f.cols() - 2) + f.leftCols(f.cols() - 2)) / (h * h);
    return out;
}

CubicStencil cubic_stencil(const Grid1D& grid, double at) {
    if (!grid.contains(at)) {
        std::ostringstream os;
        os << "interpolation point " << at << " outside [" << grid.min() << ", " << grid.max() << "]";
        throw DomainError(os.str());
    }
    CubicStencil s{};
    const long node = grid.node_index(at);
    if (node >= 0) {
        s.first = static_cast<std::size_t>(node);
        s.w[0] = 1.0;
        return s;
    }
    const auto n = static_cast<long>(grid.size());
    const long i = static_cast<long>(std::floor((at - grid.min()) / grid.spacing()));
    const long first = std::clamp(i - 1, 0L, n - 4);
    s.first = static_cast<std::size_t>(first);
    for (int a = 0; a < 4; ++a) {
        double w = 1.0;
        const double xa = grid[static_cast<std::size_t>(first + a)];
        for (int b = 0; b < 4; ++b) {
            if (b == a) continue;
            const double xb = grid[static_cast<std::size_t>(first + b)];
            w *= (at - xb) / (xa - xb);
        }
        s.w[a] = w;
    }
    return s;
}

ArrayX slice_at_xi(const GridFn2D& f, double xi_value) {
    const CubicStencil s = cubic_stencil(f.grid().xi(), xi_value);
    const auto r = static_cast<Eigen::Index>(s.first);
    if (s.w[0] == 1.0 && s.w[1] == 0.0 && s.w[2] == 0.0 && s.w[3] == 0.0) return f.values().row(r).transpose();
    return (s.w[0] * f.values().row(r) + s.w[1] * f.values().row(r + 1) + s.w[2] * f.values().row(r + 2) +
            s.w[3] * f.values().row(r + 3))
        .transpose();
}

double interpolate_cubic(const GridFn1D& f, double at) {
    const CubicStencil s = cubic_stencil(f.grid(), at);
    const auto r = static_cast<Eigen::Index>(s.first);
    if (s.w[0] == 1.0 && s.w[1] == 0.0 && s.w[2] == 0.0 && s.w[3] == 0.0) return f.values()[r];
    return s.w[0] * f.values()[r] + s.w[1] * f.values()[r + 1] + s.w[2] * f.values()[r + 2] +
           s.w[3] * f.values()[r + 3];
}

}  // namespace vsm

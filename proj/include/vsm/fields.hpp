#pragma once

// Grids, grid functions, the closed-form kink family and its zero modes,
// and discrete weighted Sobolev norms.

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <utility>

namespace vsm {

/// Row-major so that each xi-row (an x-profile) is contiguous.
using Array2D = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ArrayX = Eigen::ArrayXd;

/// Uniform, strictly increasing grid with at least 8 nodes.
class Grid1D {
public:
    static Grid1D uniform(double min, double max, std::size_t n);

    std::size_t size() const noexcept { return static_cast<std::size_t>(nodes_.size()); }
    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }
    double spacing() const noexcept { return h_; }
    double operator[](std::size_t i) const { return nodes_[static_cast<Eigen::Index>(i)]; }
    const ArrayX& nodes() const noexcept { return nodes_; }

    bool contains(double v) const noexcept;
    /// Index of the node equal to v (within 1e-12 of the spacing), or -1.
    long node_index(double v) const noexcept;

    /// Trapezoidal quadrature weights.
    ArrayX trapezoid_weights() const;

    friend bool operator==(const Grid1D& a, const Grid1D& b) noexcept {
        return a.min_ == b.min_ && a.max_ == b.max_ && a.size() == b.size();
    }

private:
    Grid1D(double min, double max, ArrayX nodes);

    double min_ = 0.0;
    double max_ = 0.0;
    double h_ = 0.0;
    ArrayX nodes_;
};

/// Tensor grid over (xi, x).
class Grid2D {
public:
    Grid2D(Grid1D xi, Grid1D x) : xi_(std::move(xi)), x_(std::move(x)) {}

    const Grid1D& xi() const noexcept { return xi_; }
    const Grid1D& x() const noexcept { return x_; }
    std::size_t size() const noexcept { return xi_.size() * x_.size(); }

    /// Throws DomainError unless the cutoff support |xi| <= Xi+1 sits at least
    /// `margin` inside the xi-range (margin >= 2).
    void require_cutoff_room(double Xi, double margin = 2.0) const;

    friend bool operator==(const Grid2D& a, const Grid2D& b) noexcept {
        return a.xi_ == b.xi_ && a.x_ == b.x_;
    }

private:
    Grid1D xi_;
    Grid1D x_;
};

using GridPtr = std::shared_ptr<const Grid2D>;
using Grid1DPtr = std::shared_ptr<const Grid1D>;

GridPtr make_grid(double xi_min, double xi_max, std::size_t xi_n, double x_min, double x_max,
                  std::size_t x_n);

/// The xi axis of a 2D grid, sharing ownership with it.
Grid1DPtr xi_axis(const GridPtr& grid);

/// Real field sampled on a Grid2D; values(i, j) sits at (xi_i, x_j).
class GridFn2D {
public:
    GridFn2D() = default;
    explicit GridFn2D(GridPtr grid);
    GridFn2D(GridPtr grid, Array2D values);

    const Grid2D& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    const Array2D& values() const noexcept { return values_; }
    Array2D& values() noexcept { return values_; }
    double operator()(std::size_t i, std::size_t j) const {
        return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    bool all_finite() const { return values_.allFinite(); }
    double max_abs() const { return values_.size() == 0 ? 0.0 : values_.abs().maxCoeff(); }

    GridFn2D& operator+=(const GridFn2D& o);
    GridFn2D& operator-=(const GridFn2D& o);
    GridFn2D& operator*=(double s);

    friend GridFn2D operator+(GridFn2D a, const GridFn2D& b) { return a += b; }
    friend GridFn2D operator-(GridFn2D a, const GridFn2D& b) { return a -= b; }
    friend GridFn2D operator*(double s, GridFn2D a) { return a *= s; }
    friend GridFn2D operator*(GridFn2D a, double s) { return a *= s; }
    /// Pointwise product.
    friend GridFn2D operator*(const GridFn2D& a, const GridFn2D& b);

private:
    GridPtr grid_;
    Array2D values_;
};

/// Real profile over a 1D grid (the xi axis for lambda).
class GridFn1D {
public:
    GridFn1D() = default;
    explicit GridFn1D(Grid1DPtr grid);
    GridFn1D(Grid1DPtr grid, ArrayX values);

    const Grid1D& grid() const { return *grid_; }
    const Grid1DPtr& grid_ptr() const noexcept { return grid_; }
    const ArrayX& values() const noexcept { return values_; }
    ArrayX& values() noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

    bool all_finite() const { return values_.allFinite(); }
    double max_abs() const { return values_.size() == 0 ? 0.0 : values_.abs().maxCoeff(); }

    GridFn1D& operator+=(const GridFn1D& o);
    GridFn1D& operator-=(const GridFn1D& o);
    GridFn1D& operator*=(double s);

    friend GridFn1D operator+(GridFn1D a, const GridFn1D& b) { return a += b; }
    friend GridFn1D operator-(GridFn1D a, const GridFn1D& b) { return a -= b; }
    friend GridFn1D operator*(double s, GridFn1D a) { return a *= s; }
    friend GridFn1D operator*(GridFn1D a, double s) { return a *= s; }
    friend GridFn1D operator*(const GridFn1D& a, const GridFn1D& b);

private:
    Grid1DPtr grid_;
    ArrayX values_;
};

/// Discrete element of Y: (theta, psi) over (xi, x) and lambda over xi.
struct TripleY {
    GridFn2D theta;
    GridFn2D psi;
    GridFn1D lambda;

    static TripleY zeros(const GridPtr& grid);

    TripleY& operator+=(const TripleY& o);
    TripleY& operator-=(const TripleY& o);
    TripleY& operator*=(double s);
    friend TripleY operator+(TripleY a, const TripleY& b) { return a += b; }
    friend TripleY operator-(TripleY a, const TripleY& b) { return a -= b; }
    friend TripleY operator*(double s, TripleY a) { return a *= s; }
    friend TripleY operator*(TripleY a, double s) { return a *= s; }

    bool all_finite() const { return theta.all_finite() && psi.all_finite() && lambda.all_finite(); }
};

/// Discrete element of Z: the two PDE components of the operator range.
struct PairZ {
    GridFn2D v;
    GridFn2D w;

    static PairZ zeros(const GridPtr& grid);

    PairZ& operator+=(const PairZ& o);
    PairZ& operator-=(const PairZ& o);
    PairZ& operator*=(double s);
    friend PairZ operator+(PairZ a, const PairZ& b) { return a += b; }
    friend PairZ operator-(PairZ a, const PairZ& b) { return a -= b; }
    friend PairZ operator*(double s, PairZ a) { return a *= s; }
};

// ---------------------------------------------------------------------------
// Kink family

/// 4 arctan(e^x): the static kink connecting 0 to 2 pi.
double kink_theta(double x);
/// First three derivatives of the kink profile.
double kink_d1(double x);
double kink_d2(double x);
double kink_d3(double x);

/// Lorentz factor 1/sqrt(1-u^2); rejects |u| >= 1.
double lorentz_gamma(double u);

/// Boosted, translated kink and every closed-form derivative of it the solver
/// needs, evaluated at one (xi, u, x).
struct KinkPoint {
    double theta;       // theta_0
    double psi;         // psi_0
    double dxi_theta;   // t1
    double dxi_psi;
    double du_theta;    // t2
    double du_psi;
    double du2_theta;
    double du2_psi;
    double cos_theta;   // linearization potential
    double du_cos_theta;
    double normal_theta;  // symplectic-orthogonality direction (unweighted)
    double normal_psi;
    double du_normal_theta;
    double du_normal_psi;
};

KinkPoint kink_point(double xi, double u, double x);

struct SolitonSlice {
    ArrayX theta;
    ArrayX psi;
};

/// theta_0 and psi_0 along an x-grid for the kink centred at xi moving at u.
SolitonSlice soliton_state(double xi, double u, const Grid1D& x);

struct ZeroModes {
    SolitonSlice t1;  // d/dxi of (theta_0, psi_0)
    SolitonSlice t2;  // d/du of (theta_0, psi_0)
};

ZeroModes zero_modes(double xi, double u, const Grid1D& x);

/// Background quantities sampled over the whole (xi, x) grid at fixed u.
struct KinkFields {
    GridFn2D theta, psi;
    GridFn2D t1_theta, t1_psi;
    GridFn2D t2_theta, t2_psi;
    GridFn2D cos_theta;
};

KinkFields kink_fields(double u, const GridPtr& grid);

// ---------------------------------------------------------------------------
// Norms, stencils and interpolation

/// Discrete H^{k,alpha} norm: weight (1+|xi|^2+|x|^2)^{alpha/2} applied to the
/// field, then all partials up to order k by second-order differences
/// (one-sided at the boundary), trapezoidal quadrature.
double weighted_norm(const GridFn2D& f, int k, int alpha);
double weighted_norm(const GridFn1D& f, int k, int alpha);
/// Same norm on a raw array over the given axes.
double weighted_norm(const Array2D& f, const Grid1D& xi, const Grid1D& x, int k, int alpha);
double weighted_norm(const ArrayX& f, const Grid1D& grid, int k, int alpha);

/// |theta|_{H^{2,a}} + |psi|_{H^{1,a}} + |lambda|_{H^{2,a}}.
double y_norm(const TripleY& y, int alpha);
/// |v|_{H^{1,a}} + |w|_{H^{0,a}}.
double z_norm(const PairZ& z, int alpha);

/// Restriction of a 2D field to the xi-rows inside [lo, hi].
GridFn2D restrict_xi(const GridFn2D& f, double lo, double hi);

/// Centred differences on interior nodes; boundary rows/columns are zero.
Array2D centered_dxi(const Array2D& f, double h);
Array2D centered_dxx(const Array2D& f, double h);

/// Cubic (4-point Lagrange) interpolation of the field along xi at xi_value;
/// exact at nodes. Throws DomainError outside the grid.
ArrayX slice_at_xi(const GridFn2D& f, double xi_value);
double interpolate_cubic(const GridFn1D& f, double at);

/// Stencil used by slice_at_xi: first row index and four Lagrange weights.
struct CubicStencil {
    std::size_t first;
    double w[4];
};
CubicStencil cubic_stencil(const Grid1D& grid, double at);

}  // namespace vsm

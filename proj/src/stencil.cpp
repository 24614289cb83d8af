#include "vsm/stencil.hpp"

#include "vsm/errors.hpp"

#include <cmath>
#include <numbers>

namespace vsm {

UStencil::UStencil(double u_max, std::size_t n) : u_max_(u_max) {
    if (n < 2) throw DomainError("u-stencil needs at least 2 nodes");
    if (!(u_max > 0.0 && u_max < 1.0)) throw DomainError("u-stencil half-width must lie in (0, 1)");
    const auto m = static_cast<Eigen::Index>(n);
    const double big = static_cast<double>(n - 1);
    nodes_.resize(m);
    weights_.resize(m);
    // sin form keeps the nodes exactly symmetric with an exact 0 for odd n.
    for (Eigen::Index j = 0; j < m; ++j) {
        nodes_[j] = u_max * std::sin(std::numbers::pi * (2.0 * static_cast<double>(j) - big) / (2.0 * big));
        weights_[j] = (j % 2 == 0) ? 1.0 : -1.0;
    }
    weights_[0] *= 0.5;
    weights_[m - 1] *= 0.5;

    diff_ = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i == j) continue;
            diff_(i, j) = (weights_[j] / weights_[i]) / (nodes_[i] - nodes_[j]);
            row += diff_(i, j);
        }
        diff_(i, i) = -row;
    }
}

Eigen::MatrixXd UStencil::diff_matrix(int k) const {
    if (k < 0) throw DomainError("derivative order must be nonnegative");
    Eigen::MatrixXd d = Eigen::MatrixXd::Identity(diff_.rows(), diff_.cols());
    for (int i = 0; i < k; ++i) d = diff_ * d;
    return d;
}

long UStencil::node_index(double u) const noexcept {
    for (Eigen::Index j = 0; j < nodes_.size(); ++j)
        if (u == nodes_[j]) return static_cast<long>(j);
    return -1;
}

Eigen::VectorXd UStencil::basis(double u) const {
    if (std::abs(u) > u_max_ * (1.0 + 1e-12)) throw DomainError("u outside the stencil range");
    Eigen::VectorXd l = Eigen::VectorXd::Zero(nodes_.size());
    const long k = node_index(u);
    if (k >= 0) {
        l[k] = 1.0;
        return l;
    }
    double s = 0.0;
    for (Eigen::Index j = 0; j < nodes_.size(); ++j) {
        l[j] = weights_[j] / (u - nodes_[j]);
        s += l[j];
    }
    return l / s;
}

Eigen::VectorXd UStencil::basis_derivative(double u) const {
    if (std::abs(u) > u_max_ * (1.0 + 1e-12)) throw DomainError("u outside the stencil range");
    const long k = node_index(u);
    if (k >= 0) return diff_.row(k).transpose();
    const Eigen::Index m = nodes_.size();
    Eigen::VectorXd a(m);
    double s = 0.0, ds = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        const double r = 1.0 / (u - nodes_[j]);
        a[j] = weights_[j] * r;
        s += a[j];
        ds -= a[j] * r;
    }
    Eigen::VectorXd d(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double r = 1.0 / (u - nodes_[j]);
        d[j] = (-a[j] * r * s - a[j] * ds) / (s * s);
    }
    return d;
}

}  // namespace vsm

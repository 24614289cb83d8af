#pragma once

// Chebyshev-Gauss-Lobatto stencil in the velocity u.

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace vsm {

class UStencil {
public:
    /// n >= 2 nodes on [-u_max, u_max], ascending; an odd count puts a node at 0.
    UStencil(double u_max, std::size_t n);

    std::size_t size() const noexcept { return static_cast<std::size_t>(nodes_.size()); }
    double u_max() const noexcept { return u_max_; }
    double operator[](std::size_t i) const { return nodes_[static_cast<Eigen::Index>(i)]; }
    const Eigen::VectorXd& nodes() const noexcept { return nodes_; }
    const Eigen::VectorXd& weights() const noexcept { return weights_; }
    /// Spectral differentiation matrix: (D f)(u_i) = sum_j D_ij f(u_j).
    const Eigen::MatrixXd& diff_matrix() const noexcept { return diff_; }
    /// D^k.
    Eigen::MatrixXd diff_matrix(int k) const;

    /// Index of the node equal to u, or -1.
    long node_index(double u) const noexcept;
    /// Barycentric Lagrange basis values l_j(u).
    Eigen::VectorXd basis(double u) const;
    /// Derivatives l_j'(u).
    Eigen::VectorXd basis_derivative(double u) const;

private:
    double u_max_;
    Eigen::VectorXd nodes_;
    Eigen::VectorXd weights_;
    Eigen::MatrixXd diff_;
};

}  // namespace vsm

#pragma once

// The constrained linearization around the boosted kink at fixed velocity u,
// discretized as a bordered sparse system in (theta, psi, lambda).

#include "vsm/fields.hpp"
#include "vsm/sparse_lu.hpp"

#include <limits>
#include <memory>
#include <optional>

namespace vsm {

struct OperatorOptions {
    int alpha = 1;
    /// Weight the orthogonality quadrature by (1+xi^2+x^2)^alpha.
    bool orthogonality_weighted = true;
    /// Relative residual every solve must reach.
    double tolerance = 1e-10;
    /// Estimated 1-norm condition number above which the handle is rejected.
    double condition_bound = 1e12;
    int max_refinement_steps = 6;
};

enum class Assembly { matrix_free, assembled, factored };

/// Row layout of the bordered system:
///   theta(i,j) -> i*Nx + j, psi(i,j) -> Nxi*Nx + i*Nx + j, lambda(i) -> 2*Nxi*Nx + i.
/// Interior PDE rows carry the operator (the second equation sits in the theta
/// slot and the first in the psi slot); boundary nodes carry identity rows
/// (homogeneous Dirichlet); lambda rows at the two xi-boundary nodes are
/// identity rows, elsewhere they are the orthogonality functionals.
class OperatorHandle {
public:
    /// `reuse` is the symbolic analysis of another handle on the same grid.
    static std::shared_ptr<const OperatorHandle> assemble(double u, GridPtr grid, const OperatorOptions& opts = {},
                                                          Assembly level = Assembly::factored,
                                                          SymbolicPtr reuse = nullptr);

    double u() const noexcept { return u_; }
    const Grid2D& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    const OperatorOptions& options() const noexcept { return opts_; }
    std::size_t rows() const noexcept { return 2 * grid_->size() + grid_->xi().size(); }

    /// Assembled matrix; throws if the handle is matrix-free.
    const SparseMatrix& matrix() const;
    bool factored() const noexcept { return lu_ != nullptr; }
    /// 1-norm condition estimate computed at factorization (NaN if not factored).
    double condition() const noexcept { return condition_; }
    long factor_nonzeros() const noexcept;
    /// Symbolic analysis of the factorization (null unless factored).
    SymbolicPtr symbolic() const noexcept;
    double assemble_seconds() const noexcept { return assemble_seconds_; }
    double factor_seconds() const noexcept { return factor_seconds_; }

    /// PDE rows of the operator (identity at boundary nodes); no constraint rows.
    PairZ apply(const TripleY& y) const;
    /// Per-xi orthogonality functionals of (theta, psi).
    ArrayX constraint_values(const TripleY& y) const;
    /// Largest constraint value relative to the size of the summands.
    double membership_defect(const TripleY& y) const;
    bool in_y(const TripleY& y, double tol = 1e-10) const { return membership_defect(y) <= tol; }

    /// Derivative in u of the PDE rows and of the constraint functionals.
    PairZ apply_du(const TripleY& y) const;
    ArrayX du_constraint_values(const TripleY& y) const;

    /// Solves the bordered system. constraint_rhs (default zero) sets the
    /// orthogonality functionals at interior xi-nodes and lambda itself at the
    /// two boundary nodes. Throws IllConditionedError when the relative
    /// residual stays above options().tolerance.
    TripleY solve(const PairZ& rhs, const ArrayX* constraint_rhs = nullptr) const;
    /// Relative residual of the last solve on this thread.
    static double last_residual() noexcept;

    Eigen::VectorXd pack(const TripleY& y) const;
    TripleY unpack(const Eigen::VectorXd& v) const;
    Eigen::VectorXd pack_rhs(const PairZ& rhs, const ArrayX* constraint_rhs) const;

private:
    OperatorHandle(double u, GridPtr grid, const OperatorOptions& opts);
    void build_matrix();
    void factorize(SymbolicPtr reuse);

    double u_;
    GridPtr grid_;
    OperatorOptions opts_;
    // Background samples, row-major over (xi, x).
    Array2D t2_theta_, t2_psi_, potential_;
    Array2D du2_theta_, du2_psi_, du_potential_;
    // Orthogonality coefficients including quadrature weight and optional alpha weight.
    Array2D n_theta_, n_psi_, du_n_theta_, du_n_psi_;
    std::optional<SparseMatrix> matrix_;
    std::unique_ptr<SparseLU> lu_;
    double condition_ = std::numeric_limits<double>::quiet_NaN();
    double assemble_seconds_ = 0.0;
    double factor_seconds_ = 0.0;
};

using HandlePtr = std::shared_ptr<const OperatorHandle>;

}  // namespace vsm

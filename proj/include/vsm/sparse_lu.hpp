#pragma once

// Owning wrapper over an UMFPACK LU factorization of a square CSC matrix.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <memory>
#include <vector>

namespace vsm {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Fill-reducing ordering and symbolic analysis of one sparsity pattern;
/// reusable by every matrix with the same pattern.
class SymbolicAnalysis {
public:
    ~SymbolicAnalysis();
    SymbolicAnalysis(const SymbolicAnalysis&) = delete;
    SymbolicAnalysis& operator=(const SymbolicAnalysis&) = delete;

    bool matches(const std::vector<int>& ap, const std::vector<int>& ai) const { return ap == ap_ && ai == ai_; }

private:
    friend class SparseLU;
    SymbolicAnalysis(std::vector<int> ap, std::vector<int> ai, void* handle) noexcept
        : ap_(std::move(ap)), ai_(std::move(ai)), handle_(handle) {}

    std::vector<int> ap_;
    std::vector<int> ai_;
    void* handle_ = nullptr;
};

using SymbolicPtr = std::shared_ptr<const SymbolicAnalysis>;

class SparseLU {
public:
    /// `reuse` skips the symbolic analysis when its pattern equals that of a.
    explicit SparseLU(const SparseMatrix& a, SymbolicPtr reuse = nullptr);
    ~SparseLU();

    SparseLU(const SparseLU&) = delete;
    SparseLU& operator=(const SparseLU&) = delete;
    SparseLU(SparseLU&& o) noexcept;
    SparseLU& operator=(SparseLU&& o) noexcept;

    /// Solves A x = b (or A^T x = b) with the stored factors.
    Eigen::VectorXd solve(const Eigen::VectorXd& b, bool transpose = false) const;

    int size() const noexcept { return n_; }
    /// Nonzeros in L and U.
    long factor_nonzeros() const noexcept { return lnz_ + unz_; }
    const SymbolicPtr& symbolic() const noexcept { return symbolic_; }

private:
    void release() noexcept;

    int n_ = 0;
    std::vector<int> ap_;
    std::vector<int> ai_;
    std::vector<double> ax_;
    SymbolicPtr symbolic_;
    void* numeric_ = nullptr;
    long lnz_ = 0;
    long unz_ = 0;
};

/// Hager/Higham estimate of the 1-norm condition number of A from its factors.
double condition_estimate_1norm(const SparseMatrix& a, const SparseLU& lu, int max_iter = 5);

}  // namespace vsm

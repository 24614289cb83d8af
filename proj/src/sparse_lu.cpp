#include "vsm/sparse_lu.hpp"

#include "vsm/errors.hpp"

#include <umfpack.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace vsm {

namespace {

std::string umfpack_status(int status) { return "UMFPACK status " + std::to_string(status); }

}  // namespace

SymbolicAnalysis::~SymbolicAnalysis() {
    if (handle_) umfpack_di_free_symbolic(&handle_);
}

SparseLU::SparseLU(const SparseMatrix& a, SymbolicPtr reuse) : n_(static_cast<int>(a.rows())) {
    if (a.rows() != a.cols()) throw DomainError("SparseLU needs a square matrix");
    SparseMatrix c = a;
    c.makeCompressed();
    ap_.assign(c.outerIndexPtr(), c.outerIndexPtr() + n_ + 1);
    ai_.assign(c.innerIndexPtr(), c.innerIndexPtr() + c.nonZeros());
    ax_.assign(c.valuePtr(), c.valuePtr() + c.nonZeros());

    double control[UMFPACK_CONTROL];
    double info[UMFPACK_INFO];
    umfpack_di_defaults(control);
    control[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
    if (reuse && reuse->matches(ap_, ai_)) {
        symbolic_ = std::move(reuse);
    } else {
        void* symbolic = nullptr;
        const int status = umfpack_di_symbolic(n_, n_, ap_.data(), ai_.data(), ax_.data(), &symbolic, control, info);
        if (status != UMFPACK_OK) {
            umfpack_di_free_symbolic(&symbolic);
            throw NumericalError("linearized-solver", "symbolic factorization failed, " + umfpack_status(status));
        }
        symbolic_.reset(new SymbolicAnalysis(ap_, ai_, symbolic));
    }
    const int status = umfpack_di_numeric(ap_.data(), ai_.data(), ax_.data(), symbolic_->handle_, &numeric_, control, info);
    if (status != UMFPACK_OK) {
        release();
        if (status == UMFPACK_WARNING_singular_matrix)
            throw IllConditionedError("matrix is singular", INFINITY, INFINITY);
        throw NumericalError("linearized-solver", "numeric factorization failed, " + umfpack_status(status));
    }
    lnz_ = static_cast<long>(info[UMFPACK_LNZ]);
    unz_ = static_cast<long>(info[UMFPACK_UNZ]);
}

SparseLU::~SparseLU() { release(); }

SparseLU::SparseLU(SparseLU&& o) noexcept
    : n_(o.n_), ap_(std::move(o.ap_)), ai_(std::move(o.ai_)), ax_(std::move(o.ax_)), symbolic_(std::move(o.symbolic_)),
      numeric_(o.numeric_),
      lnz_(o.lnz_), unz_(o.unz_) {
    o.numeric_ = nullptr;
}

SparseLU& SparseLU::operator=(SparseLU&& o) noexcept {
    if (this != &o) {
        release();
        n_ = o.n_;
        ap_ = std::move(o.ap_);
        ai_ = std::move(o.ai_);
        ax_ = std::move(o.ax_);
        symbolic_ = std::move(o.symbolic_);
        numeric_ = o.numeric_;
        lnz_ = o.lnz_;
        unz_ = o.unz_;
        o.numeric_ = nullptr;
    }
    return *this;
}

void SparseLU::release() noexcept {
    if (numeric_) umfpack_di_free_numeric(&numeric_);
    numeric_ = nullptr;
}

Eigen::VectorXd SparseLU::solve(const Eigen::VectorXd& b, bool transpose) const {
    if (b.size() != n_) throw DomainError("right-hand side has wrong length");
    Eigen::VectorXd x(n_);
    double control[UMFPACK_CONTROL];
    double info[UMFPACK_INFO];
    umfpack_di_defaults(control);
    const int status = umfpack_di_solve(transpose ? UMFPACK_At : UMFPACK_A, ap_.data(), ai_.data(), ax_.data(),
                                        x.data(), b.data(), numeric_, control, info);
    if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix)
        throw NumericalError("linearized-solver", "triangular solve failed, " + umfpack_status(status));
    return x;
}

double condition_estimate_1norm(const SparseMatrix& a, const SparseLU& lu, int max_iter) {
    const Eigen::Index n = a.rows();
    double a_norm = 0.0;
    for (int k = 0; k < a.outerSize(); ++k) {
        double s = 0.0;
        for (SparseMatrix::InnerIterator it(a, k); it; ++it) s += std::abs(it.value());
        a_norm = std::max(a_norm, s);
    }

    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    double est = 0.0;
    Eigen::Index last_j = -1;
    for (int iter = 0; iter < max_iter; ++iter) {
        const Eigen::VectorXd y = lu.solve(x);
        const double y_norm = y.lpNorm<1>();
        if (iter > 0 && y_norm <= est) {
            est = std::max(est, y_norm);
            break;
        }
        est = y_norm;
        const Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
        const Eigen::VectorXd z = lu.solve(xi, true);
        Eigen::Index j = 0;
        const double z_max = z.cwiseAbs().maxCoeff(&j);
        if (iter > 0 && (j == last_j || z_max <= z.dot(x))) break;
        last_j = j;
        x.setZero();
        x[j] = 1.0;
    }
    // Higham's alternating-sign test vector guards against underestimation.
    Eigen::VectorXd alt(n);
    for (Eigen::Index i = 0; i < n; ++i)
        alt[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + static_cast<double>(i) / static_cast<double>(std::max<Eigen::Index>(n - 1, 1)));
    const double alt_est = 2.0 * lu.solve(alt).lpNorm<1>() / (3.0 * static_cast<double>(n));
    est = std::max(est, alt_est);
    return a_norm * est;
}

}  // namespace vsm

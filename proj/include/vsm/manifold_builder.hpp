#pragma once

// Order-by-order construction of the eps-Taylor coefficients of the manifold
// corrections and of lambda at every u-node.

#include "vsm/eps_series.hpp"
#include "vsm/fields.hpp"
#include "vsm/forcing.hpp"
#include "vsm/linearized_solver.hpp"
#include "vsm/stencil.hpp"

#include <functional>
#include <string>
#include <vector>

namespace vsm {

struct GridSpec {
    double xi_min = -12.0;
    double xi_max = 12.0;
    std::size_t xi_n = 193;
    double x_min = -20.0;
    double x_max = 20.0;
    std::size_t x_n = 321;
};

struct BuildConfig {
    GridSpec grid;
    double u_max = 0.1;
    std::size_t u_nodes = 9;
    double Xi = 3.0;
    double cutoff_margin = 2.0;
    int order = 4;
    ForcingSpec forcing;
    OperatorOptions solver;
    /// Divergence guard: flag ||c_N|| above this multiple of the fitted envelope.
    double divergence_factor = 100.0;
    /// Lower bound for the fitted factorial constant.
    double bound_floor = 1.0;
    /// validated_eps_max sweep: largest eps <= eps_cap with tail ratio <= tail_tolerance.
    double eps_cap = 0.25;
    double tail_tolerance = 0.1;
    int eps_samples = 50;
    unsigned threads = 1;
};

struct ManifoldModel {
    GridPtr grid;
    UStencil stencil{0.1, 9};
    int alpha = 1;
    bool orthogonality_weighted = true;
    double Xi = 3.0;
    GridFn1D chi;
    ForcingFamily forcing;
    int order = 0;
    double validated_eps_max = 0.0;
    /// False when the tail diagnostic could not run (order < 3 or zero forcing).
    bool eps_diagnosed = false;
    /// series[p] holds coefficients 0..order at u-node p.
    std::vector<EpsSeries<TripleY>> series;
    std::vector<std::string> warnings;

    const TripleY& coeff(std::size_t node, int n) const { return series.at(node)[static_cast<std::size_t>(n)]; }
};

struct BuildStats {
    double assemble_seconds = 0.0;
    double factor_seconds = 0.0;
    std::vector<double> order_seconds;
    std::vector<double> conditions;
    std::vector<long> factor_nonzeros;
    double max_solve_residual = 0.0;
    double max_membership_defect = 0.0;
};

struct BuildResult {
    ManifoldModel model;
    std::vector<HandlePtr> handles;
    BuildStats stats;
};

/// chi = 1 on |xi| <= Xi, 0 on |xi| >= Xi+1, exp(-1/t) smoothstep between.
GridFn1D build_cutoff(double Xi, const Grid1DPtr& xi, double margin = 2.0);
double cutoff_value(double Xi, double xi);

/// F_N(x) chi(xi).
GridFn2D assemble_forcing_coeff(int n, const ForcingFamily& forcing, const GridFn1D& chi, const GridPtr& grid);
/// Full F(eps, x) chi(xi).
GridFn2D assemble_forcing(double eps, const ForcingFamily& forcing, const GridFn1D& chi, const GridPtr& grid);

/// One factored operator per u-node. Failures name the node.
std::vector<HandlePtr> assemble_handles(const GridPtr& grid, const UStencil& stencil, const OperatorOptions& opts,
                                        unsigned threads, BuildStats* stats = nullptr);

/// Spectral u-derivative of order-n coefficients: result[p] = sum_q D_pq coeffs[q][n].
std::vector<TripleY> u_derivative(const UStencil& stencil, const std::vector<std::vector<TripleY>>& coeffs, int n,
                                  int k = 1);

/// Right-hand side (v, w) of the order-N system at one node:
///   v = -sum_l lambda_l d_u theta_{N-l},
///   w = Ftilde_N - sum_l lambda_l d_u psi_{N-l} - S_N,
/// with S_N the part of [sin(theta_0 + theta_hat)]_N not carried by cos(theta_0) theta_N.
/// du(m) returns the u-derivative of the order-m coefficient entering the
/// lambda term, or nullptr to drop that term. Boundary nodes are zeroed.
PairZ order_rhs(int n, const std::vector<TripleY>& lower, const std::function<const TripleY*(int)>& du,
                const GridFn2D& theta0, const GridFn2D& forcing_n);

/// c_N at every node from coefficients 0..N-1 (coeffs[node][order]).
std::vector<TripleY> next_coefficient(int n, const std::vector<std::vector<TripleY>>& coeffs,
                                      const std::vector<HandlePtr>& handles, const UStencil& stencil,
                                      const GridFn2D& forcing_n, unsigned threads);

/// Passing handles from an earlier build with the same grid, stencil and
/// solver options skips assembly and factorization.
BuildResult build_manifold(const BuildConfig& config, std::vector<HandlePtr> handles = {});

/// Same model keeping coefficients 0..m (m <= order); validated_eps_max is recomputed.
ManifoldModel truncate(const ManifoldModel& model, int m, const BuildConfig& config);

/// Largest eps in (0, cap] such that the tail ratio stays <= tol at every node
/// for all sampled eps below it; sets eps_diagnosed.
void set_validated_eps(ManifoldModel& model, double cap, double tol, int samples);

// --------------------------------------------------------------------------
// Diagnostics

enum class DerivativeMode { chebyshev, oracle };

struct LiteralCheckEntry {
    int iteration;
    int k;
    double norm_literal;
    double norm_diagonal;
    double rel_diff;
    bool compared;  // k <= iteration-1
};

struct LiteralCheckReport {
    int n = 0;
    DerivativeMode mode = DerivativeMode::chebyshev;
    std::vector<LiteralCheckEntry> entries;
    double max_rel_diff = 0.0;  // over compared entries
    double tolerance = 1e-9;
    bool passed = false;
    /// Oracle mode only: largest relative gap between the spectral and the
    /// recursion-based u-derivative of coefficients 2 and 3.
    double derivative_cross_check = 0.0;
};

/// u-derivative of an order-l coefficient from the K=1 recursion:
/// M d_u c = -(d_u M) c with constraint rhs -<c, d_u n>. Valid while the
/// order-l right-hand side does not depend on u (l = 2, 3).
TripleY oracle_u_derivative(const OperatorHandle& handle, const TripleY& c);

/// Runs the two-index iteration for n = 1..n_max. Iteration n computes
/// coefficients 0..n_max with the degree-(n-1) truncation of iterate n-1
/// frozen inside the lambda d_u term; coefficients k <= n-1 are compared with
/// the diagonal ones (computed in the same derivative mode).
LiteralCheckReport literal_iteration_check(int n_max, const ManifoldModel& model,
                                           const std::vector<HandlePtr>& handles, DerivativeMode mode,
                                           unsigned threads = 1, double tol = 1e-9);

struct BoundEntry {
    int n;
    int k;
    double norm;     // sup over nodes of ||d_u^K c_N||_Y, normalized coefficients
    double c_needed; // smallest C satisfying this bound alone
    double ratio;    // N! norm / ((N-2)! C^{2N+2K-3} (K-3)!) for the fitted C
};

struct BoundsReport {
    double fitted_c = 0.0;
    double floor = 1.0;
    std::vector<BoundEntry> entries;
    double max_ratio = 0.0;
};

BoundsReport bounds_report(const ManifoldModel& model, int max_k = 3, double floor = 1.0);

}  // namespace vsm

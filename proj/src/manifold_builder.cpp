#include "vsm/manifold_builder.hpp"

#include "vsm/errors.hpp"
#include "vsm/parallel.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace vsm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

std::string node_label(std::size_t p, double u) {
    std::ostringstream os;
    os << "u-node " << p << " (u=" << u << ")";
    return os.str();
}

std::string strip_stage(const NumericalError& e) { return std::string(e.what()).substr(e.stage().size() + 2); }

// Rethrows with the node named in the message.
[[noreturn]] void rethrow_at_node(std::size_t p, double u) {
    try {
        throw;
    } catch (const IllConditionedError& e) {
        throw IllConditionedError(strip_stage(e) + " at " + node_label(p, u), e.residual(), e.condition());
    } catch (const NumericalError& e) {
        throw NumericalError(e.stage(), strip_stage(e) + " at " + node_label(p, u));
    }
}

TripleY combine(const Eigen::RowVectorXd& weights, const std::function<const TripleY&(std::size_t)>& at) {
    TripleY out = zero_like(at(0));
    for (Eigen::Index q = 0; q < weights.size(); ++q) {
        if (weights[q] == 0.0) continue;
        const TripleY& c = at(static_cast<std::size_t>(q));
        out.theta.values() += weights[q] * c.theta.values();
        out.psi.values() += weights[q] * c.psi.values();
        out.lambda.values() += weights[q] * c.lambda.values();
    }
    return out;
}

void zero_boundary(Array2D& a) {
    a.row(0).setZero();
    a.row(a.rows() - 1).setZero();
    a.col(0).setZero();
    a.col(a.cols() - 1).setZero();
}

double sup_norm(const TripleY& y) {
    return std::max({y.theta.max_abs(), y.psi.max_abs(), y.lambda.max_abs()});
}

// Smallest C with N! norm <= C^{2N+2K-3} (N-2)! (K-3)!.
double needed_constant(int n, int k, double norm) {
    if (norm <= 0.0) return 0.0;
    const double kf = k >= 3 ? factorial(k - 3) : 1.0;
    return std::pow(factorial(n) * norm / (factorial(n - 2) * kf), 1.0 / (2.0 * n + 2.0 * k - 3.0));
}

struct SolveOutcome {
    TripleY c;
    double residual = 0.0;
    double defect = 0.0;
};

SolveOutcome solve_at(const OperatorHandle& h, const PairZ& rhs) {
    SolveOutcome o{h.solve(rhs), OperatorHandle::last_residual(), 0.0};
    o.defect = h.membership_defect(o.c);
    return o;
}

}  // namespace

double cutoff_value(double Xi, double xi) {
    const double a = std::abs(xi);
    if (a <= Xi) return 1.0;
    if (a >= Xi + 1.0) return 0.0;
    const double t = Xi + 1.0 - a;
    const double f = std::exp(-1.0 / t);
    const double g = std::exp(-1.0 / (1.0 - t));
    return f / (f + g);
}

GridFn1D build_cutoff(double Xi, const Grid1DPtr& xi, double margin) {
    if (!(Xi > 0.0)) throw DomainError("plateau half-width Xi must be positive");
    if (margin < 2.0) throw DomainError("cutoff margin must be at least 2");
    if (xi->max() < Xi + 1.0 + margin || -xi->min() < Xi + 1.0 + margin) {
        std::ostringstream os;
        os << "xi-range [" << xi->min() << ", " << xi->max() << "] cannot hold the cutoff support |xi| <= "
           << Xi + 1.0 << " with margin " << margin;
        throw DomainError(os.str());
    }
    ArrayX v(static_cast<Eigen::Index>(xi->size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cutoff_value(Xi, xi->nodes()[i]);
    return GridFn1D(xi, std::move(v));
}

GridFn2D assemble_forcing_coeff(int n, const ForcingFamily& forcing, const GridFn1D& chi, const GridPtr& grid) {
    if (n < 0) throw DomainError("forcing order must be nonnegative");
    const ArrayX f = forcing.coefficient(n, grid->x());
    Array2D v = chi.values().matrix() * f.matrix().transpose();
    return GridFn2D(grid, std::move(v));
}

GridFn2D assemble_forcing(double eps, const ForcingFamily& forcing, const GridFn1D& chi, const GridPtr& grid) {
    const ArrayX f = forcing.profile(eps, grid->x());
    Array2D v = chi.values().matrix() * f.matrix().transpose();
    return GridFn2D(grid, std::move(v));
}

std::vector<HandlePtr> assemble_handles(const GridPtr& grid, const UStencil& stencil, const OperatorOptions& opts,
                                        unsigned threads, BuildStats* stats) {
    std::vector<HandlePtr> handles(stencil.size());
    auto factor = [&](std::size_t p, SymbolicPtr reuse) {
        try {
            handles[p] = OperatorHandle::assemble(stencil[p], grid, opts, Assembly::factored, std::move(reuse));
        } catch (const NumericalError&) {
            rethrow_at_node(p, stencil[p]);
        }
    };
    // Nodes with u != 0 share one sparsity pattern; the first one's analysis is reused.
    factor(0, nullptr);
    const SymbolicPtr shared = handles[0]->symbolic();
    parallel_for(stencil.size() - 1, threads, [&](std::size_t q) { factor(q + 1, shared); });
    if (stats) {
        for (std::size_t p = 0; p < handles.size(); ++p) {
            stats->assemble_seconds += handles[p]->assemble_seconds();
            stats->factor_seconds += handles[p]->factor_seconds();
            stats->conditions.push_back(handles[p]->condition());
            stats->factor_nonzeros.push_back(handles[p]->factor_nonzeros());
        }
    }
    return handles;
}

std::vector<TripleY> u_derivative(const UStencil& stencil, const std::vector<std::vector<TripleY>>& coeffs, int n,
                                  int k) {
    const Eigen::MatrixXd d = stencil.diff_matrix(k);
    std::vector<TripleY> out;
    out.reserve(coeffs.size());
    for (std::size_t p = 0; p < coeffs.size(); ++p)
        out.push_back(combine(d.row(static_cast<Eigen::Index>(p)),
                              [&](std::size_t q) -> const TripleY& { return coeffs[q][static_cast<std::size_t>(n)]; }));
    return out;
}

PairZ order_rhs(int n, const std::vector<TripleY>& lower, const std::function<const TripleY*(int)>& du,
                const GridFn2D& theta0, const GridFn2D& forcing_n) {
    if (n < 2) throw DomainError("order_rhs needs N >= 2");
    if (lower.size() < static_cast<std::size_t>(n)) throw DomainError("order_rhs needs coefficients 0..N-1");
    Array2D v = Array2D::Zero(theta0.values().rows(), theta0.values().cols());
    Array2D w = forcing_n.values();
    for (int l = 2; l <= n - 2; ++l) {
        const TripleY* d = du(n - l);
        if (!d) continue;
        const ArrayX& lam = lower[static_cast<std::size_t>(l)].lambda.values();
        v -= d->theta.values().colwise() * lam;
        w -= d->psi.values().colwise() * lam;
    }
    if (n >= 3) {
        std::vector<GridFn2D> th;
        for (int k = 0; k < n; ++k) th.push_back(lower[static_cast<std::size_t>(k)].theta);
        const auto cs = cos_sin_series(EpsSeries<GridFn2D>(std::move(th)), theta0);
        Array2D s = Array2D::Zero(v.rows(), v.cols());
        for (int j = 0; j <= n - 2; ++j)
            s += static_cast<double>(j + 1) * lower[static_cast<std::size_t>(j + 1)].theta.values() *
                 cs.cos[static_cast<std::size_t>(n - 1 - j)].values();
        w -= s / static_cast<double>(n);
    }
    zero_boundary(v);
    zero_boundary(w);
    return PairZ{GridFn2D(theta0.grid_ptr(), std::move(v)), GridFn2D(theta0.grid_ptr(), std::move(w))};
}

namespace {

std::vector<SolveOutcome> next_coefficient_detail(int n, const std::vector<std::vector<TripleY>>& coeffs,
                                                  const std::vector<HandlePtr>& handles, const UStencil& stencil,
                                                  const GridFn2D& forcing_n, unsigned threads) {
    const std::size_t nodes = handles.size();
    std::vector<std::vector<TripleY>> du(static_cast<std::size_t>(n));
    for (int m = 2; m <= n - 2; ++m) du[static_cast<std::size_t>(m)] = u_derivative(stencil, coeffs, m);
    std::vector<SolveOutcome> out(nodes);
    parallel_for(nodes, threads, [&](std::size_t p) {
        try {
            const GridFn2D theta0 = kink_fields(stencil[p], handles[p]->grid_ptr()).theta;
            const PairZ rhs = order_rhs(
                n, coeffs[p],
                [&](int m) -> const TripleY* { return m >= 2 ? &du[static_cast<std::size_t>(m)][p] : nullptr; },
                theta0, forcing_n);
            out[p] = solve_at(*handles[p], rhs);
        } catch (const NumericalError&) {
            rethrow_at_node(p, stencil[p]);
        }
    });
    return out;
}

}  // namespace

std::vector<TripleY> next_coefficient(int n, const std::vector<std::vector<TripleY>>& coeffs,
                                      const std::vector<HandlePtr>& handles, const UStencil& stencil,
                                      const GridFn2D& forcing_n, unsigned threads) {
    auto detail = next_coefficient_detail(n, coeffs, handles, stencil, forcing_n, threads);
    std::vector<TripleY> out;
    for (auto& d : detail) out.push_back(std::move(d.c));
    return out;
}

BuildResult build_manifold(const BuildConfig& cfg, std::vector<HandlePtr> handles) {
    if (cfg.order < 0 || cfg.order > 12) throw DomainError("order must lie in [0, 12]");
    if (!(cfg.u_max > 0.0 && cfg.u_max < 1.0)) throw DomainError("u_max must lie in (0, 1)");
    const GridSpec& g = cfg.grid;
    GridPtr grid = make_grid(g.xi_min, g.xi_max, g.xi_n, g.x_min, g.x_max, g.x_n);
    grid->require_cutoff_room(cfg.Xi, cfg.cutoff_margin);

    BuildResult r;
    ManifoldModel& m = r.model;
    m.grid = grid;
    m.stencil = UStencil(cfg.u_max, cfg.u_nodes);
    m.alpha = cfg.solver.alpha;
    m.orthogonality_weighted = cfg.solver.orthogonality_weighted;
    m.Xi = cfg.Xi;
    m.chi = build_cutoff(cfg.Xi, xi_axis(grid), cfg.cutoff_margin);
    m.forcing = ForcingFamily(cfg.forcing);
    m.order = cfg.order;

    const std::size_t nodes = m.stencil.size();
    if (!handles.empty()) {
        if (handles.size() != nodes) throw DomainError("reused handles do not match the u-stencil");
        for (std::size_t p = 0; p < nodes; ++p) {
            const auto& h = *handles[p];
            if (h.u() != m.stencil[p] || !(h.grid() == *grid) || !h.factored() || h.options().alpha != cfg.solver.alpha ||
                h.options().orthogonality_weighted != cfg.solver.orthogonality_weighted)
                throw DomainError("reused handle at " + node_label(p, m.stencil[p]) + " does not match the configuration");
        }
        r.handles = std::move(handles);
        grid = r.handles.front()->grid_ptr();
        m.grid = grid;
        m.chi = build_cutoff(cfg.Xi, xi_axis(grid), cfg.cutoff_margin);
        for (const auto& h : r.handles) {
            r.stats.conditions.push_back(h->condition());
            r.stats.factor_nonzeros.push_back(h->factor_nonzeros());
        }
    } else if (cfg.order >= 2) {
        r.handles = assemble_handles(grid, m.stencil, cfg.solver, cfg.threads, &r.stats);
    }

    std::vector<std::vector<TripleY>> coeffs(nodes);
    for (auto& c : coeffs) c.assign(2, TripleY::zeros(grid));

    std::vector<double> norms(static_cast<std::size_t>(cfg.order) + 1, 0.0);
    for (int n = 2; n <= cfg.order; ++n) {
        const auto t0 = Clock::now();
        const GridFn2D fn = assemble_forcing_coeff(n, m.forcing, m.chi, grid);
        auto out = next_coefficient_detail(n, coeffs, r.handles, m.stencil, fn, cfg.threads);
        double norm = 0.0;
        for (std::size_t p = 0; p < nodes; ++p) {
            r.stats.max_solve_residual = std::max(r.stats.max_solve_residual, out[p].residual);
            r.stats.max_membership_defect = std::max(r.stats.max_membership_defect, out[p].defect);
            norm = std::max(norm, y_norm(out[p].c, m.alpha));
            coeffs[p].push_back(std::move(out[p].c));
        }
        norms[static_cast<std::size_t>(n)] = norm;
        r.stats.order_seconds.push_back(seconds_since(t0));

        if (n >= 3) {
            double c_fit = cfg.bound_floor;
            for (int k = 2; k < n; ++k) c_fit = std::max(c_fit, needed_constant(k, 0, norms[static_cast<std::size_t>(k)]));
            const double envelope = std::pow(c_fit, 2.0 * n - 3.0) * factorial(n - 2) / factorial(n);
            if (norm > cfg.divergence_factor * envelope) {
                std::ostringstream os;
                os << "divergence guard: order " << n << " coefficient norm " << norm << " exceeds "
                   << cfg.divergence_factor << "x the fitted factorial envelope " << envelope;
                m.warnings.push_back(os.str());
            }
        }
    }
    for (auto& c : coeffs) {
        c.resize(static_cast<std::size_t>(cfg.order) + 1, TripleY::zeros(grid));
        m.series.emplace_back(std::move(c));
    }
    set_validated_eps(m, cfg.eps_cap, cfg.tail_tolerance, cfg.eps_samples);
    return r;
}

ManifoldModel truncate(const ManifoldModel& model, int mo, const BuildConfig& cfg) {
    if (mo < 0 || mo > model.order) throw DomainError("truncation order outside [0, order]");
    ManifoldModel t = model;
    t.order = mo;
    for (auto& s : t.series) s = s.truncated(static_cast<std::size_t>(mo));
    t.warnings.clear();
    set_validated_eps(t, cfg.eps_cap, cfg.tail_tolerance, cfg.eps_samples);
    return t;
}

void set_validated_eps(ManifoldModel& model, double cap, double tol, int samples) {
    if (!(cap > 0.0) || samples < 1) throw DomainError("eps sweep needs cap > 0 and samples >= 1");
    bool trivial = model.order < 3 || model.forcing.is_zero();
    if (!trivial) {
        trivial = true;
        for (const auto& s : model.series)
            if (sup_norm(s[s.order()]) > 0.0) trivial = false;
    }
    if (trivial) {
        model.validated_eps_max = cap;
        model.eps_diagnosed = false;
        return;
    }
    double last_ok = 0.0;
    for (int k = 1; k <= samples; ++k) {
        const double eps = cap * k / samples;
        double ratio = 0.0;
        for (const auto& s : model.series) ratio = std::max(ratio, tail_ratio(s, eps));
        if (ratio > tol) break;
        last_ok = eps;
    }
    model.validated_eps_max = last_ok;
    model.eps_diagnosed = true;
    if (last_ok == 0.0) model.warnings.push_back("tail ratio exceeds tolerance at the smallest sampled eps");
}

// ---------------------------------------------------------------------------

TripleY oracle_u_derivative(const OperatorHandle& handle, const TripleY& c) {
    PairZ rhs = handle.apply_du(c);
    rhs *= -1.0;
    ArrayX crhs = -handle.du_constraint_values(c);
    return handle.solve(rhs, &crhs);
}

LiteralCheckReport literal_iteration_check(int n_max, const ManifoldModel& model,
                                           const std::vector<HandlePtr>& handles, DerivativeMode mode,
                                           unsigned threads, double tol) {
    if (n_max < 1) throw DomainError("literal check needs n >= 1");
    if (n_max > model.order) throw DomainError("literal check needs a model of order >= n");
    if (mode == DerivativeMode::oracle && n_max > 5) throw DomainError("oracle derivatives cover n <= 5 only");
    const std::size_t nodes = model.stencil.size();
    if (handles.size() != nodes) throw DomainError("one operator handle per u-node is required");
    const GridPtr& grid = model.grid;

    LiteralCheckReport rep;
    rep.n = n_max;
    rep.mode = mode;
    rep.tolerance = tol;

    std::vector<GridFn2D> theta0, forcing;
    for (std::size_t p = 0; p < nodes; ++p) theta0.push_back(kink_fields(model.stencil[p], grid).theta);
    for (int k = 0; k <= n_max; ++k) forcing.push_back(assemble_forcing_coeff(k, model.forcing, model.chi, grid));

    // Derivatives of order-m coefficients of a coefficient set, per mode.
    auto derivatives = [&](const std::vector<std::vector<TripleY>>& set, int m) {
        if (mode == DerivativeMode::chebyshev) return u_derivative(model.stencil, set, m);
        std::vector<TripleY> d(nodes, TripleY::zeros(grid));
        parallel_for(nodes, threads, [&](std::size_t p) {
            d[p] = oracle_u_derivative(*handles[p], set[p][static_cast<std::size_t>(m)]);
        });
        return d;
    };

    // Diagonal reference in the same derivative mode.
    std::vector<std::vector<TripleY>> diag(nodes);
    if (mode == DerivativeMode::chebyshev) {
        for (std::size_t p = 0; p < nodes; ++p)
            for (int k = 0; k <= n_max; ++k) diag[p].push_back(model.coeff(p, k));
    } else {
        for (auto& d : diag) d.assign(2, TripleY::zeros(grid));
        std::vector<std::vector<TripleY>> du(static_cast<std::size_t>(n_max) + 1);
        for (int k = 2; k <= n_max; ++k) {
            if (k - 2 >= 2) du[static_cast<std::size_t>(k - 2)] = derivatives(diag, k - 2);
            std::vector<TripleY> ck(nodes, TripleY::zeros(grid));
            parallel_for(nodes, threads, [&](std::size_t p) {
                const PairZ rhs = order_rhs(
                    k, diag[p],
                    [&](int m) -> const TripleY* {
                        return m >= 2 && !du[static_cast<std::size_t>(m)].empty() ? &du[static_cast<std::size_t>(m)][p]
                                                                                  : nullptr;
                    },
                    theta0[p], forcing[static_cast<std::size_t>(k)]);
                ck[p] = handles[p]->solve(rhs);
            });
            for (std::size_t p = 0; p < nodes; ++p) diag[p].push_back(std::move(ck[p]));
        }
        // Cross-check the spectral derivative against the recursion for orders 2 and 3.
        for (int m = 2; m <= std::min(3, model.order); ++m) {
            std::vector<std::vector<TripleY>> model_set(nodes);
            for (std::size_t p = 0; p < nodes; ++p)
                for (int k = 0; k <= m; ++k) model_set[p].push_back(model.coeff(p, k));
            const auto cheb = u_derivative(model.stencil, model_set, m);
            const auto orc = derivatives(model_set, m);
            double num = 0.0, den = 0.0;
            for (std::size_t p = 0; p < nodes; ++p) {
                num = std::max(num, sup_norm(cheb[p] - orc[p]));
                den = std::max(den, sup_norm(orc[p]));
            }
            if (den > 0.0) rep.derivative_cross_check = std::max(rep.derivative_cross_check, num / den);
        }
    }

    // Iterate 0 is the classical manifold: all corrections vanish.
    std::vector<std::vector<TripleY>> prev(nodes, std::vector<TripleY>(static_cast<std::size_t>(n_max) + 1,
                                                                       TripleY::zeros(grid)));
    for (int it = 1; it <= n_max; ++it) {
        std::vector<std::vector<TripleY>> frozen_du(static_cast<std::size_t>(n_max) + 1);
        for (int m = 2; m <= it - 1; ++m) frozen_du[static_cast<std::size_t>(m)] = derivatives(prev, m);
        std::vector<std::vector<TripleY>> cur(nodes);
        parallel_for(nodes, threads, [&](std::size_t p) {
            cur[p].assign(2, TripleY::zeros(grid));
            for (int k = 2; k <= n_max; ++k) {
                const PairZ rhs = order_rhs(
                    k, cur[p],
                    [&](int m) -> const TripleY* {
                        if (m < 2 || m > it - 1) return nullptr;
                        return &frozen_du[static_cast<std::size_t>(m)][p];
                    },
                    theta0[p], forcing[static_cast<std::size_t>(k)]);
                cur[p].push_back(handles[p]->solve(rhs));
            }
        });
        for (int k = 0; k <= n_max; ++k) {
            double diff = 0.0, nl = 0.0, nd = 0.0;
            for (std::size_t p = 0; p < nodes; ++p) {
                const TripleY& a = cur[p][static_cast<std::size_t>(k)];
                const TripleY& b = diag[p][static_cast<std::size_t>(k)];
                diff = std::max(diff, sup_norm(a - b));
                nl = std::max(nl, sup_norm(a));
                nd = std::max(nd, sup_norm(b));
            }
            const double rel = diff == 0.0 ? 0.0 : diff / std::max(nd, 1e-300);
            const bool compared = k <= it - 1;
            rep.entries.push_back({it, k, nl, nd, rel, compared});
            if (compared) rep.max_rel_diff = std::max(rep.max_rel_diff, rel);
        }
        prev = std::move(cur);
    }
    rep.passed = rep.max_rel_diff <= tol;
    return rep;
}

BoundsReport bounds_report(const ManifoldModel& model, int max_k, double floor) {
    BoundsReport rep;
    rep.floor = floor;
    const std::size_t nodes = model.stencil.size();
    struct Raw {
        int n, k;
        double norm;
    };
    std::vector<Raw> raw;
    for (int k = 0; k <= max_k; ++k) {
        const Eigen::MatrixXd d = model.stencil.diff_matrix(k);
        for (int n = 2; n <= model.order; ++n) {
            double norm = 0.0;
            for (std::size_t p = 0; p < nodes; ++p) {
                const TripleY dc = combine(d.row(static_cast<Eigen::Index>(p)), [&](std::size_t q) -> const TripleY& {
                    return model.coeff(q, n);
                });
                norm = std::max(norm, y_norm(dc, model.alpha));
            }
            raw.push_back({n, k, norm});
        }
    }
    double c = floor;
    for (const Raw& e : raw) c = std::max(c, needed_constant(e.n, e.k, e.norm));
    rep.fitted_c = c;
    for (const Raw& e : raw) {
        const double kf = e.k >= 3 ? factorial(e.k - 3) : 1.0;
        const double ratio =
            factorial(e.n) * e.norm / (factorial(e.n - 2) * kf * std::pow(c, 2.0 * e.n + 2.0 * e.k - 3.0));
        rep.entries.push_back({e.n, e.k, e.norm, needed_constant(e.n, e.k, e.norm), ratio});
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    return rep;
}

}  // namespace vsm

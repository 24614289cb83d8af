#include "vsm/dynamics.hpp"

#include "vsm/errors.hpp"

#include <cmath>

namespace vsm {

namespace {

// Number of steps covering T with a step no larger than dt.
std::size_t step_count(double T, double dt) {
    if (!(T > 0.0) || !(dt > 0.0)) throw DomainError("T and dt must be positive");
    const double r = T / dt;
    const double n = std::round(r);
    return static_cast<std::size_t>(std::abs(r - n) <= 1e-9 * r ? n : std::ceil(r));
}

}  // namespace

std::string to_string(ExitReason r) {
    switch (r) {
        case ExitReason::completed: return "completed";
        case ExitReason::left_plateau: return "left_plateau";
        case ExitReason::velocity_bound: return "velocity_bound";
        case ExitReason::error: return "error";
    }
    return "error";
}

ModulationState rk4_step(const LambdaField& f, const ModulationState& s, double dt) {
    const double k1x = s.u_bar, k1u = f(s.xi_bar, s.u_bar);
    const double k2x = s.u_bar + 0.5 * dt * k1u, k2u = f(s.xi_bar + 0.5 * dt * k1x, k2x);
    const double k3x = s.u_bar + 0.5 * dt * k2u, k3u = f(s.xi_bar + 0.5 * dt * k2x, k3x);
    const double k4x = s.u_bar + dt * k3u, k4u = f(s.xi_bar + dt * k3x, k4x);
    return ModulationState{s.xi_bar + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
                           s.u_bar + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u), s.t + dt};
}

Trajectory integrate_modulation(const LambdaField& f, double xi_s, double u_s, double T, double dt, double Xi,
                                double u_max) {
    if (std::abs(xi_s) > Xi) throw DomainError("initial xi outside the plateau");
    if (std::abs(u_s) >= u_max) throw DomainError("initial velocity outside |u| < u_*");
    const std::size_t n = step_count(T, dt);
    const double h = T / static_cast<double>(n);
    Trajectory tr;
    tr.states.push_back({xi_s, u_s, 0.0});
    for (std::size_t k = 1; k <= n; ++k) {
        ModulationState next;
        try {
            next = rk4_step(f, tr.states.back(), h);
        } catch (const DomainError& e) {
            tr.exit_reason = ExitReason::velocity_bound;
            tr.message = e.what();
            return tr;
        }
        next.t = k == n ? T : h * static_cast<double>(k);
        tr.states.push_back(next);
        if (std::abs(next.xi_bar) > Xi) {
            tr.exit_reason = ExitReason::left_plateau;
            return tr;
        }
        if (std::abs(next.u_bar) >= u_max) {
            tr.exit_reason = ExitReason::velocity_bound;
            return tr;
        }
    }
    return tr;
}

Trajectory integrate_modulation(const ManifoldModel& model, double xi_s, double u_s, double eps, double T, double dt) {
    check_eval_range(model, xi_s, u_s, eps);
    if (dt <= 0.0) dt = std::min(0.01, T / 1000.0);
    return integrate_modulation([&](double xi, double u) { return eval_lambda(model, xi, u, eps); }, xi_s, u_s, T, dt,
                                model.Xi, model.stencil.u_max());
}

// ---------------------------------------------------------------------------

void verlet_steps(FieldState& s, const ArrayX& forcing, const Grid1D& x, double dt, std::size_t steps,
                  double blowup) {
    const Eigen::Index n = s.theta.size();
    if (n != static_cast<Eigen::Index>(x.size()) || s.psi.size() != n || forcing.size() != n)
        throw DomainError("PDE state and forcing must live on the x-grid");
    const double h = x.spacing();
    if (dt > 0.9 * h) throw DomainError("time step violates dt <= 0.9 h");
    const double ih2 = 1.0 / (h * h);
    const double t0 = s.t;
    ArrayX a = ArrayX::Zero(n);
    auto accel = [&] {
        for (Eigen::Index j = 1; j + 1 < n; ++j)
            a[j] = (s.theta[j + 1] - 2.0 * s.theta[j] + s.theta[j - 1]) * ih2 - std::sin(s.theta[j]) + forcing[j];
    };
    accel();
    for (std::size_t k = 1; k <= steps; ++k) {
        s.psi.segment(1, n - 2) += 0.5 * dt * a.segment(1, n - 2);
        s.theta.segment(1, n - 2) += dt * s.psi.segment(1, n - 2);
        accel();
        s.psi.segment(1, n - 2) += 0.5 * dt * a.segment(1, n - 2);
        s.t = t0 + dt * static_cast<double>(k);
        const double m = s.theta.abs().maxCoeff();
        if (!(m <= blowup))
            throw NumericalError("pde", "blowup at t=" + std::to_string(s.t) + " (sup|theta| = " + std::to_string(m) + ")");
    }
}

std::vector<FieldState> solve_pde(const FieldState& initial, const ArrayX& forcing, const Grid1D& x, double T,
                                  const PdeOptions& opts) {
    if (opts.sample_every == 0) throw DomainError("sample_every must be positive");
    const std::size_t n = step_count(T, opts.dt);
    const double dt = T / static_cast<double>(n);
    std::vector<FieldState> out{initial};
    FieldState s = initial;
    std::size_t done = 0;
    while (done < n) {
        const std::size_t chunk = std::min(opts.sample_every, n - done);
        verlet_steps(s, forcing, x, dt, chunk, opts.blowup);
        done += chunk;
        s.t = initial.t + dt * static_cast<double>(done);
        out.push_back(s);
    }
    out.back().t = initial.t + T;
    return out;
}

double energy(const FieldState& s, const Grid1D& x) {
    const double h = x.spacing();
    const Eigen::Index n = s.theta.size();
    double e = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) e += h * (0.5 * s.psi[j] * s.psi[j] + 1.0 - std::cos(s.theta[j]));
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const double d = s.theta[j + 1] - s.theta[j];
        e += d * d / (2.0 * h);
    }
    return e;
}

double deviation_norm(const ArrayX& dt, const ArrayX& dp, const Grid1D& x) {
    const ArrayX w = x.trapezoid_weights();
    const double h = x.spacing();
    double grad = 0.0;
    for (Eigen::Index j = 0; j + 1 < dt.size(); ++j) {
        const double d = dt[j + 1] - dt[j];
        grad += d * d / h;
    }
    return std::sqrt((w * dt * dt).sum() + grad) + std::sqrt((w * dp * dp).sum());
}

// ---------------------------------------------------------------------------

InvarianceRun verify_invariance(const ManifoldModel& model, double xi_s, double u_s, double eps,
                                const InvarianceOptions& opts) {
    check_eval_range(model, xi_s, u_s, eps);
    if (std::abs(xi_s) > model.Xi) throw DomainError("initial xi outside the plateau");
    if (std::abs(u_s) >= model.stencil.u_max()) throw DomainError("initial velocity outside |u| < u_*");
    if (opts.sample_every == 0) throw DomainError("sample_every must be positive");
    const Grid1D& x = model.grid->x();
    InvarianceRun run;
    run.horizon = eps != 0.0 && opts.c_tilde > 0.0 ? std::min(opts.T, 1.0 / (opts.c_tilde * std::abs(eps))) : opts.T;
    const std::size_t n = step_count(run.horizon, opts.dt);
    const double dt = run.horizon / static_cast<double>(n);

    const ArrayX forcing = model.forcing.profile(eps, x);
    const SolitonSlice init = eval_state(model, xi_s, u_s, eps);
    FieldState pde{init.theta, init.psi, 0.0};
    ModulationState ode{xi_s, u_s, 0.0};
    const LambdaField f = [&](double xi, double u) { return eval_lambda(model, xi, u, eps); };

    auto record = [&] {
        const SolitonSlice m = eval_state(model, ode.xi_bar, ode.u_bar, eps);
        ArrayX et = pde.theta - m.theta, ep = pde.psi - m.psi;
        const double d = deviation_norm(et, ep, x);
        run.samples.push_back({ode.t, ode.xi_bar, ode.u_bar, d});
        run.err_theta.push_back(std::move(et));
        run.err_psi.push_back(std::move(ep));
        run.sup_d = std::max(run.sup_d, d);
    };
    record();
    for (std::size_t k = 1; k <= n; ++k) {
        try {
            ode = rk4_step(f, ode, dt);
        } catch (const DomainError&) {
            run.exit_reason = ExitReason::velocity_bound;
            break;
        }
        verlet_steps(pde, forcing, x, dt, 1);
        ode.t = pde.t = k == n ? run.horizon : dt * static_cast<double>(k);
        if (std::abs(ode.xi_bar) > model.Xi) {
            run.exit_reason = ExitReason::left_plateau;
            break;
        }
        if (std::abs(ode.u_bar) >= model.stencil.u_max()) {
            run.exit_reason = ExitReason::velocity_bound;
            break;
        }
        if (k % opts.sample_every == 0 || k == n) record();
    }
    return run;
}

namespace {

// Tridiagonal solve with constant off-diagonals.
ArrayX thomas(double off, ArrayX diag, ArrayX rhs) {
    const Eigen::Index n = diag.size();
    for (Eigen::Index i = 1; i < n; ++i) {
        const double m = off / diag[i - 1];
        diag[i] -= m * off;
        rhs[i] -= m * rhs[i - 1];
    }
    ArrayX out(n);
    out[n - 1] = rhs[n - 1] / diag[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i) out[i] = (rhs[i] - off * out[i + 1]) / diag[i];
    return out;
}

ArrayX centered_slope(const ArrayX& f, double h) {
    ArrayX d = ArrayX::Zero(f.size());
    for (Eigen::Index j = 1; j + 1 < f.size(); ++j) d[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
    return d;
}

}  // namespace

ArrayX grid_kink_offset(const Grid1D& x, double xi) {
    const auto n = static_cast<Eigen::Index>(x.size());
    const Eigen::Index m = n - 2;
    const double h = x.spacing();
    const double ih2 = 1.0 / (h * h);
    const ArrayX w = x.trapezoid_weights();
    ArrayX k(n), phi(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        k[j] = kink_theta(x[j] - xi);
        phi[j] = kink_d1(x[j] - xi);
    }
    ArrayX th = k;
    double mu = 0.0;
    for (int it = 0; it < 20; ++it) {
        ArrayX g(m), diag(m);
        for (Eigen::Index j = 1; j <= m; ++j) {
            g[j - 1] = (th[j + 1] - 2.0 * th[j] + th[j - 1]) * ih2 - std::sin(th[j]) + mu * phi[j];
            diag[j - 1] = -2.0 * ih2 - std::cos(th[j]);
        }
        const ArrayX wp = (w * phi).segment(1, m);
        const double c = (wp * (th - k).segment(1, m)).sum();
        if (g.abs().maxCoeff() < 1e-12 && std::abs(c) < 1e-14) break;
        // J d + phi dmu = -g, <w phi, d> = -c.
        const ArrayX y = thomas(ih2, diag, -g);
        const ArrayX z = thomas(ih2, diag, phi.segment(1, m));
        const double dmu = (c + (wp * y).sum()) / (wp * z).sum();
        th.segment(1, m) += y - dmu * z;
        mu += dmu;
        if (it == 19) throw NumericalError("pde", "grid kink Newton iteration did not converge");
    }
    return th - k;
}

std::vector<double> floor_subtracted_series(const InvarianceRun& run, const InvarianceRun& base, const Grid1D& x) {
    const std::size_t n = std::min(run.samples.size(), base.samples.size());
    const double h = x.spacing();
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
        const InvarianceSample& a = run.samples[i];
        const InvarianceSample& b = base.samples[i];
        if (std::abs(a.t - b.t) > 1e-9) throw DomainError("baseline samples are not aligned with the run");
        const ArrayX da = grid_kink_offset(x, a.xi_bar);
        const ArrayX db = a.xi_bar == b.xi_bar ? da : grid_kink_offset(x, b.xi_bar);
        const ArrayX ft = base.err_theta[i] + da - db;
        const ArrayX fp = base.err_psi[i] - a.u_bar * centered_slope(da, h) + b.u_bar * centered_slope(db, h);
        out.push_back(deviation_norm(run.err_theta[i] - ft, run.err_psi[i] - fp, x));
    }
    return out;
}

double floor_subtracted_sup(const InvarianceRun& run, const InvarianceRun& base, const Grid1D& x) {
    double sup = 0.0;
    for (double d : floor_subtracted_series(run, base, x)) sup = std::max(sup, d);
    return sup;
}

// ---------------------------------------------------------------------------

namespace {

RescaledTrajectory rescaled_run(const ManifoldModel& model, double eps, const RescaledOptions& o, double ds) {
    const LambdaField g = [&](double xi, double uh) { return eval_lambda(model, xi, eps * uh, eps) / (eps * eps); };
    const Trajectory tr = integrate_modulation(g, o.xi_s, o.uhat_s, o.S, ds, model.Xi, model.stencil.u_max() / eps);
    RescaledTrajectory r{eps, {}, {}, {}, {}, 0.0, 0.0, tr.exit_reason};
    for (const auto& st : tr.states) {
        r.s.push_back(st.t);
        r.xi_hat.push_back(st.xi_bar);
        r.u_hat.push_back(st.u_bar);
        double a = 0.0;
        try {
            a = g(st.xi_bar, st.u_bar);
        } catch (const DomainError&) {
            a = std::nan("");
        }
        r.accel.push_back(a);
        if (std::isfinite(a)) r.sup_accel = std::max(r.sup_accel, std::abs(a));
    }
    return r;
}

// sup over the first n common samples, with b sampled every `stride` entries.
double sup_gap(const RescaledTrajectory& a, const RescaledTrajectory& b, std::size_t stride) {
    double sup = 0.0;
    for (std::size_t i = 0; i < a.s.size() && i * stride < b.s.size(); ++i)
        sup = std::max({sup, std::abs(a.xi_hat[i] - b.xi_hat[i * stride]), std::abs(a.u_hat[i] - b.u_hat[i * stride])});
    return sup;
}

}  // namespace

RescaledReport rescaled_dynamics_check(const ManifoldModel& model, const std::vector<double>& eps,
                                       const RescaledOptions& opts) {
    if (model.order < 2) throw DomainError("rescaled dynamics needs a model of order >= 2");
    if (eps.empty()) throw DomainError("eps list is empty");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw DomainError("eps values must be positive");
        if (i > 0 && !(eps[i] < eps[i - 1])) throw DomainError("eps list must be strictly decreasing");
        check_eval_range(model, opts.xi_s, 0.0, eps[i]);
    }
    RescaledReport rep;
    for (double e : eps) {
        RescaledTrajectory r = rescaled_run(model, e, opts, opts.ds);
        const RescaledTrajectory fine = rescaled_run(model, e, opts, 0.5 * opts.ds);
        r.integrator_error = sup_gap(r, fine, 2);
        rep.max_integrator_error = std::max(rep.max_integrator_error, r.integrator_error);
        rep.runs.push_back(std::move(r));
    }
    for (std::size_t i = 0; i + 1 < rep.runs.size(); ++i) rep.pairwise.push_back(sup_gap(rep.runs[i], rep.runs[i + 1], 1));
    rep.strictly_decreasing = true;
    for (std::size_t i = 0; i + 1 < rep.pairwise.size(); ++i)
        if (!(rep.pairwise[i + 1] < rep.pairwise[i])) rep.strictly_decreasing = false;
    rep.sup_accel = rep.runs.back().sup_accel;
    rep.nontrivial = rep.sup_accel > 10.0 * opts.tolerance;
    rep.limit_profile = rescaled_lambda(model, eps.back());
    return rep;
}

}  // namespace vsm

#include "commands.hpp"

#include "app_config.hpp"
#include "reports.hpp"
#include "vsm/errors.hpp"
#include "vsm/format.hpp"
#include "vsm/manifold_io.hpp"
#include "vsm/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>

#ifndef VSM_VERSION
#define VSM_VERSION "0.0.0"
#endif

namespace vsm::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int guarded(const char* name, const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << name << ": configuration error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << name << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericalError& e) {
        std::cerr << name << ": numerical failure in " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << name << ": failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

AppConfig config_of(const CommandOptions& o) { return o.config.empty() ? AppConfig{} : load_config(o.config); }

struct LoadedModel {
    ManifoldModel model;
    std::string hash;
};

LoadedModel model_of(const CommandOptions& o) {
    if (o.model.empty()) throw UsageError("--model is required");
    try {
        return {load_model(o.model), manifest_hash(o.model)};
    } catch (const DomainError& e) {
        throw UsageError(std::string("cannot load model: ") + e.what());
    }
}

std::vector<double> eps_of(const CommandOptions& o, const std::vector<double>& fallback) {
    return o.eps ? parse_double_list("--eps", *o.eps) : fallback;
}

std::vector<int> orders_of(const CommandOptions& o, const std::vector<int>& fallback) {
    return o.order ? parse_int_list("--order", *o.order) : fallback;
}

ManifoldModel truncated(const ManifoldModel& m, int order, const AppConfig& cfg) {
    if (order < 0 || order > m.order)
        throw UsageError("order " + std::to_string(order) + " outside [0, " + std::to_string(m.order) + "]");
    return order == m.order ? m : truncate(m, order, cfg.build);
}

void check_eps(const ManifoldModel& m, double eps) {
    if (!(std::abs(eps) <= m.validated_eps_max))
        throw UsageError("eps=" + format_double(eps) + " above validated_eps_max=" + format_double(m.validated_eps_max));
}

json bounds_json(const BoundsReport& b) {
    json entries = json::array();
    for (const auto& e : b.entries)
        entries.push_back({{"N", e.n}, {"K", e.k}, {"norm", e.norm}, {"c_needed", e.c_needed}, {"ratio", e.ratio}});
    return {{"fitted_c", b.fitted_c}, {"floor", b.floor}, {"max_ratio", b.max_ratio}, {"entries", entries}};
}

json stamp(const std::string& config_hash, const std::string& model_hash) {
    return {{"config_sha256", config_hash}, {"model_sha256", model_hash}};
}

std::string note(const std::string& config_hash, const std::string& model_hash) {
    return "config_sha256=" + config_hash + ", model_sha256=" + model_hash;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int cmd_build(const CommandOptions& o) {
    return guarded("build", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        AppConfig cfg = config_of(o);
        if (o.order) {
            const auto orders = parse_int_list("--order", *o.order);
            if (orders.size() != 1) throw UsageError("build takes a single --order");
            cfg.build.order = orders.front();
            if (cfg.build.order < 0 || cfg.build.order > 12) throw UsageError("--order must lie in [0, 12]");
        }
        cfg.build.threads = o.threads;
        const std::string chash = config_hash(cfg);
        const fs::path out = o.out_dir;
        const BuildResult r = build_manifold(cfg.build);
        const ManifoldModel& m = r.model;
        const fs::path model_dir = out / "model";
        save_model(m, model_dir, {{"tool", "vsm"}, {"version", VSM_VERSION}, {"config_sha256", chash}});
        const std::string mhash = manifest_hash(model_dir);
        write_atomic(out / "config.ini", to_ini(cfg));

        double sup_hat = 0.0;
        for (const auto& s : m.series)
            for (const auto& c : s.coeffs())
                sup_hat = std::max({sup_hat, c.theta.max_abs(), c.psi.max_abs(), c.lambda.max_abs()});
        json forcing = m.forcing.describe();
        forcing["growth_constant"] = m.forcing.growth_constant(std::max(m.order, 2), m.grid->x(), m.alpha);
        json report = stamp(chash, mhash);
        report["classical_manifold"] = sup_hat <= 1e-12;
        report["order"] = m.order;
        report["u_nodes"] = json::array();
        for (std::size_t p = 0; p < m.stencil.size(); ++p) report["u_nodes"].push_back(m.stencil[p]);
        report["validated_eps_max"] = m.validated_eps_max;
        report["eps_diagnosed"] = m.eps_diagnosed;
        report["warnings"] = m.warnings;
        report["forcing"] = forcing;
        report["max_solve_residual"] = r.stats.max_solve_residual;
        report["max_membership_defect"] = r.stats.max_membership_defect;
        report["condition_estimates"] = r.stats.conditions;
        report["factor_nonzeros"] = r.stats.factor_nonzeros;
        report["bounds"] = bounds_json(bounds_report(m, 3, cfg.build.bound_floor));
        write_json(out / "build_report.json", report);
        write_json(out / "timings.json", {{"assemble_seconds", r.stats.assemble_seconds},
                                          {"factor_seconds", r.stats.factor_seconds},
                                          {"order_seconds", r.stats.order_seconds},
                                          {"total_seconds", seconds_since(t0)}});
        std::cout << "model written to " << model_dir.string() << " (order " << m.order << ", validated eps "
                  << format_double(m.validated_eps_max) << ")\n";
    });
}

int cmd_residual_sweep(const CommandOptions& o) {
    return guarded("residual-sweep", [&] {
        const AppConfig cfg = config_of(o);
        const LoadedModel lm = model_of(o);
        const std::string chash = config_hash(cfg);
        const std::vector<double> eps = eps_of(o, cfg.residual_eps);
        const std::vector<int> orders = orders_of(o, cfg.residual_orders);
        std::vector<ManifoldModel> models;
        for (int M : orders) models.push_back(truncated(lm.model, M, cfg));
        for (const auto& m : models)
            for (double e : eps) check_eps(m, e);

        struct Point {
            double raw = 0.0, sub = 0.0;
        };
        std::vector<ResidualResult> floors(models.size(), ResidualResult{PairZ{}, 0.0});
        parallel_for(models.size(), o.threads, [&](std::size_t i) { floors[i] = residual(models[i], 0.0, 0.0); });
        std::vector<Point> pts(models.size() * eps.size());
        parallel_for(pts.size(), o.threads, [&](std::size_t k) {
            const std::size_t i = k / eps.size(), j = k % eps.size();
            const ResidualResult r = residual(models[i], 0.0, eps[j]);
            pts[k] = {r.znorm, plateau_znorm(models[i], r.fields - floors[i].fields)};
        });

        Csv csv(chash, lm.hash, {"M", "eps", "znorm", "floor", "subtracted", "slope"});
        std::vector<PlotSeries> plot;
        json slopes = json::object();
        for (std::size_t i = 0; i < models.size(); ++i) {
            PlotSeries s{"M=" + std::to_string(orders[i]), eps, {}};
            for (std::size_t j = 0; j < eps.size(); ++j) s.y.push_back(pts[i * eps.size() + j].sub);
            const double slope = loglog_slope(s.x, s.y);
            slopes[std::to_string(orders[i])] = std::isfinite(slope) ? json(slope) : json(nullptr);
            for (std::size_t j = 0; j < eps.size(); ++j) {
                const Point& p = pts[i * eps.size() + j];
                csv.row({std::to_string(orders[i]), format_double(eps[j]), format_double(p.raw),
                         format_double(floors[i].znorm), format_double(p.sub), format_double(slope)});
            }
            plot.push_back(std::move(s));
        }
        const fs::path out = o.out_dir;
        write_atomic(out / "residual_sweep.csv", csv.text());
        write_atomic(out / "residual_sweep.svg",
                     svg_plot({"Residual after floor subtraction", "eps", "Z norm", true, true, note(chash, lm.hash)},
                              plot));
        json summary = stamp(chash, lm.hash);
        summary["slopes"] = slopes;
        write_json(out / "residual_sweep.json", summary);
    });
}

int cmd_simulate(const CommandOptions& o) {
    return guarded("simulate", [&] {
        const AppConfig cfg = config_of(o);
        const LoadedModel lm = model_of(o);
        const std::string chash = config_hash(cfg);
        const auto eps = eps_of(o, {cfg.dynamics.eps});
        if (eps.size() != 1) throw UsageError("simulate takes a single --eps");
        const auto orders = orders_of(o, {lm.model.order});
        if (orders.size() != 1) throw UsageError("simulate takes a single --order");
        const ManifoldModel m = truncated(lm.model, orders.front(), cfg);
        const DynamicsConfig& d = cfg.dynamics;
        check_eps(m, eps.front());
        if (std::abs(d.xi_s) > m.Xi) throw UsageError("dynamics.xi_s outside the plateau |xi| <= Xi");
        if (std::abs(d.u_s) >= m.stencil.u_max()) throw UsageError("dynamics.u_s outside |u| < u_*");

        const Trajectory tr = integrate_modulation(m, d.xi_s, d.u_s, eps.front(), d.invariance.T, d.invariance.dt);
        Csv csv(chash, lm.hash, {"t", "xi_bar", "u_bar", "lambda"});
        PlotSeries xs{"xi_bar", {}, {}}, us{"u_bar", {}, {}};
        for (const auto& s : tr.states) {
            double lam = std::nan("");
            try {
                lam = eval_lambda(m, s.xi_bar, s.u_bar, eps.front());
            } catch (const DomainError&) {
            }
            csv.row(std::vector<double>{s.t, s.xi_bar, s.u_bar, lam});
            xs.x.push_back(s.t);
            xs.y.push_back(s.xi_bar);
            us.x.push_back(s.t);
            us.y.push_back(s.u_bar);
        }
        const fs::path out = o.out_dir;
        write_atomic(out / "trajectory.csv", csv.text());
        write_atomic(out / "trajectory.svg",
                     svg_plot({"Modulation trajectory", "t", "value", false, false, note(chash, lm.hash)}, {xs, us}));
        json j = stamp(chash, lm.hash);
        j["order"] = m.order;
        j["eps"] = eps.front();
        j["exit_reason"] = to_string(tr.exit_reason);
        j["final"] = {{"t", tr.states.back().t}, {"xi_bar", tr.states.back().xi_bar}, {"u_bar", tr.states.back().u_bar}};
        write_json(out / "simulate.json", j);
    });
}

int cmd_verify(const CommandOptions& o) {
    return guarded("verify", [&] {
        const AppConfig cfg = config_of(o);
        const LoadedModel lm = model_of(o);
        const std::string chash = config_hash(cfg);
        const DynamicsConfig& d = cfg.dynamics;
        const VerifyConfig& v = cfg.verify;
        const auto eps_list = eps_of(o, {d.eps});
        if (eps_list.size() != 1) throw UsageError("verify takes a single --eps");
        const double eps = eps_list.front();
        const std::vector<int> orders = orders_of(o, v.orders);
        const ManifoldModel& full = lm.model;
        if (std::abs(d.xi_s) > full.Xi) throw UsageError("dynamics.xi_s outside the plateau |xi| <= Xi");
        if (std::abs(d.u_s) >= full.stencil.u_max()) throw UsageError("dynamics.u_s outside |u| < u_*");

        struct Job {
            int order;
            double eps;
            bool sweep;
        };
        std::vector<Job> jobs;
        for (int M : orders) jobs.push_back({M, eps, false});
        const bool sweep = !v.eps_sweep.empty() && v.sweep_order <= full.order;
        if (sweep)
            for (double e : v.eps_sweep) jobs.push_back({v.sweep_order, e, true});
        std::vector<ManifoldModel> models;
        for (const Job& j : jobs) {
            models.push_back(truncated(full, j.order, cfg));
            check_eps(models.back(), j.eps);
        }

        const InvarianceRun base = verify_invariance(full, d.xi_s, d.u_s, 0.0, d.invariance);
        std::vector<InvarianceRun> runs(jobs.size());
        parallel_for(jobs.size(), o.threads,
                     [&](std::size_t i) { runs[i] = verify_invariance(models[i], d.xi_s, d.u_s, jobs[i].eps, d.invariance); });

        const Grid1D& x = full.grid->x();
        Csv csv(chash, lm.hash, {"M", "eps", "t", "xi_bar", "u_bar", "d", "d_floor_subtracted"});
        for (const auto& s : base.samples)
            csv.row(std::vector<double>{0.0, 0.0, s.t, s.xi_bar, s.u_bar, s.d, 0.0});
        json jr = json::array();
        std::vector<double> sub(jobs.size());
        std::vector<PlotSeries> plot;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            const auto series = floor_subtracted_series(runs[i], base, x);
            PlotSeries ps{"M=" + std::to_string(jobs[i].order) + " eps=" + format_double(jobs[i].eps), {}, {}};
            for (std::size_t k = 0; k < runs[i].samples.size(); ++k) {
                const auto& s = runs[i].samples[k];
                const double f = k < series.size() ? series[k] : std::nan("");
                csv.row(std::vector<double>{static_cast<double>(jobs[i].order), jobs[i].eps, s.t, s.xi_bar, s.u_bar, s.d, f});
                ps.x.push_back(s.t);
                ps.y.push_back(f);
                if (std::isfinite(f)) sub[i] = std::max(sub[i], f);
            }
            if (!jobs[i].sweep) plot.push_back(std::move(ps));
            jr.push_back({{"M", jobs[i].order},
                          {"eps", jobs[i].eps},
                          {"sweep", jobs[i].sweep},
                          {"sup_d", runs[i].sup_d},
                          {"sup_d_floor_subtracted", sub[i]},
                          {"horizon", runs[i].horizon},
                          {"exit_reason", to_string(runs[i].exit_reason)}});
        }

        json checks = json::object();
        bool pass = true;
        {
            std::vector<double> vals;
            bool mono = true;
            for (std::size_t i = 0; i < orders.size(); ++i) {
                vals.push_back(sub[i]);
                const bool at_floor = sub[i] <= v.noise_tolerance && (i == 0 || sub[i - 1] <= v.noise_tolerance);
                if (i > 0 && !(orders[i] > orders[i - 1] && (sub[i] < sub[i - 1] || at_floor))) mono = false;
            }
            checks["monotone_in_order"] = {{"orders", orders}, {"values", vals}, {"pass", mono}};
            pass = pass && mono;
        }
        if (sweep) {
            std::vector<double> vals(sub.begin() + static_cast<std::ptrdiff_t>(orders.size()), sub.end());
            const double slope = loglog_slope(v.eps_sweep, vals);
            const bool at_floor = std::all_of(vals.begin(), vals.end(), [&](double x) { return x <= v.noise_tolerance; });
            const bool ok = at_floor || (std::isfinite(slope) && slope >= v.min_eps_slope);
            checks["eps_slope"] = {{"order", v.sweep_order}, {"eps", v.eps_sweep}, {"values", vals},
                                   {"slope", std::isfinite(slope) ? json(slope) : json(nullptr)},
                                   {"threshold", v.min_eps_slope}, {"at_floor", at_floor}, {"pass", ok}};
            pass = pass && ok;
        }
        for (const auto& r : runs) pass = pass && r.exit_reason == ExitReason::completed;

        json verdict = stamp(chash, lm.hash);
        verdict["scenario"] = {{"xi_s", d.xi_s}, {"u_s", d.u_s}, {"eps", eps}, {"T", d.invariance.T},
                               {"dt", d.invariance.dt}};
        verdict["floor_estimate"] = base.sup_d;
        verdict["runs"] = jr;
        verdict["checks"] = checks;
        verdict["pass"] = pass;
        const fs::path out = o.out_dir;
        write_atomic(out / "verify.csv", csv.text());
        write_json(out / "verdict.json", verdict);
        write_atomic(out / "verify.svg", svg_plot({"Deviation after floor subtraction", "t", "d(t)", false, true,
                                                    note(chash, lm.hash)},
                                                   plot));
        std::cout << "verdict: " << (pass ? "pass" : "fail") << "\n";
    });
}

int cmd_bounds_check(const CommandOptions& o) {
    return guarded("bounds-check", [&] {
        const AppConfig cfg = config_of(o);
        const LoadedModel lm = model_of(o);
        const std::string chash = config_hash(cfg);
        const BoundsReport b = bounds_report(lm.model, 3, cfg.build.bound_floor);
        Csv csv(chash, lm.hash, {"N", "K", "norm", "c_needed", "ratio"});
        for (const auto& e : b.entries)
            csv.row(std::vector<double>{static_cast<double>(e.n), static_cast<double>(e.k), e.norm, e.c_needed, e.ratio});
        json j = stamp(chash, lm.hash);
        j["order"] = lm.model.order;
        j["bounds"] = bounds_json(b);
        const fs::path out = o.out_dir;
        write_atomic(out / "bounds.csv", csv.text());
        write_json(out / "bounds.json", j);
    });
}

int cmd_rescaled_check(const CommandOptions& o) {
    return guarded("rescaled-check", [&] {
        const AppConfig cfg = config_of(o);
        const LoadedModel lm = model_of(o);
        const std::string chash = config_hash(cfg);
        const auto eps = eps_of(o, cfg.dynamics.rescaled_eps);
        for (double e : eps) check_eps(lm.model, e);
        for (std::size_t i = 1; i < eps.size(); ++i)
            if (!(eps[i] < eps[i - 1])) throw UsageError("--eps must be strictly decreasing");
        RescaledOptions ro = cfg.dynamics.rescaled;
        ro.xi_s = cfg.dynamics.xi_s;
        if (std::abs(ro.xi_s) > lm.model.Xi) throw UsageError("dynamics.xi_s outside the plateau |xi| <= Xi");
        const RescaledReport r = rescaled_dynamics_check(lm.model, eps, ro);

        Csv csv(chash, lm.hash, {"eps", "s", "xi_hat", "u_hat", "du_hat_ds"});
        std::vector<PlotSeries> plot;
        json runs = json::array();
        for (const auto& t : r.runs) {
            PlotSeries ps{"eps=" + format_double(t.eps), t.s, t.u_hat};
            for (std::size_t k = 0; k < t.s.size(); ++k)
                csv.row(std::vector<double>{t.eps, t.s[k], t.xi_hat[k], t.u_hat[k], t.accel[k]});
            plot.push_back(std::move(ps));
            runs.push_back({{"eps", t.eps},
                            {"integrator_error", t.integrator_error},
                            {"sup_accel", t.sup_accel},
                            {"exit_reason", to_string(t.exit_reason)}});
        }
        Csv prof(chash, lm.hash, {"xi", "lambda_over_eps2"});
        const Grid1D& pg = *r.limit_profile.grid_ptr();
        for (std::size_t i = 0; i < pg.size(); ++i) prof.row(std::vector<double>{pg[i], r.limit_profile[i]});
        json j = stamp(chash, lm.hash);
        j["runs"] = runs;
        j["pairwise_sup_differences"] = r.pairwise;
        j["strictly_decreasing"] = r.strictly_decreasing;
        j["integrator_tolerance"] = ro.tolerance;
        j["max_integrator_error"] = r.max_integrator_error;
        j["sup_accel"] = r.sup_accel;
        j["nontrivial"] = r.nontrivial;
        j["pass"] = r.strictly_decreasing && r.nontrivial && r.max_integrator_error <= ro.tolerance;
        const fs::path out = o.out_dir;
        write_atomic(out / "rescaled.csv", csv.text());
        write_atomic(out / "limit_profile.csv", prof.text());
        write_json(out / "rescaled.json", j);
        write_atomic(out / "rescaled.svg",
                     svg_plot({"Rescaled velocity", "s", "u_hat", false, false, note(chash, lm.hash)}, plot));
    });
}

}  // namespace vsm::app

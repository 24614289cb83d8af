#pragma once

// Modulation ODEs, the perturbed sine-Gordon PDE on the x-grid, and the
// comparison between the two along the manifold.

#include "vsm/manifold_eval.hpp"

#include <functional>
#include <string>
#include <vector>

namespace vsm {

struct ModulationState {
    double xi_bar = 0.0;
    double u_bar = 0.0;
    double t = 0.0;
};

enum class ExitReason { completed, left_plateau, velocity_bound, error };
std::string to_string(ExitReason r);

struct Trajectory {
    std::vector<ModulationState> states;
    ExitReason exit_reason = ExitReason::completed;
    std::string message;
};

/// Acceleration field (xi, u) -> lambda.
using LambdaField = std::function<double(double, double)>;

/// One classical RK4 step of xi' = u, u' = f(xi, u).
ModulationState rk4_step(const LambdaField& f, const ModulationState& s, double dt);

/// RK4 up to T with exits when |xi| > Xi or |u| >= u_max; every step is recorded.
/// A DomainError from f inside a step ends the run with velocity_bound.
Trajectory integrate_modulation(const LambdaField& f, double xi_s, double u_s, double T, double dt, double Xi,
                                double u_max);

/// Same driven by the model's lambda at eps. dt <= 0 selects min(0.01, T/1000).
Trajectory integrate_modulation(const ManifoldModel& model, double xi_s, double u_s, double eps, double T,
                                double dt = 0.0);

struct FieldState {
    ArrayX theta;
    ArrayX psi;
    double t = 0.0;
};

struct PdeOptions {
    double dt = 0.005;
    /// Keep every k-th step (the first and the last state are always kept).
    std::size_t sample_every = 1;
    double blowup = 100.0;
};

/// theta_tt = theta_xx - sin theta + F on the grid by Stormer-Verlet
/// (kick-drift-kick), centred second differences, both end values pinned.
std::vector<FieldState> solve_pde(const FieldState& initial, const ArrayX& forcing, const Grid1D& x, double T,
                                  const PdeOptions& opts);

/// Advances state in place by `steps` Verlet steps.
void verlet_steps(FieldState& state, const ArrayX& forcing, const Grid1D& x, double dt, std::size_t steps,
                  double blowup = 100.0);

/// h sum (psi^2/2 + 1 - cos theta) + sum (theta_{j+1} - theta_j)^2 / (2h).
double energy(const FieldState& s, const Grid1D& x);

/// Discrete H1 norm of d_theta plus L2 norm of d_psi.
double deviation_norm(const ArrayX& d_theta, const ArrayX& d_psi, const Grid1D& x);

struct InvarianceOptions {
    double T = 20.0;
    double dt = 0.005;
    std::size_t sample_every = 20;
    /// Horizon cap 1/(c_tilde eps).
    double c_tilde = 0.5;
};

struct InvarianceSample {
    double t;
    double xi_bar;
    double u_bar;
    double d;
};

struct InvarianceRun {
    std::vector<InvarianceSample> samples;
    std::vector<ArrayX> err_theta;  // PDE minus manifold at each sample
    std::vector<ArrayX> err_psi;
    double sup_d = 0.0;
    double horizon = 0.0;
    ExitReason exit_reason = ExitReason::completed;
};

/// Runs the PDE from eval_state(xi_s, u_s, eps) next to the modulation ODE with the
/// same step and records d(t) between the PDE state and the manifold state.
InvarianceRun verify_invariance(const ManifoldModel& model, double xi_s, double u_s, double eps,
                                const InvarianceOptions& opts = {});

/// Static kink of the discrete equation theta_xx - sin theta = 0 on the grid
/// (ends pinned, centred at xi by orthogonality to the kink slope) minus the
/// sampled closed-form kink. O(h^2).
ArrayX grid_kink_offset(const Grid1D& x, double xi);

/// sup over common samples of the deviation after removing the discretization
/// floor: the eps = 0 baseline error fields, with the grid kink offset moved
/// from the baseline position to the run's (xi_bar, u_bar).
double floor_subtracted_sup(const InvarianceRun& run, const InvarianceRun& baseline, const Grid1D& x);
/// The same deviation at every common sample.
std::vector<double> floor_subtracted_series(const InvarianceRun& run, const InvarianceRun& baseline, const Grid1D& x);

struct RescaledOptions {
    double xi_s = 0.0;
    double uhat_s = 0.0;
    double S = 2.0;
    double ds = 0.01;
    /// Integrator tolerance; the step-halving error must stay below it.
    double tolerance = 1e-8;
};

struct RescaledTrajectory {
    double eps;
    std::vector<double> s, xi_hat, u_hat, accel;
    double integrator_error;
    double sup_accel;
    ExitReason exit_reason;
};

struct RescaledReport {
    std::vector<RescaledTrajectory> runs;
    /// sup over s of max(|d xi_hat|, |d u_hat|) between consecutive eps.
    std::vector<double> pairwise;
    bool strictly_decreasing = false;
    double max_integrator_error = 0.0;
    double sup_accel = 0.0;
    bool nontrivial = false;
    GridFn1D limit_profile;  // rescaled lambda at the smallest eps
};

/// Integrates d xi/ds = u_hat, d u_hat/ds = lambda(xi, eps u_hat, eps) / eps^2.
RescaledReport rescaled_dynamics_check(const ManifoldModel& model, const std::vector<double>& eps,
                                       const RescaledOptions& opts = {});

}  // namespace vsm

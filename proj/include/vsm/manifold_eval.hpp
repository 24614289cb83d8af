#pragma once

// Point evaluation of the manifold, of its driver lambda and of the residual
// of the defining relation on the (xi, x) grid.

#include "vsm/manifold_builder.hpp"

namespace vsm {

/// (theta, psi) along the x-grid at (xi_bar, u, eps): kink background plus the
/// eps-evaluated corrections, barycentric in u and cubic in xi.
SolitonSlice eval_state(const ManifoldModel& model, double xi_bar, double u, double eps);
/// Corrections only (no background).
SolitonSlice eval_correction(const ManifoldModel& model, double xi_bar, double u, double eps);

double eval_lambda(const ManifoldModel& model, double xi_bar, double u, double eps);

/// Throws DomainError unless |u| <= u_*, xi_bar lies on the grid and
/// |eps| <= validated_eps_max.
void check_eval_range(const ManifoldModel& model, double xi_bar, double u, double eps);

struct ResidualResult {
    PairZ fields;  // zero on boundary rows and columns
    double znorm;  // Z norm over the plateau |xi| <= Xi
};

/// Residual of u d_xi(theta, psi) - (psi, theta_xx - sin theta + F~(eps)) + lambda d_u(theta, psi)
/// with the full forcing. Requires |u| < u_*.
ResidualResult residual(const ManifoldModel& model, double u, double eps);

/// Z norm of a field pair restricted to the plateau.
double plateau_znorm(const ManifoldModel& model, const PairZ& z);

/// Residual norm with the eps = 0 residual field subtracted.
double floor_subtracted_residual(const ManifoldModel& model, double u, double eps, const ResidualResult& floor);

/// xi -> eval_lambda(xi, 0, eps) / eps^2 on the plateau nodes.
GridFn1D rescaled_lambda(const ManifoldModel& model, double eps);

}  // namespace vsm

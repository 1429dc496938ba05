#pragma once

#include <vector>

#include "extremal/fields.hpp"

namespace extremal {

// g(u) = H0I - <H0I, u> u - HIJ u; tangent to the unit sphere at u.
Vector sphere_rhs(const Vector& u, const Vector& H0I, const Matrix& HIJ);

struct SphereState {
    double s = 0.0;
    Vector u;
};

struct LorentzState {
    double s = 0.0;
    double x = 0.0;
    Vector y;
};

struct SphereOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    double max_step = 0.5;
    double output_ds = 0.0;  // 0: one sample per accepted step
    long max_steps = 10'000'000;
};

struct SphereTrajectory {
    std::vector<SphereState> states;  // ordered by integration progress (s decreasing when s_end < 0)
    double max_norm_drift = 0.0;      // largest | ||u|| - 1 | seen before re-projection
};

// Integrates u' = g(u) from s = 0 to s_end (either sign), re-projecting onto the
// sphere after every accepted step.
SphereTrajectory integrate_sphere(const Vector& u0, const Vector& H0I, const Matrix& HIJ, double s_end,
                                  const SphereOptions& options = {});

struct SphereLimits {
    double d = 0.0;
    double s_max = 0.0;          // 40 / d
    Vector forward;              // u(s_max)
    Vector backward;             // u(-s_max)
    double forward_error = 0.0;  // || u(s_max) - u_+ ||
    double backward_error = 0.0; // || u(-s_max) - u_- ||
    bool converged = false;      // both errors below eps_conv
};

// Integrates to s = +-40/d and compares against the jump controls. Non-convergence
// is reported through `converged`, not thrown.
SphereLimits sphere_asymptotics(const Vector& u0, const Vector& H0I, const Matrix& HIJ, double eps_conv = 1e-6,
                                const SphereOptions& options = {});

// B = [[0, H0I^T], [H0I, -HIJ]], the generator of x' = <H0I, y>, y' = x H0I - HIJ y.
Matrix lorentz_matrix(const Vector& H0I, const Matrix& HIJ);

// Q(x, y) = x^2 - ||y||^2.
double lorentz_form(double x, const Vector& y);

// Exact propagation z(s) = exp(s B) z0 sampled at s = m * ds, closed by a final sample
// at s_end (a grid point within 1e-9 ds of s_end merges into it).
std::vector<LorentzState> integrate_lorentz(const LorentzState& z0, const Vector& H0I, const Matrix& HIJ,
                                            double s_end, double ds);

}  // namespace extremal

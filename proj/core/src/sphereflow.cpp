#include "extremal/sphereflow.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "extremal/errors.hpp"
#include "extremal/switching.hpp"
#include "ode.hpp"

namespace extremal {

Vector sphere_rhs(const Vector& u, const Vector& H0I, const Matrix& HIJ) {
    if (u.size() != H0I.size() || HIJ.rows() != u.size() || HIJ.cols() != u.size()) {
        throw DimensionError("sphere_rhs: dimension mismatch");
    }
    return H0I - H0I.dot(u) * u - HIJ * u;
}

SphereTrajectory integrate_sphere(const Vector& u0, const Vector& H0I, const Matrix& HIJ, double s_end,
                                  const SphereOptions& options) {
    check_skew_pair(H0I, HIJ);
    const Eigen::Index k = H0I.size();
    if (u0.size() != k) {
        throw DimensionError("integrate_sphere: u0 dimension mismatch");
    }
    if (!(u0.norm() > 0.0)) {
        throw DomainError("integrate_sphere: u0 must be nonzero");
    }
    const double sigma = s_end < 0.0 ? -1.0 : 1.0;
    const double span = std::abs(s_end);

    // Integrate in tau = sigma * s so the stepper always moves forward.
    auto rhs = [&](const detail::OdeState& x, detail::OdeState& dxdt, double) {
        const Eigen::Map<const Vector> u(x.data(), k);
        Eigen::Map<Vector> out(dxdt.data(), k);
        out = sigma * (H0I - H0I.dot(u) * u - HIJ * u);
    };

    SphereTrajectory traj;
    detail::OdeState x(u0.data(), u0.data() + k);
    Eigen::Map<Vector>(x.data(), k).normalize();
    traj.states.push_back({0.0, Eigen::Map<const Vector>(x.data(), k)});

    detail::Dopri5 stepper(options.abs_tol, options.rel_tol);
    const bool gridded = options.output_ds > 0.0;
    const detail::OutputGrid grid(gridded ? options.output_ds : span, span);
    double tau = 0.0;
    double dt = std::min(options.max_step, 1e-3);
    long next_index = 1;
    long steps = 0;
    while (tau < span) {
        if (++steps > options.max_steps) {
            throw NumericalError("integrate_sphere: step budget exhausted");
        }
        const double target = gridded ? grid.point(next_index) : span;
        dt = std::min({dt, target - tau, options.max_step});
        const double tau_before = tau;
        const double dt_used = dt;
        if (!stepper.try_step(rhs, x, tau, dt)) {
            continue;
        }
        Eigen::Map<Vector> u(x.data(), k);
        traj.max_norm_drift = std::max(traj.max_norm_drift, std::abs(u.norm() - 1.0));
        u.normalize();
        stepper.invalidate();
        const bool reached = dt_used >= target - tau_before;
        if (reached) {
            tau = target;
            ++next_index;
        }
        if (!gridded || reached) {
            traj.states.push_back({sigma * tau, u});
        }
    }
    return traj;
}

SphereLimits sphere_asymptotics(const Vector& u0, const Vector& H0I, const Matrix& HIJ, double eps_conv,
                                const SphereOptions& options) {
    SphereLimits out;
    out.d = solve_d(H0I, HIJ);
    const SwitchSolution jump = jump_controls(H0I, HIJ, out.d);
    out.s_max = 40.0 / out.d;
    SphereOptions opts = options;
    opts.output_ds = 0.0;
    opts.max_step = std::min(options.max_step, out.s_max / 20.0);
    out.forward = integrate_sphere(u0, H0I, HIJ, out.s_max, opts).states.back().u;
    out.backward = integrate_sphere(u0, H0I, HIJ, -out.s_max, opts).states.back().u;
    out.forward_error = (out.forward - jump.u_plus).norm();
    out.backward_error = (out.backward - jump.u_minus).norm();
    out.converged = out.forward_error < eps_conv && out.backward_error < eps_conv;
    return out;
}

Matrix lorentz_matrix(const Vector& H0I, const Matrix& HIJ) {
    check_skew_pair(H0I, HIJ);
    const Eigen::Index k = H0I.size();
    Matrix B = Matrix::Zero(k + 1, k + 1);
    B.block(0, 1, 1, k) = H0I.transpose();
    B.block(1, 0, k, 1) = H0I;
    B.block(1, 1, k, k) = -HIJ;
    return B;
}

double lorentz_form(double x, const Vector& y) { return x * x - y.squaredNorm(); }

std::vector<LorentzState> integrate_lorentz(const LorentzState& z0, const Vector& H0I, const Matrix& HIJ,
                                            double s_end, double ds) {
    const Matrix B = lorentz_matrix(H0I, HIJ);
    const Eigen::Index k = H0I.size();
    if (z0.y.size() != k) {
        throw DimensionError("integrate_lorentz: y dimension mismatch");
    }
    if (!(ds > 0.0)) {
        throw DomainError("integrate_lorentz: ds must be positive");
    }
    Vector z(k + 1);
    z[0] = z0.x;
    z.tail(k) = z0.y;

    const detail::OutputGrid grid(ds, std::abs(s_end));
    std::vector<LorentzState> out;
    out.reserve(static_cast<std::size_t>(grid.count + 1));
    out.push_back(z0);
    for (long m = 1; m <= grid.count; ++m) {
        const double s = m == grid.count ? s_end : std::copysign(grid.point(m), s_end);
        const Matrix P = (s * B).exp();
        const Vector zs = P * z;
        out.push_back({z0.s + s, zs[0], zs.tail(k)});
    }
    return out;
}

}  // namespace extremal

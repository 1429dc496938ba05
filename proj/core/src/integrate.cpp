#include "extremal/integrate.hpp"

#include <algorithm>
#include <cmath>

#include "extremal/errors.hpp"
#include "ode.hpp"

namespace extremal {

namespace {

// State layout: [x (n), rho, u (k), h_tail (n - k)].
struct Layout {
    int n;
    int k;

    std::size_t size() const { return static_cast<std::size_t>(2 * n + 1); }

    void pack(const LiftedPoint& lp, detail::OdeState& y) const {
        y.resize(size());
        Eigen::Map<Vector>(y.data(), n) = lp.x;
        y[static_cast<std::size_t>(n)] = lp.rho;
        Eigen::Map<Vector>(y.data() + n + 1, k) = lp.u;
        Eigen::Map<Vector>(y.data() + n + 1 + k, n - k) = lp.h_tail;
    }

    void pack_rate(const LiftedRate& r, double scale, detail::OdeState& y) const {
        Eigen::Map<Vector>(y.data(), n) = scale * r.x;
        y[static_cast<std::size_t>(n)] = scale * r.rho;
        Eigen::Map<Vector>(y.data() + n + 1, k) = scale * r.u;
        Eigen::Map<Vector>(y.data() + n + 1 + k, n - k) = scale * r.h_tail;
    }

    LiftedPoint unpack(const detail::OdeState& y) const {
        LiftedPoint lp;
        lp.x = Eigen::Map<const Vector>(y.data(), n);
        lp.rho = y[static_cast<std::size_t>(n)];
        lp.u = Eigen::Map<const Vector>(y.data() + n + 1, k);
        lp.h_tail = Eigen::Map<const Vector>(y.data() + n + 1 + k, n - k);
        return lp;
    }

    double& rho(detail::OdeState& y) const { return y[static_cast<std::size_t>(n)]; }
    Eigen::Map<Vector> u(detail::OdeState& y) const { return {y.data() + n + 1, k}; }
};

void check_lifted(const AffineSystem& system, const LiftedPoint& lp) {
    const int n = system.n();
    const int k = system.k();
    if (lp.x.size() != n || lp.u.size() != k || lp.h_tail.size() != n - k) {
        throw DimensionError("lifted point dimension does not match the system");
    }
}

// Rates of the unrescaled flow with the 1/rho factor left out of the u-equation.
LiftedRate flow_terms(const AffineSystem& system, const LiftedPoint& lp) {
    const CotangentPoint lam = from_blowup(system, lp);
    const FrameBrackets fb = frame_brackets(system, lam);
    LiftedRate r;
    r.x = system.drift()(lp.x) + system.control_frame(lp.x) * lp.u;
    r.rho = fb.data.H0I.dot(lp.u);
    r.u = fb.data.H0I - r.rho * lp.u - fb.data.HIJ * lp.u;
    r.h_tail = fb.H0T + fb.HIT.transpose() * lp.u;
    return r;
}

void check_config(const IntegratorConfig& c) {
    if (!(c.eps_switch > 0.0) || !(c.abs_tol > 0.0) || !(c.rel_tol > 0.0) || !(c.max_step > 0.0) ||
        !(c.output_dt >= 0.0) || !(c.chart_radius > 0.0) || !(c.initial_step > 0.0) || c.max_steps <= 0) {
        throw DomainError("integrator configuration values must be positive");
    }
}

}  // namespace

LiftedRate bang_rhs(const AffineSystem& system, const LiftedPoint& lp) {
    check_lifted(system, lp);
    if (!(lp.rho > 0.0)) {
        throw DomainError("bang_rhs requires rho > 0; use rescaled_rhs on the singular locus");
    }
    LiftedRate r = flow_terms(system, lp);
    r.u /= lp.rho;
    return r;
}

LiftedRate rescaled_rhs(const AffineSystem& system, const LiftedPoint& lp) {
    check_lifted(system, lp);
    LiftedRate r = flow_terms(system, lp);
    r.x *= lp.rho;
    r.rho *= lp.rho;
    r.h_tail *= lp.rho;
    return r;
}

ExtremalTrajectory integrate_extremal(const AffineSystem& system, const LiftedPoint& z, double t_hat, double t_end,
                                      const IntegratorConfig& config) {
    check_lifted(system, z);
    check_config(config);
    if (!(z.rho > 0.0)) {
        throw DomainError("integrate_extremal: the start must lie off the singular locus (rho > 0)");
    }
    if (!(z.u.norm() > 0.0)) {
        throw DomainError("integrate_extremal: zero sphere coordinate");
    }
    const Layout layout{system.n(), system.k()};
    const Vector center = config.chart_center.value_or(z.x);
    if (center.size() != z.x.size()) {
        throw DimensionError("chart center dimension mismatch");
    }
    if ((z.x - center).norm() > config.chart_radius) {
        throw ChartError("integrate_extremal: start lies outside the chart");
    }

    const double sigma = t_end >= t_hat ? 1.0 : -1.0;
    const double span = std::abs(t_end - t_hat);
    const bool gridded = config.output_dt > 0.0;
    const detail::OutputGrid grid(gridded ? config.output_dt : span, span);

    auto rhs = [&](const detail::OdeState& y, detail::OdeState& dydt, double) {
        dydt.resize(y.size());
        layout.pack_rate(bang_rhs(system, layout.unpack(y)), sigma, dydt);
    };

    ExtremalTrajectory traj;
    detail::OdeState y;
    LiftedPoint start = z;
    start.u.normalize();
    layout.pack(start, y);
    traj.min_rho = z.rho;

    double last_tau = 0.0;
    auto record = [&](double tau, const detail::OdeState& state, bool on_grid) {
        TrajectorySample s;
        s.t = t_hat + sigma * tau;
        s.point = layout.unpack(state);
        s.control = s.point.u;
        s.on_grid = on_grid;
        traj.samples.push_back(std::move(s));
        last_tau = tau;
    };
    record(0.0, y, true);

    auto apply_switch = [&](double tau, detail::OdeState& state) {
        if (!traj.switches.empty()) {
            throw ChartError("integrate_extremal: second switch inside the chart; shrink chart_radius");
        }
        LiftedPoint at = layout.unpack(state);
        at.u.normalize();
        LiftedPoint on_locus = at;
        on_locus.rho = 0.0;
        const BracketData data = bracket_data(system, from_blowup(system, on_locus));
        SwitchEvent ev;
        ev.t = t_hat + sigma * tau;
        ev.location = at;
        ev.scenario = classify(data.H0I, data.HIJ, config.tolerances);
        if (ev.scenario == Scenario::CondEqqFails) {
            throw DomainError("integrate_extremal: crossing point violates H0I not in HIJ S^{k-1}");
        }
        if (ev.scenario == Scenario::Cdoubleprime) {
            throw NumericalError(
                "integrate_extremal: rho reached eps_switch in scenario Cdoubleprime; tolerances are inconsistent");
        }
        ev.predicted = jump_controls(data.H0I, data.HIJ, solve_d(data.H0I, data.HIJ));
        if (sigma > 0.0) {
            ev.u_before = at.u;
            ev.u_after = ev.predicted.u_plus;
            layout.u(state) = ev.predicted.u_plus;
        } else {
            ev.u_before = ev.predicted.u_minus;
            ev.u_after = at.u;
            layout.u(state) = ev.predicted.u_minus;
        }
        ev.before_error = (ev.u_before - ev.predicted.u_minus).norm();
        ev.after_error = (ev.u_after - ev.predicted.u_plus).norm();
        traj.switches.push_back(std::move(ev));
    };

    detail::Dopri5 stepper(config.abs_tol, config.rel_tol);
    double tau = 0.0;
    double dt = std::min({config.initial_step, config.max_step, span});
    const double min_dt = 1e-15 * std::max(1.0, span);
    long next_index = 1;
    detail::OdeState y_old;
    detail::OdeState y_probe;

    while (tau < span) {
        if (++traj.steps > config.max_steps) {
            throw NumericalError("integrate_extremal: step budget exhausted");
        }
        const double target =
            gridded ? grid.point(next_index) : span;
        // A step clipped to land on the grid must not shrink the next proposal.
        const double proposal = std::min(dt, config.max_step);
        dt = std::min(proposal, target - tau);
        const bool clipped = dt < proposal;
        if (dt < min_dt && target - tau > min_dt) {
            throw NumericalError("integrate_extremal: step size underflow");
        }
        y_old = y;
        const double tau_old = tau;
        const double dt_used = dt;

        bool accepted = false;
        try {
            accepted = stepper.try_step(rhs, y, tau, dt);
        } catch (const Error&) {
            // A stage left the domain (rho <= 0 or a non-finite field value).
            y = y_old;
            tau = tau_old;
            dt = 0.5 * dt_used;
            stepper.invalidate();
            continue;
        }
        if (!accepted) {
            continue;
        }
        if (clipped) {
            dt = std::max(dt, proposal);
        }
        const bool finite = std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
        if (!finite || !(layout.rho(y) > 0.0)) {
            y = y_old;
            tau = tau_old;
            dt = 0.5 * dt_used;
            stepper.invalidate();
            continue;
        }

        const double rho_rate = stepper.derivative()[static_cast<std::size_t>(layout.n)];
        if (layout.rho(y) < config.eps_switch && rho_rate < 0.0) {
            // Bisect the step length so rho lands on the threshold.
            double lo = 0.0;
            double hi = dt_used;
            y_probe = y;
            detail::OdeState best = y;
            double best_h = dt_used;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                bool past = false;
                try {
                    stepper.fixed_step(rhs, y_old, tau_old, y_probe, mid);
                    past = !(y_probe[static_cast<std::size_t>(layout.n)] >= config.eps_switch);
                } catch (const Error&) {
                    past = true;
                }
                if (past) {
                    hi = mid;
                } else {
                    lo = mid;
                    best = y_probe;
                    best_h = mid;
                    if (y_probe[static_cast<std::size_t>(layout.n)] - config.eps_switch <= 1e-12) {
                        break;
                    }
                }
                if (hi - lo <= 1e-16 * std::max(1.0, tau_old)) {
                    break;
                }
            }
            if (best_h == dt_used) {
                // No probe stayed above the threshold; the old state is within tolerance.
                best = y_old;
                best_h = 0.0;
            }
            y = best;
            tau = tau_old + best_h;
            apply_switch(tau, y);
            stepper.invalidate();
            dt = std::max(dt_used - best_h, config.initial_step);
            traj.min_rho = std::min(traj.min_rho, layout.rho(y));
            if ((layout.unpack(y).x - center).norm() > config.chart_radius) {
                traj.termination = Termination::LeftChart;
                break;
            }
            if (tau > last_tau) {
                record(tau, y, false);
            }
            continue;
        }

        auto u = layout.u(y);
        if (std::abs(u.norm() - 1.0) > 1e-12) {
            u.normalize();
            stepper.invalidate();
        }
        traj.min_rho = std::min(traj.min_rho, layout.rho(y));
        const bool reached = dt_used >= target - tau_old;
        if (reached) {
            tau = target;
            ++next_index;
        }
        if ((Eigen::Map<const Vector>(y.data(), layout.n) - center).norm() > config.chart_radius) {
            traj.termination = Termination::LeftChart;
            break;
        }
        if ((!gridded || reached) && tau > last_tau) {
            record(tau, y, true);
        }
    }

    if (sigma < 0.0) {
        std::reverse(traj.samples.begin(), traj.samples.end());
    }
    return traj;
}

std::vector<RescaledSample> integrate_rescaled(const AffineSystem& system, const LiftedPoint& z, double t0,
                                               double s_end, double output_ds, const IntegratorConfig& config) {
    check_lifted(system, z);
    check_config(config);
    if (!(output_ds > 0.0)) {
        throw DomainError("integrate_rescaled: output_ds must be positive");
    }
    if (z.rho < 0.0) {
        throw DomainError("integrate_rescaled: rho must be nonnegative");
    }
    const Layout layout{system.n(), system.k()};
    const std::size_t t_index = layout.size();
    const double sigma = s_end < 0.0 ? -1.0 : 1.0;
    const double span = std::abs(s_end);
    const detail::OutputGrid grid(output_ds, span);

    auto rhs = [&](const detail::OdeState& y, detail::OdeState& dydt, double) {
        dydt.resize(y.size());
        const LiftedPoint lp = layout.unpack(y);
        layout.pack_rate(rescaled_rhs(system, lp), sigma, dydt);
        dydt[t_index] = sigma * lp.rho;
    };

    detail::OdeState y;
    LiftedPoint start = z;
    start.u.normalize();
    layout.pack(start, y);
    y.push_back(t0);

    std::vector<RescaledSample> out;
    auto record = [&](double tau) {
        RescaledSample s;
        s.s = sigma * tau;
        s.point = layout.unpack(y);
        s.t = y[t_index];
        out.push_back(std::move(s));
    };
    record(0.0);

    detail::Dopri5 stepper(config.abs_tol, config.rel_tol);
    double tau = 0.0;
    double dt = std::min({config.initial_step, config.max_step, span});
    long next_index = 1;
    long steps = 0;
    while (tau < span) {
        if (++steps > config.max_steps) {
            throw NumericalError("integrate_rescaled: step budget exhausted");
        }
        const double target = grid.point(next_index);
        dt = std::min({dt, target - tau, config.max_step});
        const double tau_old = tau;
        const double dt_used = dt;
        if (!stepper.try_step(rhs, y, tau, dt)) {
            continue;
        }
        auto u = layout.u(y);
        if (std::abs(u.norm() - 1.0) > 1e-12) {
            u.normalize();
            stepper.invalidate();
        }
        if (dt_used >= target - tau_old) {
            tau = target;
            ++next_index;
            record(tau);
        }
    }
    return out;
}

double passage_time_bound(double rho0, double c1) {
    if (!(rho0 > 0.0)) {
        throw DomainError("passage_time_bound: rho0 must be positive");
    }
    if (!(c1 < 0.0)) {
        throw DomainError("passage_time_bound: c1 must be negative");
    }
    return rho0 / (-c1);
}

PassageMeasurement measure_passage(const AffineSystem& system, const ExtremalTrajectory& traj) {
    if (traj.switches.size() != 1 || traj.samples.empty()) {
        throw DomainError("measure_passage: trajectory must contain exactly one switch");
    }
    const SwitchEvent& ev = traj.switches.front();
    const TrajectorySample& first = traj.samples.front();
    if (!(first.t < ev.t)) {
        throw DomainError("measure_passage: no samples before the switch");
    }
    PassageMeasurement m;
    m.rho0 = first.point.rho;
    m.c1 = -std::numeric_limits<double>::infinity();
    for (const TrajectorySample& s : traj.samples) {
        if (s.t >= ev.t) {
            break;
        }
        const BracketData data = bracket_data(system, from_blowup(system, s.point));
        m.c1 = std::max(m.c1, data.H0I.dot(s.point.u));
    }
    const BracketData at = bracket_data(system, from_blowup(system, ev.location));
    m.c1 = std::max(m.c1, at.H0I.dot(ev.u_before));
    m.measured = ev.t - first.t;
    m.bound = passage_time_bound(m.rho0, m.c1);
    return m;
}

}  // namespace extremal

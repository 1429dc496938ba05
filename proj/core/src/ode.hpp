#pragma once

// Thin adaptive driver over Boost.Odeint's controlled Dormand-Prince 5(4) stepper.
// Callers own the step loop so they can project, detect events and clamp to grids.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>

namespace extremal::detail {

using OdeState = std::vector<double>;

// Output grid m * ds on [0, span] closed by a final point at span. Points within
// 1e-9 ds of span merge into it, so rounding in span / ds never adds a sliver sample.
struct OutputGrid {
    double ds;
    double span;
    long count;

    OutputGrid(double ds_, double span_)
        : ds(ds_), span(span_), count(ds_ > 0.0 && span_ > 0.0 ? std::max(1L, static_cast<long>(std::ceil(span_ / ds_ - 1e-9))) : 1L) {}

    double point(long m) const { return m >= count ? span : static_cast<double>(m) * ds; }
};

class Dopri5 {
public:
    using Stepper = boost::numeric::odeint::runge_kutta_dopri5<OdeState>;
    using Controlled = boost::numeric::odeint::controlled_runge_kutta<Stepper>;

    Dopri5(double abs_tol, double rel_tol)
        : controlled_(Controlled::error_checker_type(abs_tol, rel_tol)) {}

    // One adaptive attempt from (x, t). On acceptance x and t advance; dt always
    // holds the controller's next proposal.
    template <class F>
    bool try_step(F&& rhs, OdeState& x, double& t, double& dt) {
        if (!fresh_) {
            dxdt_.resize(x.size());
            rhs(x, dxdt_, t);
            fresh_ = true;
        }
        out_.resize(x.size());
        dxdt_out_.resize(x.size());
        const auto result = controlled_.try_step(std::ref(rhs), x, dxdt_, t, out_, dxdt_out_, dt);
        if (result != boost::numeric::odeint::success) {
            return false;
        }
        std::swap(x, out_);
        std::swap(dxdt_, dxdt_out_);
        return true;
    }

    // Plain (uncontrolled) step of exactly dt, used for event localisation.
    template <class F>
    void fixed_step(F&& rhs, const OdeState& x, double t, OdeState& out, double dt) {
        OdeState dxdt_in(x.size());
        OdeState dxdt_out(x.size());
        rhs(x, dxdt_in, t);
        out.resize(x.size());
        plain_.do_step(std::ref(rhs), x, dxdt_in, t, out, dxdt_out, dt);
    }

    // Derivative at the current state; valid after an accepted step.
    const OdeState& derivative() const noexcept { return dxdt_; }

    // Must be called whenever the caller modifies the state between steps.
    void invalidate() noexcept { fresh_ = false; }

private:
    Controlled controlled_;
    Stepper plain_;
    OdeState dxdt_;
    OdeState out_;
    OdeState dxdt_out_;
    bool fresh_ = false;
};

}  // namespace extremal::detail

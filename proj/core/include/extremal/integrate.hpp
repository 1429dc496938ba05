#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "extremal/fields.hpp"
#include "extremal/lift.hpp"
#include "extremal/switching.hpp"

namespace extremal {

struct IntegratorConfig {
    double eps_switch = 1e-6;  // rho threshold that activates the jump
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    double max_step = 0.05;
    double output_dt = 0.01;   // sample spacing; 0 records every accepted step
    double chart_radius = 10.0;
    std::optional<Vector> chart_center;  // defaults to the base point of the start
    double initial_step = 1e-4;
    long max_steps = 20'000'000;
    double alpha_floor = 1.0;  // lower bound for the envelope rate in rho_lower_bound_probe
    SwitchTolerances tolerances;
};

// Time derivative of a lifted point, component by component.
struct LiftedRate {
    Vector x;
    double rho = 0.0;
    Vector u;
    Vector h_tail;
};

// Hamiltonian flow of h_0 + rho off the singular locus. Throws DomainError for rho <= 0.
LiftedRate bang_rhs(const AffineSystem& system, const LiftedPoint& lp);

// The same flow in the time s with dt/ds = rho; smooth up to rho = 0.
LiftedRate rescaled_rhs(const AffineSystem& system, const LiftedPoint& lp);

struct TrajectorySample {
    double t = 0.0;
    LiftedPoint point;
    Vector control;       // the sphere coordinate u
    bool on_grid = true;  // false for the extra sample recorded at a switch
};

struct SwitchEvent {
    double t = 0.0;
    Vector u_before;       // forward-time control before the jump
    Vector u_after;        // forward-time control after the jump
    LiftedPoint location;  // state at the threshold, before the jump is applied
    Scenario scenario = Scenario::A;
    SwitchSolution predicted;  // d and u_+- from bracket data on the singular locus
    double before_error = 0.0; // ||u_before - u_-||
    double after_error = 0.0;  // ||u_after - u_+||
};

enum class Termination { Completed, LeftChart };

struct ExtremalTrajectory {
    std::vector<TrajectorySample> samples;  // strictly increasing t
    std::vector<SwitchEvent> switches;
    Termination termination = Termination::Completed;
    double min_rho = 0.0;
    long steps = 0;
};

// Integrates the extremal through z = lambda(t_hat) up to t_end (t_end < t_hat runs
// the time-reversed flow). Throws ChartError on a second switch, NumericalError when
// rho reaches the threshold in scenario Cdoubleprime, DomainError when the crossing
// point violates the sphere-image condition.
ExtremalTrajectory integrate_extremal(const AffineSystem& system, const LiftedPoint& z, double t_hat, double t_end,
                                      const IntegratorConfig& config = {});

struct RescaledSample {
    double s = 0.0;
    double t = 0.0;
    LiftedPoint point;
};

// Integrates the rescaled system from s = 0 to s_end, carrying t(s) = t0 + int rho ds.
std::vector<RescaledSample> integrate_rescaled(const AffineSystem& system, const LiftedPoint& z, double t0,
                                               double s_end, double output_ds, const IntegratorConfig& config = {});

// Upper bound rho0 / (-c1) on the time spent reaching the singular locus while
// <H0I, u> stays below c1 < 0.
double passage_time_bound(double rho0, double c1);

struct PassageMeasurement {
    double rho0 = 0.0;
    double c1 = 0.0;        // max of <H0I(lambda), u> over the samples before the switch
    double measured = 0.0;  // t_switch - t of the first sample
    double bound = 0.0;
};

// Requires exactly one switch in `traj`.
PassageMeasurement measure_passage(const AffineSystem& system, const ExtremalTrajectory& traj);

// Distance in the coordinates (rho u, h_tail, x), where the flow is continuous.
double lifted_distance(const LiftedPoint& a, const LiftedPoint& b);

struct ContinuityReport {
    std::vector<double> initial_distance;
    std::vector<double> max_deviation;  // max over common grid times
    bool decreasing = false;            // deviations non-increasing as initial distances shrink
};

ContinuityReport flow_continuity_probe(const AffineSystem& system, const LiftedPoint& z, double t_hat, double t_end,
                                       const std::vector<LiftedPoint>& perturbations,
                                       const IntegratorConfig& config = {});

// Box around an anchor point used to sample the constants of the rho envelope.
struct ProbeRegion {
    double x_radius = 0.1;
    double h_tail_radius = 0.1;
    double rho_max = 0.1;
    int samples = 2000;
    std::uint64_t seed = 1;
};

struct LemmaConstants {
    double c1 = 0.0;     // max ||v||
    double c2 = 0.0;     // min ||v||
    double C = 0.0;      // lower bound of <v, A> / ||v|| (clamped to <= 0)
    double c = 0.0;      // c2 / c1
    double alpha = 0.0;  // max(-C / c2, alpha_floor)
    double horizon = 0.0;  // 10 / alpha
};

// Samples v = H0I - <H0I,u>u - HIJ u and its time derivative over region x sphere.
// Throws DomainError when some sample has v = 0 (the region is too large).
LemmaConstants estimate_lemma_constants(const AffineSystem& system, const LiftedPoint& anchor,
                                        const ProbeRegion& region, const IntegratorConfig& config = {});

struct RhoBoundReport {
    LemmaConstants constants;
    double horizon = 0.0;
    double min_rho = 0.0;
    double min_ratio = 0.0;  // min over samples of rho(t) / (c e^{-alpha t} rho(0))
    std::size_t checked = 0;
    bool crossed = false;    // a switch happened or rho reached zero
    bool ok = false;
};

// Integrates from z over [0, horizon] (horizon <= 0 selects 10 / alpha) and checks
// rho(t) >= c e^{-alpha t} rho(0) at every recorded sample.
RhoBoundReport rho_lower_bound_probe(const AffineSystem& system, const LiftedPoint& z, double horizon,
                                     const ProbeRegion& region, const IntegratorConfig& config = {});

}  // namespace extremal

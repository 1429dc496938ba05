#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace extremal::app {

namespace {

using nlohmann::json;

json to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.push_back(v[i]);
    }
    return a;
}

json to_json(const Matrix& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        a.push_back(to_json(Vector(m.row(r).transpose())));
    }
    return a;
}

std::string fmt(const Vector& v) {
    std::ostringstream os;
    os.precision(10);
    os << '(';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        os << (i ? ", " : "") << v[i];
    }
    os << ')';
    return os.str();
}

bool has_jump(Scenario s) { return s == Scenario::A || s == Scenario::B || s == Scenario::Cprime; }

struct AnchorData {
    AffineSystem system;
    Vector xi;
    BracketData data;
};

AnchorData anchor_data(const RunConfig& config) {
    AffineSystem system = build_system(config);
    Vector xi = resolve_covector(config, system);
    BracketData data = config.brackets ? *config.brackets : bracket_data(system, {xi, config.anchor});
    return {std::move(system), std::move(xi), std::move(data)};
}

Vector random_unit(std::mt19937_64& rng, Eigen::Index k) {
    std::normal_distribution<double> normal;
    Vector v(k);
    do {
        for (Eigen::Index i = 0; i < k; ++i) {
            v[i] = normal(rng);
        }
    } while (!(v.norm() > 1e-12));
    return v.normalized();
}

void write_json(const std::filesystem::path& dir, const std::string& name, const json& report) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) {
        throw ConfigError("", "cannot write " + (dir / name).string());
    }
    out << report.dump(2) << '\n';
}

}  // namespace

CommandResult run_classify(const RunConfig& config, std::ostream& text) {
    const AnchorData a = anchor_data(config);
    const MembershipVerdict mv = membership(a.data.H0I, a.data.HIJ, config.integrator.tolerances);
    const Scenario scenario = classify(a.data.H0I, a.data.HIJ, config.integrator.tolerances);

    CommandResult r;
    json& rep = r.report;
    rep["covector"] = to_json(a.xi);
    rep["H0I"] = to_json(a.data.H0I);
    rep["HIJ"] = to_json(a.data.HIJ);
    rep["membership"] = {{"in_sphere_image", mv.in_sphere_image},
                         {"in_open_ball_image", mv.in_open_ball_image},
                         {"in_closed_ball_image", mv.in_closed_ball_image},
                         {"rank", mv.rank},
                         {"min_norm_solution", mv.min_norm_solution ? to_json(*mv.min_norm_solution) : json()}};
    rep["scenario"] = std::string(to_string(scenario));

    text << "H0I = " << fmt(a.data.H0I) << "\n";
    text << "HIJ rank = " << mv.rank << "\n";
    text << "in sphere image: " << (mv.in_sphere_image ? "yes" : "no")
         << ", open ball image: " << (mv.in_open_ball_image ? "yes" : "no") << "\n";
    text << "scenario: " << to_string(scenario) << "\n";

    if (has_jump(scenario)) {
        const double d = solve_d(a.data.H0I, a.data.HIJ);
        const SwitchSolution sol = jump_controls(a.data.H0I, a.data.HIJ, d);
        rep["d"] = d;
        rep["u_plus"] = to_json(sol.u_plus);
        rep["u_minus"] = to_json(sol.u_minus);
        text << "d = " << d << "\nu+ = " << fmt(sol.u_plus) << "\nu- = " << fmt(sol.u_minus) << "\n";
    }
    if (scenario != Scenario::CondEqqFails) {
        const SingularArcVerdict v = singular_arc_check(a.data.H0I, a.data.HIJ, config.integrator.tolerances);
        rep["singular_arc"] = std::string(to_string(v));
        text << "singular arcs: " << to_string(v) << "\n";
    }
    if (a.system.k() == a.system.n() - 1) {
        const Codim1Result c = codim1_condition(a.system, config.anchor, config.integrator.tolerances);
        rep["codim1"] = {{"a", to_json(c.a)}, {"A", to_json(c.A)}, {"holds", c.holds}};
        text << "codim-1 condition a = " << fmt(c.a) << " holds: " << (c.holds ? "yes" : "no") << "\n";
    }
    return r;
}

CommandResult run_integrate(const RunConfig& config, std::ostream& text,
                            const std::optional<std::filesystem::path>& out_dir) {
    const AnchorData a = anchor_data(config);
    const LiftedPoint start =
        config.integrate.start ? *config.integrate.start : to_blowup(a.system, {a.xi, config.anchor});
    const ExtremalTrajectory traj =
        integrate_extremal(a.system, start, config.integrate.t_hat, config.integrate.t_end, config.integrator);

    CommandResult r;
    json& rep = r.report;
    const double h_start = hamiltonian(a.system, start);
    double h_drift = 0.0;
    for (const TrajectorySample& s : traj.samples) {
        h_drift = std::max(h_drift, std::abs(hamiltonian(a.system, s.point) - h_start));
    }
    rep["samples"] = traj.samples.size();
    rep["steps"] = traj.steps;
    rep["min_rho"] = traj.min_rho;
    rep["hamiltonian_drift"] = h_drift;
    rep["termination"] = traj.termination == Termination::Completed ? "completed" : "left_chart";
    rep["switches"] = json::array();
    text << "samples: " << traj.samples.size() << ", min rho = " << traj.min_rho
         << ", |dH| max = " << h_drift << "\n";
    text << "switches: " << traj.switches.size() << "\n";
    for (const SwitchEvent& ev : traj.switches) {
        rep["switches"].push_back({{"t", ev.t},
                                   {"scenario", std::string(to_string(ev.scenario))},
                                   {"u_before", to_json(ev.u_before)},
                                   {"u_after", to_json(ev.u_after)},
                                   {"d", ev.predicted.d},
                                   {"u_plus", to_json(ev.predicted.u_plus)},
                                   {"u_minus", to_json(ev.predicted.u_minus)},
                                   {"before_error", ev.before_error},
                                   {"after_error", ev.after_error}});
        text << "  t = " << ev.t << ": " << fmt(ev.u_before) << " -> " << fmt(ev.u_after)
             << " (|u_before - u-| = " << ev.before_error << ", |u_after - u+| = " << ev.after_error << ")\n";
    }
    if (traj.termination == Termination::LeftChart) {
        text << "stopped: trajectory left the chart\n";
    } else {
        // Integrating back to t_hat must reproduce the anchor point.
        const ExtremalTrajectory back = integrate_extremal(a.system, traj.samples.back().point, config.integrate.t_end,
                                                           config.integrate.t_hat, config.integrator);
        LiftedPoint anchor = start;
        anchor.u.normalize();
        const double err = lifted_distance(back.samples.front().point, anchor);
        rep["round_trip_error"] = err;
        text << "round trip to t_hat: deviation " << err << "\n";
    }
    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        std::ofstream csv(*out_dir / "trajectory.csv");
        write_trajectory_csv(csv, traj, a.system.n(), a.system.k());
    }
    return r;
}

CommandResult run_sphere(const RunConfig& config, std::ostream& text,
                         const std::optional<std::filesystem::path>& out_dir) {
    const AnchorData a = anchor_data(config);
    const Eigen::Index k = a.data.H0I.size();
    std::mt19937_64 rng(config.seed);
    const Vector u0 = config.sphere.u0 ? *config.sphere.u0 : random_unit(rng, k);
    const Scenario scenario = classify(a.data.H0I, a.data.HIJ, config.integrator.tolerances);

    CommandResult r;
    json& rep = r.report;
    rep["scenario"] = std::string(to_string(scenario));
    rep["u0"] = to_json(u0);

    SphereOptions opts;
    opts.output_ds = config.sphere.output_ds;
    const SphereTrajectory fwd = integrate_sphere(u0, a.data.H0I, a.data.HIJ, config.sphere.s_end, opts);
    rep["max_norm_drift"] = fwd.max_norm_drift;

    // Cone solution through (1, u0) of the linear lift, normalised back to the sphere.
    LorentzState z0{0.0, 1.0, u0};
    const auto cone = integrate_lorentz(z0, a.data.H0I, a.data.HIJ, config.sphere.s_end, config.sphere.output_ds);
    double lift_gap = 0.0;
    const std::size_t common = std::min(cone.size(), fwd.states.size());
    for (std::size_t i = 0; i < common; ++i) {
        lift_gap = std::max(lift_gap, (cone[i].y.normalized() - fwd.states[i].u).norm());
    }
    rep["lift_gap"] = lift_gap;
    text << "scenario: " << to_string(scenario) << "\n";
    text << "sphere vs Lorentz lift: max gap " << lift_gap << " over " << common << " samples\n";

    if (has_jump(scenario) && k == 1) {
        text << "k = 1: both points of the 0-sphere are equilibria\n";
    } else if (has_jump(scenario)) {
        const SphereLimits lim = sphere_asymptotics(u0, a.data.H0I, a.data.HIJ);
        int converged = lim.converged ? 1 : 0;
        for (int i = 1; i < config.sphere.random_starts; ++i) {
            converged += sphere_asymptotics(random_unit(rng, k), a.data.H0I, a.data.HIJ).converged ? 1 : 0;
        }
        rep["d"] = lim.d;
        rep["forward_error"] = lim.forward_error;
        rep["backward_error"] = lim.backward_error;
        rep["converged_starts"] = converged;
        rep["random_starts"] = config.sphere.random_starts;
        text << "d = " << lim.d << ", s_max = " << lim.s_max << "\n";
        text << "u(+s_max) - u+ = " << lim.forward_error << ", u(-s_max) - u- = " << lim.backward_error << "\n";
        text << "converged: " << converged << " / " << config.sphere.random_starts << " starts\n";
    } else {
        text << "no equilibria on the sphere for this scenario\n";
    }
    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        std::ofstream csv(*out_dir / "sphere.csv");
        csv.precision(17);
        csv << 's';
        for (Eigen::Index i = 1; i <= k; ++i) {
            csv << ",u" << i;
        }
        csv << '\n';
        for (const SphereState& s : fwd.states) {
            csv << s.s;
            for (Eigen::Index i = 0; i < k; ++i) {
                csv << ',' << s.u[i];
            }
            csv << '\n';
        }
    }
    return r;
}

CommandResult run_validate(const RunConfig& config, std::ostream& text) {
    const AnchorData a = anchor_data(config);
    const Vector& H0I = a.data.H0I;
    const Matrix& HIJ = a.data.HIJ;
    const Eigen::Index k = H0I.size();
    const SwitchTolerances& tol = config.integrator.tolerances;
    const Scenario scenario = classify(H0I, HIJ, tol);
    std::mt19937_64 rng(config.seed);

    CommandResult r;
    r.report["scenario"] = std::string(to_string(scenario));
    r.report["checks"] = json::array();
    bool all = true;
    auto check = [&](const std::string& name, bool passed, const json& detail) {
        r.report["checks"].push_back({{"name", name}, {"passed", passed}, {"detail", detail}});
        text << (passed ? "PASS " : "FAIL ") << name << " " << detail.dump() << "\n";
        all = all && passed;
    };

    {
        const SphereMinimum m = sphere_membership_oracle(H0I, HIJ, config.oracle.samples, config.seed);
        const bool in_image = membership(H0I, HIJ, tol).in_sphere_image;
        check("membership_vs_oracle", (m.value > 1e-6) == !in_image,
              {{"oracle_min", m.value}, {"in_sphere_image", in_image}});
    }

    if (scenario != Scenario::CondEqqFails) {
        const ZeroSearchResult zs = zero_search_g(H0I, HIJ, config.oracle.samples, config.seed);
        if (has_jump(scenario)) {
            const SwitchSolution sol = jump_controls(H0I, HIJ, solve_d(H0I, HIJ));
            bool match = zs.zeros.size() == 2;
            for (const Vector& z : zs.zeros) {
                match = match && std::min((z - sol.u_plus).norm(), (z - sol.u_minus).norm()) < 1e-6;
            }
            check("zero_search_vs_jump_controls", match, {{"zeros", zs.zeros.size()}});

            if (k >= 2) {
                double worst = 0.0;
                for (const Vector& u : {sol.u_plus, sol.u_minus}) {
                    const double expected = -H0I.dot(u);
                    for (const auto& ev : tangent_eigenvalues(equilibrium_jacobian(H0I, HIJ, u), u)) {
                        worst = std::max(worst, std::abs(ev.real() - expected));
                    }
                }
                check("equilibrium_real_parts", worst < 1e-7, {{"max_error", worst}});
            }

            if (k >= 2) {
                int converged = 0;
                const int starts = config.sphere.random_starts;
                for (int i = 0; i < starts; ++i) {
                    converged += sphere_asymptotics(random_unit(rng, k), H0I, HIJ).converged ? 1 : 0;
                }
                check("sphere_convergence", converged == starts, {{"converged", converged}, {"starts", starts}});
            }
        } else {
            check("zero_search_no_zeros", zs.zeros.empty(), {{"zeros", zs.zeros.size()}, {"min_residual", zs.min_residual}});
        }
    }

    {
        std::normal_distribution<double> normal;
        LorentzState z0;
        z0.x = normal(rng);
        z0.y = Vector(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            z0.y[i] = normal(rng);
        }
        const double span = has_jump(scenario) ? 40.0 / solve_d(H0I, HIJ) : std::abs(config.sphere.s_end);
        const double q0 = lorentz_form(z0.x, z0.y);
        double worst = 0.0;
        for (const LorentzState& z : integrate_lorentz(z0, H0I, HIJ, span, span / 200.0)) {
            if (z.s == 0.0) {
                continue;
            }
            const double scale = std::max(1.0, z.x * z.x + z.y.squaredNorm());
            worst = std::max(worst, std::abs(lorentz_form(z.x, z.y) - q0) / scale / std::abs(z.s));
        }
        check("lorentz_conservation", worst < 1e-9, {{"relative_drift_per_unit_s", worst}});
    }

    if (config.oracle.linear) {
        const GridSolution g = bangbang_grid_solver(*config.oracle.linear, config.oracle.max_switches, config.oracle.grid);
        json detail = {{"grid_time", g.time}, {"grid_switches", g.switches()}};
        bool passed = g.switches() <= 1;
        if (config.integrate.start || std::holds_alternative<Vector>(config.covector)) {
            const LiftedPoint start =
                config.integrate.start ? *config.integrate.start : to_blowup(a.system, {a.xi, config.anchor});
            const ExtremalTrajectory traj =
                integrate_extremal(a.system, start, config.integrate.t_hat, config.integrate.t_end, config.integrator);
            detail["extremal_switches"] = traj.switches.size();
            passed = passed && static_cast<int>(traj.switches.size()) == g.switches();
            if (passed && g.switches() == 1) {
                const double grid_switch = g.schedule.front().duration;
                const double gap = std::abs(traj.switches.front().t - config.integrate.t_hat - grid_switch);
                detail["switch_time_gap"] = gap;
                passed = gap <= 0.02 * g.time + config.oracle.grid.dt;
            }
        }
        check("grid_solver_agreement", passed, detail);
    }

    r.report["passed"] = all;
    r.exit_code = all ? kSuccess : kValidationFailure;
    return r;
}

CommandResult run_oracle(const RunConfig& config, std::ostream& text) {
    const AnchorData a = anchor_data(config);
    CommandResult r;
    const SphereMinimum m = sphere_membership_oracle(a.data.H0I, a.data.HIJ, config.oracle.samples, config.seed);
    r.report["sphere_min"] = m.value;
    r.report["sphere_argmin"] = to_json(m.argmin);
    text << "min over sphere of |HIJ u - H0I| = " << m.value << " at " << fmt(m.argmin) << "\n";

    const ZeroSearchResult zs = zero_search_g(a.data.H0I, a.data.HIJ, config.oracle.samples, config.seed);
    r.report["zeros"] = json::array();
    for (const Vector& z : zs.zeros) {
        r.report["zeros"].push_back(to_json(z));
    }
    r.report["min_residual"] = zs.min_residual;
    text << "zeros of g found: " << zs.zeros.size() << " (min |g| = " << zs.min_residual << ")\n";
    constexpr std::size_t kShown = 10;
    for (std::size_t i = 0; i < std::min(kShown, zs.zeros.size()); ++i) {
        text << "  " << fmt(zs.zeros[i]) << "\n";
    }
    if (zs.zeros.size() > kShown) {
        text << "  ... " << zs.zeros.size() - kShown << " more (g vanishes on a continuum)\n";
    }

    if (config.oracle.linear) {
        const GridSolution g = bangbang_grid_solver(*config.oracle.linear, config.oracle.max_switches, config.oracle.grid);
        json schedule = json::array();
        for (const ControlPiece& p : g.schedule) {
            schedule.push_back({{"control", to_json(p.control)}, {"duration", p.duration}});
        }
        r.report["grid"] = {{"time", g.time}, {"switches", g.switches()}, {"schedule", schedule}};
        text << "grid solver: time " << g.time << " with " << g.switches() << " switch(es)\n";
    }
    return r;
}

int run_command(const std::string& verb, const RunConfig& config, std::ostream& text, std::ostream& err,
                const std::optional<std::filesystem::path>& out_dir) {
    CommandResult r;
    try {
        if (verb == "classify") {
            r = run_classify(config, text);
        } else if (verb == "integrate") {
            r = run_integrate(config, text, out_dir);
        } else if (verb == "sphere") {
            r = run_sphere(config, text, out_dir);
        } else if (verb == "validate") {
            r = run_validate(config, text);
        } else if (verb == "oracle") {
            r = run_oracle(config, text);
        } else {
            throw ConfigError("", "unknown command '" + verb + "'");
        }
    } catch (const ConfigError& e) {
        err << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const FrameError& e) {
        err << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kValidationFailure;
    }
    if (out_dir) {
        write_json(*out_dir, verb + ".json", r.report);
    }
    return r.exit_code;
}

}  // namespace extremal::app

// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments select
// criteria by number; the exit status is nonzero if any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "extremal/extremal.hpp"
#include "support/instances.hpp"

namespace {

using namespace extremal;
using extremal::testing::Rng;
using extremal::testing::vec;

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* format, auto... args) {
    char buf[1024];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

// phi(Z) = <[Z^2 Id - HIJ^2]^{-1} H0I, H0I> by a direct extended-precision solve; the
// double-precision solve loses up to log10(sigma_max^2 / Z^2) digits.
double phi_extended(const Vector& H0I, const Matrix& HIJ, double Z) {
    using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using VectorL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    const MatrixL A = HIJ.cast<long double>();
    const VectorL h = H0I.cast<long double>();
    const long double z = Z;
    const MatrixL M = z * z * MatrixL::Identity(A.rows(), A.cols()) - A * A;
    return static_cast<double>(h.dot(M.ldlt().solve(h)) - 1.0L) + 1.0;
}

Outcome jump_control_identity() {
    Rng rng(101);
    double worst_norm = 0.0;
    double worst_proj = 0.0;
    double worst_g = 0.0;
    double worst_phi = 0.0;
    int count = 0;
    for (Eigen::Index k = 1; k <= 5; ++k) {
        for (int i = 0; i < 200; ++i) {
            const BracketData b = testing::random_condnotin(rng, k);
            const double d = solve_d(b.H0I, b.HIJ);
            const SwitchSolution s = jump_controls(b.H0I, b.HIJ, d);
            worst_norm = std::max({worst_norm, std::abs(s.u_plus.norm() - 1), std::abs(s.u_minus.norm() - 1)});
            worst_proj = std::max({worst_proj, std::abs(b.H0I.dot(s.u_plus) - d), std::abs(b.H0I.dot(s.u_minus) + d)});
            worst_g = std::max({worst_g, sphere_rhs(s.u_plus, b.H0I, b.HIJ).norm(),
                                sphere_rhs(s.u_minus, b.H0I, b.HIJ).norm()});
            worst_phi = std::max({worst_phi, std::abs(phi_extended(b.H0I, b.HIJ, d) - 1),
                                  std::abs(switch_phi(b.H0I, b.HIJ, d) - 1)});
            ++count;
        }
    }
    return {worst_norm < 1e-9 && worst_proj < 1e-9 && worst_g < 1e-8 && worst_phi < 1e-12,
            fmt("%d instances; max | |u|-1 | %.1e, max |<H0I,u>-+d| %.1e, max |g| %.1e, max |phi(d)-1| %.1e",
                count, worst_norm, worst_proj, worst_g, worst_phi)};
}

Outcome dichotomy_of_zeros() {
    Rng rng(202);
    struct Tally {
        Scenario s;
        int ok = 0;
    };
    std::vector<Tally> tallies = {{Scenario::A}, {Scenario::B}, {Scenario::Cprime}, {Scenario::Cdoubleprime}};
    double worst_match = 0.0;
    std::uint64_t seed = 1;
    for (Tally& t : tallies) {
        for (int i = 0; i < 50; ++i) {
            const Eigen::Index k = t.s == Scenario::A ? 1 + 2 * (i % 3) : 2 + 2 * (i % 2);
            const BracketData b = testing::random_bracket_data(rng, k, t.s);
            const ZeroSearchResult z = zero_search_g(b.H0I, b.HIJ, 1000, seed++);
            if (t.s == Scenario::Cdoubleprime) {
                t.ok += z.zeros.empty() ? 1 : 0;
                continue;
            }
            if (z.zeros.size() != 2) {
                continue;
            }
            const SwitchSolution s = jump_controls(b.H0I, b.HIJ, solve_d(b.H0I, b.HIJ));
            const double direct = std::max((z.zeros[0] - s.u_plus).norm(), (z.zeros[1] - s.u_minus).norm());
            const double swapped = std::max((z.zeros[0] - s.u_minus).norm(), (z.zeros[1] - s.u_plus).norm());
            const double match = std::min(direct, swapped);
            worst_match = std::max(worst_match, match);
            t.ok += match < 1e-6 ? 1 : 0;
        }
    }
    bool pass = true;
    std::string detail;
    for (const Tally& t : tallies) {
        pass = pass && t.ok == 50;
        detail += fmt("%s %d/50, ", std::string(to_string(t.s)).c_str(), t.ok);
    }
    return {pass, detail + fmt("max zero-to-u+- distance %.1e", worst_match)};
}

Outcome spectral_check() {
    Rng rng(303);
    double worst = 0.0;
    int count = 0;
    for (int i = 0; i < 100; ++i) {
        const Eigen::Index k = 2 + i % 4;
        const BracketData b = testing::random_condnotin(rng, k);
        const SwitchSolution s = jump_controls(b.H0I, b.HIJ, solve_d(b.H0I, b.HIJ));
        for (const Vector& u : {s.u_plus, s.u_minus}) {
            const double expected = -b.H0I.dot(u);
            for (const auto& lambda : tangent_eigenvalues(equilibrium_jacobian(b.H0I, b.HIJ, u), u)) {
                worst = std::max(worst, std::abs(lambda.real() - expected));
                ++count;
            }
        }
    }
    return {worst < 1e-7, fmt("%d tangent eigenvalues on 100 instances; max |Re - (-<H0I,u>)| %.1e", count, worst)};
}

Outcome lorentz_conservation() {
    Rng rng(404);
    double worst_q = 0.0;
    double worst_gap = 0.0;
    int instances = 0;
    for (int i = 0; i < 20; ++i) {
        const Eigen::Index k = 1 + i % 5;
        const BracketData b = testing::random_condnotin(rng, k);
        const double d = solve_d(b.H0I, b.HIJ);
        const double s_max = 40.0 / d;
        const double ds = s_max / 200.0;

        // Q drift on an arbitrary (off-cone) start, relative to the magnitude of z(s).
        const LorentzState z0{0.0, testing::random_normal(rng, 1)[0], testing::random_normal(rng, k)};
        const double q0 = lorentz_form(z0.x, z0.y);
        for (const double dir : {1.0, -1.0}) {
            for (const LorentzState& z : integrate_lorentz(z0, b.H0I, b.HIJ, dir * s_max, ds)) {
                if (z.s == 0.0) {
                    continue;
                }
                const double scale = std::max(1.0, z.x * z.x + z.y.squaredNorm());
                worst_q = std::max(worst_q, std::abs(lorentz_form(z.x, z.y) - q0) / scale / std::abs(z.s));
            }
        }

        // Sphere flow against the normalised cone solution through (1, u0). For k = 1 both
        // points of S^0 are equilibria and the cone solution from u_- is the pure decaying
        // mode, which no forward propagator resolves below e^{40} eps.
        if (k == 1) {
            ++instances;
            continue;
        }
        const Vector u0 = testing::random_unit(rng, k);
        SphereOptions opts;
        opts.output_ds = ds;
        for (const double dir : {1.0, -1.0}) {
            const auto cone = integrate_lorentz({0.0, 1.0, u0}, b.H0I, b.HIJ, dir * s_max, ds);
            const SphereTrajectory sphere = integrate_sphere(u0, b.H0I, b.HIJ, dir * s_max, opts);
            if (cone.size() != sphere.states.size()) {
                return {false, fmt("sample count mismatch %zu vs %zu", cone.size(), sphere.states.size())};
            }
            for (std::size_t m = 0; m < cone.size(); ++m) {
                worst_gap = std::max(worst_gap, (cone[m].y / cone[m].x - sphere.states[m].u).norm());
            }
        }
        ++instances;
    }
    return {worst_q < 1e-9 && worst_gap < 1e-6,
            fmt("%d instances (k = 1..5) over |s| <= 40/d; max relative Q drift per unit s %.1e, max sphere-cone "
                "gap (k >= 2) %.1e",
                instances, worst_q, worst_gap)};
}

Outcome sphere_asymptotics_check() {
    Rng rng(505);
    int instances = 0;
    int converged = 0;
    int total = 0;
    double worst = 0.0;
    auto run_instance = [&](const BracketData& b) {
        const Eigen::Index k = b.H0I.size();
        for (int i = 0; i < 100; ++i) {
            const SphereLimits lim = sphere_asymptotics(testing::random_unit(rng, k), b.H0I, b.HIJ, 1e-6);
            converged += lim.converged ? 1 : 0;
            worst = std::max({worst, lim.forward_error, lim.backward_error});
            ++total;
        }
        ++instances;
    };
    run_instance({vec({5, 0}), testing::rotation_block(3)});
    for (Eigen::Index k = 2; k <= 5; ++k) {
        run_instance(testing::random_condnotin(rng, k));
        run_instance(testing::random_condnotin(rng, k));
    }
    return {converged == total,
            fmt("%d instances x 100 starts; converged %d/%d, max endpoint error %.1e", instances, converged, total,
                worst)};
}

Outcome one_switch() {
    std::string detail;
    bool pass = true;
    {
        const AffineSystem sys = testing::rotation_instance(5.0, 3.0);
        IntegratorConfig cfg;
        cfg.output_dt = 0.001;
        const LiftedPoint z = testing::lifted(0.1, vec({-0.8, 0.6}), vec({1.0}), Vector::Zero(3));
        const ExtremalTrajectory traj = integrate_extremal(sys, z, 0.0, 0.1, cfg);
        const double tol = std::max(1e-6, 10 * cfg.eps_switch);
        if (traj.switches.size() != 1) {
            return {false, fmt("rotation instance: %zu switches", traj.switches.size())};
        }
        const SwitchEvent& ev = traj.switches.front();
        const double eb = (ev.u_before - vec({-0.8, 0.6})).norm();
        const double ea = (ev.u_after - vec({0.8, 0.6})).norm();
        const PassageMeasurement m = measure_passage(sys, traj);
        pass = pass && eb < tol && ea < tol && m.measured <= m.bound;
        detail += fmt("rotation: 1 switch at t=%.7f, |u_before-u-| %.1e, |u_after-u+| %.1e, passage %.7f <= %.7f; ",
                      ev.t, eb, ea, m.measured, m.bound);
    }
    {
        const AffineSystem sys = testing::double_integrator();
        const LiftedPoint z = to_blowup(sys, {vec({-1.0, -1.0}) / std::sqrt(2.0), vec({1.0, 0.0})});
        const ExtremalTrajectory traj = integrate_extremal(sys, z, 0.0, 2.0);
        if (traj.switches.size() != 1) {
            return {false, fmt("double integrator: %zu switches", traj.switches.size())};
        }
        const SwitchEvent& ev = traj.switches.front();
        const double eb = std::abs(ev.u_before[0] + 1.0);
        const double ea = std::abs(ev.u_after[0] - 1.0);
        const PassageMeasurement m = measure_passage(sys, traj);
        pass = pass && eb < 1e-6 && ea < 1e-6 && m.measured <= m.bound;
        detail += fmt("double integrator: 1 switch at t=%.7f, jump %+.0f -> %+.0f, passage %.7f <= %.7f", ev.t,
                      ev.u_before[0], ev.u_after[0], m.measured, m.bound);
    }
    return {pass, detail};
}

Outcome cdoubleprime_exclusion() {
    const AffineSystem sys = testing::rotation_instance(2.0, 3.0);
    std::string detail;
    bool pass = true;
    for (const double rho0 : {1e-2, 1e-3}) {
        const LiftedPoint z = testing::lifted(rho0, vec({-1.0, 0.0}), vec({1.0}), Vector::Zero(3));
        IntegratorConfig cfg;
        cfg.output_dt = 0.0;
        const RhoBoundReport rep = rho_lower_bound_probe(sys, z, 0.0, ProbeRegion{}, cfg);
        pass = pass && rep.ok;
        detail += fmt("rho0=%.0e: c=%.4f alpha=%.2f T=%.1f crossed=%s min rho/envelope=%.3f over %zu samples; ", rho0,
                      rep.constants.c, rep.constants.alpha, rep.horizon, rep.crossed ? "yes" : "no", rep.min_ratio,
                      rep.checked);
    }
    return {pass, detail};
}

Outcome ground_truth() {
    LinearInstance inst;
    inst.A = Matrix::Zero(2, 2);
    inst.A(0, 1) = 1.0;
    inst.B = Matrix::Zero(2, 1);
    inst.B(1, 0) = 1.0;
    inst.x0 = vec({1.0, 0.0});
    inst.x1 = Vector::Zero(2);
    GridResolution grid;
    grid.dt = 0.02;
    grid.t_max = 3.0;
    const GridSolution sol = bangbang_grid_solver(inst, 2, grid);
    const double t_exact = 2.0;  // 2 sqrt(x0_1) from rest
    const double rel = std::abs(sol.time - t_exact) / t_exact;

    const AffineSystem sys = testing::double_integrator();
    const LiftedPoint z = to_blowup(sys, {vec({-1.0, -1.0}) / std::sqrt(2.0), inst.x0});
    const ExtremalTrajectory traj = integrate_extremal(sys, z, 0.0, t_exact);
    bool agree = sol.switches() == 1 && traj.switches.size() == 1;
    double gap = 0.0;
    if (agree) {
        gap = std::abs(sol.schedule.front().duration - traj.switches.front().t);
        agree = gap <= grid.dt && sol.schedule[0].control[0] == traj.switches.front().u_before[0] &&
                sol.schedule[1].control[0] == traj.switches.front().u_after[0];
    }
    return {rel <= 0.02 && agree,
            fmt("grid T=%.4f (exact %.1f, rel err %.2f%%), grid switches %d, extremal switches %zu, switch-time gap "
                "%.1e, %ld propagations",
                sol.time, t_exact, 100 * rel, sol.switches(), traj.switches.size(), gap, sol.evaluated)};
}

Outcome codim1_equivalence() {
    Rng rng(909);
    int agree = 0;
    int fails = 0;
    int total = 0;
    for (int i = 0; i < 100; ++i) {
        const int n = i < 50 ? 3 : 4;
        const int k = n - 1;
        Matrix A = testing::random_skew(rng, k);
        Vector a;
        Vector q = Vector::Zero(n);
        switch (i % 3) {
            case 0:  // condition violated: a on A S^{k-1} (k even) or A B^k (k odd)
                a = A * (k % 2 == 0 ? testing::random_unit(rng, k)
                                    : testing::uniform(rng, 0.1, 1.0) * testing::random_unit(rng, k));
                break;
            case 1:  // generic data at the origin
                a = testing::random_normal(rng, k);
                break;
            default:  // generic data away from the origin, where quadratic terms enter the brackets
                a = testing::random_normal(rng, k);
                q = 0.3 * testing::random_unit(rng, n);
                break;
        }
        const AffineSystem sys = testing::codim1_system(rng, a, A);
        const Codim1Result c = codim1_condition(sys, q);
        const Vector xi = annihilator_covector(sys, q);
        const BracketData b = bracket_data(sys, {xi, q});
        const bool membership_holds = !membership(b.H0I, b.HIJ).in_sphere_image;
        agree += c.holds == membership_holds ? 1 : 0;
        fails += c.holds ? 0 : 1;
        ++total;
    }
    return {agree == total, fmt("%d/%d systems agree (%d violate the condition)", agree, total, fails)};
}

Outcome flow_continuity() {
    const AffineSystem sys = testing::rotation_instance(5.0, 3.0);
    const LiftedPoint z = testing::lifted(0.1, vec({-0.8, 0.6}), vec({1.0}), Vector::Zero(3));
    std::vector<LiftedPoint> ps;
    for (const double r : {1e-2, 1e-3, 1e-4}) {
        LiftedPoint p = z;
        p.rho += r;
        p.u[0] += r;
        p.u.normalize();
        p.x[0] += r;
        ps.push_back(p);
    }
    IntegratorConfig cfg;
    cfg.output_dt = 0.001;
    const ContinuityReport rep = flow_continuity_probe(sys, z, 0.0, 0.1, ps, cfg);
    std::string detail = "initial -> max deviation:";
    for (std::size_t i = 0; i < ps.size(); ++i) {
        detail += fmt(" %.1e -> %.1e;", rep.initial_distance[i], rep.max_deviation[i]);
    }
    const bool shrinking = rep.max_deviation.back() < 0.1 * rep.max_deviation.front();
    return {rep.decreasing && shrinking, detail};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "jump-control identity", 10, jump_control_identity},
        {2, "dichotomy of zeros", 60, dichotomy_of_zeros},
        {3, "spectral check", 10, spectral_check},
        {4, "Lorentz conservation and lift consistency", 30, lorentz_conservation},
        {5, "sphere asymptotics", 60, sphere_asymptotics_check},
        {6, "one switch", 10, one_switch},
        {7, "Cdoubleprime exclusion", 30, cdoubleprime_exclusion},
        {8, "ground-truth agreement", 120, ground_truth},
        {9, "codim-1 equivalence", 30, codim1_equivalence},
        {10, "flow continuity", 30, flow_continuity},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        selected.insert(std::atoi(argv[i]));
    }

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!selected.empty() && !selected.contains(c.id)) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        while (!out.detail.empty() && (out.detail.back() == ' ' || out.detail.back() == ';')) {
            out.detail.pop_back();
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = elapsed < c.limit_s;
        const bool pass = out.pass && in_time;
        failures += pass ? 0 : 1;
        std::printf("%s [%d] %s: %s (%.2f s, limit %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    out.detail.c_str(), elapsed, c.limit_s, in_time ? "" : ", over time");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "extremal/errors.hpp"
#include "extremal/integrate.hpp"
#include "extremal/sphereflow.hpp"

namespace extremal {

double lifted_distance(const LiftedPoint& a, const LiftedPoint& b) {
    if (a.x.size() != b.x.size() || a.u.size() != b.u.size() || a.h_tail.size() != b.h_tail.size()) {
        throw DimensionError("lifted_distance: dimension mismatch");
    }
    const double dh = (a.rho * a.u - b.rho * b.u).squaredNorm();
    const double dt = (a.h_tail - b.h_tail).squaredNorm();
    const double dx = (a.x - b.x).squaredNorm();
    return std::sqrt(dh + dt + dx);
}

ContinuityReport flow_continuity_probe(const AffineSystem& system, const LiftedPoint& z, double t_hat, double t_end,
                                       const std::vector<LiftedPoint>& perturbations,
                                       const IntegratorConfig& config) {
    if (!(config.output_dt > 0.0)) {
        throw DomainError("flow_continuity_probe needs a positive output_dt to align samples");
    }
    const ExtremalTrajectory ref = integrate_extremal(system, z, t_hat, t_end, config);
    ContinuityReport report;
    for (const LiftedPoint& p : perturbations) {
        const ExtremalTrajectory other = integrate_extremal(system, p, t_hat, t_end, config);
        double worst = 0.0;
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < ref.samples.size() && j < other.samples.size()) {
            const TrajectorySample& a = ref.samples[i];
            const TrajectorySample& b = other.samples[j];
            if (!a.on_grid) {
                ++i;
                continue;
            }
            if (!b.on_grid) {
                ++j;
                continue;
            }
            if (a.t < b.t) {
                ++i;
            } else if (b.t < a.t) {
                ++j;
            } else {
                worst = std::max(worst, lifted_distance(a.point, b.point));
                ++i;
                ++j;
            }
        }
        report.initial_distance.push_back(lifted_distance(z, p));
        report.max_deviation.push_back(worst);
    }

    std::vector<std::size_t> order(perturbations.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return report.initial_distance[a] > report.initial_distance[b];
    });
    report.decreasing = order.size() >= 2;
    for (std::size_t m = 1; m < order.size(); ++m) {
        if (report.max_deviation[order[m]] > report.max_deviation[order[m - 1]]) {
            report.decreasing = false;
        }
    }
    if (report.decreasing &&
        !(report.max_deviation[order.back()] < report.max_deviation[order.front()])) {
        report.decreasing = false;
    }
    return report;
}

namespace {

// Bracket data after moving lam by tau along the Hamiltonian field of h_0 + <u, h_I>.
BracketData shifted_data(const AffineSystem& system, const CotangentPoint& lam, const Vector& u, double tau) {
    const int k = system.k();
    const double eps = system.eps_fd();
    Vector xdot = system.drift()(lam.x);
    Matrix J = jacobian(system.drift(), lam.x, eps);
    for (int i = 1; i <= k; ++i) {
        xdot += u[i - 1] * system.field(i)(lam.x);
        J += u[i - 1] * jacobian(system.field(i), lam.x, eps);
    }
    const Vector xidot = -J.transpose() * lam.xi;
    return bracket_data(system, {lam.xi + tau * xidot, lam.x + tau * xdot});
}

Vector sample_ball(std::mt19937_64& rng, Eigen::Index dim, double radius) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    if (dim == 0) {
        return Vector(0);
    }
    Vector v(dim);
    do {
        for (Eigen::Index i = 0; i < dim; ++i) {
            v[i] = normal(rng);
        }
    } while (!(v.norm() > 0.0));
    const double r = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(dim));
    return r * v.normalized();
}

}  // namespace

LemmaConstants estimate_lemma_constants(const AffineSystem& system, const LiftedPoint& anchor,
                                        const ProbeRegion& region, const IntegratorConfig& config) {
    if (region.samples < 1 || region.x_radius < 0.0 || region.h_tail_radius < 0.0 || region.rho_max < 0.0) {
        throw DomainError("probe region must have nonnegative radii and at least one sample");
    }
    const int n = system.n();
    const int k = system.k();
    if (anchor.x.size() != n || anchor.h_tail.size() != n - k) {
        throw DimensionError("probe anchor dimension mismatch");
    }
    std::mt19937_64 rng(region.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    constexpr double kTau = 1e-4;

    LemmaConstants out;
    out.c1 = 0.0;
    out.c2 = std::numeric_limits<double>::infinity();
    out.C = 0.0;
    for (int m = 0; m < region.samples; ++m) {
        LiftedPoint lp;
        lp.x = anchor.x + sample_ball(rng, n, region.x_radius);
        lp.h_tail = anchor.h_tail + sample_ball(rng, n - k, region.h_tail_radius);
        lp.rho = region.rho_max * uniform(rng);
        lp.u.resize(k);
        do {
            for (int i = 0; i < k; ++i) {
                lp.u[i] = normal(rng);
            }
        } while (!(lp.u.norm() > 0.0));
        lp.u.normalize();

        const CotangentPoint lam = from_blowup(system, lp);
        const BracketData data = bracket_data(system, lam);
        const Vector v = sphere_rhs(lp.u, data.H0I, data.HIJ);
        const double norm = v.norm();
        out.c1 = std::max(out.c1, norm);
        out.c2 = std::min(out.c2, norm);
        if (!(norm > config.tolerances.abs_floor)) {
            continue;
        }
        const BracketData plus = shifted_data(system, lam, lp.u, kTau);
        const BracketData minus = shifted_data(system, lam, lp.u, -kTau);
        const Vector dH0I = (plus.H0I - minus.H0I) / (2.0 * kTau);
        const Matrix dHIJ = (plus.HIJ - minus.HIJ) / (2.0 * kTau);
        const Vector A = dH0I - dH0I.dot(lp.u) * lp.u - dHIJ * lp.u;
        out.C = std::min(out.C, v.dot(A) / norm);
    }
    if (!(out.c2 > config.tolerances.abs_floor)) {
        throw DomainError("estimate_lemma_constants: v vanishes in the probe region; shrink the region");
    }
    out.c = out.c2 / out.c1;
    out.alpha = std::max(-out.C / out.c2, config.alpha_floor);
    out.horizon = 10.0 / out.alpha;
    return out;
}

RhoBoundReport rho_lower_bound_probe(const AffineSystem& system, const LiftedPoint& z, double horizon,
                                     const ProbeRegion& region, const IntegratorConfig& config) {
    RhoBoundReport report;
    report.constants = estimate_lemma_constants(system, z, region, config);
    report.horizon = horizon > 0.0 ? horizon : report.constants.horizon;

    ExtremalTrajectory traj;
    try {
        traj = integrate_extremal(system, z, 0.0, report.horizon, config);
    } catch (const NumericalError&) {
        report.crossed = true;
        return report;
    } catch (const ChartError&) {
        report.crossed = true;
        return report;
    }
    report.crossed = !traj.switches.empty();
    report.min_rho = traj.min_rho;
    report.min_ratio = std::numeric_limits<double>::infinity();
    const double rho0 = z.rho;
    for (const TrajectorySample& s : traj.samples) {
        const double envelope = report.constants.c * std::exp(-report.constants.alpha * s.t) * rho0;
        report.min_ratio = std::min(report.min_ratio, s.point.rho / envelope);
        ++report.checked;
    }
    report.ok = !report.crossed && report.min_rho > 0.0 && report.min_ratio >= 1.0 && report.checked > 0;
    return report;
}

}  // namespace extremal

#include "extremal/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "extremal/errors.hpp"
#include "extremal/sphereflow.hpp"
#include "extremal/switching.hpp"

namespace extremal {

namespace {

void check_samples(int samples) {
    if (samples < 1000) {
        throw DomainError("oracle needs at least 1000 samples");
    }
}

std::vector<Vector> sample_sphere(Eigen::Index k, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(samples));
    Vector v(k);
    while (static_cast<int>(out.size()) < samples) {
        for (Eigen::Index i = 0; i < k; ++i) {
            v[i] = normal(rng);
        }
        const double norm = v.norm();
        if (norm > 1e-12) {
            out.push_back(v / norm);
        }
    }
    return out;
}

// Orthonormal basis of the tangent space u-perp (k x (k-1)).
Matrix tangent_basis(const Vector& u) {
    const Eigen::Index k = u.size();
    const Eigen::HouseholderQR<Matrix> qr(u);
    const Matrix Q = qr.householderQ();
    return Q.rightCols(k - 1);
}

}  // namespace

SphereMinimum sphere_membership_oracle(const Vector& H0I, const Matrix& HIJ, int samples, std::uint64_t seed) {
    check_skew_pair(H0I, HIJ);
    check_samples(samples);
    auto f = [&](const Vector& u) { return (HIJ * u - H0I).squaredNorm(); };

    std::vector<Vector> starts = sample_sphere(H0I.size(), samples, seed);
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
        ranked.emplace_back(f(starts[i]), i);
    }
    const std::size_t keep = std::min<std::size_t>(10, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end());

    SphereMinimum best;
    best.value = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < keep; ++r) {
        Vector u = starts[ranked[r].second];
        double fu = ranked[r].first;
        double step = 1.0;
        for (int it = 0; it < 5000; ++it) {
            const Vector grad_e = 2.0 * HIJ.transpose() * (HIJ * u - H0I);
            const Vector grad = grad_e - grad_e.dot(u) * u;
            const double g2 = grad.squaredNorm();
            if (g2 < 1e-30) {
                break;
            }
            bool moved = false;
            while (step > 1e-20) {
                const Vector trial = (u - step * grad).normalized();
                const double ft = f(trial);
                if (ft <= fu - 1e-4 * step * g2) {
                    u = trial;
                    fu = ft;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) {
                break;
            }
            step *= 2.0;
        }
        if (fu < best.value) {
            best.value = fu;
            best.argmin = u;
        }
    }
    best.value = std::sqrt(best.value);
    return best;
}

ZeroSearchResult zero_search_g(const Vector& H0I, const Matrix& HIJ, int samples, std::uint64_t seed) {
    check_skew_pair(H0I, HIJ);
    check_samples(samples);
    const Eigen::Index k = H0I.size();
    constexpr double kZeroTol = 1e-8;
    constexpr double kClusterRadius = 1e-6;

    ZeroSearchResult result;
    result.min_residual = std::numeric_limits<double>::infinity();
    std::vector<double> residuals;

    for (const Vector& start : sample_sphere(k, samples, seed)) {
        Vector u = start;
        Vector g = sphere_rhs(u, H0I, HIJ);
        double gn = g.norm();
        if (k > 1) {
            double mu = 1e-3 * (1.0 + H0I.norm() + HIJ.norm());
            for (int it = 0; it < 200 && gn > 1e-14; ++it) {
                const Matrix Q = tangent_basis(u);
                const Matrix J = equilibrium_jacobian(H0I, HIJ, u) * Q;
                const Matrix normal = J.transpose() * J;
                const Vector rhs = -J.transpose() * g;
                bool improved = false;
                for (int tries = 0; tries < 30; ++tries) {
                    Matrix lhs = normal;
                    lhs.diagonal().array() += mu;
                    const Vector delta = lhs.ldlt().solve(rhs);
                    const Vector trial = (u + Q * delta).normalized();
                    const Vector gt = sphere_rhs(trial, H0I, HIJ);
                    const double gtn = gt.norm();
                    if (gtn < gn) {
                        u = trial;
                        g = gt;
                        gn = gtn;
                        mu = std::max(mu / 3.0, 1e-15);
                        improved = true;
                        break;
                    }
                    mu *= 4.0;
                }
                if (!improved) {
                    break;
                }
            }
        }
        result.min_residual = std::min(result.min_residual, gn);
        if (!(gn < kZeroTol)) {
            continue;
        }
        bool merged = false;
        for (std::size_t c = 0; c < result.zeros.size(); ++c) {
            if ((result.zeros[c] - u).norm() < kClusterRadius) {
                if (gn < residuals[c]) {
                    result.zeros[c] = u;
                    residuals[c] = gn;
                }
                merged = true;
                break;
            }
        }
        if (!merged) {
            result.zeros.push_back(u);
            residuals.push_back(gn);
        }
    }
    return result;
}

namespace {

// exp of [[A, b], [0, 0]] * h gives x(h) = e^{Ah} x + int_0^h e^{As} ds b.
struct Propagator {
    Matrix Phi;
    Vector shift;

    Vector apply(const Vector& x) const { return Phi * x + shift; }
};

Propagator make_propagator(const Matrix& A, const Vector& b, double h) {
    const Eigen::Index n = A.rows();
    Matrix aug = Matrix::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = A;
    aug.topRightCorner(n, 1) = b;
    const Matrix E = (h * aug).exp();
    return {E.topLeftCorner(n, n), E.topRightCorner(n, 1)};
}

}  // namespace

GridSolution bangbang_grid_solver(const LinearInstance& inst, int max_switches, const GridResolution& grid) {
    const Eigen::Index n = inst.A.rows();
    const Eigen::Index k = inst.B.cols();
    if (inst.A.cols() != n || inst.B.rows() != n || inst.x0.size() != n || inst.x1.size() != n) {
        throw DimensionError("linear instance dimension mismatch");
    }
    if (n > 3 || k < 1 || k > 2) {
        throw DomainError("bangbang_grid_solver supports n <= 3 and k <= 2");
    }
    if (Eigen::JacobiSVD<Matrix>(inst.B).singularValues()[k - 1] <= kFrameTolerance) {
        throw DomainError("control matrix columns are dependent");
    }
    if (max_switches < 0 || !(grid.dt > 0.0) || grid.refine < 1 || !(grid.t_max > 0.0) || !(grid.delta_hit > 0.0) ||
        (k == 2 && grid.directions < 2)) {
        throw DomainError("invalid grid resolution");
    }

    GridSolution best;
    if ((inst.x0 - inst.x1).norm() <= grid.delta_hit) {
        return best;
    }

    std::vector<Vector> controls;
    if (k == 1) {
        controls.push_back(Vector::Constant(1, -1.0));
        controls.push_back(Vector::Constant(1, 1.0));
    } else {
        for (int j = 0; j < grid.directions; ++j) {
            const double angle = 2.0 * std::numbers::pi * j / grid.directions;
            Vector c(2);
            c << std::cos(angle), std::sin(angle);
            controls.push_back(c);
        }
    }
    const double sub = grid.dt / grid.refine;
    std::vector<Propagator> fine;
    for (const Vector& c : controls) {
        fine.push_back(make_propagator(inst.A, inst.B * c, sub));
    }

    best.time = std::numeric_limits<double>::infinity();
    std::vector<std::pair<std::size_t, long>> path;  // (control index, coarse cells)
    const long max_sub = static_cast<long>(std::floor(grid.t_max / sub + 1e-9));

    // Elapsed time is tracked in substeps so schedules compare exactly.
    std::function<void(const Vector&, long, int, std::size_t)> explore = [&](const Vector& x, long elapsed, int depth,
                                                                            std::size_t prev) {
        for (std::size_t ci = 0; ci < controls.size(); ++ci) {
            if (depth > 0 && ci == prev) {
                continue;
            }
            Vector state = x;
            for (long m = 1; elapsed + m <= max_sub; ++m) {
                if (static_cast<double>(elapsed + m) * sub >= best.time) {
                    break;
                }
                state = fine[ci].apply(state);
                ++best.evaluated;
                if ((state - inst.x1).norm() <= grid.delta_hit) {
                    best.time = static_cast<double>(elapsed + m) * sub;
                    best.schedule.clear();
                    for (const auto& [idx, cells] : path) {
                        best.schedule.push_back({controls[idx], static_cast<double>(cells) * grid.dt});
                    }
                    best.schedule.push_back({controls[ci], static_cast<double>(m) * sub});
                    break;
                }
                if (depth < max_switches && m % grid.refine == 0) {
                    path.emplace_back(ci, m / grid.refine);
                    explore(state, elapsed + m, depth + 1, ci);
                    path.pop_back();
                }
            }
        }
    };
    explore(inst.x0, 0, 0, 0);

    if (!std::isfinite(best.time)) {
        throw DomainError("bangbang_grid_solver: no feasible schedule at this resolution");
    }
    return best;
}

}  // namespace extremal

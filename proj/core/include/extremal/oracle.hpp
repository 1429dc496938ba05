#pragma once

#include <cstdint>
#include <vector>

#include "extremal/fields.hpp"

namespace extremal {

struct SphereMinimum {
    double value = 0.0;  // min over the sphere of ||HIJ u - H0I||
    Vector argmin;
};

// Seeded normal sampling of S^{k-1} followed by projected gradient descent with
// Armijo backtracking from the 10 best samples. The result is an upper bound on
// the true minimum; refinement never increases it.
SphereMinimum sphere_membership_oracle(const Vector& H0I, const Matrix& HIJ, int samples = 1000,
                                       std::uint64_t seed = 1);

struct ZeroSearchResult {
    std::vector<Vector> zeros;  // cluster representatives with ||g|| < 1e-8
    double min_residual = 0.0;  // smallest ||g|| reached from any start
};

// Levenberg-Marquardt on the tangent space from every sample, then clustering of
// converged points at radius 1e-6.
ZeroSearchResult zero_search_g(const Vector& H0I, const Matrix& HIJ, int samples = 1000, std::uint64_t seed = 1);

// x' = A x + B u, ||u|| <= 1.
struct LinearInstance {
    Matrix A;
    Matrix B;
    Vector x0;
    Vector x1;
};

struct GridResolution {
    double dt = 0.01;       // switch-time grid
    int refine = 10;        // substeps per grid cell when scanning for arrival
    double t_max = 5.0;
    int directions = 16;    // control directions on S^1 when k = 2
    double delta_hit = 1e-3;
};

struct ControlPiece {
    Vector control;
    double duration = 0.0;
};

struct GridSolution {
    double time = 0.0;
    std::vector<ControlPiece> schedule;
    long evaluated = 0;  // propagation steps performed

    int switches() const { return schedule.empty() ? 0 : static_cast<int>(schedule.size()) - 1; }
};

// Exhaustive search over piecewise-constant extreme controls with at most
// `max_switches` switches, propagated exactly with matrix exponentials.
// Throws DomainError when no schedule reaches x1 within delta_hit by t_max.
GridSolution bangbang_grid_solver(const LinearInstance& inst, int max_switches, const GridResolution& grid = {});

}  // namespace extremal

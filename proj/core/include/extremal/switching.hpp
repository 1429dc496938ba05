#pragma once

#include <complex>
#include <optional>
#include <string_view>
#include <vector>

#include "extremal/fields.hpp"

namespace extremal {

// Numerical thresholds for the pointwise singular-locus analysis.
struct SwitchTolerances {
    double rank_rel = 1e-10;    // singular values below rank_rel * sigma_max count as zero
    double abs_floor = 1e-9;    // absolute noise floor for ranks and range residuals
    double membership = 1e-8;   // band around ||v|| = 1 treated as the sphere itself
    double skew = 1e-9;         // ||HIJ + HIJ^T|| <= skew * max(1, ||HIJ||)
    double guard = 1e-6;        // singular_arc_check reports `inconclusive` within this band
};

// Where H0I sits relative to HIJ * S^{k-1}, HIJ * B^k and HIJ * closed(B^k).
struct MembershipVerdict {
    bool in_sphere_image = false;
    bool in_open_ball_image = false;
    bool in_closed_ball_image = false;
    std::optional<Vector> min_norm_solution;  // set iff H0I lies in range(HIJ)
    int rank = 0;
};

enum class Scenario { A, B, Cprime, Cdoubleprime, CondEqqFails };

std::string_view to_string(Scenario s) noexcept;

struct SwitchSolution {
    double d = 0.0;
    Vector u_plus;
    Vector u_minus;
};

enum class SingularArcVerdict { ContradictionNorm, GohExcluded, Inconclusive };

std::string_view to_string(SingularArcVerdict v) noexcept;

// Throws DomainError unless HIJ is square, matches H0I and is skew within tolerance.
void check_skew_pair(const Vector& H0I, const Matrix& HIJ, const SwitchTolerances& tol = {});

MembershipVerdict membership(const Vector& H0I, const Matrix& HIJ, const SwitchTolerances& tol = {});

Scenario classify(const Vector& H0I, const Matrix& HIJ, const SwitchTolerances& tol = {});

// phi(Z) = <[Z^2 Id - HIJ^2]^{-1} H0I, H0I>, Z > 0.
double switch_phi(const Vector& H0I, const Matrix& HIJ, double Z);

// The unique d > 0 with phi(d) = 1. Throws DomainError when phi never reaches 1
// from above, i.e. the data does not satisfy H0I outside HIJ * closed(B^k).
double solve_d(const Vector& H0I, const Matrix& HIJ);

// u_+- = [+-d Id + HIJ]^{-1} H0I.
SwitchSolution jump_controls(const Vector& H0I, const Matrix& HIJ, double d);

// -[<H0I, u> Id + HIJ + u H0I^T], the linearisation of g at an equilibrium u.
Matrix equilibrium_jacobian(const Vector& H0I, const Matrix& HIJ, const Vector& u);

// Eigenvalues of `jac` restricted to the tangent space u-perp (empty for k = 1).
std::vector<std::complex<double>> tangent_eigenvalues(const Matrix& jac, const Vector& u);

struct Codim1Result {
    Vector a;
    Matrix A;
    bool holds = false;
};

// For k = n - 1: a_i = det(f_1..f_{n-1}, [f_0, f_i]), A_ij = det(f_1..f_{n-1}, [f_i, f_j]);
// holds iff a is not in A * S^{n-2}.
Codim1Result codim1_condition(const AffineSystem& system, const Vector& q, const SwitchTolerances& tol = {});

// Excludes arcs inside the singular locus: HIJ u = H0I either has no admissible
// (||u|| <= 1) solution or only interior ones, which fail the Goh condition.
SingularArcVerdict singular_arc_check(const Vector& H0I, const Matrix& HIJ, const SwitchTolerances& tol = {});

}  // namespace extremal

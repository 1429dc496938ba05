#pragma once

#include <optional>

#include "extremal/fields.hpp"

namespace extremal {

// lambda = (xi, x) in the cotangent chart; xi is a row covector stored as a column.
struct CotangentPoint {
    Vector xi;
    Vector x;
};

// Blow-up coordinates: (h_1..h_k) = rho * u with u on S^{k-1}, plus the tail
// Hamiltonians h_{k+1}..h_n and the base point.
struct LiftedPoint {
    double rho = 0.0;
    Vector u;
    Vector h_tail;
    Vector x;
};

// H0I[i] = <xi, [f_0, f_{i+1}]>, HIJ[i][j] = <xi, [f_{i+1}, f_{j+1}]> (skew).
struct BracketData {
    Vector H0I;
    Matrix HIJ;
};

// Every pairing the Hamiltonian flow needs at one cotangent point.
struct FrameBrackets {
    Vector h;          // h_0..h_n
    BracketData data;  // H0I, HIJ (exactly skew)
    Vector H0T;        // h_{0j}, j = k+1..n
    Matrix HIT;        // h_{ij}, i = 1..k (rows), j = k+1..n (columns)
    double skew_defect = 0.0;  // ||HIJ + HIJ^T|| before symmetrisation
};

// h_i(lambda) = <xi, f_i(x)> for i in 0..n.
double lift_h(const AffineSystem& system, const CotangentPoint& lam, int index);

BracketData bracket_data(const AffineSystem& system, const CotangentPoint& lam);
FrameBrackets frame_brackets(const AffineSystem& system, const CotangentPoint& lam);

// Coordinate change (xi, x) -> (rho, u, h_tail, x). When (h_1..h_k) vanishes
// (rho <= zero_tol * max(1, ||h||)) the sphere point is not determined by lam
// and `fiber_direction` must be supplied; it is normalised.
LiftedPoint to_blowup(const AffineSystem& system, const CotangentPoint& lam,
                      const std::optional<Vector>& fiber_direction = std::nullopt, double zero_tol = 1e-12);

// Inverse change: the unique xi with <xi, f_i> = rho u_i (i <= k) and
// <xi, f_j> = h_tail (j > k). Throws FrameError if the frame is degenerate at x.
CotangentPoint from_blowup(const AffineSystem& system, const LiftedPoint& lp);

// Maximised Hamiltonian h_0 + rho.
double hamiltonian(const AffineSystem& system, const LiftedPoint& lp);

// For k = n - 1: the covector w -> det(f_1(x), .., f_{n-1}(x), w), scaled to
// unit length with its first nonzero component positive.
Vector annihilator_covector(const AffineSystem& system, const Vector& x);

}  // namespace extremal

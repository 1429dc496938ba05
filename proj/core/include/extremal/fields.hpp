#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "extremal/expression.hpp"

namespace extremal {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Base step of the central-difference Jacobian; the actual step in coordinate j
// is kDefaultFdStep * max(1, |x_j|).
inline constexpr double kDefaultFdStep = 1e-6;

// Frames whose |det| (or smallest singular value of the control block) fall
// below this are treated as degenerate.
inline constexpr double kFrameTolerance = 1e-9;

// Smooth vector field on a single coordinate chart of R^n.
class VectorField {
public:
    // Parses `dim` semicolon-separated component expressions.
    static VectorField parse(std::string_view source, int dim);
    static VectorField constant(const Vector& value);
    // The coordinate field e_index (0-based index).
    static VectorField coordinate(int dim, int index);

    int dim() const noexcept { return static_cast<int>(components_.size()); }
    bool is_constant() const noexcept { return constant_; }
    const std::string& source() const noexcept { return source_; }

    // Throws NumericalError if any component evaluates to a non-finite value.
    Vector operator()(const Vector& x) const;

private:
    std::vector<Expression> components_;
    std::string source_;
    bool constant_ = true;
};

VectorField parse_field(std::string_view source, int dim);

// Central-difference Jacobian, entry (i, j) = d f_i / d x_j.
Matrix jacobian(const VectorField& f, const Vector& x, double eps_fd = kDefaultFdStep);

// [f, g](x) = Dg(x) f(x) - Df(x) g(x).
Vector lie_bracket(const VectorField& f, const VectorField& g, const Vector& x,
                   double eps_fd = kDefaultFdStep);

// Affine control system xdot = f_0 + sum_i u_i f_i with a completed frame
// f_{k+1}..f_n. Immutable after construction.
class AffineSystem {
public:
    AffineSystem(VectorField drift, std::vector<VectorField> controlled,
                 std::vector<VectorField> frame_tail, double eps_fd = kDefaultFdStep);

    int n() const noexcept { return n_; }
    int k() const noexcept { return static_cast<int>(controlled_.size()); }
    double eps_fd() const noexcept { return eps_fd_; }

    // Index 0 is the drift, 1..k the controlled fields, k+1..n the frame tail.
    const VectorField& field(int index) const;
    const VectorField& drift() const noexcept { return drift_; }
    std::span<const VectorField> controlled() const noexcept { return controlled_; }
    std::span<const VectorField> frame_tail() const noexcept { return frame_tail_; }

    // n x n matrix with columns f_1(x)..f_n(x).
    Matrix frame(const Vector& x) const;
    // n x k matrix with columns f_1(x)..f_k(x).
    Matrix control_frame(const Vector& x) const;

    // Throws FrameError unless f_1..f_k are independent and f_1..f_n span at x.
    void check_frame(const Vector& x, double tolerance = kFrameTolerance) const;

private:
    VectorField drift_;
    std::vector<VectorField> controlled_;
    std::vector<VectorField> frame_tail_;
    int n_;
    double eps_fd_;
};

// Completes f_1..f_k with coordinate fields, picked greedily (largest residual
// against the span chosen so far, ties to the lowest index) to maximise |det|
// of the frame at `anchor`. The chosen tail is listed in increasing index order.
AffineSystem complete_frame(VectorField drift, std::vector<VectorField> controlled,
                            const Vector& anchor, double eps_fd = kDefaultFdStep);

}  // namespace extremal

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "extremal/extremal.hpp"
#include "support/instances.hpp"

namespace extremal {
namespace {

using testing::vec;

TEST(Expression, EvaluatesWithPrecedence) {
    const Expression e = Expression::parse("1 + 2*x1^2 - x2/4", 2);
    const std::vector<double> x = {3.0, 8.0};
    EXPECT_DOUBLE_EQ(e.evaluate(x), 1.0 + 18.0 - 2.0);
    EXPECT_FALSE(e.is_constant());
}

TEST(Expression, SmoothPrimitivesAndUnaryMinus) {
    const Expression e = Expression::parse("-exp(x1) + sin(x2)*cos(x2)", 2);
    const std::vector<double> x = {0.5, 0.3};
    EXPECT_NEAR(e.evaluate(x), -std::exp(0.5) + std::sin(0.3) * std::cos(0.3), 1e-15);
}

TEST(Expression, ReportsErrorOffset) {
    try {
        (void)parse_field("x1; x2 +* 3", 2);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_GE(e.position(), 4u);
        EXPECT_LE(e.position(), 11u);
    }
}

TEST(Expression, RejectsUnknownVariableAndFunction) {
    EXPECT_THROW((void)parse_field("x3; 0", 2), ParseError);
    EXPECT_THROW((void)parse_field("abs(x1); 0", 2), ParseError);
    EXPECT_THROW((void)parse_field("x1", 2), Error);
}

TEST(VectorField, NonFiniteEvaluationThrows) {
    const VectorField f = parse_field("1/x1", 1);
    EXPECT_THROW((void)f(vec({0.0})), NumericalError);
}

TEST(Jacobian, MatchesAnalyticDerivative) {
    const VectorField f = parse_field("x1^2*x2; sin(x1) + x2^3", 2);
    const Vector x = vec({0.7, -1.3});
    const Matrix J = jacobian(f, x);
    EXPECT_NEAR(J(0, 0), 2 * 0.7 * -1.3, 1e-8);
    EXPECT_NEAR(J(0, 1), 0.49, 1e-8);
    EXPECT_NEAR(J(1, 0), std::cos(0.7), 1e-8);
    EXPECT_NEAR(J(1, 1), 3 * 1.69, 1e-8);
}

TEST(LieBracket, DoubleIntegratorPair) {
    const VectorField f = parse_field("x2; 0", 2);
    const VectorField g = parse_field("0; 1", 2);
    const Vector b = lie_bracket(f, g, vec({0.4, 2.0}));
    EXPECT_NEAR(b[0], -1.0, 1e-9);
    EXPECT_NEAR(b[1], 0.0, 1e-9);
}

TEST(LieBracket, AntisymmetryAndJacobiIdentity) {
    const VectorField f = parse_field("x2*x3; x1^2; sin(x2)", 3);
    const VectorField g = parse_field("x3; x1*x2; 1 + x1", 3);
    const VectorField h = parse_field("cos(x1); x3^2; x2", 3);
    const Vector x = vec({0.3, -0.2, 0.5});
    EXPECT_LT((lie_bracket(f, g, x) + lie_bracket(g, f, x)).norm(), 1e-8);

    // [f,[g,h]] + [g,[h,f]] + [h,[f,g]] = 0, with inner brackets as fields via finite differences.
    auto bracket_field = [](const VectorField& a, const VectorField& b) {
        return [&a, &b](const Vector& y) { return lie_bracket(a, b, y); };
    };
    auto outer = [&](const VectorField& a, const std::function<Vector(const Vector&)>& inner) {
        constexpr double h_fd = 1e-5;
        Matrix D(3, 3);
        for (int j = 0; j < 3; ++j) {
            Vector e = Vector::Zero(3);
            e[j] = h_fd;
            D.col(j) = (inner(x + e) - inner(x - e)) / (2 * h_fd);
        }
        return Vector(D * a(x) - jacobian(a, x) * inner(x));
    };
    const Vector jac = outer(f, bracket_field(g, h)) + outer(g, bracket_field(h, f)) + outer(h, bracket_field(f, g));
    EXPECT_LT(jac.norm(), 1e-5);
}

Vector rk4_flow(const VectorField& f, Vector x, double t) {
    constexpr int steps = 200;
    const double h = t / steps;
    for (int i = 0; i < steps; ++i) {
        const Vector k1 = f(x);
        const Vector k2 = f(x + 0.5 * h * k1);
        const Vector k3 = f(x + 0.5 * h * k2);
        const Vector k4 = f(x + h * k3);
        x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return x;
}

TEST(LieBracket, FlowCommutatorSecondOrderTerm) {
    // Following f, g, -f, -g for time t each moves x by t^2 [f,g](x) + O(t^3).
    const VectorField f = parse_field("x2^2; sin(x1); x1*x3", 3);
    const VectorField g = parse_field("1 + x3; x1*x2; cos(x2)", 3);
    const Vector x = vec({0.2, 0.4, -0.3});
    const Vector expected = lie_bracket(f, g, x);
    double previous = 0.0;
    for (double t : {1e-2, 5e-3}) {
        Vector y = rk4_flow(f, x, t);
        y = rk4_flow(g, y, t);
        y = rk4_flow(f, y, -t);
        y = rk4_flow(g, y, -t);
        const double err = ((y - x) / (t * t) - expected).norm();
        EXPECT_LT(err, 50 * t);
        if (previous > 0.0) {
            EXPECT_LT(err, previous);
        }
        previous = err;
    }
}

TEST(AffineSystem, FrameAndChecks) {
    const AffineSystem sys = testing::rotation_instance(5.0, 3.0);
    EXPECT_EQ(sys.n(), 3);
    EXPECT_EQ(sys.k(), 2);
    const Matrix F = sys.frame(vec({0.5, 0.0, 0.0}));
    EXPECT_DOUBLE_EQ(F(2, 1), 1.5);
    EXPECT_NO_THROW(sys.check_frame(Vector::Zero(3)));

    const AffineSystem degenerate(parse_field("0; 0", 2), {parse_field("x1; 0", 2)}, {parse_field("0; 1", 2)});
    EXPECT_THROW(degenerate.check_frame(Vector::Zero(2)), FrameError);
    EXPECT_THROW(AffineSystem(parse_field("0; 0", 2), {parse_field("1; 0; 0", 3)}, {parse_field("0; 1", 2)}),
                 DimensionError);
}

TEST(AffineSystem, CompleteFramePicksLargestResidual) {
    const AffineSystem sys =
        complete_frame(parse_field("0; 0; 0", 3), {parse_field("1; 1; 0", 3)}, Vector::Zero(3));
    ASSERT_EQ(sys.frame_tail().size(), 2u);
    const Matrix F = sys.frame(Vector::Zero(3));
    EXPECT_GT(std::abs(F.determinant()), 0.5);
    // e_3 is orthogonal to (1,1,0); e_1 wins the tie against e_2 by index.
    EXPECT_DOUBLE_EQ(F(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(F(2, 2), 1.0);
}

TEST(VectorField, WorkedEvaluations) {
    const VectorField rot = parse_field("x2; -x1", 2);
    EXPECT_EQ(rot(vec({1.0, 0.0})), vec({0.0, -1.0}));
    const VectorField e1 = parse_field("1; 0; 0", 3);
    EXPECT_TRUE(e1.is_constant());
    EXPECT_EQ(e1(vec({4.0, 5.0, 6.0})), vec({1.0, 0.0, 0.0}));
    const Vector v = parse_field("x1*x2; sin(x1); 0", 3)(vec({std::numbers::pi, 2.0, 5.0}));
    EXPECT_DOUBLE_EQ(v[0], 2 * std::numbers::pi);
    EXPECT_NEAR(v[1], 0.0, 1e-15);
    EXPECT_EQ(v[2], 0.0);
}

TEST(Jacobian, WorkedExamples) {
    Matrix rot(2, 2);
    rot << 0, 1, -1, 0;
    EXPECT_LT((jacobian(parse_field("x2; -x1", 2), vec({0.3, -2.0})) - rot).norm(), 1e-9);
    Matrix sq = Matrix::Zero(2, 2);
    sq(0, 0) = 6;
    EXPECT_LT((jacobian(parse_field("x1*x1; 0", 2), vec({3.0, 0.0})) - sq).norm(), 1e-6);
    Matrix s = Matrix::Zero(2, 2);
    s(0, 0) = 1;
    EXPECT_LT((jacobian(parse_field("sin(x1); 0", 2), vec({0.0, 0.0})) - s).norm(), 1e-6);
}

TEST(LieBracket, WorkedExamples) {
    const VectorField f = parse_field("x1^2 + x2; sin(x2)", 2);
    EXPECT_LT(lie_bracket(f, f, vec({0.4, 0.9})).norm(), 1e-12);
    const VectorField e1 = parse_field("1; 0", 2);
    const VectorField g = parse_field("0; x1", 2);
    for (const Vector& x : {vec({0.0, 0.0}), vec({2.0, -1.0})}) {
        EXPECT_LT((lie_bracket(e1, g, x) - vec({0.0, 1.0})).norm(), 1e-9);
    }
    const VectorField rot = parse_field("x2; -x1", 2);
    const VectorField id = parse_field("x1; x2", 2);
    EXPECT_LT(lie_bracket(rot, id, vec({1.5, -0.5})).norm(), 1e-9);
}

TEST(AffineSystem, CanonicalCompletions) {
    const AffineSystem a = complete_frame(parse_field("0; 0; 0", 3), {parse_field("1; 0; 0", 3), parse_field("0; 1; 0", 3)},
                                          Vector::Zero(3));
    ASSERT_EQ(a.frame_tail().size(), 1u);
    EXPECT_EQ(a.frame_tail()[0](Vector::Zero(3)), vec({0, 0, 1}));
    const AffineSystem b = complete_frame(parse_field("0; 0", 2), {parse_field("0; 1", 2)}, Vector::Zero(2));
    EXPECT_EQ(b.frame_tail()[0](Vector::Zero(2)), vec({1, 0}));
    const AffineSystem c = complete_frame(parse_field("0; 0; 0; 0", 4),
                                          {parse_field("1; 0; 1; 0", 4), parse_field("0; 1; 0; 0", 4)}, Vector::Zero(4));
    EXPECT_GT(std::abs(c.frame(Vector::Zero(4)).determinant()), 0.5);
}

}  // namespace
}  // namespace extremal

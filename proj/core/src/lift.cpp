#include "extremal/lift.hpp"

#include <cmath>
#include <vector>

#include "extremal/errors.hpp"

namespace extremal {

namespace {

void check_point(const AffineSystem& system, const CotangentPoint& lam) {
    if (lam.xi.size() != system.n() || lam.x.size() != system.n()) {
        throw DimensionError("cotangent point dimension does not match the system");
    }
}

}  // namespace

double lift_h(const AffineSystem& system, const CotangentPoint& lam, int index) {
    check_point(system, lam);
    return lam.xi.dot(system.field(index)(lam.x));
}

FrameBrackets frame_brackets(const AffineSystem& system, const CotangentPoint& lam) {
    check_point(system, lam);
    const int n = system.n();
    const int k = system.k();
    const Vector& x = lam.x;

    std::vector<Vector> values(static_cast<std::size_t>(n + 1));
    std::vector<Matrix> jacobians(static_cast<std::size_t>(n + 1));
    FrameBrackets out;
    out.h.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        const auto& f = system.field(i);
        values[static_cast<std::size_t>(i)] = f(x);
        jacobians[static_cast<std::size_t>(i)] = jacobian(f, x, system.eps_fd());
        out.h[i] = lam.xi.dot(values[static_cast<std::size_t>(i)]);
    }
    // <xi, [f_a, f_b]> = xi^T (J_b f_a - J_a f_b); xi^T J is shared across pairs.
    std::vector<Vector> xiJ(static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n; ++i) {
        xiJ[static_cast<std::size_t>(i)] = jacobians[static_cast<std::size_t>(i)].transpose() * lam.xi;
    }
    auto pair = [&](int a, int b) {
        return xiJ[static_cast<std::size_t>(b)].dot(values[static_cast<std::size_t>(a)]) -
               xiJ[static_cast<std::size_t>(a)].dot(values[static_cast<std::size_t>(b)]);
    };

    out.data.H0I.resize(k);
    Matrix raw(k, k);
    for (int i = 1; i <= k; ++i) {
        out.data.H0I[i - 1] = pair(0, i);
        for (int j = 1; j <= k; ++j) {
            raw(i - 1, j - 1) = pair(i, j);
        }
    }
    out.skew_defect = (raw + raw.transpose()).norm();
    out.data.HIJ = 0.5 * (raw - raw.transpose());

    out.H0T.resize(n - k);
    out.HIT.resize(k, n - k);
    for (int j = k + 1; j <= n; ++j) {
        out.H0T[j - k - 1] = pair(0, j);
        for (int i = 1; i <= k; ++i) {
            out.HIT(i - 1, j - k - 1) = pair(i, j);
        }
    }
    return out;
}

BracketData bracket_data(const AffineSystem& system, const CotangentPoint& lam) {
    check_point(system, lam);
    const int k = system.k();
    const Vector& x = lam.x;
    std::vector<Vector> values(static_cast<std::size_t>(k + 1));
    std::vector<Vector> xiJ(static_cast<std::size_t>(k + 1));
    for (int i = 0; i <= k; ++i) {
        const auto& f = system.field(i);
        values[static_cast<std::size_t>(i)] = f(x);
        xiJ[static_cast<std::size_t>(i)] = jacobian(f, x, system.eps_fd()).transpose() * lam.xi;
    }
    auto pair = [&](int a, int b) {
        return xiJ[static_cast<std::size_t>(b)].dot(values[static_cast<std::size_t>(a)]) -
               xiJ[static_cast<std::size_t>(a)].dot(values[static_cast<std::size_t>(b)]);
    };
    BracketData out;
    out.H0I.resize(k);
    Matrix raw(k, k);
    for (int i = 1; i <= k; ++i) {
        out.H0I[i - 1] = pair(0, i);
        for (int j = 1; j <= k; ++j) {
            raw(i - 1, j - 1) = pair(i, j);
        }
    }
    out.HIJ = 0.5 * (raw - raw.transpose());
    return out;
}

LiftedPoint to_blowup(const AffineSystem& system, const CotangentPoint& lam,
                      const std::optional<Vector>& fiber_direction, double zero_tol) {
    check_point(system, lam);
    if (lam.xi.squaredNorm() == 0.0) {
        throw DomainError("to_blowup: zero covector");
    }
    const int n = system.n();
    const int k = system.k();
    const Vector h = system.frame(lam.x).transpose() * lam.xi;  // h_1..h_n

    LiftedPoint lp;
    lp.x = lam.x;
    lp.h_tail = h.tail(n - k);
    const Vector hI = h.head(k);
    lp.rho = hI.norm();
    if (lp.rho <= zero_tol * std::max(1.0, h.norm())) {
        if (!fiber_direction) {
            throw DomainError("to_blowup: point lies on the singular locus; a sphere direction is required");
        }
        if (fiber_direction->size() != k || !(fiber_direction->norm() > 0.0)) {
            throw DimensionError("to_blowup: fiber direction must be a nonzero k-vector");
        }
        lp.rho = 0.0;
        lp.u = fiber_direction->normalized();
    } else {
        lp.u = hI / lp.rho;
    }
    return lp;
}

CotangentPoint from_blowup(const AffineSystem& system, const LiftedPoint& lp) {
    const int n = system.n();
    const int k = system.k();
    if (lp.x.size() != n || lp.u.size() != k || lp.h_tail.size() != n - k) {
        throw DimensionError("lifted point dimension does not match the system");
    }
    const Matrix F = system.frame(lp.x);
    Vector h(n);
    h.head(k) = lp.rho * lp.u;
    h.tail(n - k) = lp.h_tail;
    const Eigen::FullPivLU<Matrix> lu(F.transpose());
    if (!lu.isInvertible() || !(std::abs(lu.determinant()) > kFrameTolerance)) {
        throw FrameError("from_blowup: frame degenerate at the base point");
    }
    return {lu.solve(h), lp.x};
}

double hamiltonian(const AffineSystem& system, const LiftedPoint& lp) {
    const CotangentPoint lam = from_blowup(system, lp);
    return lam.xi.dot(system.drift()(lam.x)) + lp.rho;
}

Vector annihilator_covector(const AffineSystem& system, const Vector& x) {
    const int n = system.n();
    if (system.k() != n - 1) {
        throw DomainError("annihilator covector requires k = n - 1");
    }
    Matrix M(n, n);
    M.leftCols(n - 1) = system.control_frame(x);
    Vector xi(n);
    for (int i = 0; i < n; ++i) {
        M.col(n - 1) = Vector::Unit(n, i);
        xi[i] = M.determinant();
    }
    const double norm = xi.norm();
    if (!(norm > kFrameTolerance)) {
        throw FrameError("annihilator covector vanishes: controlled fields dependent");
    }
    xi /= norm;
    for (int i = 0; i < n; ++i) {
        if (std::abs(xi[i]) > 1e-12) {
            if (xi[i] < 0.0) {
                xi = -xi;
            }
            break;
        }
    }
    return xi;
}

}  // namespace extremal

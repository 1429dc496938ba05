#include "extremal/switching.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "extremal/errors.hpp"

namespace extremal {

std::string_view to_string(Scenario s) noexcept {
    switch (s) {
        case Scenario::A:
            return "A";
        case Scenario::B:
            return "B";
        case Scenario::Cprime:
            return "Cprime";
        case Scenario::Cdoubleprime:
            return "Cdoubleprime";
        case Scenario::CondEqqFails:
            return "CondEqqFails";
    }
    return "?";
}

std::string_view to_string(SingularArcVerdict v) noexcept {
    switch (v) {
        case SingularArcVerdict::ContradictionNorm:
            return "contradiction_norm";
        case SingularArcVerdict::GohExcluded:
            return "goh_excluded";
        case SingularArcVerdict::Inconclusive:
            return "inconclusive";
    }
    return "?";
}

void check_skew_pair(const Vector& H0I, const Matrix& HIJ, const SwitchTolerances& tol) {
    const Eigen::Index k = H0I.size();
    if (k < 1 || HIJ.rows() != k || HIJ.cols() != k) {
        throw DimensionError("bracket data must be a k-vector and a k x k matrix with k >= 1");
    }
    if (!H0I.allFinite() || !HIJ.allFinite()) {
        throw NumericalError("bracket data contains non-finite entries");
    }
    const double defect = (HIJ + HIJ.transpose()).norm();
    if (defect > tol.skew * std::max(1.0, HIJ.norm())) {
        throw DomainError("HIJ is not skew-symmetric (||HIJ + HIJ^T|| = " + std::to_string(defect) + ")");
    }
}

MembershipVerdict membership(const Vector& H0I, const Matrix& HIJ, const SwitchTolerances& tol) {
    check_skew_pair(H0I, HIJ, tol);
    const Eigen::Index k = H0I.size();

    const Eigen::JacobiSVD<Matrix> svd(HIJ, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& sigma = svd.singularValues();
    const double threshold = std::max(tol.rank_rel * sigma[0], tol.abs_floor);

    MembershipVerdict verdict;
    const Vector c = svd.matrixU().transpose() * H0I;
    Vector v = Vector::Zero(k);
    double residual2 = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        if (sigma[i] > threshold) {
            v += (c[i] / sigma[i]) * svd.matrixV().col(i);
            ++verdict.rank;
        } else {
            residual2 += c[i] * c[i];
        }
    }
    const bool in_range = std::sqrt(residual2) <= std::max(tol.membership * H0I.norm(), tol.abs_floor);
    if (!in_range) {
        return verdict;
    }

    verdict.min_norm_solution = v;
    const double norm = v.norm();
    const bool kernel_trivial = verdict.rank == k;
    // Solutions form v + ker(HIJ) with ker orthogonal to v, so attainable norms
    // are [||v||, inf) when the kernel is nontrivial and {||v||} otherwise.
    if (kernel_trivial) {
        verdict.in_sphere_image = std::abs(norm - 1.0) <= tol.membership;
        verdict.in_open_ball_image = norm < 1.0 - tol.membership;
    } else {
        verdict.in_sphere_image = norm <= 1.0 + tol.membership;
        verdict.in_open_ball_image = false;
    }
    verdict.in_closed_ball_image = norm <= 1.0 + tol.membership;
    return verdict;
}

Scenario classify(const Vector& H0I, const Matrix& HIJ, const SwitchTolerances& tol) {
    const MembershipVerdict verdict = membership(H0I, HIJ, tol);
    if (verdict.in_sphere_image) {
        return Scenario::CondEqqFails;
    }
    const Eigen::Index k = H0I.size();
    if (k % 2 == 1) {
        return Scenario::A;
    }
    if (verdict.rank < k) {
        return Scenario::B;
    }
    // Nondegenerate HIJ: the min-norm solution is HIJ^{-1} H0I.
    const double norm = verdict.min_norm_solution->norm();
    if (std::abs(norm - 1.0) <= tol.membership) {
        return Scenario::CondEqqFails;
    }
    return norm > 1.0 ? Scenario::Cprime : Scenario::Cdoubleprime;
}

namespace {

// phi in the singular basis of HIJ: sum_i c_i^2 / (Z^2 + sigma_i^2), c = V^T H0I.
struct PhiSpectral {
    Vector c2;
    Vector s2;

    double value(double Z) const {
        return (c2.array() / (Z * Z + s2.array())).sum();
    }
    double derivative(double Z) const {
        const auto denom = Z * Z + s2.array();
        return -2.0 * Z * (c2.array() / (denom * denom)).sum();
    }
};

PhiSpectral spectral_phi(const Vector& H0I, const Matrix& HIJ) {
    const Eigen::JacobiSVD<Matrix> svd(HIJ, Eigen::ComputeFullV);
    PhiSpectral phi;
    phi.c2 = (svd.matrixV().transpose() * H0I).array().square();
    phi.s2 = svd.singularValues().array().square();
    return phi;
}

}  // namespace

// Evaluated in the singular basis: the direct solve with Z^2 Id - HIJ^2 loses
// digits when Z is small against sigma_max.
double switch_phi(const Vector& H0I, const Matrix& HIJ, double Z) {
    check_skew_pair(H0I, HIJ);
    if (!(Z > 0.0)) {
        throw DomainError("switch_phi: Z must be positive");
    }
    return spectral_phi(H0I, HIJ).value(Z);
}

double solve_d(const Vector& H0I, const Matrix& HIJ) {
    check_skew_pair(H0I, HIJ);
    const PhiSpectral phi = spectral_phi(H0I, HIJ);

    const double scale = H0I.norm() + HIJ.norm() + 1.0;
    double lo = 1e-12 * scale;
    double hi = scale;
    if (!(phi.value(lo) > 1.0)) {
        throw DomainError("solve_d: phi stays below 1 near zero; H0I lies in HIJ * closed ball");
    }
    for (int i = 0; phi.value(hi) >= 1.0; ++i) {
        if (i > 200) {
            throw NumericalError("solve_d: failed to bracket the root");
        }
        hi *= 2.0;
    }

    // phi is strictly decreasing in Z on (0, inf).
    for (int i = 0; i < 400 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
        const double mid = (hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        if (phi.value(mid) > 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    double d = 0.5 * (lo + hi);
    for (int i = 0; i < 8; ++i) {
        const double r = phi.value(d) - 1.0;
        if (std::abs(r) < 1e-15) {
            break;
        }
        const double next = d - r / phi.derivative(d);
        if (!(next > 0.0) || !std::isfinite(next)) {
            break;
        }
        if (std::abs(phi.value(next) - 1.0) >= std::abs(r)) {
            break;
        }
        d = next;
    }
    return d;
}

SwitchSolution jump_controls(const Vector& H0I, const Matrix& HIJ, double d) {
    check_skew_pair(H0I, HIJ);
    if (!(d > 0.0)) {
        throw DomainError("jump_controls: d must be positive");
    }
    const Eigen::Index k = H0I.size();
    const Matrix I = Matrix::Identity(k, k);
    SwitchSolution out;
    out.d = d;
    out.u_plus = Eigen::PartialPivLU<Matrix>(d * I + HIJ).solve(H0I);
    out.u_minus = Eigen::PartialPivLU<Matrix>(-d * I + HIJ).solve(H0I);
    if (!out.u_plus.allFinite() || !out.u_minus.allFinite() || !(out.u_plus.norm() > 0.0) ||
        !(out.u_minus.norm() > 0.0)) {
        throw NumericalError("jump_controls: singular solve");
    }
    out.u_plus.normalize();
    out.u_minus.normalize();
    return out;
}

Matrix equilibrium_jacobian(const Vector& H0I, const Matrix& HIJ, const Vector& u) {
    const Eigen::Index k = H0I.size();
    return -(H0I.dot(u) * Matrix::Identity(k, k) + HIJ + u * H0I.transpose());
}

std::vector<std::complex<double>> tangent_eigenvalues(const Matrix& jac, const Vector& u) {
    const Eigen::Index k = u.size();
    if (k <= 1) {
        return {};
    }
    const Eigen::HouseholderQR<Matrix> qr(u.normalized());
    const Matrix Q = qr.householderQ();
    const Matrix basis = Q.rightCols(k - 1);  // orthonormal basis of u-perp
    const Matrix restricted = basis.transpose() * jac * basis;
    const Eigen::EigenSolver<Matrix> es(restricted, false);
    std::vector<std::complex<double>> out;
    out.reserve(static_cast<std::size_t>(k - 1));
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        out.push_back(es.eigenvalues()[i]);
    }
    return out;
}

Codim1Result codim1_condition(const AffineSystem& system, const Vector& q, const SwitchTolerances& tol) {
    const int n = system.n();
    const int k = system.k();
    if (k != n - 1) {
        throw DomainError("codim1_condition requires k = n - 1");
    }
    const double eps = system.eps_fd();
    Matrix M(n, n);
    M.leftCols(k) = system.control_frame(q);
    auto det_with = [&](const Vector& w) {
        M.col(n - 1) = w;
        return M.determinant();
    };

    Codim1Result out;
    out.a.resize(k);
    out.A = Matrix::Zero(k, k);
    for (int i = 1; i <= k; ++i) {
        out.a[i - 1] = det_with(lie_bracket(system.drift(), system.field(i), q, eps));
        for (int j = i + 1; j <= k; ++j) {
            const double value = det_with(lie_bracket(system.field(i), system.field(j), q, eps));
            out.A(i - 1, j - 1) = value;
            out.A(j - 1, i - 1) = -value;
        }
    }
    out.holds = !membership(out.a, out.A, tol).in_sphere_image;
    return out;
}

SingularArcVerdict singular_arc_check(const Vector& H0I, const Matrix& HIJ, const SwitchTolerances& tol) {
    const MembershipVerdict verdict = membership(H0I, HIJ, tol);
    if (verdict.in_sphere_image) {
        throw DomainError("singular_arc_check: H0I lies in HIJ * S^{k-1}; classify the point first");
    }
    if (!verdict.min_norm_solution) {
        return SingularArcVerdict::ContradictionNorm;
    }
    const double norm = verdict.min_norm_solution->norm();
    if (norm > 1.0 + tol.guard) {
        return SingularArcVerdict::ContradictionNorm;
    }
    if (norm < 1.0 - tol.guard) {
        return SingularArcVerdict::GohExcluded;
    }
    return SingularArcVerdict::Inconclusive;
}

}  // namespace extremal

#include "extremal/fields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "extremal/errors.hpp"

namespace extremal {

VectorField VectorField::parse(std::string_view source, int dim) {
    if (dim <= 0) {
        throw DimensionError("field dimension must be positive");
    }
    VectorField f;
    f.source_ = std::string(source);

    std::size_t start = 0;
    for (;;) {
        const std::size_t end = source.find(';', start);
        const std::string_view piece =
            source.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        if (static_cast<int>(f.components_.size()) == dim) {
            throw ParseError("dimension mismatch: more than " + std::to_string(dim) + " components",
                             start);
        }
        f.components_.push_back(Expression::parse(piece, dim, start));
        f.constant_ = f.constant_ && f.components_.back().is_constant();
        if (end == std::string_view::npos) {
            break;
        }
        start = end + 1;
    }
    if (static_cast<int>(f.components_.size()) != dim) {
        throw ParseError("dimension mismatch: expected " + std::to_string(dim) + " components, got " +
                             std::to_string(f.components_.size()),
                         source.size());
    }
    return f;
}

VectorField VectorField::constant(const Vector& value) {
    std::ostringstream os;
    os.precision(17);
    for (Eigen::Index i = 0; i < value.size(); ++i) {
        if (i > 0) {
            os << "; ";
        }
        // Parenthesise so negative literals go through unary minus.
        os << '(' << value[i] << ')';
    }
    return parse(os.str(), static_cast<int>(value.size()));
}

VectorField VectorField::coordinate(int dim, int index) {
    if (index < 0 || index >= dim) {
        throw DimensionError("coordinate index out of range");
    }
    Vector e = Vector::Zero(dim);
    e[index] = 1.0;
    return constant(e);
}

Vector VectorField::operator()(const Vector& x) const {
    if (x.size() != dim()) {
        throw DimensionError("field of dimension " + std::to_string(dim()) +
                             " evaluated at a point of dimension " + std::to_string(x.size()));
    }
    Vector out(dim());
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    for (int i = 0; i < dim(); ++i) {
        out[i] = components_[static_cast<std::size_t>(i)].evaluate(xs);
        if (!std::isfinite(out[i])) {
            throw NumericalError("non-finite value in component " + std::to_string(i + 1) +
                                 " of field '" + source_ + "'");
        }
    }
    return out;
}

VectorField parse_field(std::string_view source, int dim) { return VectorField::parse(source, dim); }

Matrix jacobian(const VectorField& f, const Vector& x, double eps_fd) {
    const int n = f.dim();
    if (x.size() != n) {
        throw DimensionError("jacobian: point dimension mismatch");
    }
    if (!x.allFinite()) {
        throw NumericalError("jacobian: non-finite point");
    }
    Matrix J = Matrix::Zero(n, n);
    if (f.is_constant()) {
        return J;
    }
    Vector xp = x;
    Vector xm = x;
    for (int j = 0; j < n; ++j) {
        const double h = eps_fd * std::max(1.0, std::abs(x[j]));
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        // Use the representable step, not the nominal one.
        const double width = xp[j] - xm[j];
        J.col(j) = (f(xp) - f(xm)) / width;
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return J;
}

Vector lie_bracket(const VectorField& f, const VectorField& g, const Vector& x, double eps_fd) {
    if (f.dim() != g.dim()) {
        throw DimensionError("lie_bracket: fields of different dimension");
    }
    return jacobian(g, x, eps_fd) * f(x) - jacobian(f, x, eps_fd) * g(x);
}

AffineSystem::AffineSystem(VectorField drift, std::vector<VectorField> controlled,
                           std::vector<VectorField> frame_tail, double eps_fd)
    : drift_(std::move(drift)),
      controlled_(std::move(controlled)),
      frame_tail_(std::move(frame_tail)),
      n_(drift_.dim()),
      eps_fd_(eps_fd) {
    const int kk = static_cast<int>(controlled_.size());
    if (kk < 1 || kk >= n_) {
        throw DimensionError("affine system needs 1 <= k < n (n = " + std::to_string(n_) +
                             ", k = " + std::to_string(kk) + ")");
    }
    if (static_cast<int>(frame_tail_.size()) != n_ - kk) {
        throw DimensionError("frame tail must hold n - k = " + std::to_string(n_ - kk) + " fields");
    }
    for (const auto& f : controlled_) {
        if (f.dim() != n_) {
            throw DimensionError("controlled field dimension differs from drift dimension");
        }
    }
    for (const auto& f : frame_tail_) {
        if (f.dim() != n_) {
            throw DimensionError("frame field dimension differs from drift dimension");
        }
    }
    if (!(eps_fd_ > 0.0)) {
        throw DomainError("finite-difference step must be positive");
    }
}

const VectorField& AffineSystem::field(int index) const {
    if (index == 0) {
        return drift_;
    }
    if (index >= 1 && index <= k()) {
        return controlled_[static_cast<std::size_t>(index - 1)];
    }
    if (index > k() && index <= n_) {
        return frame_tail_[static_cast<std::size_t>(index - k() - 1)];
    }
    throw DimensionError("field index " + std::to_string(index) + " out of range 0.." + std::to_string(n_));
}

Matrix AffineSystem::frame(const Vector& x) const {
    Matrix F(n_, n_);
    for (int i = 1; i <= n_; ++i) {
        F.col(i - 1) = field(i)(x);
    }
    return F;
}

Matrix AffineSystem::control_frame(const Vector& x) const {
    Matrix F(n_, k());
    for (int i = 1; i <= k(); ++i) {
        F.col(i - 1) = field(i)(x);
    }
    return F;
}

void AffineSystem::check_frame(const Vector& x, double tolerance) const {
    const Eigen::JacobiSVD<Matrix> svd(control_frame(x));
    const double smallest = svd.singularValues()[k() - 1];
    if (!(smallest > tolerance)) {
        throw FrameError("controlled fields are not independent at the queried point (sigma_min = " +
                         std::to_string(smallest) + ")");
    }
    const double det = frame(x).determinant();
    if (!(std::abs(det) > tolerance)) {
        throw FrameError("frame f_1..f_n is degenerate at the queried point (det = " + std::to_string(det) +
                         ")");
    }
}

AffineSystem complete_frame(VectorField drift, std::vector<VectorField> controlled, const Vector& anchor,
                            double eps_fd) {
    const int n = drift.dim();
    const int k = static_cast<int>(controlled.size());
    if (k < 1 || k >= n) {
        throw DimensionError("complete_frame needs 1 <= k < n");
    }
    if (anchor.size() != n) {
        throw DimensionError("complete_frame: anchor dimension mismatch");
    }

    Matrix F(n, k);
    for (int i = 0; i < k; ++i) {
        if (controlled[static_cast<std::size_t>(i)].dim() != n) {
            throw DimensionError("controlled field dimension differs from drift dimension");
        }
        F.col(i) = controlled[static_cast<std::size_t>(i)](anchor);
    }
    const Eigen::JacobiSVD<Matrix> svd(F);
    if (!(svd.singularValues()[k - 1] > kFrameTolerance)) {
        throw FrameError("controlled fields are not independent at the anchor point");
    }

    // Orthonormal basis of the current span, grown one coordinate vector at a time.
    Eigen::HouseholderQR<Matrix> qr(F);
    Matrix basis = qr.householderQ() * Matrix::Identity(n, k);
    std::vector<int> chosen;
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int step = 0; step < n - k; ++step) {
        int best = -1;
        double best_norm = -1.0;
        Vector best_residual;
        for (int j = 0; j < n; ++j) {
            if (used[static_cast<std::size_t>(j)]) {
                continue;
            }
            Vector e = Vector::Unit(n, j);
            Vector r = e - basis * (basis.transpose() * e);
            const double norm = r.norm();
            if (norm > best_norm + 1e-12) {
                best = j;
                best_norm = norm;
                best_residual = r;
            }
        }
        used[static_cast<std::size_t>(best)] = true;
        chosen.push_back(best);
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
        basis.col(basis.cols() - 1) = best_residual / best_norm;
    }

    std::sort(chosen.begin(), chosen.end());
    std::vector<VectorField> tail;
    tail.reserve(chosen.size());
    for (int j : chosen) {
        tail.push_back(VectorField::coordinate(n, j));
    }
    AffineSystem system(std::move(drift), std::move(controlled), std::move(tail), eps_fd);
    system.check_frame(anchor);
    return system;
}

}  // namespace extremal

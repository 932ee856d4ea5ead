#include "rkhs/kernels.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace rkhs {

std::string_view to_string(KernelKind kind) noexcept {
    switch (kind) {
        case KernelKind::SobolevMatern32: return "matern32";
        case KernelKind::GaussianRbf: return "gaussian";
    }
    return "unknown";
}

KernelKind parse_kernel_kind(std::string_view name) {
    if (name == "matern32" || name == "sobolev_matern32") { return KernelKind::SobolevMatern32; }
    if (name == "gaussian" || name == "gaussian_rbf") { return KernelKind::GaussianRbf; }
    fail(ErrorCode::InvalidParameter, "unknown kernel kind '" + std::string(name) + "'");
}

Kernel::Kernel(KernelKind k, double l) : kind(k), length(l) {
    require(l > 0.0 && std::isfinite(l), ErrorCode::InvalidParameter, "kernel length scale must be positive");
}

double Kernel::profile(double r) const noexcept {
    switch (kind) {
        case KernelKind::SobolevMatern32: {
            const double s = std::sqrt(3.0) * r / length;
            return (1.0 + s) * std::exp(-s);
        }
        case KernelKind::GaussianRbf: {
            const double s = r / length;
            return std::exp(-s * s);
        }
    }
    return 0.0;
}

double Kernel::operator()(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const {
    require(x.size() == y.size(), ErrorCode::DimensionMismatch, "kernel arguments differ in dimension");
    return profile((x - y).norm());
}

double kernel_eval(const Kernel& k, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
    return k(x, y);
}

CenterSet::CenterSet(std::vector<Vector> centers, Kernel kernel, GrammianOptions options)
    : centers_(std::move(centers)), kernel_(kernel) {
    require(!centers_.empty(), ErrorCode::EmptySet, "center set is empty");
    dim_ = static_cast<std::size_t>(centers_.front().size());
    const auto n = static_cast<Eigen::Index>(centers_.size());
    packed_.resize(static_cast<Eigen::Index>(dim_), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector& c = centers_[static_cast<std::size_t>(i)];
        require(static_cast<std::size_t>(c.size()) == dim_, ErrorCode::DimensionMismatch,
                "centers differ in dimension");
        require(c.allFinite(), ErrorCode::NonFinite, "center has non-finite coordinates");
        packed_.col(i) = c;
    }

    grammian_.resize(n, n);
    double min_sep = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        grammian_(i, i) = kernel_.profile(0.0);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double r = (packed_.col(i) - packed_.col(j)).norm();
            if (r <= 1e-12) {
                std::ostringstream msg;
                msg << "centers " << i << " and " << j << " coincide";
                fail(ErrorCode::DuplicateCenters, msg.str());
            }
            min_sep = std::min(min_sep, r);
            grammian_(i, j) = grammian_(j, i) = kernel_.profile(r);
        }
    }
    if (n > 1) { min_separation_ = min_sep; }

    condition_ = num::condition_number_sym(grammian_);
    try {
        require(condition_ <= options.condition_cap, ErrorCode::IllConditioned, "");
        factor_ = num::SpdFactorization::factor(grammian_, 0.0);
    } catch (const Error&) {
        Matrix jittered = grammian_;
        jittered.diagonal().array() += options.retry_jitter;
        const double jittered_condition = num::condition_number_sym(jittered);
        if (!(jittered_condition <= options.condition_cap)) {
            std::ostringstream msg;
            msg << "Grammian condition number " << condition_ << " exceeds cap " << options.condition_cap;
            fail(ErrorCode::IllConditioned, msg.str());
        }
        try {
            factor_ = num::SpdFactorization::factor(grammian_, options.retry_jitter);
        } catch (const Error&) {
            fail(ErrorCode::IllConditioned, "Grammian is not positive definite even after jitter");
        }
        condition_ = jittered_condition;
    }
}

Vector CenterSet::kernel_vector(const Eigen::Ref<const Vector>& x) const {
    Vector out(static_cast<Eigen::Index>(size()));
    kernel_vector_into(x, out);
    return out;
}

void CenterSet::kernel_vector_into(const Eigen::Ref<const Vector>& x, Vector& out) const {
    require(static_cast<std::size_t>(x.size()) == dim_, ErrorCode::DimensionMismatch,
            "point dimension does not match the centers");
    const Eigen::Index n = packed_.cols();
    out.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) { out(i) = kernel_.profile((packed_.col(i) - x).norm()); }
}

Vector target_coefficients(const CenterSet& cs, const ScalarField& f) {
    Vector values(static_cast<Eigen::Index>(cs.size()));
    for (std::size_t i = 0; i < cs.size(); ++i) { values(static_cast<Eigen::Index>(i)) = f(cs.center(i)); }
    require(values.allFinite(), ErrorCode::NonFinite, "target function is not finite at the centers");
    return cs.factorization().solve(values);
}

double f_hat_eval(const CenterSet& cs, const Eigen::Ref<const Vector>& alpha, const Eigen::Ref<const Vector>& x) {
    require(static_cast<std::size_t>(alpha.size()) == cs.size(), ErrorCode::DimensionMismatch,
            "coefficient vector length does not match the center count");
    return alpha.dot(cs.kernel_vector(x));
}

}  // namespace rkhs

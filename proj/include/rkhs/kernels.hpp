#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rkhs/numerics.hpp"

namespace rkhs {

enum class KernelKind { SobolevMatern32, GaussianRbf };

[[nodiscard]] std::string_view to_string(KernelKind kind) noexcept;
/// Accepts "matern32" / "sobolev_matern32" and "gaussian" / "gaussian_rbf".
[[nodiscard]] KernelKind parse_kernel_kind(std::string_view name);

/// Radial, unit-diagonal positive definite kernel K(x, y) = phi(||x - y|| / length).
///
/// New kernels are added by extending KernelKind and the radial profile in
/// Kernel::profile(); everything downstream only sees operator().
struct Kernel {
    KernelKind kind = KernelKind::SobolevMatern32;
    double length = 1.0;

    Kernel() = default;
    Kernel(KernelKind k, double l);

    /// Profile as a function of the unscaled distance r >= 0.
    [[nodiscard]] double profile(double r) const noexcept;

    [[nodiscard]] double operator()(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const;

    /// sup sqrt(K(x, x)); both kinds are normalized to 1.
    [[nodiscard]] static constexpr double bound() noexcept { return 1.0; }
};

[[nodiscard]] double kernel_eval(const Kernel& k, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);

struct GrammianOptions {
    double condition_cap = 1e12;
    double retry_jitter = 1e-10;
};

/// Ordered kernel centers with their Grammian and its Cholesky factor.
/// Immutable after construction.
class CenterSet {
public:
    /// Throws DuplicateCenters for coincident centers and IllConditioned when the
    /// Grammian cannot be factored under the condition cap even after jitter.
    CenterSet(std::vector<Vector> centers, Kernel kernel, GrammianOptions options = {});

    [[nodiscard]] std::size_t size() const noexcept { return centers_.size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] const Kernel& kernel() const noexcept { return kernel_; }
    [[nodiscard]] const std::vector<Vector>& centers() const noexcept { return centers_; }
    [[nodiscard]] const Vector& center(std::size_t i) const { return centers_[i]; }

    [[nodiscard]] const Matrix& grammian() const noexcept { return grammian_; }
    [[nodiscard]] const num::SpdFactorization& factorization() const noexcept { return *factor_; }
    [[nodiscard]] double condition_number() const noexcept { return condition_; }
    /// Diagonal jitter that was needed to factor the Grammian (0 normally).
    [[nodiscard]] double jitter() const noexcept { return factor_->jitter(); }
    /// Smallest pairwise distance; empty for a single center.
    [[nodiscard]] std::optional<double> min_separation() const noexcept { return min_separation_; }

    [[nodiscard]] Vector kernel_vector(const Eigen::Ref<const Vector>& x) const;
    /// Allocation-free variant for inner loops; out must have size().
    void kernel_vector_into(const Eigen::Ref<const Vector>& x, Vector& out) const;

private:
    std::vector<Vector> centers_;
    Matrix packed_;  // d x n, one center per column
    std::size_t dim_ = 0;
    Kernel kernel_;
    Matrix grammian_;
    std::optional<num::SpdFactorization> factor_;
    double condition_ = 1.0;
    std::optional<double> min_separation_;
};

using ScalarField = std::function<double(const Vector&)>;

/// Interpolation coefficients alpha with Grammian * alpha = [f(x_1) ... f(x_n)].
[[nodiscard]] Vector target_coefficients(const CenterSet& cs, const ScalarField& f);

/// sum_i alpha_i K(x_i, x).
[[nodiscard]] double f_hat_eval(const CenterSet& cs, const Eigen::Ref<const Vector>& alpha,
                                const Eigen::Ref<const Vector>& x);

}  // namespace rkhs

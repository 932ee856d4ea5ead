#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "rkhs/dynamics.hpp"
#include "rkhs/kernels.hpp"

namespace rkhs {

struct EstimatorConfig {
    /// Scalar learning gain; the coefficient rate scales with 1 / gamma.
    double gamma = 1.0;
    /// Lyapunov weight; empty means identity.
    Matrix q;
    /// Initial coefficients, one per center.
    Vector alpha0;
    /// Initial state estimate; defaults to the plant's initial state.
    std::optional<Vector> xhat0;
    /// Stable replacement for A; the difference is folded into the nonlinearity
    /// (see with_hurwitz_shift).
    std::optional<Matrix> hurwitz_shift;
    /// Keep every k-th integration step in the recorded histories (the final
    /// step is always kept).
    std::size_t record_stride = 1;
};

/// Recorded histories of a coupled plant / estimator run.
struct EstimatorRun {
    std::vector<double> times;
    std::vector<Vector> x;
    std::vector<Vector> xhat;
    std::vector<Vector> alpha;
    Matrix p;
    /// Interpolation coefficients of the (shifted) true nonlinearity on the centers.
    Vector alpha_star;
    /// The plant actually integrated, after any Hurwitz shift.
    AffineSystem system;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] const Vector& final_alpha() const { return alpha.back(); }
};

/// Finite-dimensional learning law. Built only from known quantities (A, B,
/// P, the centers, the gain), so it has no path to the true nonlinearity.
class LearningLaw {
public:
    LearningLaw(const CenterSet& centers, Matrix a, Vector b, Matrix p, double gamma);

    /// xhat' = A xhat + B alpha^T k(x)  and  alpha' = Grammian^-1 k(x) B^T P (x - xhat) / gamma.
    void rates(const Vector& x, const Vector& xhat, const Vector& alpha, Vector& xhat_dot, Vector& alpha_dot);

    [[nodiscard]] const Matrix& p() const noexcept { return p_; }

private:
    const CenterSet& centers_;
    Matrix a_;
    Vector b_;
    Matrix p_;
    Vector bt_p_;
    double inv_gamma_;
    Vector kvec_;
};

/// Jointly integrates plant, state estimate and coefficients with one RK4
/// clock over [0, duration].
[[nodiscard]] EstimatorRun run_estimator(const AffineSystem& sys, const CenterSet& cs, const EstimatorConfig& cfg,
                                         const Vector& x0, double duration, double dt);

/// Coefficient rate at t = 0 for the given configuration.
[[nodiscard]] Vector initial_alpha_rate(const AffineSystem& sys, const CenterSet& cs, const EstimatorConfig& cfg,
                                        const Vector& x0);

[[nodiscard]] std::vector<double> state_error_norm(const EstimatorRun& run);
[[nodiscard]] std::vector<double> coefficient_error_norm(const EstimatorRun& run);

/// Axis-aligned rectangle over the first two state coordinates.
struct GridSpec {
    double x_min = -1.0;
    double x_max = 1.0;
    double y_min = -1.0;
    double y_max = 1.0;
    std::size_t nx = 101;
    std::size_t ny = 101;
};

struct ErrorGrid {
    std::vector<double> xs;
    std::vector<double> ys;
    /// values(j, i) = |f(xs[i], ys[j]) - f_hat(xs[i], ys[j])|
    Matrix values;
    /// Same error at each supplied limit-set sample.
    std::vector<double> along_samples;
};

/// Grid rows are evaluated independently, so the result does not depend on
/// evaluation order.
[[nodiscard]] ErrorGrid pointwise_error_grid(const AffineSystem& sys, const CenterSet& cs, const Vector& alpha,
                                             const GridSpec& grid, const std::vector<Vector>& samples = {});

/// Columns t, x1.., xhat1.., alpha1.. .
void write_run_csv(const EstimatorRun& run, const std::filesystem::path& path);
/// error_grid.csv holds the value matrix (one grid row per line); the sidecar
/// lists the axes as (axis, index, value) with axis 0 = x, 1 = y.
void write_error_grid_csv(const ErrorGrid& grid, const std::filesystem::path& path,
                          const std::filesystem::path& axes_path);

}  // namespace rkhs

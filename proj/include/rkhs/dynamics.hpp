#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rkhs/kernels.hpp"
#include "rkhs/numerics.hpp"
#include "rkhs/trajectory.hpp"

namespace rkhs {

/// x' = A x + B f(x), expressed in the working (scaled) coordinates.
///
/// f_true is the unknown nonlinearity. Only the plant integrator and the
/// evaluation metrics call it; the estimator's learning law never does.
struct AffineSystem {
    std::string name;
    Matrix a;
    Vector b;
    ScalarField f_true;
    /// Per-state factors of the change of variables x_original = diag(scale) * x.
    Vector scale;

    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(a.rows()); }
    void validate() const;
    /// A x + B f(x) into dxdt.
    void derivative(const Vector& x, Vector& dxdt) const;
};

/// Rewrites a system given in original coordinates into scaled coordinates
/// x = diag(scale)^-1 x_original.
[[nodiscard]] AffineSystem rescale(const AffineSystem& original, const Vector& scale);

/// Replaces A by a shift matrix A_s whose difference A - A_s = B k^T lies in the
/// input direction, and folds k^T x into the nonlinearity: f_new(x) = f(x) + k^T x.
/// The vector field is unchanged. Throws InvalidParameter if A - A_s is not of that form.
[[nodiscard]] AffineSystem with_hurwitz_shift(const AffineSystem& sys, const Matrix& shifted_a);

struct PiezoParameters {
    double mass = 0.9745;           // M
    double stiffness = 329.9006;    // K hat
    double damping = 0.0;           // C
    double input_coupling = 0.0;    // P (base excitation is not modelled; input is zero)
    double k_n1 = -1.2901e5;        // cubic stiffness
    double k_n2 = 1.2053e9;         // quintic stiffness
    double displacement_scale = 0.02;  // S, x1 = S * x1_scaled
};

/// Single-mode piezoelectric oscillator with zero base excitation, in scaled
/// coordinates (x1 / S, x2).
[[nodiscard]] AffineSystem piezo_system(const PiezoParameters& p);

/// Mechanical energy 1/2 M v^2 + 1/2 K x^2 + 1/4 K_N1 x^4 + 1/6 K_N2 x^6 of a
/// scaled piezo state.
[[nodiscard]] double piezo_energy(const PiezoParameters& p, const Eigen::Ref<const Vector>& scaled_state);

/// x1' = x2, x2' = -x1 + 0.5 x2 - x1^2 x2.
[[nodiscard]] AffineSystem vdp_like_system();

/// RK4 integration of the plant over [0, duration].
[[nodiscard]] Trajectory simulate(const AffineSystem& sys, const Vector& x0, double duration, double dt);

/// The samples after the closed interval [t0, t0 + discard] (all of them for
/// discard == 0).
[[nodiscard]] Trajectory discard_transient(const Trajectory& traj, double discard);

/// Drops the transient [t0, t0 + discard], then subsamples the rest to at most
/// `count` points in path order (count == 0 keeps every sample).
[[nodiscard]] std::vector<Vector> limit_set_samples(const Trajectory& traj, double discard, std::size_t count = 0);

/// Mean spacing of upward crossings of x1 through its mean; empty if fewer than
/// two crossings.
[[nodiscard]] std::optional<double> estimate_period(const Trajectory& traj);

/// One closed loop of the orbit after the transient: samples in
/// [t0 + discard, t0 + discard + period), subsampled to `count` points.
[[nodiscard]] std::vector<Vector> closed_orbit_samples(const Trajectory& traj, double discard, std::size_t count);

/// n points at equal arc length along a polyline (closed: the last segment
/// returns to the first point), starting at the first vertex.
[[nodiscard]] std::vector<Vector> equal_arc_points(const std::vector<Vector>& polyline, std::size_t n, bool closed);

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);
[[nodiscard]] Trajectory read_trajectory_csv(const std::filesystem::path& path);

}  // namespace rkhs

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "rkhs/error.hpp"
#include "rkhs/trajectory.hpp"

// Small dense linear algebra and a fixed-step integrator. Dimensions here are
// tiny (state d <= 4, at most a few hundred kernel centers), so everything is
// plain O(n^3) dense work.
namespace rkhs::num {

/// Any state component beyond this magnitude is treated as divergence.
inline constexpr double kDivergenceBound = 1e12;

void require_finite(const Eigen::Ref<const Matrix>& m, const std::string& what);

/// Symmetric to within rel_tol * max|m_ij|.
[[nodiscard]] bool is_symmetric(const Eigen::Ref<const Matrix>& m, double rel_tol = 1e-12);

/// All eigenvalues of a general square matrix (closed form for 2x2, Hessenberg QR otherwise).
[[nodiscard]] std::vector<std::complex<double>> eigenvalues(const Eigen::Ref<const Matrix>& m);

/// Ascending eigenvalues of a symmetric matrix.
[[nodiscard]] Vector symmetric_eigenvalues(const Eigen::Ref<const Matrix>& m);

/// Every eigenvalue has real part below -margin.
[[nodiscard]] bool is_hurwitz(const Eigen::Ref<const Matrix>& a, double margin = 1e-12);

/// Solves A^T P + P A = -Q for symmetric positive definite P.
/// Throws NotHurwitz when A is not stable and NotSpd when Q is not SPD.
[[nodiscard]] Matrix lyapunov_solve(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& q);

/// 2-norm condition number lambda_max / lambda_min; +inf when lambda_min <= 0.
[[nodiscard]] double condition_number_sym(const Eigen::Ref<const Matrix>& m);

/// Cholesky factor L of M + jitter * I.
class SpdFactorization {
public:
    /// Throws NotSpd if M + jitter * I is not positive definite.
    static SpdFactorization factor(const Eigen::Ref<const Matrix>& m, double jitter = 0.0);

    [[nodiscard]] Vector solve(const Eigen::Ref<const Vector>& b) const { return llt_.solve(b); }
    void solve_in_place(Vector& b) const { llt_.solveInPlace(b); }

    [[nodiscard]] Matrix lower() const { return llt_.matrixL(); }
    [[nodiscard]] double jitter() const noexcept { return jitter_; }
    [[nodiscard]] Eigen::Index dim() const { return llt_.rows(); }

private:
    SpdFactorization() = default;
    Eigen::LLT<Matrix> llt_;
    double jitter_ = 0.0;
};

/// Throws NonFiniteState on NaN/Inf or any |component| > kDivergenceBound.
void check_state(const Eigen::Ref<const Vector>& x, double t);

/// Classical fourth-order Runge-Kutta with preallocated stage buffers.
class Rk4Stepper {
public:
    explicit Rk4Stepper(Eigen::Index dim) : k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

    /// field(t, x, dxdt) writes the derivative into dxdt.
    template <class Field>
    void step(Field&& field, double t, Vector& x, double h) {
        field(t, x, k1_);
        tmp_.noalias() = x + (0.5 * h) * k1_;
        field(t + 0.5 * h, tmp_, k2_);
        tmp_.noalias() = x + (0.5 * h) * k2_;
        field(t + 0.5 * h, tmp_, k3_);
        tmp_.noalias() = x + h * k3_;
        field(t + h, tmp_, k4_);
        x += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }

    /// Stage-one derivative of the most recent step.
    [[nodiscard]] const Vector& first_stage() const noexcept { return k1_; }

private:
    Vector k1_, k2_, k3_, k4_, tmp_;
};

/// Number of steps and the final step length so that [t0, t1] is covered with
/// steps of dt, the last one shortened to land on t1.
struct StepPlan {
    std::size_t full_steps = 0;
    double last_step = 0.0;  ///< 0 when t1 - t0 is a multiple of dt
};
[[nodiscard]] StepPlan plan_steps(double t0, double t1, double dt);

using VectorField = std::function<void(double, const Vector&, Vector&)>;

/// Integrates x' = field(t, x) over [t0, t1], recording every step.
[[nodiscard]] Trajectory rk4_integrate(const VectorField& field, const Vector& x0, double t0, double t1,
                                       double dt);

}  // namespace rkhs::num

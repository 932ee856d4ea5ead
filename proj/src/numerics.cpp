#include "rkhs/numerics.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace rkhs::num {

void require_finite(const Eigen::Ref<const Matrix>& m, const std::string& what) {
    require(m.allFinite(), ErrorCode::NonFinite, what + " has non-finite entries");
}

bool is_symmetric(const Eigen::Ref<const Matrix>& m, double rel_tol) {
    if (m.rows() != m.cols()) { return false; }
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

std::vector<std::complex<double>> eigenvalues(const Eigen::Ref<const Matrix>& m) {
    require(m.rows() == m.cols(), ErrorCode::DimensionMismatch, "eigenvalues need a square matrix");
    require_finite(m, "matrix");
    std::vector<std::complex<double>> out;
    if (m.rows() == 2) {
        const double tr = m(0, 0) + m(1, 1);
        const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        const std::complex<double> disc = std::sqrt(std::complex<double>(0.25 * tr * tr - det));
        out = {0.5 * tr + disc, 0.5 * tr - disc};
        return out;
    }
    Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
    require(solver.info() == Eigen::Success, ErrorCode::NonFinite, "eigenvalue iteration did not converge");
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) { out.push_back(solver.eigenvalues()[i]); }
    return out;
}

Vector symmetric_eigenvalues(const Eigen::Ref<const Matrix>& m) {
    require(is_symmetric(m), ErrorCode::NotSymmetric, "matrix is not symmetric");
    require_finite(m, "matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    require(solver.info() == Eigen::Success, ErrorCode::NonFinite, "symmetric eigensolver did not converge");
    return solver.eigenvalues();
}

bool is_hurwitz(const Eigen::Ref<const Matrix>& a, double margin) {
    const auto ev = eigenvalues(a);
    return std::all_of(ev.begin(), ev.end(), [margin](const auto& z) { return z.real() < -margin; });
}

Matrix lyapunov_solve(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& q) {
    const Eigen::Index d = a.rows();
    require(a.cols() == d && q.rows() == d && q.cols() == d, ErrorCode::DimensionMismatch,
            "Lyapunov operands must be square and of equal size");
    require_finite(a, "A");
    require_finite(q, "Q");
    require(is_symmetric(q, 1e-12), ErrorCode::NotSpd, "Q is not symmetric");
    require(symmetric_eigenvalues(q)(0) > 0.0, ErrorCode::NotSpd, "Q is not positive definite");
    if (!is_hurwitz(a)) {
        std::ostringstream msg;
        msg << "A has an eigenvalue with nonnegative real part:";
        for (const auto& z : eigenvalues(a)) { msg << ' ' << z; }
        fail(ErrorCode::NotHurwitz, msg.str());
    }

    // vec(A^T P + P A) = (I (x) A^T + A^T (x) I) vec(P), column-major vec
    const Eigen::Index n = d * d;
    Matrix kron = Matrix::Zero(n, n);
    const Matrix at = a.transpose();
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (i == j) { kron.block(i * d, j * d, d, d) += at; }
            kron.block(i * d, j * d, d, d).diagonal().array() += at(i, j);
        }
    }
    const Vector rhs = -Eigen::Map<const Vector>(Matrix(q).data(), n);
    const Vector vec_p = kron.partialPivLu().solve(rhs);
    Matrix p = Eigen::Map<const Matrix>(vec_p.data(), d, d);
    p = 0.5 * (p + p.transpose()).eval();
    require_finite(p, "Lyapunov solution");
    return p;
}

double condition_number_sym(const Eigen::Ref<const Matrix>& m) {
    const Vector ev = symmetric_eigenvalues(m);
    const double lo = ev(0);
    const double hi = ev(ev.size() - 1);
    if (lo <= 0.0) { return std::numeric_limits<double>::infinity(); }
    return hi / lo;
}

SpdFactorization SpdFactorization::factor(const Eigen::Ref<const Matrix>& m, double jitter) {
    require(m.rows() == m.cols(), ErrorCode::DimensionMismatch, "factorization needs a square matrix");
    require_finite(m, "matrix");
    require(is_symmetric(m, 1e-12), ErrorCode::NotSpd, "matrix is not symmetric");
    SpdFactorization f;
    f.jitter_ = jitter;
    Matrix shifted = m;
    shifted.diagonal().array() += jitter;
    f.llt_.compute(shifted);
    require(f.llt_.info() == Eigen::Success, ErrorCode::NotSpd, "matrix is not positive definite");
    const Vector diag = f.llt_.matrixLLT().diagonal();
    require((diag.array() > 0.0).all() && diag.allFinite(), ErrorCode::NotSpd,
            "Cholesky factor has a non-positive pivot");
    return f;
}

void check_state(const Eigen::Ref<const Vector>& x, double t) {
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceBound) {
        std::ostringstream msg;
        msg << "state diverged at t = " << t;
        fail(ErrorCode::NonFiniteState, msg.str());
    }
}

StepPlan plan_steps(double t0, double t1, double dt) {
    require(dt > 0.0 && std::isfinite(dt), ErrorCode::InvalidParameter, "step must be positive");
    require(t1 > t0, ErrorCode::InvalidParameter, "time span must be increasing");
    const double ratio = (t1 - t0) / dt;
    StepPlan plan;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, ratio)) {
        plan.full_steps = static_cast<std::size_t>(rounded);
        return plan;
    }
    plan.full_steps = static_cast<std::size_t>(std::floor(ratio));
    plan.last_step = (t1 - t0) - static_cast<double>(plan.full_steps) * dt;
    return plan;
}

Trajectory rk4_integrate(const VectorField& field, const Vector& x0, double t0, double t1, double dt) {
    const StepPlan plan = plan_steps(t0, t1, dt);
    Trajectory traj(static_cast<std::size_t>(x0.size()), dt);
    traj.reserve(plan.full_steps + 2);
    Vector x = x0;
    check_state(x, t0);
    traj.push(t0, x);
    Rk4Stepper stepper(x.size());
    for (std::size_t k = 0; k < plan.full_steps; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        stepper.step(field, t, x, dt);
        const double t_next = (k + 1 == plan.full_steps && plan.last_step == 0.0)
                                  ? t1
                                  : t0 + static_cast<double>(k + 1) * dt;
        check_state(x, t_next);
        traj.push(t_next, x);
    }
    if (plan.last_step > 0.0) {
        stepper.step(field, t0 + static_cast<double>(plan.full_steps) * dt, x, plan.last_step);
        check_state(x, t1);
        traj.push(t1, x);
    }
    return traj;
}

}  // namespace rkhs::num

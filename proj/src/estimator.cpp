#include "rkhs/estimator.hpp"

#include <cmath>

#include "rkhs/csv.hpp"

namespace rkhs {

LearningLaw::LearningLaw(const CenterSet& centers, Matrix a, Vector b, Matrix p, double gamma)
    : centers_(centers), a_(std::move(a)), b_(std::move(b)), p_(std::move(p)), inv_gamma_(1.0 / gamma) {
    require(gamma > 0.0 && std::isfinite(gamma), ErrorCode::InvalidParameter, "gain must be positive");
    bt_p_ = p_.transpose() * b_;
    kvec_.resize(static_cast<Eigen::Index>(centers_.size()));
}

void LearningLaw::rates(const Vector& x, const Vector& xhat, const Vector& alpha, Vector& xhat_dot,
                        Vector& alpha_dot) {
    centers_.kernel_vector_into(x, kvec_);
    xhat_dot.noalias() = a_ * xhat;
    xhat_dot += b_ * alpha.dot(kvec_);
    const double innovation = bt_p_.dot(x - xhat) * inv_gamma_;
    alpha_dot = kvec_;
    centers_.factorization().solve_in_place(alpha_dot);
    alpha_dot *= innovation;
}

namespace {

struct Setup {
    AffineSystem system;
    Matrix p;
    Vector xhat0;
};

Setup prepare(const AffineSystem& sys, const CenterSet& cs, const EstimatorConfig& cfg, const Vector& x0) {
    sys.validate();
    const auto d = static_cast<Eigen::Index>(sys.dim());
    require(cs.dim() == sys.dim(), ErrorCode::DimensionMismatch, "centers and system differ in dimension");
    require(x0.size() == d, ErrorCode::DimensionMismatch, "initial state has the wrong dimension");
    require(static_cast<std::size_t>(cfg.alpha0.size()) == cs.size(), ErrorCode::DimensionMismatch,
            "initial coefficients must have one entry per center");
    require(cfg.gamma > 0.0 && std::isfinite(cfg.gamma), ErrorCode::InvalidParameter, "gain must be positive");
    require(cfg.record_stride >= 1, ErrorCode::InvalidParameter, "record stride must be at least 1");
    Setup s;
    s.system = cfg.hurwitz_shift ? with_hurwitz_shift(sys, *cfg.hurwitz_shift) : sys;
    const Matrix q = cfg.q.size() == 0 ? Matrix::Identity(d, d) : cfg.q;
    s.p = num::lyapunov_solve(s.system.a, q);
    s.xhat0 = cfg.xhat0.value_or(x0);
    require(s.xhat0.size() == d, ErrorCode::DimensionMismatch, "initial estimate has the wrong dimension");
    return s;
}

}  // namespace

Vector initial_alpha_rate(const AffineSystem& sys, const CenterSet& cs, const EstimatorConfig& cfg,
                          const Vector& x0) {
    const Setup s = prepare(sys, cs, cfg, x0);
    LearningLaw law(cs, s.system.a, s.system.b, s.p, cfg.gamma);
    Vector xhat_dot, alpha_dot;
    law.rates(x0, s.xhat0, cfg.alpha0, xhat_dot, alpha_dot);
    return alpha_dot;
}

EstimatorRun run_estimator(const AffineSystem& sys, const CenterSet& cs, const EstimatorConfig& cfg,
                           const Vector& x0, double duration, double dt) {
    Setup s = prepare(sys, cs, cfg, x0);
    const auto d = static_cast<Eigen::Index>(sys.dim());
    const auto n = static_cast<Eigen::Index>(cs.size());

    EstimatorRun run;
    run.p = s.p;
    run.alpha_star = target_coefficients(cs, s.system.f_true);
    run.system = s.system;

    LearningLaw law(cs, s.system.a, s.system.b, s.p, cfg.gamma);
    const AffineSystem& plant = run.system;

    Vector z(2 * d + n);
    z << x0, s.xhat0, cfg.alpha0;
    Vector x(d), xhat(d), alpha(n), plant_dot(d), xhat_dot(d), alpha_dot(n);
    auto field = [&](double, const Vector& state, Vector& out) {
        x = state.segment(0, d);
        xhat = state.segment(d, d);
        alpha = state.segment(2 * d, n);
        plant.derivative(x, plant_dot);
        law.rates(x, xhat, alpha, xhat_dot, alpha_dot);
        out.resize(state.size());
        out << plant_dot, xhat_dot, alpha_dot;
    };

    const num::StepPlan plan = num::plan_steps(0.0, duration, dt);
    const std::size_t total_steps = plan.full_steps + (plan.last_step > 0.0 ? 1 : 0);
    const std::size_t expected = total_steps / cfg.record_stride + 2;
    run.times.reserve(expected);
    run.x.reserve(expected);
    run.xhat.reserve(expected);
    run.alpha.reserve(expected);
    auto record = [&](double t) {
        run.times.push_back(t);
        run.x.emplace_back(z.segment(0, d));
        run.xhat.emplace_back(z.segment(d, d));
        run.alpha.emplace_back(z.segment(2 * d, n));
    };

    num::check_state(z, 0.0);
    record(0.0);
    num::Rk4Stepper stepper(z.size());
    for (std::size_t k = 0; k < total_steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const bool last = k + 1 == total_steps;
        const double h = (k < plan.full_steps) ? dt : plan.last_step;
        stepper.step(field, t, z, h);
        const double t_next = last ? duration : static_cast<double>(k + 1) * dt;
        num::check_state(z, t_next);
        if (last || (k + 1) % cfg.record_stride == 0) { record(t_next); }
    }
    return run;
}

std::vector<double> state_error_norm(const EstimatorRun& run) {
    std::vector<double> out(run.size());
    for (std::size_t i = 0; i < run.size(); ++i) { out[i] = (run.x[i] - run.xhat[i]).norm(); }
    return out;
}

std::vector<double> coefficient_error_norm(const EstimatorRun& run) {
    std::vector<double> out(run.size());
    for (std::size_t i = 0; i < run.size(); ++i) { out[i] = (run.alpha_star - run.alpha[i]).norm(); }
    return out;
}

ErrorGrid pointwise_error_grid(const AffineSystem& sys, const CenterSet& cs, const Vector& alpha,
                               const GridSpec& grid, const std::vector<Vector>& samples) {
    require(sys.dim() == 2 && cs.dim() == 2, ErrorCode::DimensionMismatch, "error grids are two-dimensional");
    require(grid.nx >= 2 && grid.ny >= 2, ErrorCode::InvalidParameter, "grid needs at least 2 points per axis");
    require(grid.x_max > grid.x_min && grid.y_max > grid.y_min, ErrorCode::InvalidParameter,
            "grid rectangle is empty");
    require(static_cast<std::size_t>(alpha.size()) == cs.size(), ErrorCode::DimensionMismatch,
            "coefficient vector length does not match the center count");
    ErrorGrid out;
    out.xs.resize(grid.nx);
    out.ys.resize(grid.ny);
    for (std::size_t i = 0; i < grid.nx; ++i) {
        out.xs[i] = grid.x_min + (grid.x_max - grid.x_min) * static_cast<double>(i) / static_cast<double>(grid.nx - 1);
    }
    for (std::size_t j = 0; j < grid.ny; ++j) {
        out.ys[j] = grid.y_min + (grid.y_max - grid.y_min) * static_cast<double>(j) / static_cast<double>(grid.ny - 1);
    }
    out.values.resize(static_cast<Eigen::Index>(grid.ny), static_cast<Eigen::Index>(grid.nx));
    Vector p(2), k;
    for (std::size_t j = 0; j < grid.ny; ++j) {
        for (std::size_t i = 0; i < grid.nx; ++i) {
            p << out.xs[i], out.ys[j];
            cs.kernel_vector_into(p, k);
            out.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                std::abs(sys.f_true(p) - alpha.dot(k));
        }
    }
    out.along_samples.reserve(samples.size());
    for (const auto& s : samples) {
        cs.kernel_vector_into(s, k);
        out.along_samples.push_back(std::abs(sys.f_true(s) - alpha.dot(k)));
    }
    return out;
}

void write_run_csv(const EstimatorRun& run, const std::filesystem::path& path) {
    const std::size_t d = run.system.dim();
    const std::size_t n = static_cast<std::size_t>(run.alpha_star.size());
    std::vector<std::string> header{"t"};
    for (std::size_t j = 0; j < d; ++j) { header.push_back("x" + std::to_string(j + 1)); }
    for (std::size_t j = 0; j < d; ++j) { header.push_back("xhat" + std::to_string(j + 1)); }
    for (std::size_t j = 0; j < n; ++j) { header.push_back("alpha" + std::to_string(j + 1)); }
    csv::Writer w(path, header);
    std::vector<double> row(header.size());
    for (std::size_t i = 0; i < run.size(); ++i) {
        std::size_t c = 0;
        row[c++] = run.times[i];
        for (Eigen::Index j = 0; j < run.x[i].size(); ++j) { row[c++] = run.x[i](j); }
        for (Eigen::Index j = 0; j < run.xhat[i].size(); ++j) { row[c++] = run.xhat[i](j); }
        for (Eigen::Index j = 0; j < run.alpha[i].size(); ++j) { row[c++] = run.alpha[i](j); }
        w.row(row);
    }
}

void write_error_grid_csv(const ErrorGrid& grid, const std::filesystem::path& path,
                          const std::filesystem::path& axes_path) {
    std::vector<std::string> header;
    for (std::size_t i = 0; i < grid.xs.size(); ++i) { header.push_back("c" + std::to_string(i)); }
    csv::Writer w(path, header);
    std::vector<double> row(grid.xs.size());
    for (Eigen::Index j = 0; j < grid.values.rows(); ++j) {
        for (Eigen::Index i = 0; i < grid.values.cols(); ++i) { row[static_cast<std::size_t>(i)] = grid.values(j, i); }
        w.row(row);
    }
    csv::Writer axes(axes_path, {"axis", "index", "value"});
    for (std::size_t i = 0; i < grid.xs.size(); ++i) {
        axes.row(std::vector<double>{0.0, static_cast<double>(i), grid.xs[i]});
    }
    for (std::size_t j = 0; j < grid.ys.size(); ++j) {
        axes.row(std::vector<double>{1.0, static_cast<double>(j), grid.ys[j]});
    }
}

}  // namespace rkhs

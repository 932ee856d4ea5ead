#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace rkhs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Time-stamped state path. States are stored contiguously, one row per sample.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(std::size_t dim, double dt) : dim_(dim), dt_(dt) {}

    void push(double t, const Eigen::Ref<const Vector>& x);
    void reserve(std::size_t samples);

    [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
    [[nodiscard]] bool empty() const noexcept { return times_.empty(); }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    /// Nominal sampling step.
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] double t0() const { return times_.front(); }
    [[nodiscard]] double t_end() const { return times_.back(); }
    [[nodiscard]] double duration() const { return empty() ? 0.0 : t_end() - t0(); }

    [[nodiscard]] double time(std::size_t i) const { return times_[i]; }
    [[nodiscard]] Eigen::Map<const Vector> state(std::size_t i) const {
        return {data_.data() + i * dim_, static_cast<Eigen::Index>(dim_)};
    }
    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }

    /// True when consecutive time stamps differ from dt() by at most rel_tol * dt().
    [[nodiscard]] bool is_uniform(double rel_tol = 1e-9) const;

    /// Samples with index in [first, last).
    [[nodiscard]] Trajectory slice(std::size_t first, std::size_t last) const;

    /// Index of the first sample with time >= t (size() if none).
    [[nodiscard]] std::size_t index_at_or_after(double t) const;

private:
    std::size_t dim_ = 0;
    double dt_ = 0.0;
    std::vector<double> times_;
    std::vector<double> data_;
};

}  // namespace rkhs

#include "rkhs/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "rkhs/error.hpp"

namespace rkhs {

void Trajectory::push(double t, const Eigen::Ref<const Vector>& x) {
    require(static_cast<std::size_t>(x.size()) == dim_, ErrorCode::DimensionMismatch,
            "trajectory sample has wrong dimension");
    require(std::isfinite(t) && x.allFinite(), ErrorCode::NonFiniteState, "trajectory sample is not finite");
    times_.push_back(t);
    data_.insert(data_.end(), x.data(), x.data() + x.size());
}

void Trajectory::reserve(std::size_t samples) {
    times_.reserve(samples);
    data_.reserve(samples * dim_);
}

bool Trajectory::is_uniform(double rel_tol) const {
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (std::abs((times_[i] - times_[i - 1]) - dt_) > rel_tol * dt_) { return false; }
    }
    return true;
}

Trajectory Trajectory::slice(std::size_t first, std::size_t last) const {
    last = std::min(last, size());
    Trajectory out(dim_, dt_);
    if (first >= last) { return out; }
    out.times_.assign(times_.begin() + static_cast<std::ptrdiff_t>(first),
                      times_.begin() + static_cast<std::ptrdiff_t>(last));
    out.data_.assign(data_.begin() + static_cast<std::ptrdiff_t>(first * dim_),
                     data_.begin() + static_cast<std::ptrdiff_t>(last * dim_));
    return out;
}

std::size_t Trajectory::index_at_or_after(double t) const {
    // accumulated rounding in the time stamps must not skip a sample
    const double slack = dt_ * 1e-6;
    auto it = std::lower_bound(times_.begin(), times_.end(), t - slack);
    return static_cast<std::size_t>(it - times_.begin());
}

}  // namespace rkhs

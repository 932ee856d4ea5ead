#include "rkhs/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "rkhs/cvt.hpp"
#include "rkhs/dynamics.hpp"
#include "rkhs/error.hpp"

namespace rkhs::diag {

double min_separation(const std::vector<Vector>& centers) {
    require(centers.size() >= 2, ErrorCode::SingleCenter, "separation needs at least two centers");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            require(centers[i].size() == centers[j].size(), ErrorCode::DimensionMismatch, "centers differ in dimension");
            best = std::min(best, (centers[i] - centers[j]).squaredNorm());
        }
    }
    return std::sqrt(best);
}

double fill_distance(const std::vector<Vector>& samples, const std::vector<Vector>& centers) {
    require(!samples.empty() && !centers.empty(), ErrorCode::EmptySet, "fill distance of an empty set");
    return cvt::directed_hausdorff(samples, centers);
}

PeReport pe_occupancy(const Trajectory& traj, const std::vector<Vector>& centers, const PeOptions& options) {
    require(!centers.empty(), ErrorCode::EmptySet, "no centers");
    require(traj.size() >= 2, ErrorCode::EmptySet, "trajectory needs at least two samples");
    require(traj.is_uniform(), ErrorCode::InvalidParameter, "occupancy needs a uniform time step");
    for (const auto& c : centers) {
        require(static_cast<std::size_t>(c.size()) == traj.dim(), ErrorCode::DimensionMismatch,
                "centers and states differ in dimension");
    }
    const double dt = traj.dt();
    PeReport rep;

    const bool has_q = centers.size() >= 2;
    const double q = has_q ? min_separation(centers) : 0.0;
    if (options.epsilon) {
        rep.epsilon = *options.epsilon;
    } else {
        require(has_q, ErrorCode::InvalidParameter, "a single center needs an explicit epsilon");
        rep.epsilon = 0.49 * q;
    }
    require(rep.epsilon > 0.0 && std::isfinite(rep.epsilon), ErrorCode::InvalidParameter, "epsilon must be positive");
    if (has_q) {
        require(rep.epsilon < 0.5 * q, ErrorCode::EpsilonTooLarge,
                "epsilon " + std::to_string(rep.epsilon) + " is not below half the minimal separation " +
                    std::to_string(q));
    }

    if (options.delta) {
        rep.delta = *options.delta;
    } else {
        const auto period = estimate_period(traj);
        require(period.has_value(), ErrorCode::InvalidParameter,
                "no orbit period could be estimated; set the window length explicitly");
        rep.delta = *period;
    }
    require(rep.delta > 0.0 && std::isfinite(rep.delta), ErrorCode::InvalidParameter, "window length must be positive");
    rep.window_samples = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(rep.delta / dt)));
    require(rep.window_samples <= traj.size() && rep.delta <= traj.duration() + 0.5 * dt, ErrorCode::WindowTooLong,
            "window length exceeds the trajectory duration");

    rep.floor = options.floor.value_or(2.0 * dt);
    require(rep.floor >= 0.0, ErrorCode::InvalidParameter, "occupancy floor must be non-negative");
    // Counts are integers; guard the division against rounding just below.
    const auto need = static_cast<std::size_t>(std::ceil(rep.floor / dt - 1e-9));

    const std::size_t n = traj.size();
    const std::size_t w = rep.window_samples;
    const double eps2 = rep.epsilon * rep.epsilon;
    std::vector<std::size_t> prefix(n + 1);
    std::size_t worst_count = std::numeric_limits<std::size_t>::max();
    rep.per_center_min_occupancy.resize(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
        prefix[0] = 0;
        for (std::size_t k = 0; k < n; ++k) {
            prefix[k + 1] = prefix[k] + ((traj.state(k) - centers[i]).squaredNorm() <= eps2 ? 1 : 0);
        }
        std::size_t best = std::numeric_limits<std::size_t>::max();
        std::size_t best_start = 0;
        for (std::size_t s = 0; s + w <= n; ++s) {
            const std::size_t c = prefix[s + w] - prefix[s];
            if (c < best) {
                best = c;
                best_start = s;
            }
        }
        rep.per_center_min_occupancy[i] = dt * static_cast<double>(best);
        if (best < worst_count) {
            worst_count = best;
            rep.limiting_center = i;
            rep.limiting_window_start = traj.time(best_start);
        }
    }
    rep.pass = worst_count >= need;
    return rep;
}

PlacementReport placement_report(const std::vector<Vector>& limit_samples, const CenterSet& cs) {
    PlacementReport r;
    r.fill_distance = fill_distance(limit_samples, cs.centers());
    if (cs.size() >= 2) { r.min_separation = min_separation(cs.centers()); }
    r.grammian_condition = cs.condition_number();
    r.hausdorff_to_limit_set = cvt::hausdorff_distance(cs.centers(), limit_samples);
    return r;
}

std::string diagnostics_json(const PlacementReport& placement, const PeReport& pe) {
    nlohmann::ordered_json j;
    j["fill_distance"] = placement.fill_distance;
    j["min_separation"] = placement.min_separation ? nlohmann::ordered_json(*placement.min_separation) : nullptr;
    j["grammian_condition"] = placement.grammian_condition;
    j["hausdorff_to_limit_set"] = placement.hausdorff_to_limit_set;
    nlohmann::ordered_json p;
    p["epsilon"] = pe.epsilon;
    p["delta"] = pe.delta;
    p["per_center_min_occupancy"] = pe.per_center_min_occupancy;
    p["verdict"] = pe.pass ? "PASS" : "FAIL";
    p["floor"] = pe.floor;
    p["window_samples"] = pe.window_samples;
    p["limiting_center"] = pe.limiting_center;
    p["limiting_window_start"] = pe.limiting_window_start;
    j["pe"] = std::move(p);
    return j.dump(2) + "\n";
}

}  // namespace rkhs::diag

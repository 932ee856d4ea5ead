#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rkhs/kernels.hpp"
#include "rkhs/trajectory.hpp"

namespace rkhs::diag {

struct PeOptions {
    /// Ball radius; default 0.49 times the minimal center separation.
    std::optional<double> epsilon;
    /// Window length; default one estimated orbit period.
    std::optional<double> delta;
    /// PASS threshold on the occupancy measure; default 2 dt.
    std::optional<double> floor;
};

/// Sliding-window occupancy of the epsilon-balls around the centers.
struct PeReport {
    double epsilon = 0.0;
    double delta = 0.0;
    double floor = 0.0;
    /// Samples per window: round(delta / dt).
    std::size_t window_samples = 0;
    /// Per center, the smallest dt * (samples in the ball) over all windows.
    std::vector<double> per_center_min_occupancy;
    bool pass = false;
    std::size_t limiting_center = 0;
    double limiting_window_start = 0.0;
};

/// Windows start at every sample and hold window_samples samples. PASS iff every
/// center's minimum occupancy reaches the floor. Throws EpsilonTooLarge when
/// epsilon >= q / 2, WindowTooLong when delta exceeds the trajectory duration.
[[nodiscard]] PeReport pe_occupancy(const Trajectory& traj, const std::vector<Vector>& centers,
                                    const PeOptions& options = {});

/// max over samples of the distance to the nearest center. Throws EmptySet.
[[nodiscard]] double fill_distance(const std::vector<Vector>& samples, const std::vector<Vector>& centers);

/// Smallest pairwise distance. Throws SingleCenter for fewer than two centers.
[[nodiscard]] double min_separation(const std::vector<Vector>& centers);

struct PlacementReport {
    double fill_distance = 0.0;
    /// Absent for a single center.
    std::optional<double> min_separation;
    double grammian_condition = 1.0;
    /// Symmetric Hausdorff distance between the centers and the samples.
    double hausdorff_to_limit_set = 0.0;
};

[[nodiscard]] PlacementReport placement_report(const std::vector<Vector>& limit_samples, const CenterSet& cs);

/// JSON document with keys fill_distance, min_separation, grammian_condition,
/// hausdorff_to_limit_set and pe {epsilon, delta, per_center_min_occupancy, verdict}.
[[nodiscard]] std::string diagnostics_json(const PlacementReport& placement, const PeReport& pe);

}  // namespace rkhs::diag

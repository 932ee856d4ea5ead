#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rkhs/trajectory.hpp"

// Kohonen self-organizing map center selection with one-dimensional ring or
// line neighborhoods, trained on a stream of state measurements.
namespace rkhs::som {

enum class Topology { Ring, Line };

[[nodiscard]] std::string to_string(Topology t);
[[nodiscard]] Topology parse_topology(const std::string& name);

/// Piecewise-constant learning rate: values[k] while t <= until[k], then
/// `after` once every breakpoint has passed.
struct BetaSchedule {
    std::vector<double> until;
    std::vector<double> values;
    double after = 0.0;

    /// beta for t <= cutoff, 0 afterwards.
    [[nodiscard]] static BetaSchedule step(double beta, double cutoff);
    [[nodiscard]] double operator()(double t) const;
    /// Throws InvalidParameter unless every value is in [0, 1) and the
    /// breakpoints increase.
    void validate() const;
    /// Time after which beta stays zero, if it ever does.
    [[nodiscard]] std::optional<double> freeze_time() const;
};

struct SomState {
    std::vector<Vector> weights;
    Topology topology = Topology::Ring;
    BetaSchedule schedule;
    double time = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }
};

/// Index of the nearest weight; ties go to the lowest index.
[[nodiscard]] std::size_t winner(const SomState& som, const Vector& x);

/// Winner and its immediate neighbors (0-based). Ring wraps around; line
/// clips at the ends and drops duplicates.
[[nodiscard]] std::vector<std::size_t> neighborhood(std::size_t n, Topology topology, std::size_t i);

/// One explicit Euler step of p_j' = beta(t) (x - p_j) for j in the winner's
/// neighborhood, using beta at the current time; advances the time by dt.
/// Returns the largest weight displacement. Throws UnstableStep if dt * beta >= 1.
double som_step(SomState& som, const Vector& x, double dt);

/// Circle of n points around the mean of the early samples (first
/// `early_fraction` of the duration), radius `radius_factor` times their mean
/// distance from that mean; line topology gets a segment of the same radius
/// along the principal axis. Uses the first two coordinates.
[[nodiscard]] std::vector<Vector> initial_weights(const Trajectory& traj, std::size_t n, Topology topology,
                                                  double radius_factor = 0.5, double early_fraction = 0.1);

struct Algorithm2Options {
    Topology topology = Topology::Ring;
    BetaSchedule schedule = BetaSchedule::step(0.99, 1000.0);
    /// Initial weights; empty means initial_weights(traj, n, topology).
    std::vector<Vector> init;
    /// Convergence detector: net displacement of every weight across a window
    /// of this length stays below the tolerance from some time on.
    double window = 10.0;
    double window_tol = 1e-4;
    /// Weight snapshots every this many seconds (0 disables).
    double snapshot_every = 10.0;
};

struct Snapshot {
    double time = 0.0;
    std::vector<Vector> weights;
};

struct Algorithm2Result {
    std::vector<Vector> centers;
    std::vector<Vector> initial;
    /// Measurement times and the largest weight move at each.
    std::vector<double> times;
    std::vector<double> max_displacement;
    std::vector<Snapshot> snapshots;
    /// Start of the first window after which every window stays below tolerance.
    std::optional<double> converged_at;
    /// Ring topology in the plane: the polygon through the weights in index order
    /// does not intersect itself. Empty when not applicable.
    std::optional<bool> simple_ring;
    std::vector<std::string> warnings;
};

/// Streams a trajectory through the map in time order. Requires more samples
/// than centers and a uniform step.
[[nodiscard]] Algorithm2Result algorithm2(const Trajectory& traj, std::size_t n_centers,
                                          const Algorithm2Options& options = {});

/// Planar weights joined in index order form a simple closed polygon.
[[nodiscard]] bool is_simple_ring(const std::vector<Vector>& weights);

/// Columns t, max_displacement, keeping every `stride`-th row and the last.
void write_trace_csv(const Algorithm2Result& result, const std::filesystem::path& path, std::size_t stride = 1);
/// Columns t, index, w1.., wd.
void write_snapshots_csv(const Algorithm2Result& result, const std::filesystem::path& path);

}  // namespace rkhs::som

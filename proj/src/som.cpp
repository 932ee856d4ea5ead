#include "rkhs/som.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "rkhs/csv.hpp"
#include "rkhs/cvt.hpp"
#include "rkhs/error.hpp"

namespace rkhs::som {

std::string to_string(Topology t) { return t == Topology::Ring ? "ring" : "line"; }

Topology parse_topology(const std::string& name) {
    if (name == "ring") { return Topology::Ring; }
    if (name == "line") { return Topology::Line; }
    fail(ErrorCode::InvalidParameter, "unknown SOM topology '" + name + "' (ring | line)");
}

BetaSchedule BetaSchedule::step(double beta, double cutoff) { return BetaSchedule{{cutoff}, {beta}, 0.0}; }

double BetaSchedule::operator()(double t) const {
    for (std::size_t k = 0; k < until.size(); ++k) {
        if (t <= until[k]) { return values[k]; }
    }
    return after;
}

void BetaSchedule::validate() const {
    require(until.size() == values.size(), ErrorCode::InvalidParameter, "schedule breakpoints and values differ in length");
    auto ok = [](double b) { return std::isfinite(b) && b >= 0.0 && b < 1.0; };
    for (std::size_t k = 0; k < values.size(); ++k) {
        require(ok(values[k]), ErrorCode::InvalidParameter, "learning rate must lie in [0, 1)");
        require(k == 0 || until[k] > until[k - 1], ErrorCode::InvalidParameter, "schedule breakpoints must increase");
    }
    require(ok(after), ErrorCode::InvalidParameter, "learning rate must lie in [0, 1)");
}

std::optional<double> BetaSchedule::freeze_time() const {
    if (after != 0.0) { return std::nullopt; }
    double t = until.empty() ? 0.0 : until.back();
    for (std::size_t k = values.size(); k-- > 0;) {
        if (values[k] != 0.0) { break; }
        t = k == 0 ? 0.0 : until[k - 1];
    }
    return t;
}

std::size_t winner(const SomState& som, const Vector& x) {
    require(!som.weights.empty(), ErrorCode::EmptySet, "map has no weights");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < som.weights.size(); ++i) {
        require(som.weights[i].size() == x.size(), ErrorCode::DimensionMismatch, "measurement and weights differ in dimension");
        const double d = (som.weights[i] - x).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::vector<std::size_t> neighborhood(std::size_t n, Topology topology, std::size_t i) {
    require(i < n, ErrorCode::InvalidParameter, "winner index out of range");
    if (topology == Topology::Ring) {
        require(n >= 3, ErrorCode::InvalidParameter, "ring topology needs at least 3 nodes");
        return {(i + n - 1) % n, i, (i + 1) % n};
    }
    std::vector<std::size_t> out;
    if (i > 0) { out.push_back(i - 1); }
    out.push_back(i);
    if (i + 1 < n) { out.push_back(i + 1); }
    return out;
}

double som_step(SomState& som, const Vector& x, double dt) {
    require(dt > 0.0 && std::isfinite(dt), ErrorCode::InvalidParameter, "step must be positive");
    require(x.allFinite(), ErrorCode::NonFiniteState, "measurement is not finite");
    const double beta = som.schedule(som.time);
    require(dt * beta < 1.0, ErrorCode::UnstableStep,
            "dt * beta = " + std::to_string(dt * beta) + " must stay below 1");
    double moved = 0.0;
    if (beta > 0.0) {
        const double g = dt * beta;
        for (const std::size_t j : neighborhood(som.size(), som.topology, winner(som, x))) {
            auto& p = som.weights[j];
            moved = std::max(moved, g * (x - p).norm());
            p += g * (x - p);
        }
    }
    som.time += dt;
    return moved;
}

std::vector<Vector> initial_weights(const Trajectory& traj, std::size_t n, Topology topology, double radius_factor,
                                    double early_fraction) {
    require(traj.dim() >= 2, ErrorCode::DimensionMismatch, "initial placement needs at least 2 state coordinates");
    require(n >= 1, ErrorCode::InvalidParameter, "need at least one node");
    require(!traj.empty(), ErrorCode::EmptySet, "trajectory is empty");
    const double t_end = traj.t0() + early_fraction * traj.duration();
    const std::size_t last = std::max<std::size_t>(traj.index_at_or_after(t_end), 2);
    const std::size_t m = std::min(last, traj.size());
    const auto d = static_cast<Eigen::Index>(traj.dim());
    Vector mean = Vector::Zero(d);
    for (std::size_t k = 0; k < m; ++k) { mean += traj.state(k); }
    mean /= static_cast<double>(m);
    double spread = 0.0;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (std::size_t k = 0; k < m; ++k) {
        const Vector dx = traj.state(k) - mean;
        spread += dx.norm();
        cov += dx.head<2>() * dx.head<2>().transpose();
    }
    const double r = radius_factor * spread / static_cast<double>(m);
    std::vector<Vector> w(n, mean);
    if (topology == Topology::Ring) {
        for (std::size_t i = 0; i < n; ++i) {
            const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
            w[i](0) += r * std::cos(th);
            w[i](1) += r * std::sin(th);
        }
    } else {
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
        const Eigen::Vector2d u = es.eigenvectors().col(1);
        for (std::size_t i = 0; i < n; ++i) {
            const double s = n == 1 ? 0.0 : -r + 2.0 * r * static_cast<double>(i) / static_cast<double>(n - 1);
            w[i].head<2>() += s * u;
        }
    }
    return w;
}

bool is_simple_ring(const std::vector<Vector>& weights) {
    if (weights.size() < 3 || weights.front().size() != 2) { return false; }
    return cvt::is_simple(cvt::to_vec2(weights));
}

namespace {

std::optional<double> detect_convergence(const std::vector<double>& snap_times,
                                         const std::vector<std::vector<Vector>>& snaps, double tol) {
    // snaps[k] are the weights at snap_times[k], one window apart.
    std::optional<double> since;
    for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
        double net = 0.0;
        for (std::size_t i = 0; i < snaps[k].size(); ++i) { net = std::max(net, (snaps[k + 1][i] - snaps[k][i]).norm()); }
        if (net < tol) {
            if (!since) { since = snap_times[k]; }
        } else {
            since.reset();
        }
    }
    return since;
}

// Mean squared distance from the overall mean in the first and last tenth of
// the learning period; a large change means the state was still settling
// while the map was learning.
std::optional<std::string> transient_warning(const Trajectory& traj, double learn_end) {
    const std::size_t end = std::min(traj.index_at_or_after(learn_end), traj.size());
    if (end < 20) { return std::nullopt; }
    const std::size_t w = end / 10;
    Vector mean = Vector::Zero(static_cast<Eigen::Index>(traj.dim()));
    for (std::size_t k = 0; k < end; ++k) { mean += traj.state(k); }
    mean /= static_cast<double>(end);
    auto energy = [&](std::size_t from) {
        double e = 0.0;
        for (std::size_t k = from; k < from + w; ++k) { e += (traj.state(k) - mean).squaredNorm(); }
        return e / static_cast<double>(w);
    };
    const double first = energy(0), final_part = energy(end - w);
    if (final_part > 0.0 && std::abs(first - final_part) > 0.05 * final_part) {
        return "trajectory energy changes by " + std::to_string(100.0 * std::abs(first - final_part) / final_part) +
               "% across the learning period; the state may not have settled onto the limit set before the "
               "learning rate vanished";
    }
    return std::nullopt;
}

}  // namespace

Algorithm2Result algorithm2(const Trajectory& traj, std::size_t n_centers, const Algorithm2Options& options) {
    options.schedule.validate();
    require(n_centers >= 1, ErrorCode::InvalidParameter, "need at least one center");
    require(traj.size() > n_centers, ErrorCode::InvalidParameter,
            "the sample count must exceed the number of centers");
    require(traj.is_uniform(), ErrorCode::InvalidParameter, "trajectory must have a uniform step");
    require(options.window > 0.0, ErrorCode::InvalidParameter, "convergence window must be positive");

    Algorithm2Result out;
    SomState som;
    som.topology = options.topology;
    som.schedule = options.schedule;
    som.time = traj.t0();
    som.weights = options.init.empty() ? initial_weights(traj, n_centers, options.topology) : options.init;
    require(som.weights.size() == n_centers, ErrorCode::DimensionMismatch, "initial weights must have one entry per center");
    for (const auto& w : som.weights) {
        require(static_cast<std::size_t>(w.size()) == traj.dim(), ErrorCode::DimensionMismatch,
                "initial weights and states differ in dimension");
    }
    out.initial = som.weights;

    if (traj.dim() == 2 && traj.size() >= 3) {
        std::vector<cvt::Vec2> pts;
        pts.reserve(traj.size());
        for (std::size_t k = 0; k < traj.size(); ++k) { pts.push_back(cvt::to_vec2(traj.state(k))); }
        try {
            const cvt::Polygon hull = cvt::convex_hull(pts);
            for (const auto& w : som.weights) {
                if (!hull.contains(cvt::to_vec2(w))) {
                    out.warnings.emplace_back("InitOutsideDomain: initial weights are not all inside the sample hull");
                    break;
                }
            }
        } catch (const Error&) {
            // Collinear samples: no hull to test against.
        }
    }

    const double dt = traj.dt();
    std::vector<double> snap_times{som.time};
    std::vector<std::vector<Vector>> window_snaps{som.weights};
    double next_window = som.time + options.window;
    double next_snapshot = som.time;
    out.times.reserve(traj.size());
    out.max_displacement.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (options.snapshot_every > 0.0 && som.time >= next_snapshot - 1e-9 * dt) {
            out.snapshots.push_back({som.time, som.weights});
            next_snapshot += options.snapshot_every;
        }
        out.times.push_back(traj.time(k));
        out.max_displacement.push_back(som_step(som, traj.state(k), dt));
        if (som.time >= next_window - 1e-9 * dt) {
            snap_times.push_back(som.time);
            window_snaps.push_back(som.weights);
            next_window += options.window;
        }
    }
    if (options.snapshot_every > 0.0) { out.snapshots.push_back({som.time, som.weights}); }
    out.centers = som.weights;
    out.converged_at = detect_convergence(snap_times, window_snaps, options.window_tol);
    if (options.topology == Topology::Ring && traj.dim() == 2) { out.simple_ring = is_simple_ring(out.centers); }
    const double learn_end = options.schedule.freeze_time().value_or(traj.t_end());
    if (auto w = transient_warning(traj, learn_end)) { out.warnings.push_back(*w); }
    return out;
}

void write_trace_csv(const Algorithm2Result& result, const std::filesystem::path& path, std::size_t stride) {
    csv::Writer w(path, {"t", "max_displacement"});
    const std::size_t s = std::max<std::size_t>(stride, 1);
    for (std::size_t k = 0; k < result.times.size(); ++k) {
        if (k % s == 0 || k + 1 == result.times.size()) {
            w.row(std::vector<double>{result.times[k], result.max_displacement[k]});
        }
    }
}

void write_snapshots_csv(const Algorithm2Result& result, const std::filesystem::path& path) {
    const std::size_t d = result.centers.empty() ? 0 : static_cast<std::size_t>(result.centers.front().size());
    std::vector<std::string> header{"t", "index"};
    for (std::size_t j = 0; j < d; ++j) { header.push_back("w" + std::to_string(j + 1)); }
    csv::Writer w(path, header);
    std::vector<double> row(header.size());
    for (const auto& s : result.snapshots) {
        for (std::size_t i = 0; i < s.weights.size(); ++i) {
            row[0] = s.time;
            row[1] = static_cast<double>(i);
            for (std::size_t j = 0; j < d; ++j) { row[2 + j] = s.weights[i](static_cast<Eigen::Index>(j)); }
            w.row(row);
        }
    }
}

}  // namespace rkhs::som

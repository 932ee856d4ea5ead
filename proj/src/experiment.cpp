#include "rkhs/experiment.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "rkhs/csv.hpp"
#include "rkhs/cvt.hpp"
#include "rkhs/diagnostics.hpp"
#include "rkhs/random.hpp"
#include "rkhs/som.hpp"

namespace rkhs::exp {

AffineSystem build_system(const ExperimentConfig& cfg) {
    if (cfg.system.model == "vdp_like") { return vdp_like_system(); }
    return piezo_system(cfg.system.piezo);
}

Vector initial_state(const ExperimentConfig& cfg) {
    Vector x0 = cfg.system.x0;
    if (cfg.system.model == "piezo" && cfg.system.x0_frame == "original") {
        x0(0) /= cfg.system.piezo.displacement_scale;
    }
    return x0;
}

std::optional<Matrix> shifted_a(const ExperimentConfig& cfg, const AffineSystem& sys) {
    const double c = cfg.estimator.input_damping;
    if (c == 0.0) { return std::nullopt; }
    return Matrix(sys.a - c * sys.b * sys.b.transpose() / sys.b.squaredNorm());
}

int exit_code(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ConfigError:
        case ErrorCode::IoError:
        case ErrorCode::InvalidParameter:
        case ErrorCode::BadScales:
        case ErrorCode::DimensionMismatch: return 2;
        default: return 3;
    }
}

void write_centers_csv(const std::vector<Vector>& centers, const std::filesystem::path& path) {
    const std::size_t d = centers.empty() ? 0 : static_cast<std::size_t>(centers.front().size());
    std::vector<std::string> header;
    for (std::size_t j = 0; j < d; ++j) { header.push_back("x" + std::to_string(j + 1)); }
    csv::Writer w(path, header);
    for (const auto& c : centers) { w.row(std::span<const double>(c.data(), static_cast<std::size_t>(c.size()))); }
}

std::vector<Vector> read_centers_csv(const std::filesystem::path& path) {
    const csv::Table t = csv::read(path);
    std::vector<Vector> out;
    for (const auto& row : t.rows) {
        Vector v(static_cast<Eigen::Index>(row.size()));
        for (std::size_t j = 0; j < row.size(); ++j) { v(static_cast<Eigen::Index>(j)) = row[j]; }
        out.push_back(std::move(v));
    }
    require(!out.empty(), ErrorCode::IoError, path.string() + " holds no centers");
    return out;
}

namespace {

std::filesystem::path out_path(const ExperimentConfig& cfg, const char* name) { return cfg.out_dir / name; }

std::filesystem::path input_path(const ExperimentConfig& cfg, const char* name, const char* stage) {
    auto p = cfg.out_dir / name;
    require(std::filesystem::exists(p), ErrorCode::IoError,
            p.string() + " is missing; run the '" + std::string(stage) + "' stage first");
    return p;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::IoError, "cannot write " + path.string());
    out << text;
}

void prepare_out(const ExperimentConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    require(!ec, ErrorCode::IoError, "cannot create " + cfg.out_dir.string() + ": " + ec.message());
    write_text(out_path(cfg, files::manifest), manifest_json(cfg));
}

Trajectory load_trajectory(const ExperimentConfig& cfg) {
    return read_trajectory_csv(input_path(cfg, files::trajectory, "simulate"));
}

std::vector<Vector> load_centers(const ExperimentConfig& cfg) {
    return read_centers_csv(input_path(cfg, files::centers, "centers"));
}

CenterSet make_center_set(const ExperimentConfig& cfg, const std::vector<Vector>& centers) {
    return CenterSet(centers, Kernel(cfg.kernel.kind, cfg.kernel.length));
}

nlohmann::ordered_json attempt_json(const cvt::Algorithm1Attempt& a, bool band) {
    nlohmann::ordered_json j;
    if (band) {
        j["band_half_width"] = a.scales.scale_out;
    } else {
        j["scale_out"] = a.scales.scale_out;
        j["scale_in"] = a.scales.scale_in;
    }
    j["width"] = a.width;
    j["iterations"] = a.iterations;
    j["converged"] = a.converged;
    j["random_seeding"] = a.random_seeding;
    j["final_energy"] = a.trace.empty() ? 0.0 : a.trace.back().energy;
    // largest relative step up in the Lloyd energy; 0 when the trace is non-increasing
    double rise = 0.0;
    for (std::size_t k = 1; k < a.trace.size(); ++k) {
        const double prev = a.trace[k - 1].energy;
        rise = std::max(rise, (a.trace[k].energy - prev) / std::max(prev, 1e-300));
    }
    j["max_energy_rise"] = rise;
    j["topology_pass"] = a.topology.pass;
    j["active_cells"] = a.topology.active_cells.size();
    j["max_degree"] = a.topology.max_degree;
    return j;
}

std::vector<Vector> select_cvt(const ExperimentConfig& cfg, const Trajectory& traj, nlohmann::ordered_json& report) {
    const auto& m = cfg.centers;
    cvt::Algorithm1Options opt;
    opt.lloyd.max_iters = m.lloyd_max_iters;
    opt.lloyd.tol = m.lloyd_tol;
    opt.seed_radius_fraction = m.seed_radius_fraction;
    opt.seed = cfg.seed.value_or(0);
    const bool band = m.region == "band";
    cvt::Algorithm1Result r;
    if (band) {
        const auto samples = limit_set_samples(traj, cfg.simulation.discard, m.orbit_samples);
        r = cvt::algorithm1_band(cvt::to_vec2(samples), m.count, m.band_half_width, opt);
    } else {
        std::vector<cvt::ScalePair> schedule;
        for (std::size_t k = 0; k < m.scale_out.size(); ++k) { schedule.push_back({m.scale_out[k], m.scale_in[k]}); }
        const auto samples = closed_orbit_samples(traj, cfg.simulation.discard, m.orbit_samples);
        r = cvt::algorithm1(cvt::to_vec2(samples), m.count, schedule, opt);
    }
    report["attempts"] = nlohmann::ordered_json::array();
    for (const auto& a : r.attempts) { report["attempts"].push_back(attempt_json(a, band)); }
    report["stationarity"] = cvt::stationarity(r.diagram, *r.region);
    cvt::write_lloyd_trace_csv(r.attempts.back().trace, out_path(cfg, files::lloyd_trace));
    cvt::write_region_csv(*r.region, out_path(cfg, files::region));
    return cvt::to_vectors(r.centers);
}

std::vector<Vector> select_som(const ExperimentConfig& cfg, const Trajectory& traj, nlohmann::ordered_json& report) {
    const auto& m = cfg.centers;
    som::Algorithm2Options opt;
    opt.topology = som::parse_topology(m.topology);
    opt.schedule = som::BetaSchedule::step(m.beta, m.beta_until);
    opt.window = m.som_window;
    opt.window_tol = m.som_window_tol;
    opt.snapshot_every = m.som_snapshot_every;
    opt.init = som::initial_weights(traj, m.count, opt.topology, m.som_radius_factor);
    const auto r = som::algorithm2(traj, m.count, opt);
    report["converged_at"] = r.converged_at ? nlohmann::ordered_json(*r.converged_at) : nlohmann::ordered_json(nullptr);
    report["simple_ring"] = r.simple_ring ? nlohmann::ordered_json(*r.simple_ring) : nlohmann::ordered_json(nullptr);
    report["warnings"] = r.warnings;
    som::write_trace_csv(r, out_path(cfg, files::som_trace), m.som_trace_stride);
    som::write_snapshots_csv(r, out_path(cfg, files::som_snapshots));
    return r.centers;
}

}  // namespace

void stage_simulate(const ExperimentConfig& cfg) {
    prepare_out(cfg);
    const Trajectory traj =
        simulate(build_system(cfg), initial_state(cfg), cfg.simulation.duration, cfg.simulation.dt);
    write_trajectory_csv(traj, out_path(cfg, files::trajectory));
}

void stage_centers(const ExperimentConfig& cfg) {
    prepare_out(cfg);
    const Trajectory traj = load_trajectory(cfg);
    const auto& m = cfg.centers;
    nlohmann::ordered_json report;
    report["method"] = m.method;
    std::vector<Vector> centers;
    if (m.method == "uniform") {
        centers = equal_arc_points(closed_orbit_samples(traj, cfg.simulation.discard, 0), m.count, true);
    } else if (m.method == "random") {
        const auto pool = equal_arc_points(closed_orbit_samples(traj, cfg.simulation.discard, 0), m.random_pool, true);
        Rng rng(*cfg.seed);
        auto perm = rng.permutation(pool.size());
        perm.resize(m.count);
        std::sort(perm.begin(), perm.end());
        for (const auto i : perm) { centers.push_back(pool[i]); }
        report["pool_indices"] = perm;
    } else if (m.method == "cvt") {
        centers = select_cvt(cfg, traj, report);
    } else if (m.method == "som") {
        centers = select_som(cfg, traj, report);
    } else {
        centers = m.points;
    }
    report["count"] = centers.size();
    write_centers_csv(centers, out_path(cfg, files::centers));
    write_text(out_path(cfg, files::center_report), report.dump(2) + "\n");
}

void stage_diagnose(const ExperimentConfig& cfg) {
    prepare_out(cfg);
    const Trajectory traj = load_trajectory(cfg);
    const auto centers = load_centers(cfg);
    const CenterSet cs = make_center_set(cfg, centers);
    const auto limit = limit_set_samples(traj, cfg.simulation.discard, cfg.diagnostics.limit_samples);
    const auto placement = diag::placement_report(limit, cs);
    diag::PeOptions pe;
    pe.epsilon = cfg.diagnostics.epsilon;
    pe.delta = cfg.diagnostics.delta;
    pe.floor = cfg.diagnostics.floor;
    const auto report = diag::pe_occupancy(discard_transient(traj, cfg.simulation.discard), centers, pe);
    write_text(out_path(cfg, files::diagnostics), diag::diagnostics_json(placement, report));
}

void stage_estimate(const ExperimentConfig& cfg) {
    prepare_out(cfg);
    const auto centers = load_centers(cfg);
    const CenterSet cs = make_center_set(cfg, centers);
    const AffineSystem sys = build_system(cfg);
    const auto& e = cfg.estimator;
    EstimatorConfig ec;
    ec.gamma = e.gamma;
    ec.q = e.q;
    if (e.alpha0.size() == 1) {
        ec.alpha0 = Vector::Constant(static_cast<Eigen::Index>(cs.size()), e.alpha0.front());
    } else {
        ec.alpha0 = Eigen::Map<const Vector>(e.alpha0.data(), static_cast<Eigen::Index>(e.alpha0.size()));
    }
    ec.hurwitz_shift = shifted_a(cfg, sys);
    ec.record_stride = e.record_stride;
    require(static_cast<std::size_t>(ec.alpha0.size()) == cs.size(), ErrorCode::ConfigError,
            "[estimator] alpha0: length does not match the number of centers in centers.csv");
    const EstimatorRun run = run_estimator(sys, cs, ec, initial_state(cfg), e.duration, e.dt);
    write_run_csv(run, out_path(cfg, files::alpha_history));
    const auto se = state_error_norm(run);
    const auto ce = coefficient_error_norm(run);
    csv::Writer norms(out_path(cfg, files::error_norms), {"t", "state_error", "coefficient_error"});
    for (std::size_t i = 0; i < run.size(); ++i) { norms.row(std::vector<double>{run.times[i], se[i], ce[i]}); }
    csv::Writer fin(out_path(cfg, files::alpha_final), {"index", "alpha", "alpha_star"});
    const Vector& a = run.final_alpha();
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        fin.row(std::vector<double>{static_cast<double>(i), a(i), run.alpha_star(i)});
    }
}

void stage_grid(const ExperimentConfig& cfg) {
    prepare_out(cfg);
    const auto centers = load_centers(cfg);
    const CenterSet cs = make_center_set(cfg, centers);
    AffineSystem sys = build_system(cfg);
    if (const auto as = shifted_a(cfg, sys)) { sys = with_hurwitz_shift(sys, *as); }
    Vector alpha;
    if (cfg.grid.alpha == "star") {
        alpha = target_coefficients(cs, sys.f_true);
    } else {
        const csv::Table t = csv::read(input_path(cfg, files::alpha_final, "estimate"));
        const std::size_t col = t.column("alpha");
        require(t.rows.size() == cs.size(), ErrorCode::IoError, "alpha_final.csv and centers.csv differ in length");
        alpha.resize(static_cast<Eigen::Index>(t.rows.size()));
        for (std::size_t i = 0; i < t.rows.size(); ++i) { alpha(static_cast<Eigen::Index>(i)) = t.rows[i][col]; }
    }
    const Trajectory traj = load_trajectory(cfg);
    const auto limit = limit_set_samples(traj, cfg.simulation.discard, cfg.grid.limit_samples);
    const GridSpec box{cfg.grid.x_min, cfg.grid.x_max, cfg.grid.y_min, cfg.grid.y_max, cfg.grid.nx, cfg.grid.ny};
    const ErrorGrid grid = pointwise_error_grid(sys, cs, alpha, box, limit);
    write_error_grid_csv(grid, out_path(cfg, files::error_grid), out_path(cfg, files::error_grid_axes));
    csv::Writer along(out_path(cfg, files::error_along), {"x1", "x2", "error"});
    for (std::size_t i = 0; i < limit.size(); ++i) {
        along.row(std::vector<double>{limit[i](0), limit[i](1), grid.along_samples[i]});
    }
}

void run_experiment(const ExperimentConfig& cfg) {
    stage_simulate(cfg);
    stage_centers(cfg);
    stage_diagnose(cfg);
    stage_estimate(cfg);
    stage_grid(cfg);
}

}  // namespace rkhs::exp

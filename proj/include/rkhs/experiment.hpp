#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rkhs/dynamics.hpp"
#include "rkhs/error.hpp"
#include "rkhs/estimator.hpp"
#include "rkhs/kernels.hpp"

// Config-driven experiment pipeline. Each stage reads the artifacts of the
// previous ones from the output directory, so stages can run standalone.
namespace rkhs::exp {

struct SystemConfig {
    std::string model = "piezo";  ///< piezo | vdp_like
    PiezoParameters piezo{};
    Vector x0;
    /// piezo only: "scaled" (x~1, x2) or "original" (x1, x2).
    std::string x0_frame = "scaled";
};

struct SimulationConfig {
    double duration = 10.0;
    double dt = 1e-3;
    /// Transient removed before limit-set sampling.
    double discard = 0.0;
};

struct CentersConfig {
    std::string method = "uniform";  ///< uniform | random | cvt | som | explicit
    std::size_t count = 40;
    /// random: size of the uniform pool the centers are drawn from.
    std::size_t random_pool = 48;
    /// cvt: samples of one orbit joined into the region polygon.
    std::size_t orbit_samples = 200;
    std::string region = "annulus";  ///< annulus | band
    std::vector<double> scale_out{1.1};
    std::vector<double> scale_in{0.9};
    std::vector<double> band_half_width{};
    std::size_t lloyd_max_iters = 20000;
    double lloyd_tol = 1e-7;
    double seed_radius_fraction = 0.01;
    double beta = 0.99;
    double beta_until = 1000.0;
    std::string topology = "ring";
    double som_window = 10.0;
    double som_window_tol = 1e-4;
    double som_radius_factor = 0.5;
    std::size_t som_trace_stride = 100;
    double som_snapshot_every = 10.0;
    std::vector<Vector> points{};
};

struct KernelConfig {
    KernelKind kind = KernelKind::SobolevMatern32;
    double length = 0.2;
};

struct EstimatorSection {
    double gamma = 1e-3;
    double duration = 300.0;
    double dt = 1e-3;
    /// One value (broadcast) or one per center.
    std::vector<double> alpha0{1.0};
    /// A_s = A - c B B^T / |B|^2; 0 keeps A.
    double input_damping = 0.0;
    /// Lyapunov weight; empty means identity.
    Matrix q;
    std::size_t record_stride = 100;
};

struct GridConfig {
    double x_min = -1.0;
    double x_max = 1.0;
    double y_min = -1.0;
    double y_max = 1.0;
    std::size_t nx = 101;
    std::size_t ny = 101;
    std::string alpha = "final";  ///< final | star
    std::size_t limit_samples = 2000;
};

struct DiagnosticsConfig {
    std::optional<double> epsilon;
    std::optional<double> delta;
    std::optional<double> floor;
    std::size_t limit_samples = 2000;
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::optional<std::uint64_t> seed;
    std::filesystem::path out_dir = "out";
    SystemConfig system;
    SimulationConfig simulation;
    CentersConfig centers;
    KernelConfig kernel;
    EstimatorSection estimator;
    GridConfig grid;
    DiagnosticsConfig diagnostics;
};

/// INI-style file with [sections]. Unknown keys, malformed values and values
/// outside their valid ranges throw ConfigError naming the field.
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);
[[nodiscard]] ExperimentConfig parse_config(const std::string& text);
/// Range and cross-field checks (seed present for randomized methods, ...).
void validate(const ExperimentConfig& cfg);

/// The system in working coordinates and the initial state in that frame.
[[nodiscard]] AffineSystem build_system(const ExperimentConfig& cfg);
[[nodiscard]] Vector initial_state(const ExperimentConfig& cfg);
[[nodiscard]] std::optional<Matrix> shifted_a(const ExperimentConfig& cfg, const AffineSystem& sys);

/// Every parameter in use, defaults included, plus RNG algorithm and seed.
[[nodiscard]] std::string manifest_json(const ExperimentConfig& cfg);

namespace files {
inline constexpr const char* trajectory = "trajectory.csv";
inline constexpr const char* centers = "centers.csv";
inline constexpr const char* center_report = "center_selection.json";
inline constexpr const char* lloyd_trace = "lloyd_trace.csv";
inline constexpr const char* region = "region.csv";
inline constexpr const char* som_trace = "som_trace.csv";
inline constexpr const char* som_snapshots = "som_snapshots.csv";
inline constexpr const char* diagnostics = "diagnostics.json";
inline constexpr const char* alpha_history = "alpha_history.csv";
inline constexpr const char* alpha_final = "alpha_final.csv";
inline constexpr const char* error_norms = "error_norms.csv";
inline constexpr const char* error_grid = "error_grid.csv";
inline constexpr const char* error_grid_axes = "error_grid_axes.csv";
inline constexpr const char* error_along = "error_along_limit_set.csv";
inline constexpr const char* manifest = "manifest.json";
}  // namespace files

void stage_simulate(const ExperimentConfig& cfg);
void stage_centers(const ExperimentConfig& cfg);
void stage_diagnose(const ExperimentConfig& cfg);
void stage_estimate(const ExperimentConfig& cfg);
void stage_grid(const ExperimentConfig& cfg);
/// All stages in order.
void run_experiment(const ExperimentConfig& cfg);

/// 2 for configuration and input problems, 3 for numerical failures.
[[nodiscard]] int exit_code(ErrorCode code) noexcept;

[[nodiscard]] std::vector<Vector> read_centers_csv(const std::filesystem::path& path);
void write_centers_csv(const std::vector<Vector>& centers, const std::filesystem::path& path);

}  // namespace rkhs::exp

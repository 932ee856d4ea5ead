#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "rkhs/csv.hpp"
#include "rkhs/experiment.hpp"
#include "support.hpp"

using namespace rkhs;
namespace fs = std::filesystem;

namespace {

// Short piezo experiment; a few seconds of estimator time keep the suite fast.
std::string base_config(const fs::path& out, const std::string& centers_section) {
    return "[experiment]\nseed = 7\nname = cli_test\nout_dir = " + out.string() +
           "\n[system]\nmodel = piezo\nx0 = 1.5, 0\n"
           "[simulation]\nduration = 5\ndt = 1e-3\n" +
           centers_section +
           "[kernel]\nkind = matern32\nlength = 0.2\n"
           "[estimator]\ngamma = 1e-3\nduration = 2\ndt = 1e-3\nalpha0 = 1\ninput_damping = 1\nrecord_stride = 100\n"
           "[grid]\nx_min = -2\nx_max = 2\ny_min = -1\ny_max = 1\nnx = 21\nny = 11\n";
}

const std::string uniform_section = "[centers]\nmethod = uniform\ncount = 20\n";
const std::string random_section = "[centers]\nmethod = random\ncount = 20\nrandom_pool = 30\n";

fs::path write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream(path) << text;
    return path;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RKHS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = exp::parse_config(base_config("o", uniform_section));
    CHECK(cfg.centers.count == 20);
    CHECK(cfg.estimator.duration == 2.0);
    CHECK(cfg.grid.nx == 21);

    CHECK(test::error_of([] { (void)exp::parse_config("[kernel]\nwidth = 1\n"); }) == ErrorCode::ConfigError);
    CHECK(test::error_of([] { (void)exp::parse_config("[kernel]\nlength = abc\n"); }) == ErrorCode::ConfigError);
    CHECK(test::error_of([] { (void)exp::parse_config("[grid]\nnx = -3\n"); }) == ErrorCode::ConfigError);

    const auto pts = exp::parse_config(base_config("o", "[centers]\nmethod = explicit\npoints = 0.5, 0; -0.5, 0.25 ; 0, 1\n"));
    REQUIRE(pts.centers.points.size() == 3);
    CHECK(pts.centers.points[1](1) == 0.25);
    CHECK(pts.centers.count == 3);
    CHECK(exp::parse_config("# note\n; other note\n" + base_config("o", uniform_section)).kernel.length == 0.2);

    auto no_seed = exp::parse_config(base_config("o", random_section));
    no_seed.seed.reset();
    CHECK(test::error_of([&] { exp::validate(no_seed); }) == ErrorCode::ConfigError);
}

TEST_CASE("manifest records defaults and the rng") {
    const auto cfg = exp::parse_config(base_config("o", uniform_section));
    const auto j = nlohmann::json::parse(exp::manifest_json(cfg));
    CHECK(j["rng"]["seed"] == 7);
    CHECK(j["rng"]["algorithm"].is_string());
    CHECK(j["diagnostics"]["epsilon"] == "auto");
    CHECK(j["grid"]["limit_samples"] == 2000);
    CHECK(j["estimator"]["q"].size() == 2);
    CHECK(j["estimator"]["gamma"] == 1e-3);
}

TEST_CASE("exit code mapping") {
    CHECK(exp::exit_code(ErrorCode::ConfigError) == 2);
    CHECK(exp::exit_code(ErrorCode::IoError) == 2);
    CHECK(exp::exit_code(ErrorCode::NonFiniteState) == 3);
    CHECK(exp::exit_code(ErrorCode::NotHurwitz) == 3);
    CHECK(exp::exit_code(ErrorCode::UnstableStep) == 3);
}

TEST_CASE("simulate then diagnose on-orbit centers") {
    const fs::path out = test::scratch_dir("cli_diagnose");
    auto cfg = exp::parse_config(base_config(out, uniform_section));
    exp::stage_simulate(cfg);
    exp::stage_centers(cfg);
    CHECK(test::error_of([&] {
              auto missing = cfg;
              missing.out_dir = out / "nothing_here";
              exp::stage_diagnose(missing);
          }) == ErrorCode::IoError);
    exp::stage_diagnose(cfg);
    const auto j = nlohmann::json::parse(test::slurp(out / exp::files::diagnostics));
    CHECK(j["pe"]["verdict"] == "PASS");
    CHECK(j["fill_distance"].get<double>() > 0.0);
    CHECK(j["pe"]["per_center_min_occupancy"].size() == 20);
}

TEST_CASE("random selection is reproducible from the seed") {
    const fs::path root = test::scratch_dir("cli_random");
    const auto cfg_path = write_file(root / "random.cfg", base_config(root / "a", random_section));
    REQUIRE(run_cli("simulate --config " + cfg_path.string()) == 0);
    REQUIRE(run_cli("centers --config " + cfg_path.string() + " --seed 7") == 0);
    fs::create_directories(root / "b");
    fs::copy_file(root / "a" / exp::files::trajectory, root / "b" / exp::files::trajectory);
    REQUIRE(run_cli("centers --config " + cfg_path.string() + " --seed 7 --out " + (root / "b").string()) == 0);
    CHECK(test::slurp(root / "a" / exp::files::centers) == test::slurp(root / "b" / exp::files::centers));
    REQUIRE(run_cli("centers --config " + cfg_path.string() + " --seed 8 --out " + (root / "b").string()) == 0);
    CHECK(test::slurp(root / "a" / exp::files::centers) != test::slurp(root / "b" / exp::files::centers));
}

TEST_CASE("grid with the ideal coefficients interpolates at the centers") {
    const fs::path out = test::scratch_dir("cli_grid");
    auto cfg = exp::parse_config(base_config(out, uniform_section));
    cfg.grid.alpha = "star";
    exp::stage_simulate(cfg);
    exp::stage_centers(cfg);
    exp::stage_grid(cfg);
    // limit-set samples include points between centers, so only bound the error loosely there
    const auto along = csv::read(out / exp::files::error_along);
    REQUIRE(along.header == std::vector<std::string>{"x1", "x2", "error"});
    const auto grid = csv::read(out / exp::files::error_grid);
    CHECK(!grid.rows.empty());

    // evaluate directly at the centers
    const auto centers = exp::read_centers_csv(out / exp::files::centers);
    const AffineSystem sys = exp::build_system(cfg);
    const auto shifted = with_hurwitz_shift(sys, *exp::shifted_a(cfg, sys));
    const CenterSet cs(centers, Kernel(cfg.kernel.kind, cfg.kernel.length));
    const Vector a = target_coefficients(cs, shifted.f_true);
    for (const auto& c : centers) { CHECK(std::abs(f_hat_eval(cs, a, c) - shifted.f_true(c)) <= 1e-8); }
}

TEST_CASE("run equals the manual chain") {
    const fs::path root = test::scratch_dir("cli_closure");
    const auto cfg_path = write_file(root / "closure.cfg", base_config(root / "chain", uniform_section));
    for (const char* stage : {"simulate", "centers", "diagnose", "estimate", "grid"}) {
        REQUIRE(run_cli(std::string(stage) + " --config " + cfg_path.string()) == 0);
    }
    REQUIRE(run_cli("run --config " + cfg_path.string() + " --out " + (root / "run").string()) == 0);
    for (const char* name : {exp::files::trajectory, exp::files::centers, exp::files::diagnostics,
                             exp::files::alpha_history, exp::files::alpha_final, exp::files::error_norms,
                             exp::files::error_grid, exp::files::error_along}) {
        CAPTURE(name);
        CHECK(test::slurp(root / "chain" / name) == test::slurp(root / "run" / name));
    }
}

TEST_CASE("executable exit codes") {
    const fs::path root = test::scratch_dir("cli_exit");
    CHECK(run_cli("simulate") == 2);
    CHECK(run_cli("frobnicate --config x") == 2);
    CHECK(run_cli("--help") == 0);
    const auto bad = write_file(root / "bad.cfg", "[kernel]\nwidth = 1\n");
    CHECK(run_cli("simulate --config " + bad.string()) == 2);
    const auto no_traj = write_file(root / "no_traj.cfg", base_config(root / "empty", uniform_section));
    CHECK(run_cli("centers --config " + no_traj.string()) == 2);

    // quintic stiffness at a huge amplitude overflows the fixed-step integrator
    std::string text = base_config(root / "blowup", uniform_section);
    text.replace(text.find("x0 = 1.5, 0"), 11, "x0 = 1e6, 0");
    const auto blowup = write_file(root / "blowup.cfg", text);
    CHECK(run_cli("simulate --config " + blowup.string()) == 3);
}

#include <cmath>

#include <doctest.h>

#include "rkhs/cvt.hpp"
#include "rkhs/dynamics.hpp"
#include "support.hpp"

using namespace rkhs;
using test::vec;

namespace {

double rel_energy_drift(const PiezoParameters& p, const Trajectory& traj) {
    const double e0 = piezo_energy(p, traj.state(0));
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        worst = std::max(worst, std::abs(piezo_energy(p, traj.state(i)) - e0) / std::abs(e0));
    }
    return worst;
}

}  // namespace

TEST_CASE("piezo system in scaled coordinates") {
    const PiezoParameters p;
    const AffineSystem sys = piezo_system(p);
    CHECK(sys.a(0, 0) == 0.0);
    CHECK(sys.a(0, 1) == doctest::Approx(1.0 / p.displacement_scale));
    CHECK(sys.a(1, 0) == doctest::Approx(-p.stiffness / p.mass * p.displacement_scale));
    CHECK(sys.a(1, 1) == 0.0);
    CHECK(sys.b == vec({0.0, 1.0}));
    CHECK(sys.f_true(vec({0.0, 0.0})) == 0.0);
    CHECK(sys.f_true(vec({0.0, 3.7})) == 0.0);

    PiezoParameters other;
    other.k_n1 = 5.0;
    other.k_n2 = -2.0;
    CHECK(piezo_system(other).f_true(vec({0.0, -1.0})) == 0.0);

    // odd in the displacement
    const double x1 = 1.3;
    CHECK(sys.f_true(vec({x1, 0.2})) == doctest::Approx(-sys.f_true(vec({-x1, 0.2}))));
    const double xo = p.displacement_scale * x1;
    CHECK(sys.f_true(vec({x1, 0.0})) ==
          doctest::Approx(-(p.k_n1 / p.mass) * xo * xo * xo - (p.k_n2 / p.mass) * std::pow(xo, 5)));

    PiezoParameters bad;
    bad.mass = 0.0;
    CHECK(test::error_of([&] { (void)piezo_system(bad); }) == ErrorCode::InvalidParameter);
    bad = {};
    bad.displacement_scale = -1.0;
    CHECK(test::error_of([&] { (void)piezo_system(bad); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("undamped piezo conserves energy") {
    const PiezoParameters p;
    const Trajectory traj = simulate(piezo_system(p), vec({0.03, 0.0}), 100.0, 1e-3);
    CHECK(rel_energy_drift(p, traj) < 1e-6);

    const auto samples = limit_set_samples(traj, 0.0, 500);
    const double e0 = piezo_energy(p, traj.state(0));
    for (const auto& s : samples) { CHECK(std::abs(piezo_energy(p, s) - e0) <= 1e-6 * std::abs(e0)); }
}

TEST_CASE("energy drift on the large orbit shrinks at RK4 rate") {
    // From (1.5, 0) the quintic stiffness dominates and dt = 1e-3 leaves a drift
    // near 1.3e-5; the dissipation of RK4 scales as dt^5.
    const PiezoParameters p;
    const double coarse = rel_energy_drift(p, simulate(piezo_system(p), vec({1.5, 0.0}), 20.0, 1e-3));
    const double fine = rel_energy_drift(p, simulate(piezo_system(p), vec({1.5, 0.0}), 20.0, 5e-4));
    CHECK(std::log2(coarse / fine) == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("scaling is a change of variables") {
    PiezoParameters unit;
    unit.displacement_scale = 1.0;
    const AffineSystem original = piezo_system(unit);
    const PiezoParameters p;
    const AffineSystem scaled = piezo_system(p);
    const Vector s = vec({p.displacement_scale, 1.0});
    const AffineSystem rescaled = rescale(original, s);
    CHECK((rescaled.a - scaled.a).cwiseAbs().maxCoeff() < 1e-12);

    const Vector x0 = vec({0.9, 0.1});
    const Trajectory a = simulate(original, s.cwiseProduct(x0), 5.0, 1e-3);
    const Trajectory b = simulate(scaled, x0, 5.0, 1e-3);
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, (s.cwiseInverse().cwiseProduct(a.state(i)) - b.state(i)).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("vdp_like system") {
    const AffineSystem sys = vdp_like_system();
    CHECK(sys.f_true(vec({0.0, 2.0})) == 0.0);
    CHECK(sys.f_true(vec({1.0, 1.0})) == -1.0);
    const Trajectory traj = simulate(sys, vec({0.0, 2.0}), 200.0, 1e-3);
    double peak = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) { peak = std::max(peak, traj.state(i).cwiseAbs().maxCoeff()); }
    CHECK(peak < 5.0);

    // settled by 100 s: the tail stays close to a later window
    const auto settled = limit_set_samples(traj, 100.0, 1000);
    const auto late = limit_set_samples(traj.slice(traj.index_at_or_after(150.0), traj.size()), 0.0, 0);
    CHECK(cvt::hausdorff_distance(settled, late) <= 0.05);
}

TEST_CASE("stable linear decay") {
    AffineSystem sys;
    sys.a = test::mat2(-1, 0.5, -0.5, -1);
    sys.b = vec({0, 1});
    sys.scale = Vector::Ones(2);
    sys.f_true = [](const Vector&) { return 0.0; };
    const Vector x0 = vec({1.0, -2.0});
    const Trajectory traj = simulate(sys, x0, 10.0, 1e-2);
    CHECK(traj.state(traj.size() - 1).norm() < x0.norm());
}

TEST_CASE("limit_set_samples") {
    const Trajectory traj = simulate(vdp_like_system(), vec({0.0, 2.0}), 10.0, 1e-2);
    const auto last = limit_set_samples(traj, traj.duration() - traj.dt(), 0);
    CHECK(last.size() == 1);
    CHECK(test::error_of([&] { (void)limit_set_samples(traj, traj.duration(), 0); }) == ErrorCode::EmptyResult);

    // order-preserving subset of the trajectory
    const auto sub = limit_set_samples(traj, 2.0, 37);
    CHECK(sub.size() == 37);
    std::size_t cursor = 0;
    for (const auto& s : sub) {
        while (cursor < traj.size() && traj.state(cursor) != s) { ++cursor; }
        CHECK(cursor < traj.size());
        CHECK(traj.time(cursor) > 2.0);
    }
}

TEST_CASE("period estimate and one closed orbit") {
    // x1 = cos(2 pi t / 3)
    Trajectory traj(2, 1e-3);
    for (int i = 0; i <= 20000; ++i) {
        const double t = i * 1e-3;
        traj.push(t, vec({std::cos(2 * M_PI * t / 3.0), std::sin(2 * M_PI * t / 3.0)}));
    }
    REQUIRE(estimate_period(traj).has_value());
    CHECK(*estimate_period(traj) == doctest::Approx(3.0).epsilon(1e-6));
    const auto loop = closed_orbit_samples(traj, 0.0, 0);
    CHECK(loop.size() == 3000);
    const auto pts = equal_arc_points(loop, 8, true);
    REQUIRE(pts.size() == 8);
    for (std::size_t k = 1; k < pts.size(); ++k) {
        CHECK((pts[k] - pts[k - 1]).norm() == doctest::Approx(2 * std::sin(M_PI / 8)).epsilon(1e-4));
    }
}

TEST_CASE("trajectory csv round trip") {
    const Trajectory traj = simulate(vdp_like_system(), vec({0.3, -0.1}), 1.0, 0.1);
    const auto dir = test::scratch_dir("dyn_csv");
    write_trajectory_csv(traj, dir / "t.csv");
    CHECK(test::slurp(dir / "t.csv").rfind("t,x1,x2\n", 0) == 0);
    const Trajectory back = read_trajectory_csv(dir / "t.csv");
    REQUIRE(back.size() == traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(back.time(i) == traj.time(i));
        CHECK(back.state(i) == traj.state(i));
    }
}

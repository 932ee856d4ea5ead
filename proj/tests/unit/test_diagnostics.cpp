#include <cmath>

#include <doctest.h>
#include <json.hpp>

#include "rkhs/cvt.hpp"
#include "rkhs/diagnostics.hpp"
#include "rkhs/dynamics.hpp"
#include "rkhs/random.hpp"
#include "support.hpp"

using namespace rkhs;
using namespace rkhs::diag;
using test::vec;

namespace {

Trajectory unit_circle_orbit(double duration, double dt, double scale = 1.0) {
    Trajectory t(2, dt);
    const auto n = static_cast<std::size_t>(std::llround(duration / dt));
    for (std::size_t i = 0; i <= n; ++i) {
        const double s = static_cast<double>(i) * dt;
        t.push(s, vec({scale * std::cos(s), scale * std::sin(s)}));
    }
    return t;
}

std::vector<Vector> circle_points(std::size_t n, double r = 1.0) {
    std::vector<Vector> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        out.push_back(vec({r * std::cos(th), r * std::sin(th)}));
    }
    return out;
}

}  // namespace

TEST_CASE("occupancy of a constant trajectory") {
    Trajectory t(2, 0.01);
    for (int i = 0; i <= 1000; ++i) { t.push(0.01 * i, vec({0.5, 0.5})); }
    PeOptions opt;
    opt.epsilon = 0.1;
    opt.delta = 2.0;
    const PeReport r = pe_occupancy(t, {vec({0.5, 0.5})}, opt);
    CHECK(r.pass);
    CHECK(r.per_center_min_occupancy[0] == doctest::Approx(2.0));
}

TEST_CASE("centers away from the trajectory fail") {
    const Trajectory t = unit_circle_orbit(20.0, 1e-2);
    PeOptions opt;
    opt.epsilon = 0.2;
    const PeReport r = pe_occupancy(t, {vec({3, 0}), vec({0, 3})}, opt);
    CHECK(!r.pass);
    CHECK(r.per_center_min_occupancy == std::vector<double>{0.0, 0.0});
}

TEST_CASE("circular orbit occupancy against the arc oracle") {
    const double dt = 1e-3;
    const Trajectory t = unit_circle_orbit(30.0, dt);
    PeOptions opt;
    opt.epsilon = 0.3;
    opt.delta = 2.0 * M_PI;
    const PeReport r = pe_occupancy(t, circle_points(8), opt);
    // chord 2 sin(theta / 2) <= eps over an arc of half-angle 2 asin(eps / 2), at unit speed
    const double expected = 4.0 * std::asin(0.15);
    CHECK(r.pass);
    for (double occ : r.per_center_min_occupancy) { CHECK(std::abs(occ - expected) <= 2.0 * dt); }
}

TEST_CASE("occupancy preconditions") {
    const Trajectory t = unit_circle_orbit(10.0, 1e-2);
    const auto centers = circle_points(8);
    PeOptions big;
    big.epsilon = 0.5;
    CHECK(test::error_of([&] { (void)pe_occupancy(t, centers, big); }) == ErrorCode::EpsilonTooLarge);
    PeOptions longer;
    longer.delta = 11.0;
    CHECK(test::error_of([&] { (void)pe_occupancy(t, centers, longer); }) == ErrorCode::WindowTooLong);
}

TEST_CASE("defaults: epsilon from separation, delta from the period") {
    const Trajectory t = unit_circle_orbit(40.0, 1e-3);
    const auto centers = circle_points(8);
    const PeReport r = pe_occupancy(t, centers);
    CHECK(r.epsilon == doctest::Approx(0.49 * 2.0 * std::sin(M_PI / 8)));
    CHECK(r.delta == doctest::Approx(2.0 * M_PI).epsilon(1e-3));
    CHECK(r.floor == doctest::Approx(2e-3));
}

TEST_CASE("halving dt moves occupancy by at most two old steps") {
    const auto centers = circle_points(8);
    PeOptions opt;
    opt.epsilon = 0.3;
    opt.delta = 2.0 * M_PI;
    const double dt = 2e-3;
    const PeReport coarse = pe_occupancy(unit_circle_orbit(20.0, dt), centers, opt);
    const PeReport fine = pe_occupancy(unit_circle_orbit(20.0, dt / 2), centers, opt);
    for (std::size_t i = 0; i < centers.size(); ++i) {
        CHECK(std::abs(coarse.per_center_min_occupancy[i] - fine.per_center_min_occupancy[i]) <= 2.0 * dt);
    }
}

TEST_CASE("fill distance") {
    const auto pts = circle_points(12);
    CHECK(fill_distance(pts, pts) == 0.0);
    CHECK(fill_distance({vec({0.0}), vec({0.5}), vec({1.0})}, {vec({0.5})}) == 0.5);
    // samples include every midpoint between neighboring centers
    CHECK(fill_distance(circle_points(3600), circle_points(40)) ==
          doctest::Approx(2.0 * std::sin(M_PI / 80.0)).epsilon(1e-12));
    CHECK(test::error_of([] { (void)fill_distance({}, {vec({0.0})}); }) == ErrorCode::EmptySet);
}

TEST_CASE("adding a center never increases the fill distance") {
    Rng rng(77);
    std::vector<Vector> samples;
    for (int i = 0; i < 400; ++i) { samples.push_back(vec({rng.uniform(-1, 1), rng.uniform(-1, 1)})); }
    std::vector<Vector> centers{vec({0, 0})};
    double h = fill_distance(samples, centers);
    for (int k = 0; k < 30; ++k) {
        centers.push_back(vec({rng.uniform(-1, 1), rng.uniform(-1, 1)}));
        const double next = fill_distance(samples, centers);
        CHECK(next <= h);
        h = next;
    }
}

TEST_CASE("minimal separation") {
    CHECK(min_separation({vec({0, 0}), vec({3, 0})}) == 3.0);
    CHECK(min_separation({vec({0, 0}), vec({1, 0}), vec({0.5, std::sqrt(3.0) / 2})}) == doctest::Approx(1.0));
    CHECK(test::error_of([] { (void)min_separation({vec({0, 0})}); }) == ErrorCode::SingleCenter);
}

TEST_CASE("placement report and json") {
    const auto centers = circle_points(16);
    const CenterSet cs(centers, Kernel(KernelKind::SobolevMatern32, 0.3));
    const PlacementReport p = placement_report(circle_points(1600), cs);
    REQUIRE(p.min_separation.has_value());
    CHECK(*p.min_separation == doctest::Approx(2.0 * std::sin(M_PI / 16)));
    CHECK(p.grammian_condition >= 1.0);
    CHECK(p.hausdorff_to_limit_set == doctest::Approx(p.fill_distance));

    const PeReport pe = pe_occupancy(unit_circle_orbit(20.0, 1e-2), centers);
    const auto j = nlohmann::json::parse(diagnostics_json(p, pe));
    for (const char* key : {"fill_distance", "min_separation", "grammian_condition", "hausdorff_to_limit_set"}) {
        CHECK(j.contains(key));
    }
    for (const char* key : {"epsilon", "delta", "per_center_min_occupancy", "verdict"}) { CHECK(j["pe"].contains(key)); }
    CHECK(j["pe"]["per_center_min_occupancy"].size() == 16);

    const CenterSet one({vec({1, 0})}, Kernel(KernelKind::SobolevMatern32, 0.3));
    const PlacementReport single = placement_report(circle_points(100), one);
    CHECK(!single.min_separation.has_value());
    CHECK(nlohmann::json::parse(diagnostics_json(single, pe))["min_separation"].is_null());
}

TEST_CASE("scale equivariance") {
    const double s = 3.5;
    const auto centers = circle_points(10);
    std::vector<Vector> scaled_centers;
    for (const auto& c : centers) { scaled_centers.push_back(s * c); }
    const auto samples = circle_points(1000);
    std::vector<Vector> scaled_samples;
    for (const auto& c : samples) { scaled_samples.push_back(s * c); }
    const Kernel k(KernelKind::SobolevMatern32, 0.3);
    const PlacementReport a = placement_report(samples, CenterSet(centers, k));
    const PlacementReport b = placement_report(scaled_samples, CenterSet(scaled_centers, k));
    CHECK(b.fill_distance == doctest::Approx(s * a.fill_distance).epsilon(1e-12));
    CHECK(*b.min_separation == doctest::Approx(s * *a.min_separation).epsilon(1e-12));
    CHECK(b.hausdorff_to_limit_set == doctest::Approx(s * a.hausdorff_to_limit_set).epsilon(1e-12));

    PeOptions o1, o2;
    o1.epsilon = 0.2;
    o1.delta = 2.0 * M_PI;
    o2.epsilon = s * 0.2;
    o2.delta = 2.0 * M_PI;
    const PeReport p1 = pe_occupancy(unit_circle_orbit(20.0, 1e-3), centers, o1);
    const PeReport p2 = pe_occupancy(unit_circle_orbit(20.0, 1e-3, s), scaled_centers, o2);
    CHECK(p1.pass == p2.pass);
}

TEST_CASE("uniform centers fill the piezo orbit better than a random subset") {
    const Trajectory traj = simulate(piezo_system({}), vec({1.5, 0.0}), 5.0, 1e-3);
    const auto loop = closed_orbit_samples(traj, 0.0, 0);
    const auto uniform = equal_arc_points(loop, 40, true);
    const auto pool = equal_arc_points(loop, 48, true);
    Rng rng(7);
    auto idx = rng.permutation(48);
    idx.resize(40);
    std::sort(idx.begin(), idx.end());
    std::vector<Vector> random;
    for (auto i : idx) { random.push_back(pool[i]); }
    const auto samples = limit_set_samples(traj, 0.0, 2000);
    CHECK(fill_distance(samples, uniform) < fill_distance(samples, random));
}

TEST_CASE("on-orbit piezo centers pass and shifted centers fail") {
    const Trajectory traj = simulate(piezo_system({}), vec({1.5, 0.0}), 5.0, 1e-3);
    const auto centers = equal_arc_points(closed_orbit_samples(traj, 0.0, 0), 40, true);
    const PeReport on = pe_occupancy(traj, centers);
    CHECK(on.pass);
    std::vector<Vector> off;
    for (const auto& c : centers) { off.push_back(c + vec({3.0 * on.epsilon, 0.0})); }
    PeOptions same;
    same.epsilon = on.epsilon;
    same.delta = on.delta;
    CHECK(!pe_occupancy(traj, off, same).pass);
}

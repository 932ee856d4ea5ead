#include "rkhs/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "rkhs/csv.hpp"

namespace rkhs {

void AffineSystem::validate() const {
    const Eigen::Index d = a.rows();
    require(d > 0 && a.cols() == d, ErrorCode::DimensionMismatch, "A must be square");
    require(b.size() == d, ErrorCode::DimensionMismatch, "B must match the state dimension");
    require(scale.size() == d, ErrorCode::DimensionMismatch, "scale must match the state dimension");
    require((scale.array() > 0.0).all(), ErrorCode::InvalidParameter, "scale factors must be positive");
    require(static_cast<bool>(f_true), ErrorCode::InvalidParameter, "system has no nonlinearity");
    num::require_finite(a, "A");
    num::require_finite(b, "B");
}

void AffineSystem::derivative(const Vector& x, Vector& dxdt) const {
    dxdt.noalias() = a * x;
    dxdt += b * f_true(x);
}

AffineSystem rescale(const AffineSystem& original, const Vector& scale) {
    original.validate();
    require(scale.size() == original.a.rows(), ErrorCode::DimensionMismatch, "scale has the wrong dimension");
    require((scale.array() > 0.0).all(), ErrorCode::InvalidParameter, "scale factors must be positive");
    AffineSystem out;
    out.name = original.name;
    const Vector inv = scale.cwiseInverse();
    out.a = inv.asDiagonal() * original.a * scale.asDiagonal();
    out.b = inv.cwiseProduct(original.b);
    out.scale = original.scale.cwiseProduct(scale);
    out.f_true = [f = original.f_true, scale](const Vector& x) { return f(scale.cwiseProduct(x)); };
    return out;
}

AffineSystem with_hurwitz_shift(const AffineSystem& sys, const Matrix& shifted_a) {
    sys.validate();
    require(shifted_a.rows() == sys.a.rows() && shifted_a.cols() == sys.a.cols(), ErrorCode::DimensionMismatch,
            "shift matrix has the wrong shape");
    num::require_finite(shifted_a, "shift matrix");
    const Matrix diff = sys.a - shifted_a;
    const double bb = sys.b.squaredNorm();
    require(bb > 0.0, ErrorCode::InvalidParameter, "B is zero; no shift can be folded into f");
    const Vector k = diff.transpose() * sys.b / bb;
    const double residual = (diff - sys.b * k.transpose()).cwiseAbs().maxCoeff();
    const double scale = std::max({1.0, diff.cwiseAbs().maxCoeff(), sys.a.cwiseAbs().maxCoeff()});
    require(residual <= 1e-12 * scale, ErrorCode::InvalidParameter,
            "A - A_s must be of the form B k^T to be absorbed into the nonlinearity");
    AffineSystem out = sys;
    out.a = shifted_a;
    out.f_true = [f = sys.f_true, k](const Vector& x) { return f(x) + k.dot(x); };
    return out;
}

AffineSystem piezo_system(const PiezoParameters& p) {
    require(p.mass > 0.0, ErrorCode::InvalidParameter, "modal mass must be positive");
    require(p.displacement_scale > 0.0, ErrorCode::InvalidParameter, "displacement scale must be positive");
    require(std::isfinite(p.stiffness) && std::isfinite(p.damping) && std::isfinite(p.k_n1) &&
                std::isfinite(p.k_n2) && std::isfinite(p.input_coupling),
            ErrorCode::InvalidParameter, "piezo parameters must be finite");
    AffineSystem original;
    original.name = "piezo";
    original.a.resize(2, 2);
    original.a << 0.0, 1.0, -p.stiffness / p.mass, -p.damping / p.mass;
    original.b = Vector::Unit(2, 1);
    original.scale = Vector::Ones(2);
    const double c3 = -p.k_n1 / p.mass;
    const double c5 = -p.k_n2 / p.mass;
    original.f_true = [c3, c5](const Vector& x) {
        const double x1 = x(0);
        const double x1_3 = x1 * x1 * x1;
        return c3 * x1_3 + c5 * x1_3 * x1 * x1;
    };
    Vector scale(2);
    scale << p.displacement_scale, 1.0;
    return rescale(original, scale);
}

double piezo_energy(const PiezoParameters& p, const Eigen::Ref<const Vector>& scaled_state) {
    const double x = p.displacement_scale * scaled_state(0);
    const double v = scaled_state(1);
    const double x2 = x * x;
    return 0.5 * p.mass * v * v + 0.5 * p.stiffness * x2 + 0.25 * p.k_n1 * x2 * x2 + p.k_n2 * x2 * x2 * x2 / 6.0;
}

AffineSystem vdp_like_system() {
    AffineSystem sys;
    sys.name = "vdp_like";
    sys.a.resize(2, 2);
    sys.a << 0.0, 1.0, -1.0, 0.5;
    sys.b = Vector::Unit(2, 1);
    sys.scale = Vector::Ones(2);
    sys.f_true = [](const Vector& x) { return -x(0) * x(0) * x(1); };
    return sys;
}

Trajectory simulate(const AffineSystem& sys, const Vector& x0, double duration, double dt) {
    sys.validate();
    require(static_cast<std::size_t>(x0.size()) == sys.dim(), ErrorCode::DimensionMismatch,
            "initial state has the wrong dimension");
    return num::rk4_integrate([&sys](double, const Vector& x, Vector& dxdt) { sys.derivative(x, dxdt); }, x0, 0.0,
                              duration, dt);
}

namespace {

std::vector<Vector> subsample(const Trajectory& traj, std::size_t first, std::size_t last, std::size_t count) {
    const std::size_t available = last - first;
    std::vector<Vector> out;
    if (count == 0 || count >= available) {
        out.reserve(available);
        for (std::size_t i = first; i < last; ++i) { out.emplace_back(traj.state(i)); }
        return out;
    }
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) { out.emplace_back(traj.state(first + k * available / count)); }
    return out;
}

std::size_t first_after_discard(const Trajectory& traj, double discard) {
    require(discard >= 0.0, ErrorCode::InvalidParameter, "discard must be nonnegative");
    if (discard == 0.0) { return 0; }
    // the closed interval [t0, t0 + discard] is dropped
    const double cut = traj.t0() + discard + 1e-9 * traj.dt();
    std::size_t i = traj.index_at_or_after(cut);
    while (i < traj.size() && traj.time(i) <= cut) { ++i; }
    return i;
}

}  // namespace

Trajectory discard_transient(const Trajectory& traj, double discard) {
    require(!traj.empty(), ErrorCode::EmptyResult, "trajectory is empty");
    const std::size_t first = first_after_discard(traj, discard);
    require(first < traj.size(), ErrorCode::EmptyResult, "discard removes the whole trajectory");
    return traj.slice(first, traj.size());
}

std::vector<Vector> limit_set_samples(const Trajectory& traj, double discard, std::size_t count) {
    require(!traj.empty(), ErrorCode::EmptyResult, "trajectory is empty");
    const std::size_t first = first_after_discard(traj, discard);
    require(first < traj.size(), ErrorCode::EmptyResult, "discard removes the whole trajectory");
    return subsample(traj, first, traj.size(), count);
}

std::optional<double> estimate_period(const Trajectory& traj) {
    if (traj.size() < 3) { return std::nullopt; }
    double mean = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) { mean += traj.state(i)(0); }
    mean /= static_cast<double>(traj.size());
    std::vector<double> crossings;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const double a = traj.state(i - 1)(0) - mean;
        const double b = traj.state(i)(0) - mean;
        if (a < 0.0 && b >= 0.0) {
            const double s = a / (a - b);
            crossings.push_back(traj.time(i - 1) + s * (traj.time(i) - traj.time(i - 1)));
        }
    }
    if (crossings.size() < 2) { return std::nullopt; }
    return (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
}

std::vector<Vector> closed_orbit_samples(const Trajectory& traj, double discard, std::size_t count) {
    require(!traj.empty(), ErrorCode::EmptyResult, "trajectory is empty");
    const std::size_t first = first_after_discard(traj, discard);
    require(first < traj.size(), ErrorCode::EmptyResult, "discard removes the whole trajectory");
    const Trajectory settled = traj.slice(first, traj.size());
    const auto period = estimate_period(settled);
    require(period.has_value(), ErrorCode::EmptyResult, "trajectory does not complete two oscillations");
    const double t_stop = settled.t0() + *period;
    std::size_t last = settled.index_at_or_after(t_stop);
    require(last >= 3, ErrorCode::EmptyResult, "orbit period is shorter than three samples");
    return subsample(settled, 0, last, count);
}

std::vector<Vector> equal_arc_points(const std::vector<Vector>& polyline, std::size_t n, bool closed) {
    require(polyline.size() >= 2, ErrorCode::EmptySet, "polyline needs at least two points");
    require(n >= 1, ErrorCode::InvalidParameter, "need at least one point");
    std::vector<Vector> path = polyline;
    if (closed) { path.push_back(polyline.front()); }
    std::vector<double> cumulative(path.size(), 0.0);
    for (std::size_t i = 1; i < path.size(); ++i) {
        cumulative[i] = cumulative[i - 1] + (path[i] - path[i - 1]).norm();
    }
    const double total = cumulative.back();
    require(total > 0.0, ErrorCode::Degenerate, "polyline has zero length");
    const double spacing = closed ? total / static_cast<double>(n) : (n > 1 ? total / static_cast<double>(n - 1) : 0.0);
    std::vector<Vector> out;
    out.reserve(n);
    std::size_t seg = 1;
    for (std::size_t k = 0; k < n; ++k) {
        const double s = std::min(static_cast<double>(k) * spacing, total);
        while (seg + 1 < path.size() && cumulative[seg] < s) { ++seg; }
        const double len = cumulative[seg] - cumulative[seg - 1];
        const double w = len > 0.0 ? (s - cumulative[seg - 1]) / len : 0.0;
        out.push_back((1.0 - w) * path[seg - 1] + w * path[seg]);
    }
    return out;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    std::vector<std::string> header{"t"};
    for (std::size_t j = 0; j < traj.dim(); ++j) { header.push_back("x" + std::to_string(j + 1)); }
    csv::Writer w(path, header);
    std::vector<double> row(traj.dim() + 1);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        row[0] = traj.time(i);
        const auto x = traj.state(i);
        for (std::size_t j = 0; j < traj.dim(); ++j) { row[j + 1] = x(static_cast<Eigen::Index>(j)); }
        w.row(row);
    }
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
    const csv::Table table = csv::read(path);
    require(table.header.size() >= 2 && table.header[0] == "t", ErrorCode::IoError,
            path.string() + ": expected header t,x1,...,xd");
    require(table.rows.size() >= 2, ErrorCode::IoError, path.string() + ": need at least two samples");
    const std::size_t d = table.header.size() - 1;
    const double dt = table.rows[1][0] - table.rows[0][0];
    Trajectory traj(d, dt);
    traj.reserve(table.rows.size());
    Vector x(static_cast<Eigen::Index>(d));
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < d; ++j) { x(static_cast<Eigen::Index>(j)) = row[j + 1]; }
        traj.push(row[0], x);
    }
    return traj;
}

}  // namespace rkhs

#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rkhs/cvt.hpp"
#include "rkhs/diagnostics.hpp"
#include "rkhs/dynamics.hpp"
#include "rkhs/estimator.hpp"
#include "rkhs/experiment.hpp"
#include "rkhs/kernels.hpp"
#include "rkhs/numerics.hpp"
#include "rkhs/som.hpp"

namespace py = pybind11;
using namespace rkhs;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// numpy (n, d) <-> list of points
std::vector<Vector> rows_of(const RowMatrix& m) {
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) { out.emplace_back(m.row(i).transpose()); }
    return out;
}

RowMatrix stack(const std::vector<Vector>& pts) {
    if (pts.empty()) { return RowMatrix(0, 0); }
    RowMatrix m(static_cast<Eigen::Index>(pts.size()), pts.front().size());
    for (std::size_t i = 0; i < pts.size(); ++i) { m.row(static_cast<Eigen::Index>(i)) = pts[i].transpose(); }
    return m;
}

RowMatrix stack(const std::vector<cvt::Vec2>& pts) { return stack(cvt::to_vectors(pts)); }

Trajectory trajectory_of(const RowMatrix& states, double dt, double t0) {
    Trajectory t(static_cast<std::size_t>(states.cols()), dt);
    t.reserve(static_cast<std::size_t>(states.rows()));
    for (Eigen::Index i = 0; i < states.rows(); ++i) {
        t.push(t0 + static_cast<double>(i) * dt, states.row(i).transpose());
    }
    return t;
}

py::tuple trajectory_arrays(const Trajectory& traj) {
    RowMatrix x(static_cast<Eigen::Index>(traj.size()), static_cast<Eigen::Index>(traj.dim()));
    for (std::size_t i = 0; i < traj.size(); ++i) { x.row(static_cast<Eigen::Index>(i)) = traj.state(i).transpose(); }
    const Vector t = Eigen::Map<const Vector>(traj.times().data(), static_cast<Eigen::Index>(traj.size()));
    return py::make_tuple(t, x);
}

AffineSystem model(const std::string& name) {
    if (name == "piezo") { return piezo_system({}); }
    if (name == "vdp_like") { return vdp_like_system(); }
    throw Error(ErrorCode::InvalidParameter, "unknown model " + name + " (piezo | vdp_like)");
}

Kernel kernel_of(const std::string& kind, double length) { return Kernel(parse_kernel_kind(kind), length); }

py::dict som_dict(const som::Algorithm2Result& r) {
    py::dict d;
    d["centers"] = stack(r.centers);
    d["initial"] = stack(r.initial);
    d["converged_at"] = r.converged_at;
    d["simple_ring"] = r.simple_ring;
    d["warnings"] = r.warnings;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Kernel center selection and RKHS adaptive estimation";
    py::register_exception<Error>(m, "RkhsError", PyExc_RuntimeError);

    m.def(
        "kernel_eval",
        [](const Vector& x, const Vector& y, const std::string& kind, double length) {
            return kernel_eval(kernel_of(kind, length), x, y);
        },
        py::arg("x"), py::arg("y"), py::arg("kind") = "matern32", py::arg("length") = 1.0);

    m.def(
        "grammian",
        [](const RowMatrix& centers, const std::string& kind, double length) {
            return Matrix(CenterSet(rows_of(centers), kernel_of(kind, length)).grammian());
        },
        py::arg("centers"), py::arg("kind") = "matern32", py::arg("length") = 1.0);

    m.def(
        "interpolate",
        [](const RowMatrix& centers, const Vector& values, const RowMatrix& points, const std::string& kind,
           double length) {
            const CenterSet cs(rows_of(centers), kernel_of(kind, length));
            require(values.size() == static_cast<Eigen::Index>(cs.size()), ErrorCode::DimensionMismatch,
                    "one value per center");
            const Vector alpha = cs.factorization().solve(values);
            Vector out(points.rows());
            for (Eigen::Index i = 0; i < points.rows(); ++i) { out(i) = f_hat_eval(cs, alpha, points.row(i).transpose()); }
            return out;
        },
        py::arg("centers"), py::arg("values"), py::arg("points"), py::arg("kind") = "matern32",
        py::arg("length") = 1.0, "Kernel interpolant of values at the centers, evaluated at points.");

    m.def("lyapunov", [](const Matrix& a, const Matrix& q) { return num::lyapunov_solve(a, q); }, py::arg("a"),
          py::arg("q"), "P with A^T P + P A = -Q.");

    m.def(
        "simulate",
        [](const std::string& name, const Vector& x0, double duration, double dt) {
            return trajectory_arrays(simulate(model(name), x0, duration, dt));
        },
        py::arg("model"), py::arg("x0"), py::arg("duration"), py::arg("dt") = 1e-3,
        "RK4 trajectory of piezo (scaled coordinates) or vdp_like; returns (t, x).");

    m.def(
        "algorithm1",
        [](const RowMatrix& samples, std::size_t n_centers, const std::vector<double>& scale_out,
           const std::vector<double>& scale_in, std::size_t max_iters, double tol, std::uint64_t seed) {
            require(scale_out.size() == scale_in.size(), ErrorCode::InvalidParameter,
                    "scale_out and scale_in must have equal length");
            std::vector<cvt::ScalePair> schedule;
            for (std::size_t k = 0; k < scale_out.size(); ++k) { schedule.push_back({scale_out[k], scale_in[k]}); }
            cvt::Algorithm1Options opt;
            opt.lloyd.max_iters = max_iters;
            opt.lloyd.tol = tol;
            opt.seed = seed;
            const auto r = cvt::algorithm1(cvt::to_vec2(rows_of(samples)), n_centers, schedule, opt);
            py::list attempts;
            for (const auto& a : r.attempts) {
                py::dict d;
                d["scale_out"] = a.scales.scale_out;
                d["scale_in"] = a.scales.scale_in;
                d["iterations"] = a.iterations;
                d["converged"] = a.converged;
                d["topology_pass"] = a.topology.pass;
                py::list energy;
                for (const auto& it : a.trace) { energy.append(it.energy); }
                d["energy"] = energy;
                attempts.append(d);
            }
            py::dict out;
            out["centers"] = stack(r.centers);
            out["attempts"] = attempts;
            out["stationarity"] = cvt::stationarity(r.diagram, *r.region);
            return out;
        },
        py::arg("samples"), py::arg("n_centers"), py::arg("scale_out") = std::vector<double>{1.1},
        py::arg("scale_in") = std::vector<double>{0.9}, py::arg("max_iters") = 20000, py::arg("tol") = 1e-7,
        py::arg("seed") = 1, "CVT centers in an annulus around closed-orbit samples.");

    m.def(
        "algorithm2",
        [](const RowMatrix& states, double dt, std::size_t n_centers, double beta, double beta_until,
           const std::string& topology) {
            som::Algorithm2Options opt;
            opt.topology = som::parse_topology(topology);
            opt.schedule = som::BetaSchedule::step(beta, beta_until);
            opt.snapshot_every = 0.0;
            return som_dict(som::algorithm2(trajectory_of(states, dt, 0.0), n_centers, opt));
        },
        py::arg("states"), py::arg("dt"), py::arg("n_centers"), py::arg("beta") = 0.99,
        py::arg("beta_until") = 1000.0, py::arg("topology") = "ring",
        "Self-organizing map centers trained on a uniformly sampled trajectory.");

    m.def(
        "run_estimator",
        [](const std::string& name, const RowMatrix& centers, const Vector& x0, double duration, double dt,
           double gamma, double alpha0, const std::string& kind, double length, double input_damping,
           std::size_t record_stride) {
            AffineSystem sys = model(name);
            const CenterSet cs(rows_of(centers), kernel_of(kind, length));
            EstimatorConfig cfg;
            cfg.gamma = gamma;
            cfg.alpha0 = Vector::Constant(static_cast<Eigen::Index>(cs.size()), alpha0);
            cfg.record_stride = record_stride;
            if (input_damping != 0.0) {
                cfg.hurwitz_shift = Matrix(sys.a - input_damping * sys.b * sys.b.transpose() / sys.b.squaredNorm());
            }
            const EstimatorRun run = run_estimator(sys, cs, cfg, x0, duration, dt);
            py::dict d;
            d["t"] = run.times;
            d["x"] = stack(run.x);
            d["xhat"] = stack(run.xhat);
            d["alpha"] = stack(run.alpha);
            d["alpha_star"] = run.alpha_star;
            d["state_error"] = state_error_norm(run);
            d["coefficient_error"] = coefficient_error_norm(run);
            return d;
        },
        py::arg("model"), py::arg("centers"), py::arg("x0"), py::arg("duration"), py::arg("dt") = 1e-3,
        py::arg("gamma") = 1e-3, py::arg("alpha0") = 1.0, py::arg("kind") = "matern32", py::arg("length") = 0.2,
        py::arg("input_damping") = 1.0, py::arg("record_stride") = 100);

    m.def(
        "hausdorff",
        [](const RowMatrix& a, const RowMatrix& b) { return cvt::hausdorff_distance(rows_of(a), rows_of(b)); },
        py::arg("a"), py::arg("b"));
    m.def(
        "fill_distance",
        [](const RowMatrix& samples, const RowMatrix& centers) {
            return diag::fill_distance(rows_of(samples), rows_of(centers));
        },
        py::arg("samples"), py::arg("centers"));
    m.def(
        "min_separation", [](const RowMatrix& centers) { return diag::min_separation(rows_of(centers)); },
        py::arg("centers"));

    m.def(
        "pe_occupancy",
        [](const RowMatrix& states, double dt, const RowMatrix& centers, std::optional<double> epsilon,
           std::optional<double> delta, std::optional<double> floor) {
            diag::PeOptions opt{epsilon, delta, floor};
            const auto r = diag::pe_occupancy(trajectory_of(states, dt, 0.0), rows_of(centers), opt);
            py::dict d;
            d["epsilon"] = r.epsilon;
            d["delta"] = r.delta;
            d["floor"] = r.floor;
            d["per_center_min_occupancy"] = r.per_center_min_occupancy;
            d["verdict"] = r.pass ? "PASS" : "FAIL";
            return d;
        },
        py::arg("states"), py::arg("dt"), py::arg("centers"), py::arg("epsilon") = py::none(),
        py::arg("delta") = py::none(), py::arg("floor") = py::none());

    m.def(
        "run_config",
        [](const std::filesystem::path& config, std::optional<std::filesystem::path> out,
           std::optional<std::uint64_t> seed) {
            auto cfg = exp::load_config(config);
            if (out) { cfg.out_dir = *out; }
            if (seed) { cfg.seed = seed; }
            exp::validate(cfg);
            py::gil_scoped_release release;
            exp::run_experiment(cfg);
            return cfg.out_dir;
        },
        py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(),
        "Run every pipeline stage for a config file; returns the output directory.");
}

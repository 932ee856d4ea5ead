#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "rkhs/experiment.hpp"
#include "rkhs/random.hpp"

namespace rkhs::exp {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void config_error(const std::string& field, const std::string& message) {
    fail(ErrorCode::ConfigError, field + ": " + message);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) { return {}; }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) { out.push_back(trim(cur)); }
    return out;
}

double to_double(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
        config_error(field, "expected a finite number, got '" + text + "'");
    }
    return v;
}

std::vector<double> to_doubles(const std::string& field, const std::string& text) {
    std::vector<double> out;
    std::string flat = text;
    for (auto& c : flat) {
        if (c == ',') { c = ' '; }
    }
    std::istringstream in(flat);
    std::string tok;
    while (in >> tok) { out.push_back(to_double(field, tok)); }
    return out;
}

// Rows separated by ';', entries by spaces or commas.
std::vector<std::vector<double>> to_rows(const std::string& field, const std::string& text) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : split(text, ';')) {
        if (r.empty()) { continue; }
        rows.push_back(to_doubles(field, r));
    }
    return rows;
}

class Reader {
public:
    explicit Reader(const std::string& text) {
        std::istringstream in(text);
        try {
            pt::ini_parser::read_ini(in, tree_);
        } catch (const pt::ini_parser_error& e) {
            fail(ErrorCode::ConfigError, std::string("malformed config: ") + e.what());
        }
        for (const auto& [section, body] : tree_) {
            if (!body.data().empty()) { config_error(section, "top-level keys must live in a [section]"); }
        }
    }

    std::optional<std::string> raw(const std::string& section, const std::string& key) {
        used_.insert(section + "." + key);
        const auto sec = tree_.get_child_optional(pt::ptree::path_type(section, '\0'));
        if (!sec) { return std::nullopt; }
        const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!v) { return std::nullopt; }
        return trim(*v);
    }

    double number(const std::string& section, const std::string& key, double fallback) {
        const auto v = raw(section, key);
        return v ? to_double(name(section, key), *v) : fallback;
    }

    std::optional<double> optional_number(const std::string& section, const std::string& key) {
        const auto v = raw(section, key);
        if (!v || *v == "auto") { return std::nullopt; }
        return to_double(name(section, key), *v);
    }

    std::size_t count(const std::string& section, const std::string& key, std::size_t fallback) {
        const auto v = raw(section, key);
        if (!v) { return fallback; }
        std::size_t out = 0;
        const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
        if (v->empty() || ec != std::errc() || ptr != v->data() + v->size()) {
            config_error(name(section, key), "expected a non-negative integer, got '" + *v + "'");
        }
        return out;
    }

    std::string text(const std::string& section, const std::string& key, const std::string& fallback) {
        return raw(section, key).value_or(fallback);
    }

    std::vector<double> numbers(const std::string& section, const std::string& key, std::vector<double> fallback) {
        const auto v = raw(section, key);
        return v ? to_doubles(name(section, key), *v) : fallback;
    }

    std::vector<std::vector<double>> rows(const std::string& section, const std::string& key) {
        const auto v = raw(section, key);
        return v ? to_rows(name(section, key), *v) : std::vector<std::vector<double>>{};
    }

    void reject_unknown() const {
        for (const auto& [section, body] : tree_) {
            for (const auto& [key, value] : body) {
                if (!used_.contains(section + "." + key)) {
                    config_error(name(section, key), "unknown key");
                }
            }
        }
    }

    static std::string name(const std::string& section, const std::string& key) {
        return "[" + section + "] " + key;
    }

private:
    pt::ptree tree_;
    std::set<std::string> used_;
};

Vector to_vector(const std::vector<double>& v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) { out(static_cast<Eigen::Index>(i)) = v[i]; }
    return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    Reader r(text);
    ExperimentConfig c;

    c.name = r.text("experiment", "name", c.name);
    if (const auto s = r.raw("experiment", "seed")) {
        std::uint64_t seed = 0;
        const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), seed);
        if (s->empty() || ec != std::errc() || ptr != s->data() + s->size()) {
            config_error("[experiment] seed", "expected an unsigned 64-bit integer, got '" + *s + "'");
        }
        c.seed = seed;
    }
    c.out_dir = r.text("experiment", "out_dir", c.out_dir.string());

    auto& sys = c.system;
    sys.model = r.text("system", "model", sys.model);
    sys.piezo.mass = r.number("system", "mass", sys.piezo.mass);
    sys.piezo.stiffness = r.number("system", "stiffness", sys.piezo.stiffness);
    sys.piezo.damping = r.number("system", "damping", sys.piezo.damping);
    sys.piezo.k_n1 = r.number("system", "k_n1", sys.piezo.k_n1);
    sys.piezo.k_n2 = r.number("system", "k_n2", sys.piezo.k_n2);
    sys.piezo.displacement_scale = r.number("system", "displacement_scale", sys.piezo.displacement_scale);
    sys.x0 = to_vector(r.numbers("system", "x0", {}));
    sys.x0_frame = r.text("system", "x0_frame", sys.x0_frame);

    auto& sim = c.simulation;
    sim.duration = r.number("simulation", "duration", sim.duration);
    sim.dt = r.number("simulation", "dt", sim.dt);
    sim.discard = r.number("simulation", "discard", sim.discard);

    auto& cen = c.centers;
    cen.method = r.text("centers", "method", cen.method);
    cen.count = r.count("centers", "count", cen.count);
    cen.random_pool = r.count("centers", "random_pool", cen.random_pool);
    cen.orbit_samples = r.count("centers", "orbit_samples", cen.orbit_samples);
    cen.region = r.text("centers", "region", cen.region);
    cen.scale_out = r.numbers("centers", "scale_out", cen.scale_out);
    cen.scale_in = r.numbers("centers", "scale_in", cen.scale_in);
    cen.band_half_width = r.numbers("centers", "band_half_width", cen.band_half_width);
    cen.lloyd_max_iters = r.count("centers", "lloyd_max_iters", cen.lloyd_max_iters);
    cen.lloyd_tol = r.number("centers", "lloyd_tol", cen.lloyd_tol);
    cen.seed_radius_fraction = r.number("centers", "seed_radius_fraction", cen.seed_radius_fraction);
    cen.beta = r.number("centers", "beta", cen.beta);
    cen.beta_until = r.number("centers", "beta_until", cen.beta_until);
    cen.topology = r.text("centers", "topology", cen.topology);
    cen.som_window = r.number("centers", "som_window", cen.som_window);
    cen.som_window_tol = r.number("centers", "som_window_tol", cen.som_window_tol);
    cen.som_radius_factor = r.number("centers", "som_radius_factor", cen.som_radius_factor);
    cen.som_trace_stride = r.count("centers", "som_trace_stride", cen.som_trace_stride);
    cen.som_snapshot_every = r.number("centers", "som_snapshot_every", cen.som_snapshot_every);
    for (const auto& row : r.rows("centers", "points")) { cen.points.push_back(to_vector(row)); }

    const std::string kind = r.text("kernel", "kind", std::string(to_string(c.kernel.kind)));
    try {
        c.kernel.kind = parse_kernel_kind(kind);
    } catch (const Error& e) {
        config_error("[kernel] kind", e.what());
    }
    c.kernel.length = r.number("kernel", "length", c.kernel.length);

    auto& est = c.estimator;
    est.gamma = r.number("estimator", "gamma", est.gamma);
    est.duration = r.number("estimator", "duration", est.duration);
    est.dt = r.number("estimator", "dt", est.dt);
    est.alpha0 = r.numbers("estimator", "alpha0", est.alpha0);
    est.input_damping = r.number("estimator", "input_damping", est.input_damping);
    if (const auto rows = r.rows("estimator", "q"); !rows.empty()) {
        const auto n = static_cast<Eigen::Index>(rows.size());
        est.q.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n) {
                config_error("[estimator] q", "must be a square matrix written as rows separated by ';'");
            }
            for (Eigen::Index j = 0; j < n; ++j) { est.q(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
        }
    }
    est.record_stride = r.count("estimator", "record_stride", est.record_stride);

    auto& g = c.grid;
    g.x_min = r.number("grid", "x_min", g.x_min);
    g.x_max = r.number("grid", "x_max", g.x_max);
    g.y_min = r.number("grid", "y_min", g.y_min);
    g.y_max = r.number("grid", "y_max", g.y_max);
    g.nx = r.count("grid", "nx", g.nx);
    g.ny = r.count("grid", "ny", g.ny);
    g.alpha = r.text("grid", "alpha", g.alpha);
    g.limit_samples = r.count("grid", "limit_samples", g.limit_samples);

    auto& d = c.diagnostics;
    d.epsilon = r.optional_number("diagnostics", "epsilon");
    d.delta = r.optional_number("diagnostics", "delta");
    d.floor = r.optional_number("diagnostics", "floor");
    d.limit_samples = r.count("diagnostics", "limit_samples", d.limit_samples);

    r.reject_unknown();
    if (cen.method == "explicit") { cen.count = cen.points.size(); }
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) { fail(ErrorCode::ConfigError, "cannot read config file " + path.string()); }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void validate(const ExperimentConfig& c) {
    auto check = [](bool ok, const std::string& field, const std::string& msg) {
        if (!ok) { config_error(field, msg); }
    };
    const auto& s = c.system;
    check(s.model == "piezo" || s.model == "vdp_like", "[system] model", "must be piezo or vdp_like");
    check(s.x0.size() == 2, "[system] x0", "needs two entries");
    check(s.x0_frame == "scaled" || s.x0_frame == "original", "[system] x0_frame", "must be scaled or original");
    check(s.model == "piezo" || s.x0_frame == "scaled", "[system] x0_frame", "only the piezo model has an original frame");
    check(s.piezo.mass > 0.0, "[system] mass", "must be positive");
    check(s.piezo.displacement_scale > 0.0, "[system] displacement_scale", "must be positive");

    const auto& sim = c.simulation;
    check(sim.duration > 0.0, "[simulation] duration", "must be positive");
    check(sim.dt > 0.0 && sim.dt < sim.duration, "[simulation] dt", "must be positive and shorter than the duration");
    check(sim.discard >= 0.0 && sim.discard < sim.duration, "[simulation] discard",
          "must be non-negative and shorter than the duration");

    const auto& m = c.centers;
    const std::set<std::string> methods{"uniform", "random", "cvt", "som", "explicit"};
    check(methods.contains(m.method), "[centers] method", "must be one of uniform, random, cvt, som, explicit");
    check(m.count >= 1, "[centers] count", "must be at least 1");
    if (m.method == "random") {
        check(c.seed.has_value(), "[experiment] seed", "is required for method random");
        check(m.random_pool > m.count, "[centers] random_pool", "must exceed count");
    }
    if (m.method == "cvt") {
        check(m.region == "annulus" || m.region == "band", "[centers] region", "must be annulus or band");
        check(m.orbit_samples >= 3, "[centers] orbit_samples", "must be at least 3");
        if (m.region == "annulus") {
            check(!m.scale_out.empty() && m.scale_out.size() == m.scale_in.size(), "[centers] scale_out",
                  "scale_out and scale_in must be non-empty lists of equal length");
            for (std::size_t k = 0; k < m.scale_out.size(); ++k) {
                check(m.scale_in[k] > 0.0 && m.scale_in[k] < 1.0 && m.scale_out[k] > 1.0, "[centers] scale_in",
                      "each pair needs 0 < scale_in < 1 < scale_out");
            }
        } else {
            check(!m.band_half_width.empty(), "[centers] band_half_width", "needs at least one value");
            for (const double h : m.band_half_width) {
                check(h > 0.0, "[centers] band_half_width", "values must be positive");
            }
        }
        check(m.lloyd_max_iters >= 1, "[centers] lloyd_max_iters", "must be at least 1");
        check(m.lloyd_tol > 0.0, "[centers] lloyd_tol", "must be positive");
        check(m.seed_radius_fraction > 0.0, "[centers] seed_radius_fraction", "must be positive");
    }
    if (m.method == "som") {
        check(m.beta >= 0.0 && m.beta < 1.0, "[centers] beta", "must lie in [0, 1)");
        check(m.beta_until > 0.0, "[centers] beta_until", "must be positive");
        check(m.topology == "ring" || m.topology == "line", "[centers] topology", "must be ring or line");
        check(m.topology == "line" || m.count >= 3, "[centers] count", "ring topology needs at least 3 centers");
        check(m.som_window > 0.0, "[centers] som_window", "must be positive");
        check(m.som_window_tol > 0.0, "[centers] som_window_tol", "must be positive");
        check(m.som_radius_factor > 0.0, "[centers] som_radius_factor", "must be positive");
        check(m.som_trace_stride >= 1, "[centers] som_trace_stride", "must be at least 1");
        check(m.som_snapshot_every >= 0.0, "[centers] som_snapshot_every", "must be non-negative");
    }
    if (m.method == "explicit") {
        check(!m.points.empty(), "[centers] points", "needs at least one point for method explicit");
        for (const auto& p : m.points) { check(p.size() == 2, "[centers] points", "each point needs two coordinates"); }
    }

    check(c.kernel.length > 0.0, "[kernel] length", "must be positive");

    const auto& e = c.estimator;
    check(e.gamma > 0.0, "[estimator] gamma", "must be positive");
    check(e.duration > 0.0, "[estimator] duration", "must be positive");
    check(e.dt > 0.0 && e.dt <= e.duration, "[estimator] dt", "must be positive and at most the duration");
    check(e.alpha0.size() == 1 || e.alpha0.size() == m.count, "[estimator] alpha0",
          "needs one value or one per center");
    check(e.input_damping >= 0.0, "[estimator] input_damping", "must be non-negative");
    check(e.q.size() == 0 || e.q.rows() == 2, "[estimator] q", "must be 2 x 2");
    check(e.record_stride >= 1, "[estimator] record_stride", "must be at least 1");

    const auto& g = c.grid;
    check(g.x_max > g.x_min, "[grid] x_max", "must exceed x_min");
    check(g.y_max > g.y_min, "[grid] y_max", "must exceed y_min");
    check(g.nx >= 2 && g.ny >= 2, "[grid] nx", "nx and ny must be at least 2");
    check(g.alpha == "final" || g.alpha == "star", "[grid] alpha", "must be final or star");
    check(g.limit_samples >= 1, "[grid] limit_samples", "must be at least 1");

    const auto& d = c.diagnostics;
    check(!d.epsilon || *d.epsilon > 0.0, "[diagnostics] epsilon", "must be positive");
    check(!d.delta || *d.delta > 0.0, "[diagnostics] delta", "must be positive");
    check(!d.floor || *d.floor >= 0.0, "[diagnostics] floor", "must be non-negative");
    check(d.limit_samples >= 1, "[diagnostics] limit_samples", "must be at least 1");
}

std::string manifest_json(const ExperimentConfig& c) {
    using J = nlohmann::ordered_json;
    auto vec = [](const Vector& v) {
        J a = J::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) { a.push_back(v(i)); }
        return a;
    };
    auto mat = [&](const Matrix& m) {
        J a = J::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) { a.push_back(vec(m.row(i).transpose())); }
        return a;
    };
    auto opt = [](const std::optional<double>& v) { return v ? J(*v) : J("auto"); };

    J j;
    j["experiment"] = {{"name", c.name}, {"out_dir", c.out_dir.string()}};
    j["rng"] = {{"algorithm", std::string(Rng::kAlgorithm)},
                {"seed", c.seed ? J(*c.seed) : J(nullptr)},
                {"cvt_fallback_seed", c.seed.value_or(0)}};
    J sys = {{"model", c.system.model}, {"x0", vec(c.system.x0)}, {"x0_frame", c.system.x0_frame}};
    if (c.system.model == "piezo") {
        const auto& p = c.system.piezo;
        sys["mass"] = p.mass;
        sys["stiffness"] = p.stiffness;
        sys["damping"] = p.damping;
        sys["k_n1"] = p.k_n1;
        sys["k_n2"] = p.k_n2;
        sys["displacement_scale"] = p.displacement_scale;
    }
    const AffineSystem built = build_system(c);
    sys["a"] = mat(built.a);
    sys["b"] = vec(built.b);
    sys["x0_working"] = vec(initial_state(c));
    j["system"] = sys;
    j["simulation"] = {{"duration", c.simulation.duration}, {"dt", c.simulation.dt}, {"discard", c.simulation.discard}};

    const auto& m = c.centers;
    J cen = {{"method", m.method}, {"count", m.count}};
    if (m.method == "random") { cen["random_pool"] = m.random_pool; }
    if (m.method == "cvt") {
        cen["region"] = m.region;
        cen["orbit_samples"] = m.orbit_samples;
        if (m.region == "annulus") {
            cen["scale_out"] = m.scale_out;
            cen["scale_in"] = m.scale_in;
        } else {
            cen["band_half_width"] = m.band_half_width;
        }
        cen["lloyd_max_iters"] = m.lloyd_max_iters;
        cen["lloyd_tol"] = m.lloyd_tol;
        cen["seed_radius_fraction"] = m.seed_radius_fraction;
    }
    if (m.method == "som") {
        cen["beta"] = m.beta;
        cen["beta_until"] = m.beta_until;
        cen["topology"] = m.topology;
        cen["som_window"] = m.som_window;
        cen["som_window_tol"] = m.som_window_tol;
        cen["som_radius_factor"] = m.som_radius_factor;
        cen["som_trace_stride"] = m.som_trace_stride;
        cen["som_snapshot_every"] = m.som_snapshot_every;
    }
    if (m.method == "explicit") {
        J pts = J::array();
        for (const auto& p : m.points) { pts.push_back(vec(p)); }
        cen["points"] = pts;
    }
    j["centers"] = cen;
    j["kernel"] = {{"kind", to_string(c.kernel.kind)}, {"length", c.kernel.length}};

    const auto& e = c.estimator;
    J est = {{"gamma", e.gamma},       {"duration", e.duration},           {"dt", e.dt},
             {"alpha0", e.alpha0},     {"input_damping", e.input_damping}, {"record_stride", e.record_stride}};
    est["q"] = mat(e.q.size() == 0 ? Matrix::Identity(2, 2) : e.q);
    if (const auto as = shifted_a(c, built)) { est["shifted_a"] = mat(*as); }
    j["estimator"] = est;
    j["grid"] = {{"x_min", c.grid.x_min}, {"x_max", c.grid.x_max}, {"y_min", c.grid.y_min},
                 {"y_max", c.grid.y_max}, {"nx", c.grid.nx},       {"ny", c.grid.ny},
                 {"alpha", c.grid.alpha}, {"limit_samples", c.grid.limit_samples}};
    j["diagnostics"] = {{"epsilon", opt(c.diagnostics.epsilon)},
                        {"delta", opt(c.diagnostics.delta)},
                        {"floor", opt(c.diagnostics.floor)},
                        {"limit_samples", c.diagnostics.limit_samples}};
    return j.dump(2) + "\n";
}

}  // namespace rkhs::exp

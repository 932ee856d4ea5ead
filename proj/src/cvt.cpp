#include "rkhs/cvt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "rkhs/csv.hpp"
#include "rkhs/error.hpp"
#include "rkhs/random.hpp"

namespace rkhs::cvt {

Vec2 to_vec2(const Eigen::Ref<const Vector>& v) {
    require(v.size() == 2, ErrorCode::DimensionMismatch, "planar geometry needs 2-D points");
    return {v(0), v(1)};
}

Vector to_vector(Vec2 p) {
    Vector v(2);
    v << p.x, p.y;
    return v;
}

std::vector<Vec2> to_vec2(const std::vector<Vector>& pts) {
    std::vector<Vec2> out;
    out.reserve(pts.size());
    for (const auto& p : pts) { out.push_back(to_vec2(p)); }
    return out;
}

std::vector<Vector> to_vectors(const std::vector<Vec2>& pts) {
    std::vector<Vector> out;
    out.reserve(pts.size());
    for (const auto& p : pts) { out.push_back(to_vector(p)); }
    return out;
}

double signed_area(std::span<const Vec2> ring) {
    if (ring.size() < 3) { return 0.0; }
    const Vec2 o = ring[0];
    double a = 0.0;
    for (std::size_t k = 1; k + 1 < ring.size(); ++k) { a += cross(ring[k] - o, ring[k + 1] - o); }
    return 0.5 * a;
}

Moments moments(std::span<const Vec2> ring) {
    Moments m;
    if (ring.size() < 3) { return m; }
    // Relative to the first vertex to limit cancellation far from the origin.
    const Vec2 o = ring[0];
    double a2 = 0.0, sx = 0.0, sy = 0.0;
    const std::size_t n = ring.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 p = ring[k] - o;
        const Vec2 q = ring[(k + 1) % n] - o;
        const double c = cross(p, q);
        a2 += c;
        sx += c * (p.x + q.x);
        sy += c * (p.y + q.y);
    }
    m.area = 0.5 * a2;
    m.mx = sx / 6.0 + m.area * o.x;
    m.my = sy / 6.0 + m.area * o.y;
    return m;
}

double second_moment_about(std::span<const Vec2> ring, Vec2 p) {
    if (ring.size() < 3) { return 0.0; }
    double s = 0.0;
    const std::size_t n = ring.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 a = ring[k] - p;
        const Vec2 b = ring[(k + 1) % n] - p;
        s += cross(a, b) * (a.x * a.x + a.x * b.x + b.x * b.x + a.y * a.y + a.y * b.y + b.y * b.y);
    }
    return s / 12.0;
}

namespace {

double orient(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool segments_touch(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const int o1 = sign(orient(a, b, c));
    const int o2 = sign(orient(a, b, d));
    const int o3 = sign(orient(c, d, a));
    const int o4 = sign(orient(c, d, b));
    if (o1 != o2 && o3 != o4) { return true; }
    if (o1 == 0 && on_segment(a, b, c)) { return true; }
    if (o2 == 0 && on_segment(a, b, d)) { return true; }
    if (o3 == 0 && on_segment(c, d, a)) { return true; }
    if (o4 == 0 && on_segment(c, d, b)) { return true; }
    return false;
}

std::vector<Vec2> drop_repeats(std::vector<Vec2> v) {
    std::vector<Vec2> out;
    out.reserve(v.size());
    for (const auto& p : v) {
        if (out.empty() || !(out.back() == p)) { out.push_back(p); }
    }
    while (out.size() > 1 && out.front() == out.back()) { out.pop_back(); }
    return out;
}

double diameter_bound(std::span<const Vec2> pts) {
    double xmin = pts[0].x, xmax = pts[0].x, ymin = pts[0].y, ymax = pts[0].y;
    for (const auto& p : pts) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    return std::hypot(xmax - xmin, ymax - ymin);
}

}  // namespace

bool is_simple(std::span<const Vec2> ring) {
    const std::size_t n = ring.size();
    if (n < 3) { return false; }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = ring[i], b = ring[(i + 1) % n];
        if (a == b) { return false; }
        // Adjacent edge: only a fold-back (collinear overlap) is a defect.
        const Vec2 c = ring[(i + 2) % n];
        if (sign(orient(a, b, c)) == 0 && dot(b - a, c - b) < 0.0) { return false; }
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) { continue; }
            if (segments_touch(a, b, ring[j], ring[(j + 1) % n])) { return false; }
        }
    }
    return true;
}

bool point_in_ring(std::span<const Vec2> ring, Vec2 p) {
    bool inside = false;
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = ring[i], b = ring[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) { inside = !inside; }
        }
    }
    return inside;
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) { return distance(p, a); }
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + t * ab);
}

double distance_to_ring(Vec2 p, std::span<const Vec2> ring) {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = ring.size();
    for (std::size_t k = 0; k < n; ++k) { best = std::min(best, distance_to_segment(p, ring[k], ring[(k + 1) % n])); }
    return best;
}

Polygon::Polygon(std::vector<Vec2> vertices) : vertices_(drop_repeats(std::move(vertices))) {
    for (const auto& v : vertices_) {
        require(std::isfinite(v.x) && std::isfinite(v.y), ErrorCode::NonFinite, "polygon vertex is not finite");
    }
    require(vertices_.size() >= 3, ErrorCode::Degenerate, "polygon needs at least 3 distinct vertices");
    const double a = signed_area(vertices_);
    require(a != 0.0, ErrorCode::Degenerate, "polygon has zero area");
    if (a < 0.0) { std::reverse(vertices_.begin(), vertices_.end()); }
    require(is_simple(vertices_), ErrorCode::NotSimple, "polygon boundary intersects itself");
}

Polygon Polygon::scaled(Vec2 center, double factor) const {
    require(factor > 0.0 && std::isfinite(factor), ErrorCode::BadScales, "scale factor must be positive");
    std::vector<Vec2> v;
    v.reserve(vertices_.size());
    for (const auto& p : vertices_) { v.push_back(center + factor * (p - center)); }
    return Polygon(std::move(v), Trusted{});
}

Polygon convex_hull(std::span<const Vec2> points) {
    std::vector<Vec2> p(points.begin(), points.end());
    require(p.size() >= 3, ErrorCode::Degenerate, "hull needs at least 3 points");
    std::sort(p.begin(), p.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    p.erase(std::unique(p.begin(), p.end()), p.end());
    std::vector<Vec2> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && orient(h[k - 2], h[k - 1], p[i]) <= 0.0) { --k; }
        h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && orient(h[k - 2], h[k - 1], p[i]) <= 0.0) { --k; }
        h[k++] = p[i];
    }
    h.resize(k - 1);
    require(h.size() >= 3, ErrorCode::Degenerate, "points are collinear");
    return Polygon(std::move(h));
}

Region::Region(Polygon outer_boundary, std::optional<Polygon> inner_boundary)
    : outer(std::move(outer_boundary)), hole(std::move(inner_boundary)) {
    if (!hole) { return; }
    const auto& o = outer.vertices();
    const auto& h = hole->vertices();
    for (const auto& v : h) {
        require(point_in_ring(o, v), ErrorCode::InvalidParameter, "hole vertex lies outside the outer boundary");
    }
    for (std::size_t i = 0; i < h.size(); ++i) {
        for (std::size_t j = 0; j < o.size(); ++j) {
            require(!segments_touch(h[i], h[(i + 1) % h.size()], o[j], o[(j + 1) % o.size()]),
                    ErrorCode::InvalidParameter, "hole boundary touches the outer boundary");
        }
    }
}

double Region::area() const { return outer.area() - (hole ? hole->area() : 0.0); }

bool Region::contains(Vec2 p) const { return outer.contains(p) && !(hole && hole->contains(p)); }

double boundary_hausdorff(std::span<const Vec2> ring_a, std::span<const Vec2> ring_b, std::size_t samples_per_edge) {
    require(!ring_a.empty() && !ring_b.empty(), ErrorCode::EmptySet, "boundary is empty");
    const std::size_t m = std::max<std::size_t>(samples_per_edge, 1);
    auto directed = [m](std::span<const Vec2> from, std::span<const Vec2> to) {
        double worst = 0.0;
        for (std::size_t k = 0; k < from.size(); ++k) {
            const Vec2 a = from[k], b = from[(k + 1) % from.size()];
            for (std::size_t s = 0; s < m; ++s) {
                const double t = static_cast<double>(s) / static_cast<double>(m);
                worst = std::max(worst, distance_to_ring(a + t * (b - a), to));
            }
        }
        return worst;
    };
    return std::max(directed(ring_a, ring_b), directed(ring_b, ring_a));
}

RegionBuild build_region(const std::vector<Vec2>& samples, double scale_out, double scale_in) {
    require(std::isfinite(scale_out) && std::isfinite(scale_in) && scale_in > 0.0 && scale_in < 1.0 &&
                scale_out > 1.0,
            ErrorCode::BadScales, "need 0 < scale_in < 1 < scale_out");
    Polygon curve(samples);
    const Vec2 c = curve.centroid();
    Polygon outer = curve.scaled(c, scale_out);
    Polygon inner = curve.scaled(c, scale_in);
    const double width = boundary_hausdorff(outer.vertices(), inner.vertices());
    // A non-star-shaped curve can scale into a hole that crosses the outer ring.
    Region region(std::move(outer), std::move(inner));
    return RegionBuild{std::move(region), samples, c, width};
}

RegionBuild build_band_region(const std::vector<Vec2>& samples, double half_width) {
    require(samples.size() >= 2, ErrorCode::Degenerate, "band needs at least 2 samples");
    require(half_width > 0.0 && std::isfinite(half_width), ErrorCode::BadScales, "band half-width must be positive");
    Vec2 mean{};
    for (const auto& p : samples) { mean = mean + p; }
    mean = (1.0 / static_cast<double>(samples.size())) * mean;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& p : samples) {
        const Eigen::Vector2d d(p.x - mean.x, p.y - mean.y);
        cov += d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    const Vec2 u{es.eigenvectors()(0, 1), es.eigenvectors()(1, 1)};
    const Vec2 v{-u.y, u.x};
    double s0 = 0.0, s1 = 0.0, t0 = 0.0, t1 = 0.0;
    for (const auto& p : samples) {
        const double s = dot(p - mean, u), t = dot(p - mean, v);
        s0 = std::min(s0, s);
        s1 = std::max(s1, s);
        t0 = std::min(t0, t);
        t1 = std::max(t1, t);
    }
    s0 -= half_width;
    s1 += half_width;
    t0 -= half_width;
    t1 += half_width;
    auto at = [&](double s, double t) { return mean + s * u + t * v; };
    Polygon rect({at(s0, t0), at(s1, t0), at(s1, t1), at(s0, t1)});
    const double width = std::min(s1 - s0, t1 - t0);
    return RegionBuild{Region(std::move(rect)), samples, mean, width};
}

namespace {

struct LabeledRing {
    std::vector<Vec2> v;
    std::vector<int> label;
};

// Keeps the part of the ring where s(x) <= 0. New edges along the clip line
// carry `line_label`. Only coincident points are merged, so the clipped cells
// tile exactly up to rounding; short edges are filtered later by length.
template <class Side>
LabeledRing clip_labeled(const LabeledRing& in, Side s, int line_label) {
    LabeledRing out;
    const std::size_t n = in.v.size();
    if (n == 0) { return out; }
    out.v.reserve(n + 2);
    out.label.reserve(n + 2);
    auto push = [&](Vec2 p, int lab) {
        if (!out.v.empty() && out.v.back() == p) {
            out.label.back() = lab;
            return;
        }
        out.v.push_back(p);
        out.label.push_back(lab);
    };
    std::vector<double> val(n);
    for (std::size_t k = 0; k < n; ++k) { val[k] = s(in.v[k]); }
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k1 = (k + 1) % n;
        const bool in_cur = val[k] <= 0.0;
        const bool in_nxt = val[k1] <= 0.0;
        auto crossing = [&] {
            const double t = std::clamp(val[k] / (val[k] - val[k1]), 0.0, 1.0);
            return in.v[k] + t * (in.v[k1] - in.v[k]);
        };
        if (in_cur && in_nxt) {
            push(in.v[k1], in.label[k1]);
        } else if (in_cur) {
            push(val[k] < 0.0 ? crossing() : in.v[k], line_label);
        } else if (in_nxt) {
            push(val[k1] < 0.0 ? crossing() : in.v[k1], in.label[k]);
            push(in.v[k1], in.label[k1]);
        }
    }
    while (out.v.size() > 1 && out.v.front() == out.v.back()) {
        out.v.pop_back();
        out.label.pop_back();
    }
    if (out.v.size() < 3 || signed_area(out.v) <= 0.0) { return {}; }
    return out;
}

// Plain Sutherland-Hodgman against the half-plane left of a -> b. The input may
// be non-convex; the result can then contain zero-width bridges, which do not
// change any area integral.
std::vector<Vec2> clip_left_of(const std::vector<Vec2>& ring, Vec2 a, Vec2 b) {
    std::vector<Vec2> out;
    const std::size_t n = ring.size();
    if (n == 0) { return out; }
    out.reserve(n + 4);
    const Vec2 d = b - a;
    std::vector<double> val(n);
    for (std::size_t k = 0; k < n; ++k) { val[k] = cross(d, ring[k] - a); }
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k1 = (k + 1) % n;
        const bool in_cur = val[k] >= 0.0;
        const bool in_nxt = val[k1] >= 0.0;
        if (in_cur != in_nxt) {
            const double t = val[k] / (val[k] - val[k1]);
            out.push_back(ring[k] + t * (ring[k1] - ring[k]));
        }
        if (in_nxt) { out.push_back(ring[k1]); }
    }
    return out;
}

std::vector<Vec2> clip_to_convex(const std::vector<Vec2>& ring, std::span<const Vec2> cell) {
    std::vector<Vec2> cur = ring;
    for (std::size_t k = 0; k < cell.size() && !cur.empty(); ++k) {
        cur = clip_left_of(cur, cell[k], cell[(k + 1) % cell.size()]);
    }
    return cur;
}

bool inside_convex(std::span<const Vec2> hull, Vec2 p, double tol) {
    for (std::size_t k = 0; k < hull.size(); ++k) {
        const Vec2 a = hull[k], b = hull[(k + 1) % hull.size()];
        const double len = distance(a, b);
        if (len > 0.0 && cross(b - a, p - a) / len < -tol) { return false; }
    }
    return true;
}

}  // namespace

VoronoiDiagram voronoi_cells(const std::vector<Vec2>& generators, const Polygon& hull) {
    require(!generators.empty(), ErrorCode::EmptySet, "no generators");
    const auto& hv = hull.vertices();
    const double tol = kGeomEps * diameter_bound(hv);
    for (std::size_t i = 0; i < generators.size(); ++i) {
        require(inside_convex(hv, generators[i], tol), ErrorCode::GeneratorOutsideHull,
                "generator " + std::to_string(i) + " lies outside the hull");
        for (std::size_t j = 0; j < i; ++j) {
            require(distance(generators[i], generators[j]) > tol, ErrorCode::DuplicateGenerators,
                    "generators " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
        }
    }

    VoronoiDiagram d;
    d.generators = generators;
    d.hull = hv;
    d.cells.resize(generators.size());
    d.adjacency.assign(generators.size(), {});
    const LabeledRing base{hv, std::vector<int>(hv.size(), -1)};
    for (std::size_t i = 0; i < generators.size(); ++i) {
        const Vec2 pi = generators[i];
        LabeledRing cell = base;
        // Nearer generators first keeps intermediate polygons small.
        std::vector<std::size_t> order(generators.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return distance(generators[a], pi) < distance(generators[b], pi);
        });
        for (const std::size_t j : order) {
            if (j == i) { continue; }
            const Vec2 pj = generators[j];
            const double half = 0.5 * distance(pi, pj);
            const Vec2 u = (1.0 / (2.0 * half)) * (pj - pi);
            const Vec2 mid = 0.5 * (pi + pj);
            // Sorted by distance, so every later bisector is out of reach too.
            double reach = 0.0;
            for (const auto& v : cell.v) { reach = std::max(reach, distance(v, pi)); }
            if (half > reach + tol) { break; }
            cell = clip_labeled(cell, [&](Vec2 x) { return dot(x - mid, u); }, static_cast<int>(j));
        }
        for (std::size_t k = 0; k < cell.v.size(); ++k) {
            const int owner = cell.label[k];
            if (owner >= 0 && distance(cell.v[k], cell.v[(k + 1) % cell.v.size()]) > tol) {
                d.adjacency[i].push_back(static_cast<std::size_t>(owner));
            }
        }
        d.cells[i] = VoronoiCell{std::move(cell.v), std::move(cell.label)};
    }
    // Symmetrize: a sliver edge may survive the tolerance on one side only.
    for (std::size_t i = 0; i < d.adjacency.size(); ++i) {
        for (std::size_t k = 0; k < d.adjacency[i].size(); ++k) {
            auto& back = d.adjacency[d.adjacency[i][k]];
            if (std::find(back.begin(), back.end(), i) == back.end()) { back.push_back(i); }
        }
    }
    for (auto& a : d.adjacency) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    return d;
}

Moments cell_region_moments(std::span<const Vec2> cell, const Region& region) {
    Moments m = moments(clip_to_convex(region.outer.vertices(), cell));
    if (region.hole) {
        const Moments h = moments(clip_to_convex(region.hole->vertices(), cell));
        m.area -= h.area;
        m.mx -= h.mx;
        m.my -= h.my;
    }
    return m;
}

double cell_region_energy(std::span<const Vec2> cell, const Region& region, Vec2 p) {
    double e = second_moment_about(clip_to_convex(region.outer.vertices(), cell), p);
    if (region.hole) { e -= second_moment_about(clip_to_convex(region.hole->vertices(), cell), p); }
    return e;
}

namespace {

bool meets_region(const Moments& m, std::span<const Vec2> cell) {
    return m.area > kGeomEps * std::abs(signed_area(cell));
}

}  // namespace

Vec2 region_centroid(std::span<const Vec2> cell, const Region& region) {
    const Moments m = cell_region_moments(cell, region);
    require(meets_region(m, cell), ErrorCode::EmptyIntersection, "cell does not meet the region");
    return m.centroid();
}

LloydResult lloyd_run(std::vector<Vec2> generators, const Region& region, const LloydOptions& options) {
    require(options.tol > 0.0, ErrorCode::InvalidParameter, "Lloyd tolerance must be positive");
    const Polygon hull = region.hull();
    LloydResult r;
    for (std::size_t it = 0; it < options.max_iters; ++it) {
        const VoronoiDiagram d = voronoi_cells(generators, hull);
        LloydIteration rec;
        rec.generators = generators;
        std::vector<Vec2> next = generators;
        for (std::size_t i = 0; i < generators.size(); ++i) {
            const auto& cell = d.cells[i].vertices;
            const Moments m = cell_region_moments(cell, region);
            rec.energy += cell_region_energy(cell, region, generators[i]);
            if (meets_region(m, cell)) { next[i] = m.centroid(); }
            rec.max_displacement = std::max(rec.max_displacement, distance(next[i], generators[i]));
        }
        r.trace.push_back(std::move(rec));
        generators = std::move(next);
        if (r.trace.back().max_displacement < options.tol) {
            r.converged = true;
            break;
        }
    }
    r.diagram = voronoi_cells(generators, hull);
    r.generators = std::move(generators);
    return r;
}

double stationarity(const VoronoiDiagram& diagram, const Region& region) {
    double worst = 0.0;
    for (std::size_t i = 0; i < diagram.cells.size(); ++i) {
        const auto& cell = diagram.cells[i].vertices;
        const Moments m = cell_region_moments(cell, region);
        if (!meets_region(m, cell)) { continue; }
        worst = std::max(worst, distance(m.centroid(), diagram.generators[i]));
    }
    return worst;
}

double length_inside(Vec2 a, Vec2 b, const Region& region) {
    const double len = distance(a, b);
    if (len == 0.0) { return 0.0; }
    std::vector<double> ts{0.0, 1.0};
    auto add_crossings = [&](const std::vector<Vec2>& ring) {
        const Vec2 d = b - a;
        for (std::size_t k = 0; k < ring.size(); ++k) {
            const Vec2 c = ring[k], e = ring[(k + 1) % ring.size()];
            const Vec2 f = e - c;
            const double den = cross(d, f);
            if (den == 0.0) { continue; }
            const double t = cross(c - a, f) / den;
            const double s = cross(c - a, d) / den;
            if (t > 0.0 && t < 1.0 && s >= 0.0 && s <= 1.0) { ts.push_back(t); }
        }
    };
    add_crossings(region.outer.vertices());
    if (region.hole) { add_crossings(region.hole->vertices()); }
    std::sort(ts.begin(), ts.end());
    double inside = 0.0;
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const double t0 = ts[k], t1 = ts[k + 1];
        if (t1 <= t0) { continue; }
        if (region.contains(a + (0.5 * (t0 + t1)) * (b - a))) { inside += (t1 - t0) * len; }
    }
    return inside;
}

TopologyReport topology_check(const VoronoiDiagram& diagram, const Region& region) {
    TopologyReport rep;
    const std::size_t n = diagram.cells.size();
    const double area_tol = kGeomEps * std::abs(region.area());
    const double len_tol = kGeomEps * diameter_bound(region.outer.vertices());
    std::vector<bool> active(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (cell_region_moments(diagram.cells[i].vertices, region).area > area_tol) {
            active[i] = true;
            rep.active_cells.push_back(i);
        }
    }
    rep.region_adjacency.assign(n, {});
    std::size_t edges = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) { continue; }
        const auto& cell = diagram.cells[i];
        for (std::size_t k = 0; k < cell.vertices.size(); ++k) {
            const int owner = cell.edge_owner[k];
            if (owner < 0) { continue; }
            const auto j = static_cast<std::size_t>(owner);
            if (j <= i || !active[j]) { continue; }
            const Vec2 a = cell.vertices[k], b = cell.vertices[(k + 1) % cell.vertices.size()];
            if (length_inside(a, b, region) > len_tol) {
                auto& ai = rep.region_adjacency[i];
                if (std::find(ai.begin(), ai.end(), j) != ai.end()) { continue; }
                ai.push_back(j);
                rep.region_adjacency[j].push_back(i);
                ++edges;
            }
        }
    }
    for (auto& a : rep.region_adjacency) { std::sort(a.begin(), a.end()); }
    const std::size_t k = rep.active_cells.size();
    for (const std::size_t i : rep.active_cells) {
        rep.max_degree = std::max(rep.max_degree, rep.region_adjacency[i].size());
    }
    if (k == 0) { return rep; }
    if (k == 1) {
        rep.shape = TopologyShape::Single;
        rep.pass = true;
        return rep;
    }
    // Connectivity over the active cells.
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{rep.active_cells.front()};
    seen[stack.back()] = true;
    std::size_t reached = 0;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        ++reached;
        for (const std::size_t w : rep.region_adjacency[u]) {
            if (!seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
        }
    }
    const bool connected = reached == k;
    if (connected && rep.max_degree <= 2 && edges == k - 1) {
        rep.shape = TopologyShape::Path;
    } else if (connected && k >= 3 && edges == k && rep.max_degree == 2) {
        rep.shape = TopologyShape::Cycle;
    }
    if (region.hole) {
        // Two cells can only meet across the ring twice; the path counts.
        rep.pass = rep.shape == TopologyShape::Cycle || (k == 2 && rep.shape == TopologyShape::Path);
    } else {
        rep.pass = rep.shape == TopologyShape::Path;
    }
    return rep;
}

std::vector<ScalePair> widths_to_scales(const std::vector<double>& widths) {
    std::vector<ScalePair> out;
    out.reserve(widths.size());
    for (const double w : widths) {
        require(w > 0.0 && w < 2.0, ErrorCode::BadScales, "width must lie in (0, 2)");
        out.push_back({1.0 + 0.5 * w, 1.0 - 0.5 * w});
    }
    return out;
}

namespace {

std::vector<Vec2> seed_generators(const Polygon& hull, Vec2 center, std::size_t n, const Algorithm1Options& opt,
                                  bool& random_used) {
    const auto& hv = hull.vertices();
    const double diam = diameter_bound(hv);
    const double tol = kGeomEps * diam;
    random_used = false;
    std::vector<Vec2> g;
    g.reserve(n);
    if (n == 1) {
        g.push_back(center);
    } else {
        const double r = opt.seed_radius_fraction * diam;
        for (std::size_t k = 0; k < n; ++k) {
            const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            g.push_back(center + r * Vec2{std::cos(th), std::sin(th)});
        }
    }
    const bool fits = std::all_of(g.begin(), g.end(), [&](Vec2 p) { return inside_convex(hv, p, -tol); });
    if (fits) { return g; }

    random_used = true;
    g.clear();
    double xmin = hv[0].x, xmax = hv[0].x, ymin = hv[0].y, ymax = hv[0].y;
    for (const auto& p : hv) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    Rng rng(opt.seed);
    while (g.size() < n) {
        const Vec2 p{rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)};
        if (!inside_convex(hv, p, -tol)) { continue; }
        if (std::any_of(g.begin(), g.end(), [&](Vec2 q) { return distance(p, q) <= 1e3 * tol; })) { continue; }
        g.push_back(p);
    }
    return g;
}

template <class Builder>
Algorithm1Result run_schedule(std::size_t n_centers, std::size_t attempts, Builder build,
                              const Algorithm1Options& options) {
    require(n_centers >= 1, ErrorCode::InvalidParameter, "need at least one center");
    require(attempts >= 1, ErrorCode::ScheduleExhausted, "width schedule is empty");
    Algorithm1Result out;
    for (std::size_t a = 0; a < attempts; ++a) {
        auto [rb, scales] = build(a);
        const Polygon hull = rb.region.hull();
        Algorithm1Attempt att;
        att.scales = scales;
        att.width = rb.width;
        const auto seeds = seed_generators(hull, rb.center, n_centers, options, att.random_seeding);
        LloydResult lr = lloyd_run(seeds, rb.region, options.lloyd);
        att.iterations = lr.trace.size();
        att.converged = lr.converged;
        att.topology = topology_check(lr.diagram, rb.region);
        att.trace = std::move(lr.trace);
        const bool pass = att.topology.pass;
        out.attempts.push_back(std::move(att));
        if (pass) {
            out.centers = std::move(lr.generators);
            out.diagram = std::move(lr.diagram);
            out.region = std::move(rb.region);
            return out;
        }
    }
    fail(ErrorCode::ScheduleExhausted,
         "no width in the schedule passed the topology check (" + std::to_string(attempts) + " tried)");
}

}  // namespace

Algorithm1Result algorithm1(const std::vector<Vec2>& samples, std::size_t n_centers,
                            const std::vector<ScalePair>& schedule, const Algorithm1Options& options) {
    return run_schedule(
        n_centers, schedule.size(),
        [&](std::size_t a) {
            return std::pair{build_region(samples, schedule[a].scale_out, schedule[a].scale_in), schedule[a]};
        },
        options);
}

Algorithm1Result algorithm1_band(const std::vector<Vec2>& samples, std::size_t n_centers,
                                 const std::vector<double>& half_widths, const Algorithm1Options& options) {
    return run_schedule(
        n_centers, half_widths.size(),
        [&](std::size_t a) {
            return std::pair{build_band_region(samples, half_widths[a]), ScalePair{half_widths[a], 0.0}};
        },
        options);
}

double directed_hausdorff(const std::vector<Vector>& from, const std::vector<Vector>& to) {
    require(!from.empty() && !to.empty(), ErrorCode::EmptySet, "Hausdorff distance of an empty set");
    double worst = 0.0;
    for (const auto& a : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& b : to) {
            require(a.size() == b.size(), ErrorCode::DimensionMismatch, "point sets differ in dimension");
            best = std::min(best, (a - b).squaredNorm());
        }
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

double hausdorff_distance(const std::vector<Vector>& a, const std::vector<Vector>& b) {
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

void write_lloyd_trace_csv(const std::vector<LloydIteration>& trace, const std::filesystem::path& path) {
    csv::Writer w(path, {"iteration", "index", "x", "y", "energy"});
    for (std::size_t it = 0; it < trace.size(); ++it) {
        for (std::size_t i = 0; i < trace[it].generators.size(); ++i) {
            const Vec2 p = trace[it].generators[i];
            w.row(std::vector<double>{static_cast<double>(it), static_cast<double>(i), p.x, p.y, trace[it].energy});
        }
    }
}

void write_region_csv(const Region& region, const std::filesystem::path& path) {
    csv::Writer w(path, {"ring", "index", "x", "y"});
    auto dump = [&](const Polygon& poly, double ring) {
        for (std::size_t i = 0; i < poly.size(); ++i) {
            w.row(std::vector<double>{ring, static_cast<double>(i), poly.vertices()[i].x, poly.vertices()[i].y});
        }
    };
    dump(region.outer, 0.0);
    if (region.hole) { dump(*region.hole, 1.0); }
}

}  // namespace rkhs::cvt

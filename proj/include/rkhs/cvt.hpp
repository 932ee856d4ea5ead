#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "rkhs/trajectory.hpp"

// Planar geometry for centroidal Voronoi center selection: polygons, regions
// around a sampled limit set, bounded Voronoi diagrams, Lloyd iteration and
// the Voronoi topology check.
namespace rkhs::cvt {

/// Tolerance for orientation and clipping predicates on O(1) coordinates.
inline constexpr double kGeomEps = 1e-9;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;
};

[[nodiscard]] inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
[[nodiscard]] inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
[[nodiscard]] inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
[[nodiscard]] inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

[[nodiscard]] Vec2 to_vec2(const Eigen::Ref<const Vector>& v);
[[nodiscard]] Vector to_vector(Vec2 p);
[[nodiscard]] std::vector<Vec2> to_vec2(const std::vector<Vector>& pts);
[[nodiscard]] std::vector<Vector> to_vectors(const std::vector<Vec2>& pts);

/// Area, first and second moments of a closed polygon (signed, by orientation).
struct Moments {
    double area = 0.0;
    double mx = 0.0;  ///< integral of x
    double my = 0.0;  ///< integral of y

    [[nodiscard]] Vec2 centroid() const { return {mx / area, my / area}; }
};

[[nodiscard]] double signed_area(std::span<const Vec2> ring);
[[nodiscard]] Moments moments(std::span<const Vec2> ring);
/// Signed integral of ||x - p||^2 over the polygon (shoelace fan with exact
/// per-triangle second moments).
[[nodiscard]] double second_moment_about(std::span<const Vec2> ring, Vec2 p);
/// No two non-adjacent edges touch and adjacent edges only share their vertex.
[[nodiscard]] bool is_simple(std::span<const Vec2> ring);
/// Even-odd point test; boundary points may go either way.
[[nodiscard]] bool point_in_ring(std::span<const Vec2> ring, Vec2 p);
[[nodiscard]] double distance_to_segment(Vec2 p, Vec2 a, Vec2 b);
[[nodiscard]] double distance_to_ring(Vec2 p, std::span<const Vec2> ring);

/// Simple polygon, stored counterclockwise.
class Polygon {
public:
    /// Normalizes orientation to counterclockwise. Throws Degenerate for fewer
    /// than three vertices or zero area and NotSimple for self-intersection.
    explicit Polygon(std::vector<Vec2> vertices);

    [[nodiscard]] const std::vector<Vec2>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] std::size_t size() const noexcept { return vertices_.size(); }
    [[nodiscard]] double area() const { return signed_area(vertices_); }
    [[nodiscard]] Vec2 centroid() const { return moments(vertices_).centroid(); }
    [[nodiscard]] bool contains(Vec2 p) const { return point_in_ring(vertices_, p); }
    /// Similarity scaling about `center`.
    [[nodiscard]] Polygon scaled(Vec2 center, double factor) const;

private:
    struct Trusted {};
    Polygon(std::vector<Vec2> vertices, Trusted) : vertices_(std::move(vertices)) {}
    std::vector<Vec2> vertices_;
};

/// Counterclockwise hull (Andrew's monotone chain); collinear boundary points
/// are dropped. Throws Degenerate when all points are collinear.
[[nodiscard]] Polygon convex_hull(std::span<const Vec2> points);

/// Outer polygon minus an optional hole strictly inside it.
struct Region {
    Polygon outer;
    std::optional<Polygon> hole;

    Region(Polygon outer_boundary, std::optional<Polygon> inner_boundary = std::nullopt);

    [[nodiscard]] double area() const;
    [[nodiscard]] bool contains(Vec2 p) const;
    [[nodiscard]] Polygon hull() const { return convex_hull(outer.vertices()); }
};

struct RegionBuild {
    Region region;
    /// The samples the region was built around.
    std::vector<Vec2> curve;
    /// Scaling center (area centroid of the sample polygon).
    Vec2 center;
    /// Maximum width: Hausdorff distance between the two boundaries (band:
    /// the shorter rectangle side).
    double width = 0.0;
};

/// Annulus between the sample polygon scaled by scale_out and by scale_in
/// about its area centroid. Throws BadScales unless 0 < scale_in < 1 < scale_out,
/// NotSimple if the sample polyline self-intersects.
[[nodiscard]] RegionBuild build_region(const std::vector<Vec2>& samples, double scale_out, double scale_in);

/// Rectangle aligned with the principal axis of an open-curve sampling, padded
/// by `half_width` on every side.
[[nodiscard]] RegionBuild build_band_region(const std::vector<Vec2>& samples, double half_width);

/// Hausdorff distance between two closed polylines, measured from densified
/// boundary points to the exact segments of the other boundary.
[[nodiscard]] double boundary_hausdorff(std::span<const Vec2> ring_a, std::span<const Vec2> ring_b,
                                        std::size_t samples_per_edge = 16);

/// Bounded Voronoi cell: convex, counterclockwise. edge_owner[k] is the
/// generator whose bisector carries edge (k, k+1), or -1 for a hull edge.
struct VoronoiCell {
    std::vector<Vec2> vertices;
    std::vector<int> edge_owner;

    [[nodiscard]] double area() const { return signed_area(vertices); }
};

struct VoronoiDiagram {
    std::vector<Vec2> generators;
    std::vector<Vec2> hull;
    std::vector<VoronoiCell> cells;
    /// Cells sharing an edge of positive length.
    std::vector<std::vector<std::size_t>> adjacency;
};

/// Clips the hull against every perpendicular-bisector half-plane. Throws
/// GeneratorOutsideHull / DuplicateGenerators.
[[nodiscard]] VoronoiDiagram voronoi_cells(const std::vector<Vec2>& generators, const Polygon& hull);

/// Area and first moments of (convex cell) intersected with the region.
[[nodiscard]] Moments cell_region_moments(std::span<const Vec2> cell, const Region& region);
/// Integral of ||x - p||^2 over the cell intersected with the region.
[[nodiscard]] double cell_region_energy(std::span<const Vec2> cell, const Region& region, Vec2 p);
/// Centroid of the cell intersected with the region under unit density.
/// Throws EmptyIntersection when the intersection has no area.
[[nodiscard]] Vec2 region_centroid(std::span<const Vec2> cell, const Region& region);

struct LloydOptions {
    std::size_t max_iters = 20000;
    double tol = 1e-7;
};

struct LloydIteration {
    std::vector<Vec2> generators;  ///< generators at the start of the iteration
    double energy = 0.0;           ///< quantization energy of those generators
    double max_displacement = 0.0; ///< largest move to the centroids
};

struct LloydResult {
    std::vector<Vec2> generators;
    std::vector<LloydIteration> trace;
    bool converged = false;
    VoronoiDiagram diagram;  ///< diagram of the final generators
};

/// Lloyd iteration on the hull of region.outer with density equal to the
/// indicator of the region. A generator whose cell misses the region keeps its
/// position.
[[nodiscard]] LloydResult lloyd_run(std::vector<Vec2> generators, const Region& region, const LloydOptions& options = {});

/// max_i ||p_i - centroid(cell_i intersected with region)|| over cells that meet the region.
[[nodiscard]] double stationarity(const VoronoiDiagram& diagram, const Region& region);

enum class TopologyShape { Single, Path, Cycle, Other };

struct TopologyReport {
    bool pass = false;
    TopologyShape shape = TopologyShape::Other;
    /// Cells whose intersection with the region has positive area.
    std::vector<std::size_t> active_cells;
    /// Adjacency through shared edges that cross the region with positive length.
    std::vector<std::vector<std::size_t>> region_adjacency;
    std::size_t max_degree = 0;
};

/// Passes when the region adjacency graph of the active cells is a single
/// simple cycle (region with a hole) or a simple path (region without one).
[[nodiscard]] TopologyReport topology_check(const VoronoiDiagram& diagram, const Region& region);

/// Length of the part of segment [a, b] inside the region.
[[nodiscard]] double length_inside(Vec2 a, Vec2 b, const Region& region);

struct ScalePair {
    double scale_out = 1.1;
    double scale_in = 0.9;
};

/// Width w maps to the scale pair (1 + w/2, 1 - w/2).
[[nodiscard]] std::vector<ScalePair> widths_to_scales(const std::vector<double>& widths);

struct Algorithm1Options {
    LloydOptions lloyd{};
    /// Radius of the initial generator circle relative to the hull diameter.
    double seed_radius_fraction = 0.01;
    /// Used only if the initial circle does not fit inside the hull.
    std::uint64_t seed = 1;
};

struct Algorithm1Attempt {
    ScalePair scales;  ///< band runs: scale_out holds the half-width, scale_in is 0
    double width = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    bool random_seeding = false;
    TopologyReport topology;
    std::vector<LloydIteration> trace;
};

struct Algorithm1Result {
    std::vector<Vec2> centers;
    std::vector<Algorithm1Attempt> attempts;
    std::optional<Region> region;  ///< region of the accepted attempt
    VoronoiDiagram diagram;        ///< diagram of the accepted attempt
};

/// Region around the closed-curve samples for each scale pair in order; seed,
/// run Lloyd, accept the first configuration that passes the topology check.
/// Throws ScheduleExhausted if none does.
[[nodiscard]] Algorithm1Result algorithm1(const std::vector<Vec2>& samples, std::size_t n_centers,
                                          const std::vector<ScalePair>& schedule, const Algorithm1Options& options = {});

/// Open-curve variant: band regions with the given half-widths, path topology.
[[nodiscard]] Algorithm1Result algorithm1_band(const std::vector<Vec2>& samples, std::size_t n_centers,
                                               const std::vector<double>& half_widths,
                                               const Algorithm1Options& options = {});

[[nodiscard]] double directed_hausdorff(const std::vector<Vector>& from, const std::vector<Vector>& to);
/// max of both directed sup-min distances. Throws EmptySet.
[[nodiscard]] double hausdorff_distance(const std::vector<Vector>& a, const std::vector<Vector>& b);

/// generator positions per iteration: columns iteration, index, x, y, energy.
void write_lloyd_trace_csv(const std::vector<LloydIteration>& trace, const std::filesystem::path& path);
/// Columns ring (0 outer, 1 hole), index, x, y.
void write_region_csv(const Region& region, const std::filesystem::path& path);

}  // namespace rkhs::cvt

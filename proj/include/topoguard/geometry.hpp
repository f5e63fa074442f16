#pragma once

// Planar geometry: predicates, convex hulls, Bowyer-Watson Delaunay
// triangulation and the dual Voronoi diagram clipped to a rectangle.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "topoguard/error.hpp"

namespace topoguard {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point2 operator+(Point2 a, Point2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator*(double s, Point2 a) noexcept { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point2 a, Point2 b) noexcept = default;
};

using Polygon = std::vector<Point2>;

inline constexpr double dot(Point2 a, Point2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline constexpr double cross(Point2 a, Point2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) noexcept { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }
inline constexpr double squared_distance(Point2 a, Point2 b) noexcept { return dot(a - b, a - b); }
inline bool is_finite(Point2 p) noexcept { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Twice the signed area of (a, b, c); positive when counterclockwise.
inline constexpr double orient2d(Point2 a, Point2 b, Point2 c) noexcept {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

/// Positive when d lies inside the circumcircle of the counterclockwise triangle (a, b, c).
inline constexpr double incircle(Point2 a, Point2 b, Point2 c, Point2 d) noexcept {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    return alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
           clift * (adx * bdy - bdx * ady);
}

/// Magnitude bound for incircle(a, b, c, d): the same expansion with every
/// term replaced by its absolute value. Used to scale in-circle tolerances.
inline constexpr double incircle_permanent(Point2 a, Point2 b, Point2 c, Point2 d) noexcept {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const auto abs = [](double v) { return v < 0.0 ? -v : v; };
    return (adx * adx + ady * ady) * (abs(bdx * cdy) + abs(cdx * bdy)) +
           (bdx * bdx + bdy * bdy) * (abs(cdx * ady) + abs(adx * cdy)) +
           (cdx * cdx + cdy * cdy) * (abs(adx * bdy) + abs(bdx * ady));
}

/// Axis-aligned rectangle. Infinite bounds are allowed and mean "no clipping"
/// along that side; see ClipRect::unbounded().
struct ClipRect {
    double xmin = 0.0;
    double xmax = 1.0;
    double ymin = 0.0;
    double ymax = 1.0;

    static ClipRect unbounded() noexcept {
        constexpr double inf = std::numeric_limits<double>::infinity();
        return {-inf, inf, -inf, inf};
    }

    static ClipRect bounding(std::span<const Point2> points) {
        if (points.empty()) fail(ErrorKind::DegenerateInput, "bounding box of an empty point set");
        ClipRect r{points[0].x, points[0].x, points[0].y, points[0].y};
        for (const Point2& p : points) {
            r.xmin = std::min(r.xmin, p.x);
            r.xmax = std::max(r.xmax, p.x);
            r.ymin = std::min(r.ymin, p.y);
            r.ymax = std::max(r.ymax, p.y);
        }
        return r;
    }

    /// Bounding box of `points` grown by `margin` times its extent on each side.
    static ClipRect around(std::span<const Point2> points, double margin = 0.1) {
        ClipRect r = bounding(points);
        const double diag = r.diagonal();
        const double wx = r.width() > 0.0 ? r.width() : diag;
        const double wy = r.height() > 0.0 ? r.height() : diag;
        r.xmin -= margin * wx;
        r.xmax += margin * wx;
        r.ymin -= margin * wy;
        r.ymax += margin * wy;
        return r;
    }

    double width() const noexcept { return xmax - xmin; }
    double height() const noexcept { return ymax - ymin; }
    double diagonal() const noexcept { return std::hypot(width(), height()); }
    double area() const noexcept { return width() * height(); }
    bool bounded() const noexcept {
        return std::isfinite(xmin) && std::isfinite(xmax) && std::isfinite(ymin) && std::isfinite(ymax);
    }
    bool valid() const noexcept { return xmin < xmax && ymin < ymax; }
    bool contains(Point2 p) const noexcept {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }

    ClipRect intersect(const ClipRect& o) const noexcept {
        return {std::max(xmin, o.xmin), std::min(xmax, o.xmax), std::max(ymin, o.ymin),
                std::min(ymax, o.ymax)};
    }

    /// Counterclockwise corner loop; only meaningful for bounded rectangles.
    Polygon polygon() const { return {{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}}; }
};

/// Predicate tolerances scaled to a point set's bounding-box diagonal D:
/// orientation 1e-12 D^2 and coincidence 1e-9 D. In-circle tests are
/// relative: 1e-12 of the determinant's permanent.
struct Tolerance {
    double scale = 1.0;
    double orient = 1e-12;
    double incircle_relative = 1e-12;
    double coincide = 1e-9;

    static Tolerance for_scale(double diag) noexcept {
        const double d = diag > 0.0 && std::isfinite(diag) ? diag : 1.0;
        return {d, 1e-12 * d * d, 1e-12, 1e-9 * d};
    }

    bool inside_circumcircle(Point2 a, Point2 b, Point2 c, Point2 d) const noexcept {
        return incircle(a, b, c, d) > incircle_relative * incircle_permanent(a, b, c, d);
    }
    static Tolerance for_points(std::span<const Point2> points) {
        return for_scale(ClipRect::bounding(points).diagonal());
    }
};

struct Circle {
    Point2 center;
    double radius = 0.0;
};

namespace detail {

// Circumcenter without the collinearity guard; callers decide what degenerate means.
inline Point2 circumcenter_unchecked(Point2 a, Point2 b, Point2 c) noexcept {
    const Point2 ab = b - a, ac = c - a;
    const double d = 2.0 * cross(ab, ac);
    const double ab2 = dot(ab, ab), ac2 = dot(ac, ac);
    return {a.x + (ac.y * ab2 - ab.y * ac2) / d, a.y + (ab.x * ac2 - ac.x * ab2) / d};
}

}  // namespace detail

inline Circle circumcircle(Point2 a, Point2 b, Point2 c) {
    const double scale2 =
        std::max({squared_distance(a, b), squared_distance(b, c), squared_distance(a, c)});
    if (!(std::abs(orient2d(a, b, c)) > 1e-12 * scale2))
        fail(ErrorKind::DegenerateInput, "circumcircle of collinear points");
    const Point2 center = detail::circumcenter_unchecked(a, b, c);
    return {center, distance(center, a)};
}

/// Shoelace area of a vertex loop; orientation ignored.
inline double polygon_area(std::span<const Point2> polygon) noexcept {
    const std::size_t n = polygon.size();
    if (n < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) twice += cross(polygon[i], polygon[(i + 1) % n]);
    return std::abs(twice) * 0.5;
}

inline double signed_area(std::span<const Point2> polygon) noexcept {
    const std::size_t n = polygon.size();
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) twice += cross(polygon[i], polygon[(i + 1) % n]);
    return twice * 0.5;
}

/// Keeps the part of `poly` where dot(normal, y) <= offset (one Sutherland-Hodgman pass).
inline Polygon clip_halfplane(const Polygon& poly, Point2 normal, double offset) {
    Polygon out;
    const std::size_t n = poly.size();
    if (n == 0) return out;
    out.reserve(n + 1);
    Point2 prev = poly[n - 1];
    double sp = dot(normal, prev) - offset;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 cur = poly[i];
        const double sc = dot(normal, cur) - offset;
        if (sc <= 0.0) {
            if (sp > 0.0) {
                const double t = sp / (sp - sc);
                out.push_back(prev + t * (cur - prev));
            }
            out.push_back(cur);
        } else if (sp <= 0.0) {
            const double t = sp / (sp - sc);
            out.push_back(prev + t * (cur - prev));
        }
        prev = cur;
        sp = sc;
    }
    if (out.size() < 3) out.clear();
    return out;
}

/// Part of `poly` at least as close to `a` as to `b`.
inline Polygon clip_bisector(const Polygon& poly, Point2 a, Point2 b) {
    const Point2 normal = b - a;
    return clip_halfplane(poly, normal, dot(normal, 0.5 * (a + b)));
}

inline Polygon clip_polygon(const Polygon& subject, const ClipRect& clip) {
    Polygon out = subject;
    if (std::isfinite(clip.xmin)) out = clip_halfplane(out, {-1.0, 0.0}, -clip.xmin);
    if (std::isfinite(clip.xmax)) out = clip_halfplane(out, {1.0, 0.0}, clip.xmax);
    if (std::isfinite(clip.ymin)) out = clip_halfplane(out, {0.0, -1.0}, -clip.ymin);
    if (std::isfinite(clip.ymax)) out = clip_halfplane(out, {0.0, 1.0}, clip.ymax);
    return out;
}

/// Intersection of `subject` with a convex polygon given in either orientation.
inline Polygon clip_polygon(const Polygon& subject, const Polygon& convex_clip) {
    if (convex_clip.size() < 3) return {};
    Polygon clip = convex_clip;
    if (signed_area(clip) < 0.0) std::reverse(clip.begin(), clip.end());
    Polygon out = subject;
    for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
        const Point2 p = clip[i], q = clip[(i + 1) % clip.size()];
        const Point2 normal{q.y - p.y, -(q.x - p.x)};
        out = clip_halfplane(out, normal, dot(normal, p));
    }
    return out;
}

/// Counterclockwise loop of the strictly extreme points (Andrew's monotone chain).
inline Polygon convex_hull(std::span<const Point2> points) {
    if (points.size() < 3) fail(ErrorKind::DegenerateInput, "convex hull needs at least 3 points");
    const Tolerance tol = Tolerance::for_points(points);
    std::vector<Point2> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end(),
              [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    Polygon hull(2 * sorted.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        while (k >= 2 && orient2d(hull[k - 2], hull[k - 1], sorted[i]) <= tol.orient) --k;
        hull[k++] = sorted[i];
    }
    for (std::size_t i = sorted.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && orient2d(hull[k - 2], hull[k - 1], sorted[i]) <= tol.orient) --k;
        hull[k++] = sorted[i];
    }
    hull.resize(k > 0 ? k - 1 : 0);
    if (hull.size() < 3) fail(ErrorKind::DegenerateInput, "all points are collinear");
    return hull;
}

/// Point-in-convex-polygon test against a counterclockwise loop. With
/// `strict`, points within `eps` (orientation units) of the boundary are outside.
inline bool inside_convex(std::span<const Point2> ccw_polygon, Point2 p, double eps = 0.0,
                          bool strict = true) {
    const std::size_t n = ccw_polygon.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const double o = orient2d(ccw_polygon[i], ccw_polygon[(i + 1) % n], p);
        if (strict ? !(o > eps) : (o < -eps)) return false;
    }
    return true;
}

inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

/// Delaunay triangulation. Triangles are counterclockwise; neighbors[t][i] is
/// the triangle across the edge opposite triangles[t][i], or kNone on the hull.
struct Triangulation {
    std::vector<Point2> points;
    std::vector<std::array<std::size_t, 3>> triangles;
    std::vector<std::array<std::size_t, 3>> neighbors;
    Tolerance tolerance;

    std::size_t size() const noexcept { return triangles.size(); }

    Point2 corner(std::size_t t, std::size_t i) const { return points[triangles[t][i]]; }

    /// Sorted Delaunay neighbors of every vertex.
    std::vector<std::vector<std::size_t>> vertex_neighbors() const {
        std::vector<std::vector<std::size_t>> adj(points.size());
        for (const auto& tri : triangles)
            for (std::size_t i = 0; i < 3; ++i) {
                adj[tri[i]].push_back(tri[(i + 1) % 3]);
                adj[tri[i]].push_back(tri[(i + 2) % 3]);
            }
        for (auto& list : adj) {
            std::sort(list.begin(), list.end());
            list.erase(std::unique(list.begin(), list.end()), list.end());
        }
        return adj;
    }

    /// Unique edges as (lo, hi) vertex pairs, sorted.
    std::vector<std::array<std::size_t, 2>> edges() const {
        std::vector<std::array<std::size_t, 2>> out;
        out.reserve(triangles.size() * 3);
        for (std::size_t t = 0; t < triangles.size(); ++t)
            for (std::size_t i = 0; i < 3; ++i) {
                const std::size_t a = triangles[t][(i + 1) % 3], b = triangles[t][(i + 2) % 3];
                if (neighbors[t][i] == kNone || t < neighbors[t][i])
                    out.push_back({std::min(a, b), std::max(a, b)});
            }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Visibility walk from `hint`. Returns a triangle containing p (boundary
    /// inclusive) or kNone when p is outside the hull.
    std::size_t locate(Point2 p, std::size_t hint = 0) const {
        if (triangles.empty()) return kNone;
        std::size_t t = hint < triangles.size() ? hint : 0;
        const std::size_t max_steps = 4 * triangles.size() + 16;
        for (std::size_t step = 0; step < max_steps; ++step) {
            bool moved = false;
            for (std::size_t k = 0; k < 3; ++k) {
                const std::size_t i = (k + step) % 3;
                const Point2 a = corner(t, (i + 1) % 3), b = corner(t, (i + 2) % 3);
                if (orient2d(a, b, p) < 0.0) {
                    if (neighbors[t][i] == kNone) {
                        if (orient2d(a, b, p) < -tolerance.orient) return kNone;
                        continue;
                    }
                    t = neighbors[t][i];
                    moved = true;
                    break;
                }
            }
            if (!moved) return t;
        }
        for (std::size_t s = 0; s < triangles.size(); ++s) {
            bool inside = true;
            for (std::size_t i = 0; i < 3 && inside; ++i)
                inside = orient2d(corner(s, (i + 1) % 3), corner(s, (i + 2) % 3), p) >= -tolerance.orient;
            if (inside) return s;
        }
        return kNone;
    }
};

namespace detail {

// Incremental Bowyer-Watson. Instead of a finite super-triangle, every hull
// edge carries a ghost triangle (a, b, ghost) whose "circumcircle" is the open
// half-plane left of a->b, so the hull is always exactly convex.
class DelaunayBuilder {
public:
    explicit DelaunayBuilder(std::span<const Point2> points)
        : pts_(points.begin(), points.end()), ghost_(points.size()) {
        if (pts_.size() < 3) fail(ErrorKind::DegenerateInput, "Delaunay needs at least 3 points");
        for (const Point2& p : pts_)
            if (!is_finite(p)) fail(ErrorKind::DegenerateInput, "non-finite coordinate");
        tol_ = Tolerance::for_points(pts_);
        reject_duplicates();
        seed_triangle();
    }

    Triangulation finish() && {
        Triangulation out;
        std::vector<std::size_t> remap(tris_.size(), kNone);
        for (std::size_t t = 0; t < tris_.size(); ++t)
            if (tris_[t].alive && !is_ghost(t)) {
                remap[t] = out.triangles.size();
                out.triangles.push_back(tris_[t].v);
            }
        out.neighbors.resize(out.triangles.size());
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            if (remap[t] == kNone) continue;
            for (std::size_t i = 0; i < 3; ++i) {
                const std::size_t nb = tris_[t].n[i];
                out.neighbors[remap[t]][i] = remap[nb];
            }
        }
        out.points = std::move(pts_);
        out.tolerance = tol_;
        return out;
    }

private:
    struct Tri {
        std::array<std::size_t, 3> v{};
        std::array<std::size_t, 3> n{kNone, kNone, kNone};
        bool alive = true;
    };

    struct BoundaryEdge {
        std::size_t from, to, outer;
    };

    bool is_ghost(std::size_t t) const { return tris_[t].v[2] == ghost_; }

    void reject_duplicates() const {
        std::vector<std::size_t> order(pts_.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pts_[a].x < pts_[b].x; });
        for (std::size_t a = 0; a < order.size(); ++a)
            for (std::size_t b = a + 1; b < order.size() && pts_[order[b]].x - pts_[order[a]].x <= tol_.coincide; ++b)
                if (distance(pts_[order[a]], pts_[order[b]]) <= tol_.coincide)
                    fail(ErrorKind::DegenerateInput, "points " + std::to_string(std::min(order[a], order[b])) + " and " +
                                                         std::to_string(std::max(order[a], order[b])) + " coincide");
    }

    void seed_triangle() {
        const std::size_t i0 = 0;
        std::size_t i1 = kNone, i2 = kNone;
        for (std::size_t i = 1; i < pts_.size() && i1 == kNone; ++i)
            if (distance(pts_[i], pts_[i0]) > tol_.coincide) i1 = i;
        if (i1 == kNone) fail(ErrorKind::DegenerateInput, "all points coincide");
        for (std::size_t i = i1 + 1; i < pts_.size() && i2 == kNone; ++i)
            if (std::abs(orient2d(pts_[i0], pts_[i1], pts_[i])) > tol_.orient) i2 = i;
        if (i2 == kNone) fail(ErrorKind::DegenerateInput, "all points are collinear");

        std::array<std::size_t, 3> v{i0, i1, i2};
        if (orient2d(pts_[i0], pts_[i1], pts_[i2]) < 0.0) std::swap(v[1], v[2]);
        // Real triangle 0 and ghost triangles 1..3, one per edge.
        tris_.push_back({v, {kNone, kNone, kNone}, true});
        for (std::size_t i = 0; i < 3; ++i) {
            const std::size_t a = v[(i + 1) % 3], b = v[(i + 2) % 3];
            tris_.push_back({{b, a, ghost_}, {kNone, kNone, 0}, true});
            tris_[0].n[i] = tris_.size() - 1;
        }
        // Ghost (b, a, g): edge a->g is opposite b, edge g->b is opposite a.
        for (std::size_t i = 0; i < 3; ++i) {
            const std::size_t g = tris_[0].n[i];
            const std::size_t b = tris_[g].v[0], a = tris_[g].v[1];
            for (std::size_t j = 0; j < 3; ++j) {
                const std::size_t h = tris_[0].n[j];
                if (h == g) continue;
                if (tris_[h].v[1] == b) tris_[g].n[1] = h;  // shares vertex b with ghost starting at b
                if (tris_[h].v[0] == a) tris_[g].n[0] = h;
            }
        }
        last_ = 0;
        for (std::size_t i = 0; i < pts_.size(); ++i)
            if (i != i0 && i != i1 && i != i2) insert(i);
    }

    bool in_conflict(std::size_t t, Point2 p) const {
        const Tri& tri = tris_[t];
        const Point2 a = pts_[tri.v[0]], b = pts_[tri.v[1]];
        if (is_ghost(t)) {
            const double o = orient2d(a, b, p);
            if (o > tol_.orient) return true;
            if (o < -tol_.orient) return false;
            const Point2 ab = b - a;
            const double s = dot(p - a, ab) / dot(ab, ab);
            return s > 0.0 && s < 1.0;
        }
        return tol_.inside_circumcircle(a, b, pts_[tri.v[2]], p);
    }

    bool contains(std::size_t t, Point2 p) const {
        for (std::size_t i = 0; i < 3; ++i)
            if (orient2d(pts_[tris_[t].v[(i + 1) % 3]], pts_[tris_[t].v[(i + 2) % 3]], p) < 0.0) return false;
        return true;
    }

    std::size_t locate(Point2 p) const {
        std::size_t t = last_;
        if (!tris_[t].alive) t = 0;
        const std::size_t max_steps = 4 * tris_.size() + 16;
        for (std::size_t step = 0; step < max_steps; ++step) {
            if (!tris_[t].alive) break;
            if (is_ghost(t)) {
                if (in_conflict(t, p)) return t;
                t = tris_[t].n[2];
                continue;
            }
            bool moved = false;
            for (std::size_t k = 0; k < 3; ++k) {
                const std::size_t i = (k + step) % 3;
                const Point2 a = pts_[tris_[t].v[(i + 1) % 3]], b = pts_[tris_[t].v[(i + 2) % 3]];
                if (orient2d(a, b, p) < 0.0) {
                    t = tris_[t].n[i];
                    moved = true;
                    break;
                }
            }
            if (!moved) return t;
        }
        for (std::size_t s = 0; s < tris_.size(); ++s) {
            if (!tris_[s].alive) continue;
            if (is_ghost(s) ? in_conflict(s, p) : contains(s, p)) return s;
        }
        return kNone;
    }

    void insert(std::size_t idx) {
        const Point2 p = pts_[idx];
        const std::size_t start = locate(p);
        if (start == kNone) fail(ErrorKind::DegenerateInput, "point " + std::to_string(idx) + " could not be located");

        ++stamp_;
        if (mark_.size() < tris_.size()) mark_.resize(tris_.size(), 0);
        cavity_.clear();
        boundary_.clear();
        std::vector<std::size_t>& stack = stack_;
        stack.assign(1, start);
        mark_[start] = stamp_;
        while (!stack.empty()) {
            const std::size_t t = stack.back();
            stack.pop_back();
            cavity_.push_back(t);
            for (std::size_t i = 0; i < 3; ++i) {
                const std::size_t nb = tris_[t].n[i];
                if (mark_[nb] == stamp_) continue;
                if (in_conflict(nb, p)) {
                    mark_[nb] = stamp_;
                    stack.push_back(nb);
                }
            }
        }
        // Near-degenerate in-circle tests can leave a boundary edge that p
        // does not see; absorb the triangle beyond it until the cavity is
        // star-shaped.
        for (std::size_t round = 0;; ++round) {
            boundary_.clear();
            for (std::size_t t : cavity_)
                for (std::size_t i = 0; i < 3; ++i) {
                    const std::size_t nb = tris_[t].n[i];
                    if (mark_[nb] != stamp_)
                        boundary_.push_back({tris_[t].v[(i + 1) % 3], tris_[t].v[(i + 2) % 3], nb});
                }
            bool grown = false;
            for (const BoundaryEdge& e : boundary_) {
                if (e.from == ghost_ || e.to == ghost_) continue;
                if (!(orient2d(pts_[e.from], pts_[e.to], p) > 0.0) && mark_[e.outer] != stamp_) {
                    mark_[e.outer] = stamp_;
                    cavity_.push_back(e.outer);
                    grown = true;
                }
            }
            if (!grown) break;
            if (round > 64)
                fail(ErrorKind::DegenerateInput, "cavity of point " + std::to_string(idx) + " is not star-shaped");
        }

        for (const BoundaryEdge& e : boundary_) {
            for (std::size_t v : {e.from, e.to})
                if (v != ghost_ && distance(pts_[v], p) <= tol_.coincide)
                    fail(ErrorKind::DegenerateInput,
                         "duplicate points " + std::to_string(v) + " and " + std::to_string(idx));
            if (e.from != ghost_ && e.to != ghost_ && !(orient2d(pts_[e.from], pts_[e.to], p) > 0.0))
                fail(ErrorKind::DegenerateInput,
                     "cavity of point " + std::to_string(idx) + " is not star-shaped");
        }

        for (std::size_t t : cavity_) {
            tris_[t].alive = false;
            free_.push_back(t);
        }

        // New triangle per boundary edge (from, to, p); ghosts rotated so the
        // ghost vertex sits in slot 2.
        starting_at_.clear();
        std::vector<std::size_t> created;
        created.reserve(boundary_.size());
        for (const BoundaryEdge& e : boundary_) {
            Tri tri;
            std::size_t outer_slot;
            if (e.from == ghost_) {
                tri.v = {e.to, idx, ghost_};
                outer_slot = 1;
            } else if (e.to == ghost_) {
                tri.v = {idx, e.from, ghost_};
                outer_slot = 0;
            } else {
                tri.v = {e.from, e.to, idx};
                outer_slot = 2;
            }
            tri.n[outer_slot] = e.outer;
            const std::size_t t = allocate(tri);
            created.push_back(t);
            // Repoint the outer triangle's back-reference.
            Tri& outer = tris_[e.outer];
            for (std::size_t i = 0; i < 3; ++i) {
                const std::size_t a = outer.v[(i + 1) % 3], b = outer.v[(i + 2) % 3];
                if (a == e.to && b == e.from) outer.n[i] = t;
            }
            starting_at_.push_back({e.from, created.size() - 1});
        }
        std::sort(starting_at_.begin(), starting_at_.end());
        auto find_start = [&](std::size_t v) {
            auto it = std::lower_bound(starting_at_.begin(), starting_at_.end(), std::pair{v, std::size_t{0}});
            return it->second;
        };
        auto slot_of = [&](std::size_t t, std::size_t v) {
            const auto& vs = tris_[t].v;
            return static_cast<std::size_t>(std::find(vs.begin(), vs.end(), v) - vs.begin());
        };
        // New triangle (u, w, p) meets the one built on the boundary edge
        // starting at w, (w, x, p), along edge (w, p): opposite u in the
        // first, opposite x in the second.
        for (std::size_t k = 0; k < boundary_.size(); ++k) {
            const BoundaryEdge& e = boundary_[k];
            const std::size_t t = created[k];
            const std::size_t nk = find_start(e.to);
            const std::size_t next = created[nk];
            tris_[t].n[slot_of(t, e.from)] = next;
            tris_[next].n[slot_of(next, boundary_[nk].to)] = t;
        }
        last_ = created.front();
    }

    std::size_t allocate(const Tri& tri) {
        if (!free_.empty()) {
            const std::size_t t = free_.back();
            free_.pop_back();
            tris_[t] = tri;
            return t;
        }
        tris_.push_back(tri);
        mark_.push_back(0);
        return tris_.size() - 1;
    }

    std::vector<Point2> pts_;
    std::size_t ghost_;
    Tolerance tol_;
    std::vector<Tri> tris_;
    std::vector<std::size_t> free_;
    std::vector<std::uint64_t> mark_;
    std::uint64_t stamp_ = 0;
    std::vector<std::size_t> cavity_, stack_;
    std::vector<BoundaryEdge> boundary_;
    std::vector<std::pair<std::size_t, std::size_t>> starting_at_;
    std::size_t last_ = 0;
};

}  // namespace detail

/// Delaunay triangulation by incremental Bowyer-Watson in input order.
/// Throws DegenerateInput for fewer than 3 points, collinear input, or
/// duplicates closer than 1e-9 of the bounding-box diagonal.
inline Triangulation delaunay(std::span<const Point2> points) {
    return detail::DelaunayBuilder(points).finish();
}

struct VoronoiDiagram {
    std::vector<Polygon> cells;
    ClipRect clip;
};

/// Voronoi cells of the triangulation's vertices, each the clip rectangle cut
/// by the bisectors to its Delaunay neighbours.
inline VoronoiDiagram voronoi(const Triangulation& tri, const ClipRect& clip) {
    if (!clip.bounded() || !clip.valid()) fail(ErrorKind::InvalidArgument, "voronoi needs a bounded, non-empty clip");
    for (const Point2& p : tri.points)
        if (!clip.contains(p)) fail(ErrorKind::InvalidArgument, "generator outside the clip rectangle");
    const auto adj = tri.vertex_neighbors();
    VoronoiDiagram out{std::vector<Polygon>(tri.points.size()), clip};
    const Polygon box = clip.polygon();
    for (std::size_t i = 0; i < tri.points.size(); ++i) {
        Polygon cell = box;
        for (std::size_t j : adj[i]) {
            cell = clip_bisector(cell, tri.points[i], tri.points[j]);
            if (cell.empty()) break;
        }
        out.cells[i] = std::move(cell);
    }
    return out;
}

}  // namespace topoguard

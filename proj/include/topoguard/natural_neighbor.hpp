#pragma once

// Sibson natural-neighbour coordinates by area stealing, attribute
// interpolation, and uniform point insertion inside the convex hull.

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "topoguard/error.hpp"
#include "topoguard/geometry.hpp"
#include "topoguard/random.hpp"

namespace topoguard {

struct Channel {
    std::string name;
    std::vector<double> values;
};

/// A point cloud with optional per-point attribute channels.
struct Sample {
    std::string id;
    std::vector<Point2> points;
    std::vector<Channel> channels;

    std::size_t size() const noexcept { return points.size(); }

    void validate() const {
        for (std::size_t i = 0; i < points.size(); ++i)
            if (!is_finite(points[i]))
                fail(ErrorKind::DegenerateInput, "sample '" + id + "': non-finite point " + std::to_string(i));
        for (const Channel& c : channels)
            if (c.values.size() != points.size())
                fail(ErrorKind::InvalidArgument,
                     "sample '" + id + "': channel '" + c.name + "' has " + std::to_string(c.values.size()) +
                         " values for " + std::to_string(points.size()) + " points");
    }
};

struct SibsonWeights {
    std::vector<std::size_t> neighbor_indices;
    std::vector<double> lambdas;
    double cell_area = 0.0;  // area of the query's (clipped) cell

    double sum() const noexcept {
        double s = 0.0;
        for (double l : lambdas) s += l;
        return s;
    }
};

struct AugmentationStep {
    std::vector<Point2> inserted;
    std::vector<std::vector<double>> inserted_channels;  // one row per inserted point
    std::uint64_t rng_seed = 0;
    std::string parent_id;
    std::size_t draws = 0;
};

/// Triangulates once, then answers weight queries from the query's
/// Bowyer-Watson cavity. The area stolen from neighbour l is the part of the
/// new cell where l is the closest natural neighbour.
class NaturalNeighborInterpolator {
public:
    NaturalNeighborInterpolator(const Sample& sample, const ClipRect& clip)
        : sample_(&sample), tri_(delaunay(sample.points)), hull_(convex_hull(sample.points)), clip_(clip) {
        sample.validate();
        if (!clip_.valid()) fail(ErrorKind::InvalidArgument, "empty clip rectangle");
    }

    const Triangulation& triangulation() const noexcept { return tri_; }
    const Polygon& hull() const noexcept { return hull_; }
    const ClipRect& clip() const noexcept { return clip_; }

    SibsonWeights weights(Point2 query) const {
        const Tolerance& tol = tri_.tolerance;
        if (!is_finite(query)) fail(ErrorKind::InvalidArgument, "non-finite query");
        if (!inside_convex(hull_, query, tol.orient, true))
            fail(ErrorKind::OutsideHull, "query is not strictly inside the convex hull");
        const std::size_t start = tri_.locate(query);
        if (start == kNone) fail(ErrorKind::OutsideHull, "query could not be located");

        const auto cavity = conflict_region(start, query);
        std::vector<std::size_t> hood;
        for (std::size_t t : cavity)
            for (std::size_t v : tri_.triangles[t]) hood.push_back(v);
        std::sort(hood.begin(), hood.end());
        hood.erase(std::unique(hood.begin(), hood.end()), hood.end());
        for (std::size_t v : hood)
            if (distance(tri_.points[v], query) <= tol.coincide)
                fail(ErrorKind::CoincidentPoint, "query coincides with point " + std::to_string(v));

        // The new cell's vertices are the circumcentres of (u, w, query) for
        // the cavity's boundary edges; their bounding box encloses the cell.
        ClipRect box{query.x, query.x, query.y, query.y};
        std::vector<char> in_cavity(tri_.size(), 0);
        for (std::size_t t : cavity) in_cavity[t] = 1;
        for (std::size_t t : cavity)
            for (std::size_t i = 0; i < 3; ++i) {
                const std::size_t nb = tri_.neighbors[t][i];
                if (nb != kNone && in_cavity[nb]) continue;
                const Point2 c =
                    detail::circumcenter_unchecked(tri_.corner(t, (i + 1) % 3), tri_.corner(t, (i + 2) % 3), query);
                if (!is_finite(c)) fail(ErrorKind::OutsideHull, "query lies on a hull edge");
                box.xmin = std::min(box.xmin, c.x);
                box.xmax = std::max(box.xmax, c.x);
                box.ymin = std::min(box.ymin, c.y);
                box.ymax = std::max(box.ymax, c.y);
            }
        const double pad = 1e-6 * std::max(box.diagonal(), tol.scale);
        box = ClipRect{box.xmin - pad, box.xmax + pad, box.ymin - pad, box.ymax + pad}.intersect(clip_);
        if (!box.valid()) fail(ErrorKind::OutsideHull, "query cell misses the clip rectangle");

        Polygon cell = box.polygon();
        for (std::size_t m : hood) cell = clip_bisector(cell, query, tri_.points[m]);
        const double cell_area = polygon_area(cell);
        if (!(cell_area > 0.0)) fail(ErrorKind::DegenerateInput, "query cell has no area");

        SibsonWeights w;
        w.cell_area = cell_area;
        for (std::size_t l : hood) {
            Polygon stolen = cell;
            for (std::size_t m : hood) {
                if (m == l) continue;
                stolen = clip_bisector(stolen, tri_.points[l], tri_.points[m]);
                if (stolen.empty()) break;
            }
            const double a = polygon_area(stolen);
            if (a > 1e-14 * cell_area) {
                w.neighbor_indices.push_back(l);
                w.lambdas.push_back(a / cell_area);
            }
        }
        return w;
    }

    /// Per-channel values at `query`, in channel order.
    std::vector<double> interpolate(Point2 query) const { return apply(weights(query)); }

    std::vector<double> apply(const SibsonWeights& w) const {
        std::vector<double> out(sample_->channels.size(), 0.0);
        for (std::size_t c = 0; c < out.size(); ++c)
            for (std::size_t k = 0; k < w.neighbor_indices.size(); ++k)
                out[c] += w.lambdas[k] * sample_->channels[c].values[w.neighbor_indices[k]];
        return out;
    }

    /// Sibson-weighted combination of the neighbours' coordinates.
    Point2 position(const SibsonWeights& w) const {
        Point2 p{0.0, 0.0};
        for (std::size_t k = 0; k < w.neighbor_indices.size(); ++k)
            p = p + w.lambdas[k] * tri_.points[w.neighbor_indices[k]];
        return p;
    }

private:
    // Triangles whose circumcircle contains q, grown from the containing one.
    std::vector<std::size_t> conflict_region(std::size_t start, Point2 q) const {
        const double rel = tri_.tolerance.incircle_relative;
        std::vector<std::size_t> out{start};
        std::vector<char> seen(tri_.size(), 0);
        seen[start] = 1;
        for (std::size_t k = 0; k < out.size(); ++k)
            for (std::size_t nb : tri_.neighbors[out[k]]) {
                if (nb == kNone || seen[nb]) continue;
                seen[nb] = 1;
                const Point2 a = tri_.corner(nb, 0), b = tri_.corner(nb, 1), c = tri_.corner(nb, 2);
                if (incircle(a, b, c, q) > -rel * incircle_permanent(a, b, c, q)) out.push_back(nb);
            }
        return out;
    }

    const Sample* sample_;
    Triangulation tri_;
    Polygon hull_;
    ClipRect clip_;
};

inline SibsonWeights sibson_weights(const Sample& sample, Point2 query, const ClipRect& clip) {
    return NaturalNeighborInterpolator(sample, clip).weights(query);
}

inline std::vector<double> interpolate(const Sample& sample, Point2 query, const ClipRect& clip) {
    return NaturalNeighborInterpolator(sample, clip).interpolate(query);
}

inline constexpr std::size_t kMaxRejectionDraws = 1'000'000;

/// Appends `n_new` points drawn uniformly inside the convex hull (rejection
/// from the hull's bounding box), with channels filled by Sibson
/// interpolation over the parent sample.
inline std::pair<Sample, AugmentationStep> augment(const Sample& sample, std::size_t n_new, std::uint64_t seed,
                                                   const ClipRect& clip) {
    AugmentationStep step;
    step.rng_seed = seed;
    step.parent_id = sample.id;
    Sample out = sample;
    if (n_new == 0) return {std::move(out), std::move(step)};

    const NaturalNeighborInterpolator interp(sample, clip);
    const ClipRect box = ClipRect::bounding(interp.hull());
    const double eps = interp.triangulation().tolerance.orient;
    Rng rng(seed);
    while (step.inserted.size() < n_new) {
        if (++step.draws > kMaxRejectionDraws)
            fail(ErrorKind::SamplingFailed, "rejection sampling exceeded " + std::to_string(kMaxRejectionDraws) + " draws");
        const Point2 q{rng.uniform(box.xmin, box.xmax), rng.uniform(box.ymin, box.ymax)};
        if (!inside_convex(interp.hull(), q, eps, true)) continue;
        SibsonWeights w;
        try {
            w = interp.weights(q);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::OutsideHull || e.kind() == ErrorKind::CoincidentPoint) continue;
            throw;
        }
        step.inserted.push_back(q);
        step.inserted_channels.push_back(interp.apply(w));
    }
    for (std::size_t k = 0; k < step.inserted.size(); ++k) {
        out.points.push_back(step.inserted[k]);
        for (std::size_t c = 0; c < out.channels.size(); ++c)
            out.channels[c].values.push_back(step.inserted_channels[k][c]);
    }
    return {std::move(out), std::move(step)};
}

}  // namespace topoguard

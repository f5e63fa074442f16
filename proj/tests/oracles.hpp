#pragma once

// Slow, independent reference computations used by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "topoguard/complexes.hpp"
#include "topoguard/geometry.hpp"
#include "topoguard/persistence.hpp"
#include "topoguard/random.hpp"

namespace oracle {

using topoguard::DiagramPoint;
using topoguard::Point2;
using topoguard::Polygon;

inline std::vector<Point2> random_points(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    topoguard::Rng rng(seed);
    std::vector<Point2> pts(n);
    for (auto& p : pts) p = {rng.uniform(lo, hi), rng.uniform(lo, hi)};
    return pts;
}

/// Vertices of the hull found by testing every ordered pair as a supporting line.
inline std::set<std::size_t> brute_hull_vertices(const std::vector<Point2>& pts) {
    std::set<std::size_t> out;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            bool supporting = true;
            for (std::size_t k = 0; k < n && supporting; ++k) {
                if (k == i || k == j) continue;
                const double o = topoguard::orient2d(pts[i], pts[j], pts[k]);
                if (o < 0.0) supporting = false;
                // collinear points must lie strictly between i and j
                if (o == 0.0 && topoguard::dot(pts[k] - pts[i], pts[k] - pts[j]) > 0.0) supporting = false;
            }
            if (supporting) {
                out.insert(i);
                out.insert(j);
            }
        }
    return out;
}

/// Fraction of `samples` uniform draws in `box` that land in the convex polygon, times the box area.
inline double monte_carlo_area(const Polygon& poly, const topoguard::ClipRect& box, std::size_t samples,
                               std::uint64_t seed) {
    topoguard::Rng rng(seed);
    std::size_t hit = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        const Point2 p{rng.uniform(box.xmin, box.xmax), rng.uniform(box.ymin, box.ymax)};
        if (topoguard::inside_convex(poly, p)) ++hit;
    }
    return double(hit) / double(samples) * (box.xmax - box.xmin) * (box.ymax - box.ymin);
}

/// Voronoi cell of pts[i] by clipping the box against every other generator.
inline Polygon brute_cell(const std::vector<Point2>& pts, std::size_t i, const topoguard::ClipRect& box) {
    Polygon cell = box.polygon();
    for (std::size_t j = 0; j < pts.size() && !cell.empty(); ++j)
        if (j != i) cell = topoguard::clip_bisector(cell, pts[i], pts[j]);
    return cell;
}

/// Sibson weights as area(old cell of l intersected with the query's cell) / area(query's cell).
inline std::map<std::size_t, double> brute_sibson(const std::vector<Point2>& pts, Point2 q,
                                                  const topoguard::ClipRect& box) {
    std::vector<Point2> with_q = pts;
    with_q.push_back(q);
    const Polygon qcell = brute_cell(with_q, pts.size(), box);
    const double total = topoguard::polygon_area(qcell);
    std::map<std::size_t, double> out;
    for (std::size_t l = 0; l < pts.size(); ++l) {
        const double a = topoguard::polygon_area(topoguard::clip_polygon(qcell, brute_cell(pts, l, box)));
        if (a > 1e-14 * total) out[l] = a / total;
    }
    return out;
}

/// Minimum over centres of the maximum distance, by nested ternary search.
inline double ternary_enclosing_radius(const std::vector<Point2>& pts) {
    double xlo = pts[0].x, xhi = pts[0].x, ylo = pts[0].y, yhi = pts[0].y;
    for (auto p : pts) {
        xlo = std::min(xlo, p.x), xhi = std::max(xhi, p.x);
        ylo = std::min(ylo, p.y), yhi = std::max(yhi, p.y);
    }
    auto far = [&](double x, double y) {
        double r = 0.0;
        for (auto p : pts) r = std::max(r, std::hypot(p.x - x, p.y - y));
        return r;
    };
    auto best_y = [&](double x) {
        double lo = ylo, hi = yhi;
        for (int it = 0; it < 200; ++it) {
            const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
            if (far(x, a) < far(x, b)) hi = b;
            else lo = a;
        }
        return far(x, 0.5 * (lo + hi));
    };
    double lo = xlo, hi = xhi;
    for (int it = 0; it < 200; ++it) {
        const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
        if (best_y(a) < best_y(b)) hi = b;
        else lo = a;
    }
    return best_y(0.5 * (lo + hi));
}

/// Rank over Z/2 of a set of columns given as sorted row-index lists.
inline std::size_t rank_z2(std::vector<std::vector<std::size_t>> cols, std::size_t rows) {
    std::vector<std::vector<std::uint64_t>> bits;
    const std::size_t words = (rows + 63) / 64;
    for (const auto& c : cols) {
        std::vector<std::uint64_t> b(words, 0);
        for (std::size_t r : c) b[r / 64] ^= std::uint64_t{1} << (r % 64);
        bits.push_back(std::move(b));
    }
    std::size_t rank = 0;
    for (std::size_t r = 0; r < rows && rank < bits.size(); ++r) {
        std::size_t piv = rank;
        while (piv < bits.size() && !((bits[piv][r / 64] >> (r % 64)) & 1)) ++piv;
        if (piv == bits.size()) continue;
        std::swap(bits[piv], bits[rank]);
        for (std::size_t k = 0; k < bits.size(); ++k)
            if (k != rank && ((bits[k][r / 64] >> (r % 64)) & 1))
                for (std::size_t w = 0; w < words; ++w) bits[k][w] ^= bits[rank][w];
        ++rank;
    }
    return rank;
}

/// Betti numbers (dims 0..2) of the subcomplex {value <= r} from boundary ranks.
inline std::array<std::size_t, 3> betti_by_rank(const topoguard::FilteredComplex& fc, double r) {
    std::vector<topoguard::Simplex> sub = fc.at(r);
    std::map<topoguard::Simplex, std::size_t> local[5];
    for (const auto& s : sub) {
        auto& m = local[s.n];
        m.emplace(s, m.size());
    }
    auto boundary_rank = [&](std::size_t n) -> std::size_t {  // rank of boundary from n-vertex simplices
        if (n < 2 || n > 4 || local[n].empty()) return 0;
        std::vector<std::vector<std::size_t>> cols;
        for (const auto& [s, idx] : local[n]) {
            std::vector<std::size_t> c;
            for (std::size_t k = 0; k < s.n; ++k) c.push_back(local[n - 1].at(s.facet(k)));
            std::sort(c.begin(), c.end());
            cols.push_back(c);
        }
        return rank_z2(cols, local[n - 1].size());
    };
    std::array<std::size_t, 3> beta{};
    for (std::size_t k = 0; k < 3; ++k) beta[k] = local[k + 1].size() - boundary_rank(k + 1) - boundary_rank(k + 2);
    return beta;
}

struct BruteDistances {
    double bottleneck = 0.0;
    double wasserstein = 0.0;  // W^p
};

inline double linf(const DiagramPoint& a, const DiagramPoint& b) {
    if (a.essential() || b.essential()) {
        if (a.essential() != b.essential()) return std::numeric_limits<double>::infinity();
        return std::abs(a.birth - b.birth);
    }
    return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}

inline double to_diag(const DiagramPoint& a) {
    return a.essential() ? std::numeric_limits<double>::infinity() : 0.5 * (a.death - a.birth);
}

/// Enumerates every partial bijection; unmatched points go to the diagonal.
inline BruteDistances brute_distances(const std::vector<DiagramPoint>& A, const std::vector<DiagramPoint>& B,
                                      double p) {
    const double inf = std::numeric_limits<double>::infinity();
    BruteDistances best{inf, inf};
    std::vector<char> used(B.size(), 0);
    std::vector<double> costs;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == A.size()) {
            std::vector<double> all = costs;
            for (std::size_t j = 0; j < B.size(); ++j)
                if (!used[j]) all.push_back(to_diag(B[j]));
            double top = 0.0, sum = 0.0;
            for (double c : all) top = std::max(top, c);
            for (double c : all) sum += std::pow(c, p);
            best.bottleneck = std::min(best.bottleneck, top);
            best.wasserstein = std::min(best.wasserstein, std::pow(sum, 1.0 / p));
            return;
        }
        costs.push_back(to_diag(A[i]));
        rec(i + 1);
        costs.pop_back();
        for (std::size_t j = 0; j < B.size(); ++j) {
            if (used[j]) continue;
            used[j] = 1;
            costs.push_back(linf(A[i], B[j]));
            rec(i + 1);
            costs.pop_back();
            used[j] = 0;
        }
    };
    rec(0);
    return best;
}

/// Finite diagram with up to `max_points` points on a coarse grid so that ties occur.
inline std::vector<DiagramPoint> random_diagram(topoguard::Rng& rng, std::size_t max_points, bool grid) {
    const std::size_t n = rng.index(max_points + 1);
    std::vector<DiagramPoint> d;
    for (std::size_t i = 0; i < n; ++i) {
        double b = rng.uniform(0.0, 4.0), l = rng.uniform(0.05, 3.0);
        if (grid) b = std::round(b * 4) / 4, l = std::max(0.25, std::round(l * 4) / 4);
        d.push_back({b, b + l, 0});
    }
    return d;
}

}  // namespace oracle

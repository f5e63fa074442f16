#pragma once

// Filtered simplicial complexes over planar point clouds: Vietoris-Rips,
// Cech, alpha (Delaunay) and strong witness.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topoguard/error.hpp"
#include "topoguard/geometry.hpp"
#include "topoguard/random.hpp"

namespace topoguard {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sorted vertex list of up to four indices.
struct Simplex {
    std::array<std::uint32_t, 4> v{};
    std::uint8_t n = 0;

    Simplex() = default;
    Simplex(std::initializer_list<std::uint32_t> verts) {
        for (std::uint32_t x : verts) v[n++] = x;
        std::sort(v.begin(), v.begin() + n);
    }

    int dim() const noexcept { return int(n) - 1; }
    std::size_t size() const noexcept { return n; }
    std::uint32_t operator[](std::size_t i) const noexcept { return v[i]; }
    const std::uint32_t* begin() const noexcept { return v.data(); }
    const std::uint32_t* end() const noexcept { return v.data() + n; }

    /// Codimension-one face obtained by dropping vertex i.
    Simplex facet(std::size_t i) const {
        Simplex f;
        for (std::size_t k = 0; k < n; ++k)
            if (k != i) f.v[f.n++] = v[k];
        return f;
    }

    friend bool operator==(const Simplex& a, const Simplex& b) noexcept {
        return a.n == b.n && std::equal(a.begin(), a.end(), b.begin());
    }
    friend bool operator<(const Simplex& a, const Simplex& b) noexcept {
        if (a.n != b.n) return a.n < b.n;
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
};

enum class ComplexKind { Rips, Cech, Alpha, Witness };

constexpr std::string_view to_string(ComplexKind k) noexcept {
    switch (k) {
        case ComplexKind::Rips: return "rips";
        case ComplexKind::Cech: return "cech";
        case ComplexKind::Alpha: return "alpha";
        case ComplexKind::Witness: return "witness";
    }
    return "unknown";
}

inline ComplexKind parse_complex_kind(std::string_view s) {
    for (ComplexKind k : {ComplexKind::Rips, ComplexKind::Cech, ComplexKind::Alpha, ComplexKind::Witness})
        if (s == to_string(k)) return k;
    fail(ErrorKind::InvalidArgument, "unknown complex kind '" + std::string(s) + "'");
}

struct FilteredSimplex {
    Simplex simplex;
    double value = 0.0;
};

struct FilteredComplex {
    std::vector<FilteredSimplex> entries;
    ComplexKind kind = ComplexKind::Rips;
    double r_max = kInf;
    std::vector<std::size_t> vertex_ids;  // point index of each vertex label (landmarks for witness)

    std::size_t size() const noexcept { return entries.size(); }

    /// Orders by (value, dimension, lexicographic vertices).
    void sort() {
        std::sort(entries.begin(), entries.end(), [](const FilteredSimplex& a, const FilteredSimplex& b) {
            if (a.value != b.value) return a.value < b.value;
            return a.simplex < b.simplex;
        });
    }

    /// Simplices with value <= r.
    std::vector<Simplex> at(double r) const {
        std::vector<Simplex> out;
        for (const auto& e : entries)
            if (e.value <= r) out.push_back(e.simplex);
        return out;
    }

    /// Checks order, closure, monotonicity and uniqueness.
    void validate() const {
        std::map<Simplex, std::size_t> index;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            if (e.simplex.n == 0 || !std::isfinite(e.value) || e.value < 0.0)
                fail(ErrorKind::InvalidFiltration, "bad entry at position " + std::to_string(i));
            if (!index.emplace(e.simplex, i).second)
                fail(ErrorKind::InvalidFiltration, "duplicate simplex at position " + std::to_string(i));
            if (e.simplex.n == 1) continue;
            for (std::size_t k = 0; k < e.simplex.n; ++k) {
                auto it = index.find(e.simplex.facet(k));
                if (it == index.end())
                    fail(ErrorKind::InvalidFiltration, "face missing or after coface at position " + std::to_string(i));
                if (entries[it->second].value > e.value)
                    fail(ErrorKind::InvalidFiltration, "face value exceeds coface at position " + std::to_string(i));
            }
        }
    }
};

inline constexpr std::size_t kDefaultMaxSimplices = 5'000'000;

namespace detail {

class SimplexBudget {
public:
    explicit SimplexBudget(std::size_t limit) : limit_(limit) {}
    void take(std::size_t k = 1) {
        used_ += k;
        if (used_ > limit_)
            fail(ErrorKind::TooLarge, "complex exceeds " + std::to_string(limit_) + " simplices");
    }

private:
    std::size_t limit_;
    std::size_t used_ = 0;
};

inline std::vector<double> distance_matrix(std::span<const Point2> pts) {
    const std::size_t n = pts.size();
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = distance(pts[i], pts[j]);
    return d;
}

/// Minimum enclosing ball radius of up to four points.
inline double enclosing_radius(std::span<const Point2> pts) {
    const std::size_t n = pts.size();
    if (n <= 1) return 0.0;
    double best = kInf;
    auto encloses = [&](Point2 c, double r) {
        const double slack = r * (1.0 + 1e-12) + 1e-300;
        for (Point2 p : pts)
            if (distance(c, p) > slack) return false;
        return true;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const Point2 c = 0.5 * (pts[i] + pts[j]);
            const double r = 0.5 * distance(pts[i], pts[j]);
            if (r < best && encloses(c, r)) best = r;
            for (std::size_t k = j + 1; k < n; ++k) {
                const Point2 cc = circumcenter_unchecked(pts[i], pts[j], pts[k]);
                if (!is_finite(cc)) continue;
                const double rr = std::max({distance(cc, pts[i]), distance(cc, pts[j]), distance(cc, pts[k])});
                if (rr < best && encloses(cc, rr)) best = rr;
            }
        }
    return best;
}

// Adds every clique of size >= 3 up to max_dim + 1 vertices whose value,
// computed by `value_of`, does not exceed r_max. Edges must already be in
// `adj` (upper-triangular neighbours of each vertex).
template <class ValueOf>
void expand_cliques(std::size_t n, const std::vector<std::vector<std::uint32_t>>& up,
                    const std::vector<char>& adj, int max_dim, double r_max, ValueOf&& value_of,
                    SimplexBudget& budget, std::vector<FilteredSimplex>& out) {
    if (max_dim < 2) return;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < up[i].size(); ++a) {
            const std::uint32_t j = up[i][a];
            for (std::size_t b = a + 1; b < up[i].size(); ++b) {
                const std::uint32_t k = up[i][b];
                if (!adj[j * n + k]) continue;
                const Simplex tri{i, j, k};
                const double vt = value_of(tri);
                if (vt > r_max) continue;
                budget.take();
                out.push_back({tri, vt});
                if (max_dim < 3) continue;
                for (std::size_t c = b + 1; c < up[i].size(); ++c) {
                    const std::uint32_t l = up[i][c];
                    if (!adj[j * n + l] || !adj[k * n + l]) continue;
                    const Simplex tet{i, j, k, l};
                    const double v4 = value_of(tet);
                    if (v4 > r_max) continue;
                    budget.take();
                    out.push_back({tet, v4});
                }
            }
        }
}

// Raises each value to the maximum over its facets so that rounding in the
// value computations cannot break monotonicity.
inline void enforce_monotone(std::vector<FilteredSimplex>& entries) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const FilteredSimplex& a, const FilteredSimplex& b) { return a.simplex.n < b.simplex.n; });
    std::map<Simplex, double> value;
    for (auto& e : entries) {
        for (std::size_t k = 0; e.simplex.n > 1 && k < e.simplex.n; ++k) {
            auto it = value.find(e.simplex.facet(k));
            if (it != value.end()) e.value = std::max(e.value, it->second);
        }
        value.emplace(e.simplex, e.value);
    }
}

inline std::vector<std::size_t> iota_ids(std::size_t n) {
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    return ids;
}

}  // namespace detail

/// Largest pairwise distance.
inline double max_pairwise_distance(std::span<const Point2> pts) {
    double m = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) m = std::max(m, distance(pts[i], pts[j]));
    return m;
}

/// Average over all unordered pairs.
inline double mean_pairwise_distance(std::span<const Point2> pts) {
    const std::size_t n = pts.size();
    if (n < 2) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) s += distance(pts[i], pts[j]);
    return s / (0.5 * double(n) * double(n - 1));
}

/// Vietoris-Rips: edges at their length, higher simplices at their longest edge.
inline FilteredComplex rips_filtration(std::span<const Point2> pts, double r_max, int max_dim = 3,
                                       std::size_t max_simplices = kDefaultMaxSimplices) {
    if (pts.empty()) fail(ErrorKind::InvalidArgument, "rips: no points");
    if (!(r_max > 0.0)) fail(ErrorKind::InvalidArgument, "rips: r_max must be positive");
    const std::size_t n = pts.size();
    detail::SimplexBudget budget(max_simplices);
    const auto d = detail::distance_matrix(pts);
    FilteredComplex fc;
    fc.kind = ComplexKind::Rips;
    fc.r_max = r_max;
    fc.vertex_ids = detail::iota_ids(n);
    budget.take(n);
    for (std::uint32_t i = 0; i < n; ++i) fc.entries.push_back({Simplex{i}, 0.0});
    std::vector<char> adj(n * n, 0);
    std::vector<std::vector<std::uint32_t>> up(n);
    if (max_dim >= 1)
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t j = i + 1; j < n; ++j)
                if (d[i * n + j] <= r_max) {
                    budget.take();
                    adj[i * n + j] = adj[j * n + i] = 1;
                    up[i].push_back(j);
                    fc.entries.push_back({Simplex{i, j}, d[i * n + j]});
                }
    auto value_of = [&](const Simplex& s) {
        double v = 0.0;
        for (std::size_t a = 0; a < s.n; ++a)
            for (std::size_t b = a + 1; b < s.n; ++b) v = std::max(v, d[s[a] * n + s[b]]);
        return v;
    };
    detail::expand_cliques(n, up, adj, max_dim, r_max, value_of, budget, fc.entries);
    fc.sort();
    return fc;
}

inline constexpr std::size_t kCechMaxPoints = 64;

/// Cech: each simplex at the radius of its minimum enclosing ball.
inline FilteredComplex cech_filtration(std::span<const Point2> pts, double r_max, int max_dim = 3,
                                       std::size_t max_simplices = kDefaultMaxSimplices) {
    if (pts.empty()) fail(ErrorKind::InvalidArgument, "cech: no points");
    if (pts.size() > kCechMaxPoints)
        fail(ErrorKind::TooLarge, "cech: " + std::to_string(pts.size()) + " points exceeds the cap of " +
                                      std::to_string(kCechMaxPoints));
    if (!(r_max > 0.0)) fail(ErrorKind::InvalidArgument, "cech: r_max must be positive");
    const std::size_t n = pts.size();
    detail::SimplexBudget budget(max_simplices);
    FilteredComplex fc;
    fc.kind = ComplexKind::Cech;
    fc.r_max = r_max;
    fc.vertex_ids = detail::iota_ids(n);
    budget.take(n);
    for (std::uint32_t i = 0; i < n; ++i) fc.entries.push_back({Simplex{i}, 0.0});
    std::vector<char> adj(n * n, 0);
    std::vector<std::vector<std::uint32_t>> up(n);
    if (max_dim >= 1)
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t j = i + 1; j < n; ++j) {
                const double v = 0.5 * distance(pts[i], pts[j]);
                if (v > r_max) continue;
                budget.take();
                adj[i * n + j] = adj[j * n + i] = 1;
                up[i].push_back(j);
                fc.entries.push_back({Simplex{i, j}, v});
            }
    auto value_of = [&](const Simplex& s) {
        std::array<Point2, 4> sub;
        for (std::size_t a = 0; a < s.n; ++a) sub[a] = pts[s[a]];
        return detail::enclosing_radius(std::span<const Point2>(sub.data(), s.n));
    };
    detail::expand_cliques(n, up, adj, max_dim, r_max, value_of, budget, fc.entries);
    detail::enforce_monotone(fc.entries);
    fc.sort();
    return fc;
}

/// Alpha complex on the Delaunay triangulation.
inline FilteredComplex alpha_filtration(std::span<const Point2> pts) {
    const Triangulation tri = delaunay(pts);
    FilteredComplex fc;
    fc.kind = ComplexKind::Alpha;
    fc.vertex_ids = detail::iota_ids(pts.size());
    for (std::uint32_t i = 0; i < pts.size(); ++i) fc.entries.push_back({Simplex{i}, 0.0});

    std::vector<double> tri_value(tri.size());
    for (std::size_t t = 0; t < tri.size(); ++t) {
        const Point2 a = tri.corner(t, 0), b = tri.corner(t, 1), c = tri.corner(t, 2);
        const Point2 cc = detail::circumcenter_unchecked(a, b, c);
        tri_value[t] = std::max({distance(cc, a), distance(cc, b), distance(cc, c)});
        const auto& v = tri.triangles[t];
        fc.entries.push_back(
            {Simplex{std::uint32_t(v[0]), std::uint32_t(v[1]), std::uint32_t(v[2])}, tri_value[t]});
    }
    for (std::size_t t = 0; t < tri.size(); ++t)
        for (std::size_t i = 0; i < 3; ++i) {
            const std::size_t nb = tri.neighbors[t][i];
            if (nb != kNone && nb < t) continue;  // each edge once
            const std::size_t u = tri.triangles[t][(i + 1) % 3], w = tri.triangles[t][(i + 2) % 3];
            const Point2 mid = 0.5 * (pts[u] + pts[w]);
            const double half = 0.5 * distance(pts[u], pts[w]);
            double value = half;
            // attached edge: an opposite vertex sees the edge at an obtuse angle
            auto attach = [&](std::size_t tt, std::size_t opposite) {
                if (distance(pts[opposite], mid) < half) value = std::max(value, tri_value[tt]);
            };
            attach(t, tri.triangles[t][i]);
            if (nb != kNone)
                for (std::size_t k = 0; k < 3; ++k)
                    if (tri.neighbors[nb][k] == t) attach(nb, tri.triangles[nb][k]);
            fc.entries.push_back({Simplex{std::uint32_t(u), std::uint32_t(w)}, value});
        }
    detail::enforce_monotone(fc.entries);
    fc.sort();
    return fc;
}

/// Seeded first landmark, then repeatedly the point farthest from the chosen
/// set (lowest index on ties).
inline std::vector<std::size_t> maxmin_landmarks(std::span<const Point2> pts, std::size_t k, std::uint64_t seed) {
    const std::size_t n = pts.size();
    if (k == 0 || k > n) fail(ErrorKind::InvalidArgument, "maxmin: need 1 <= k <= n");
    Rng rng(seed);
    std::vector<std::size_t> out{static_cast<std::size_t>(rng.index(n))};
    std::vector<double> dmin(n);
    for (std::size_t i = 0; i < n; ++i) dmin[i] = distance(pts[i], pts[out[0]]);
    while (out.size() < k) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (dmin[i] > dmin[best]) best = i;
        out.push_back(best);
        for (std::size_t i = 0; i < n; ++i) dmin[i] = std::min(dmin[i], distance(pts[i], pts[best]));
    }
    return out;
}

/// k distinct indices drawn uniformly, returned sorted.
inline std::vector<std::size_t> uniform_landmarks(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k == 0 || k > n) fail(ErrorKind::InvalidArgument, "landmarks: need 1 <= k <= n");
    Rng rng(seed);
    std::vector<std::size_t> idx = detail::iota_ids(n);
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// Relaxed strong witness complex on the landmarks. A simplex enters at
///   min over w of ( max_{p in simplex} |w - p| - m(w) ),
/// m(w) being the distance from w to its nearest landmark. Vertex labels are
/// positions in `landmarks`.
inline FilteredComplex witness_filtration(std::span<const Point2> witnesses, std::span<const std::size_t> landmarks,
                                          double r_max, int max_dim = 3,
                                          std::size_t max_simplices = kDefaultMaxSimplices) {
    const std::size_t L = landmarks.size();
    if (L == 0) fail(ErrorKind::InvalidArgument, "witness: no landmarks");
    for (std::size_t l : landmarks)
        if (l >= witnesses.size()) fail(ErrorKind::InvalidArgument, "witness: landmark index out of range");
    const std::size_t W = witnesses.size();
    std::vector<double> d(W * L);
    std::vector<double> m(W, kInf);
    for (std::size_t w = 0; w < W; ++w)
        for (std::size_t l = 0; l < L; ++l) {
            d[w * L + l] = distance(witnesses[w], witnesses[landmarks[l]]);
            m[w] = std::min(m[w], d[w * L + l]);
        }
    auto value_of = [&](const Simplex& s) {
        double best = kInf;
        for (std::size_t w = 0; w < W; ++w) {
            double far = 0.0;
            for (std::uint32_t v : s) far = std::max(far, d[w * L + v]);
            best = std::min(best, far - m[w]);
        }
        return std::max(best, 0.0);
    };

    detail::SimplexBudget budget(max_simplices);
    FilteredComplex fc;
    fc.kind = ComplexKind::Witness;
    fc.r_max = r_max;
    fc.vertex_ids.assign(landmarks.begin(), landmarks.end());
    budget.take(L);
    for (std::uint32_t i = 0; i < L; ++i) fc.entries.push_back({Simplex{i}, 0.0});
    std::vector<char> adj(L * L, 0);
    std::vector<std::vector<std::uint32_t>> up(L);
    if (max_dim >= 1)
        for (std::uint32_t i = 0; i < L; ++i)
            for (std::uint32_t j = i + 1; j < L; ++j) {
                const double v = value_of(Simplex{i, j});
                if (v > r_max) continue;
                budget.take();
                adj[i * L + j] = adj[j * L + i] = 1;
                up[i].push_back(j);
                fc.entries.push_back({Simplex{i, j}, v});
            }
    detail::expand_cliques(L, up, adj, max_dim, r_max, value_of, budget, fc.entries);
    fc.sort();
    return fc;
}

enum class RadiusPolicy { Max, Mean };
enum class LandmarkMethod { Uniform, MaxMin };

struct FiltrationConfig {
    ComplexKind kind = ComplexKind::Alpha;
    RadiusPolicy r_max_policy = RadiusPolicy::Max;
    double landmark_fraction = 0.05;
    LandmarkMethod landmark_method = LandmarkMethod::Uniform;
    int max_dim = 3;
    std::size_t max_simplices = kDefaultMaxSimplices;
};

inline double filtration_radius(std::span<const Point2> pts, RadiusPolicy policy) {
    return policy == RadiusPolicy::Max ? max_pairwise_distance(pts) : mean_pairwise_distance(pts);
}

inline FilteredComplex build_filtration(std::span<const Point2> pts, const FiltrationConfig& cfg, std::uint64_t seed) {
    switch (cfg.kind) {
        case ComplexKind::Alpha: return alpha_filtration(pts);
        case ComplexKind::Rips:
            return rips_filtration(pts, filtration_radius(pts, cfg.r_max_policy), cfg.max_dim, cfg.max_simplices);
        case ComplexKind::Cech:
            return cech_filtration(pts, filtration_radius(pts, cfg.r_max_policy), cfg.max_dim, cfg.max_simplices);
        case ComplexKind::Witness: {
            if (!(cfg.landmark_fraction > 0.0 && cfg.landmark_fraction <= 1.0))
                fail(ErrorKind::InvalidArgument, "landmark fraction must lie in (0, 1]");
            const std::size_t k = std::clamp<std::size_t>(
                static_cast<std::size_t>(std::ceil(cfg.landmark_fraction * double(pts.size()))), 1, pts.size());
            const auto landmarks = cfg.landmark_method == LandmarkMethod::MaxMin ? maxmin_landmarks(pts, k, seed)
                                                                                 : uniform_landmarks(pts.size(), k, seed);
            return witness_filtration(pts, landmarks, filtration_radius(pts, cfg.r_max_policy), cfg.max_dim,
                                      cfg.max_simplices);
        }
    }
    fail(ErrorKind::InvalidArgument, "unknown complex kind");
}

}  // namespace topoguard

#pragma once

// Bottleneck, p-Wasserstein and Hausdorff distances between persistence
// diagrams under the L-infinity ground metric with diagonal projections.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "topoguard/error.hpp"
#include "topoguard/persistence.hpp"

namespace topoguard {

inline constexpr std::size_t kDiagonal = kNone;

/// L-infinity distance; two infinite deaths compare by birth alone.
inline double ground_distance(const DiagramPoint& a, const DiagramPoint& b) {
    const bool ia = a.essential(), ib = b.essential();
    if (ia != ib) fail(ErrorKind::InfiniteMismatch, "finite point compared with an essential point");
    if (ia) return std::abs(a.birth - b.birth);
    return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}

/// Distance to the nearest diagonal point; infinite for essential points.
inline double distance_to_diagonal(const DiagramPoint& a) noexcept {
    return a.essential() ? kInf : 0.5 * (a.death - a.birth);
}

struct MatchedPair {
    std::size_t a = kDiagonal;  // index into the first diagram or kDiagonal
    std::size_t b = kDiagonal;
    double cost = 0.0;
};

struct Matching {
    std::vector<MatchedPair> pairs;

    /// (sum of cost^p)^(1/p)
    double cost(double p) const {
        double s = 0.0, top = 0.0;
        for (const auto& m : pairs) top = std::max(top, m.cost);
        if (top == 0.0) return 0.0;
        for (const auto& m : pairs) s += std::pow(m.cost / top, p);
        return top * std::pow(s, 1.0 / p);
    }
    double max_cost() const {
        double top = 0.0;
        for (const auto& m : pairs) top = std::max(top, m.cost);
        return top;
    }
};

namespace detail {

inline void check_order(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) fail(ErrorKind::InvalidArgument, "Wasserstein order must be finite and >= 1");
}

inline void check_single_dim(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b) {
    const DiagramPoint* first = !a.empty() ? &a.front() : (!b.empty() ? &b.front() : nullptr);
    if (!first) return;
    for (const auto* d : {&a, &b})
        for (const auto& x : *d)
            if (x.dim != first->dim)
                fail(ErrorKind::DimensionMismatch, "diagram points of dimensions " + std::to_string(first->dim) +
                                                       " and " + std::to_string(x.dim) + " cannot be matched");
}

struct Split {
    std::vector<std::size_t> finite, essential;
};

inline Split split(const std::vector<DiagramPoint>& d) {
    Split s;
    for (std::size_t i = 0; i < d.size(); ++i) (d[i].essential() ? s.essential : s.finite).push_back(i);
    return s;
}

// Essential points of equal count matched in birth order.
inline void match_essential(const std::vector<DiagramPoint>& A, const std::vector<DiagramPoint>& B, Split& sa,
                            Split& sb, Matching& out) {
    if (sa.essential.size() != sb.essential.size())
        fail(ErrorKind::InfiniteMismatch,
             "essential point counts differ (" + std::to_string(sa.essential.size()) + " vs " +
                 std::to_string(sb.essential.size()) + ") in dimension " +
                 std::to_string(A.empty() ? B.front().dim : A.front().dim));
    auto by_birth = [](const std::vector<DiagramPoint>& d) {
        return [p = &d](std::size_t x, std::size_t y) {
            const auto& d = *p;
            return d[x].birth < d[y].birth || (d[x].birth == d[y].birth && x < y);
        };
    };
    std::sort(sa.essential.begin(), sa.essential.end(), by_birth(A));
    std::sort(sb.essential.begin(), sb.essential.end(), by_birth(B));
    for (std::size_t k = 0; k < sa.essential.size(); ++k) {
        const std::size_t i = sa.essential[k], j = sb.essential[k];
        out.pairs.push_back({i, j, std::abs(A[i].birth - B[j].birth)});
    }
}

inline bool common_birth(const std::vector<DiagramPoint>& A, const std::vector<DiagramPoint>& B, const Split& sa,
                         const Split& sb) {
    const double* b0 = nullptr;
    for (auto [d, s] : {std::pair{&A, &sa}, std::pair{&B, &sb}})
        for (std::size_t i : s->finite) {
            if (!b0) b0 = &(*d)[i].birth;
            else if ((*d)[i].birth != *b0) return false;
        }
    return true;
}

// Exact partial matching of points sharing one birth value: an order-
// preserving alignment of sorted deaths. `bottleneck` minimises the largest
// cost instead of the sum of powers.
inline void match_common_birth(const std::vector<DiagramPoint>& A, const std::vector<DiagramPoint>& B,
                               std::vector<std::size_t> ia, std::vector<std::size_t> ib, double p, bool bottleneck,
                               double scale, Matching& out) {
    const std::size_t n = ia.size(), m = ib.size();
    if ((n + 1) * (m + 1) > 400'000'000ULL)
        fail(ErrorKind::TooLarge, "diagram matching of " + std::to_string(n) + " x " + std::to_string(m) + " points");
    auto by_death = [](const std::vector<DiagramPoint>& d) {
        return [p = &d](std::size_t x, std::size_t y) {
            const auto& d = *p;
            return d[x].death < d[y].death || (d[x].death == d[y].death && x < y);
        };
    };
    std::sort(ia.begin(), ia.end(), by_death(A));
    std::sort(ib.begin(), ib.end(), by_death(B));
    auto w = [&](double c) { return bottleneck ? c : std::pow(c / scale, p); };
    auto combine = [&](double acc, double c) { return bottleneck ? std::max(acc, c) : acc + c; };
    std::vector<double> ga(n), gb(m);
    for (std::size_t i = 0; i < n; ++i) ga[i] = w(distance_to_diagonal(A[ia[i]]));
    for (std::size_t j = 0; j < m; ++j) gb[j] = w(distance_to_diagonal(B[ib[j]]));

    // choice: 0 = a to diagonal, 1 = b to diagonal, 2 = match
    std::vector<unsigned char> choice((n + 1) * (m + 1), 0);
    std::vector<double> prev(m + 1), cur(m + 1);
    prev[0] = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
        prev[j] = combine(prev[j - 1], gb[j - 1]);
        choice[j] = 1;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = combine(prev[0], ga[i - 1]);
        choice[i * (m + 1)] = 0;
        const double da = A[ia[i - 1]].death;
        for (std::size_t j = 1; j <= m; ++j) {
            double best = combine(prev[j], ga[i - 1]);
            unsigned char c = 0;
            const double via_b = combine(cur[j - 1], gb[j - 1]);
            if (via_b < best) best = via_b, c = 1;
            const double via_m = combine(prev[j - 1], w(std::abs(da - B[ib[j - 1]].death)));
            if (via_m < best) best = via_m, c = 2;
            cur[j] = best;
            choice[i * (m + 1) + j] = c;
        }
        std::swap(prev, cur);
    }
    std::vector<MatchedPair> rev;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        const unsigned char c = choice[i * (m + 1) + j];
        if (c == 2) {
            rev.push_back({ia[i - 1], ib[j - 1], ground_distance(A[ia[i - 1]], B[ib[j - 1]])});
            --i, --j;
        } else if (c == 1) {
            rev.push_back({kDiagonal, ib[j - 1], distance_to_diagonal(B[ib[j - 1]])});
            --j;
        } else {
            rev.push_back({ia[i - 1], kDiagonal, distance_to_diagonal(A[ia[i - 1]])});
            --i;
        }
    }
    out.pairs.insert(out.pairs.end(), rev.rbegin(), rev.rend());
}

/// Minimum-cost assignment of every row to a distinct column (rows <= cols).
/// Returns the column of each row.
inline std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t rows, std::size_t cols) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0), minv(cols + 1);
    std::vector<std::size_t> p(cols + 1, 0), way(cols + 1, 0);
    std::vector<char> used(cols + 1);
    for (std::size_t i = 1; i <= rows; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            const double* row = &cost[(i0 - 1) * cols];
            for (std::size_t j = 1; j <= cols; ++j) {
                if (used[j]) continue;
                const double c = row[j - 1] - u[i0] - v[j];
                if (c < minv[j]) minv[j] = c, way[j] = j0;
                if (minv[j] < delta) delta = minv[j], j1 = j;
            }
            for (std::size_t j = 0; j <= cols; ++j)
                if (used[j]) u[p[j]] += delta, v[j] -= delta;
                else minv[j] -= delta;
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assign(rows, kNone);
    for (std::size_t j = 1; j <= cols; ++j)
        if (p[j] != 0) assign[p[j] - 1] = j - 1;
    return assign;
}

// Optimal p-Wasserstein matching of finite points. The smaller side becomes
// the rows; each row may take a real column or its own diagonal column, and
// a real column left unassigned goes to the diagonal. Costs above `cap` get a
// penalty exceeding any matching whose costs all stay below `scale`.
inline void match_generic(const std::vector<DiagramPoint>& A, const std::vector<DiagramPoint>& B,
                          const std::vector<std::size_t>& ia, const std::vector<std::size_t>& ib, double p,
                          double scale, Matching& out, double cap = kInf) {
    const bool swap_sides = ia.size() > ib.size();
    const auto& R = swap_sides ? B : A;
    const auto& C = swap_sides ? A : B;
    const auto& ir = swap_sides ? ib : ia;
    const auto& ic = swap_sides ? ia : ib;
    const std::size_t n = ir.size(), m = ic.size();
    if (n == 0) {
        for (std::size_t j : ic)
            out.pairs.push_back(swap_sides ? MatchedPair{j, kDiagonal, distance_to_diagonal(C[j])}
                                           : MatchedPair{kDiagonal, j, distance_to_diagonal(C[j])});
        return;
    }
    if (n * (n + m) > 200'000'000ULL)
        fail(ErrorKind::TooLarge, "diagram matching of " + std::to_string(n) + " x " + std::to_string(m) + " points");
    const double penalty = 2.0 * double(n + m + 1);
    auto w = [&](double c) { return c > cap ? penalty : std::pow(c / scale, p); };
    std::vector<double> gc(m);
    for (std::size_t j = 0; j < m; ++j) gc[j] = w(distance_to_diagonal(C[ic[j]]));
    const std::size_t cols = m + n;
    std::vector<double> cost(n * cols);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = &cost[i * cols];
        for (std::size_t j = 0; j < m; ++j) row[j] = w(ground_distance(R[ir[i]], C[ic[j]])) - gc[j];
        const double gr = w(distance_to_diagonal(R[ir[i]]));
        for (std::size_t k = 0; k < n; ++k) row[m + k] = gr;
    }
    const auto assign = solve_assignment(cost, n, cols);
    std::vector<char> taken(m, 0);
    auto emit = [&](std::size_t r, std::size_t c, double d) {
        out.pairs.push_back(swap_sides ? MatchedPair{c, r, d} : MatchedPair{r, c, d});
    };
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = assign[i];
        if (j < m) {
            taken[j] = 1;
            emit(ir[i], ic[j], ground_distance(R[ir[i]], C[ic[j]]));
        } else {
            emit(ir[i], kDiagonal, distance_to_diagonal(R[ir[i]]));
        }
    }
    for (std::size_t j = 0; j < m; ++j)
        if (!taken[j]) emit(kDiagonal, ic[j], distance_to_diagonal(C[ic[j]]));
}

inline double cost_scale(const std::vector<DiagramPoint>& A, const std::vector<DiagramPoint>& B, const Split& sa,
                         const Split& sb) {
    double lo = kInf, hi = -kInf;
    for (auto [d, s] : {std::pair{&A, &sa}, std::pair{&B, &sb}})
        for (std::size_t i : s->finite) {
            lo = std::min(lo, (*d)[i].birth);
            hi = std::max(hi, (*d)[i].death);
        }
    const double s = hi - lo;
    return s > 0.0 && std::isfinite(s) ? s : 1.0;
}

// Hopcroft-Karp on an adjacency list from left to right vertices.
class BipartiteMatcher {
public:
    BipartiteMatcher(std::size_t left, std::size_t right, const std::vector<std::vector<std::size_t>>& adj)
        : n_(left), adj_(adj), match_l_(left, kNone), match_r_(right, kNone), dist_(left) {}

    std::size_t run() {
        std::size_t size = 0;
        while (bfs())
            for (std::size_t u = 0; u < n_; ++u)
                if (match_l_[u] == kNone && dfs(u)) ++size;
        return size;
    }

private:
    bool bfs() {
        std::queue<std::size_t> q;
        bool found = false;
        for (std::size_t u = 0; u < n_; ++u) {
            dist_[u] = match_l_[u] == kNone ? 0 : kNone;
            if (match_l_[u] == kNone) q.push(u);
        }
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            for (std::size_t v : adj_[u]) {
                const std::size_t w = match_r_[v];
                if (w == kNone) found = true;
                else if (dist_[w] == kNone) {
                    dist_[w] = dist_[u] + 1;
                    q.push(w);
                }
            }
        }
        return found;
    }

    bool dfs(std::size_t u) {
        for (std::size_t v : adj_[u]) {
            const std::size_t w = match_r_[v];
            if (w == kNone || (dist_[w] == dist_[u] + 1 && dfs(w))) {
                match_l_[u] = v;
                match_r_[v] = u;
                return true;
            }
        }
        dist_[u] = kNone;
        return false;
    }

    std::size_t n_;
    const std::vector<std::vector<std::size_t>>& adj_;
    std::vector<std::size_t> match_l_, match_r_, dist_;
};

// Points farther than delta from the diagonal must be matched within delta.
// A matching covering both forced sets exists iff one covers each of them.
inline bool bottleneck_feasible(const std::vector<DiagramPoint>& A, const std::vector<DiagramPoint>& B,
                                const std::vector<std::size_t>& ia, const std::vector<std::size_t>& ib, double delta) {
    auto covers = [&](const std::vector<DiagramPoint>& P, const std::vector<std::size_t>& ip,
                      const std::vector<DiagramPoint>& Q, const std::vector<std::size_t>& iq) {
        std::vector<std::vector<std::size_t>> adj;
        for (std::size_t i : ip) {
            if (distance_to_diagonal(P[i]) <= delta) continue;
            adj.emplace_back();
            for (std::size_t j = 0; j < iq.size(); ++j)
                if (ground_distance(P[i], Q[iq[j]]) <= delta) adj.back().push_back(j);
            if (adj.back().empty()) return false;
        }
        if (adj.empty()) return true;
        return BipartiteMatcher(adj.size(), iq.size(), adj).run() == adj.size();
    };
    return covers(A, ia, B, ib) && covers(B, ib, A, ia);
}

inline double bottleneck_generic(const std::vector<DiagramPoint>& A, const std::vector<DiagramPoint>& B,
                                 const std::vector<std::size_t>& ia, const std::vector<std::size_t>& ib) {
    std::vector<double> cand{0.0};
    for (std::size_t i : ia) cand.push_back(distance_to_diagonal(A[i]));
    for (std::size_t j : ib) cand.push_back(distance_to_diagonal(B[j]));
    for (std::size_t i : ia)
        for (std::size_t j : ib) cand.push_back(ground_distance(A[i], B[j]));
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    std::size_t lo = 0, hi = cand.size() - 1;  // cand[hi] is always feasible
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (bottleneck_feasible(A, B, ia, ib, cand[mid])) hi = mid;
        else lo = mid + 1;
    }
    return cand[lo];
}

}  // namespace detail

/// Optimal p-Wasserstein matching between two single-dimension diagrams.
inline Matching optimal_matching(const std::vector<DiagramPoint>& A, const std::vector<DiagramPoint>& B,
                                 double p = 1.0) {
    detail::check_order(p);
    detail::check_single_dim(A, B);
    auto sa = detail::split(A), sb = detail::split(B);
    Matching out;
    detail::match_essential(A, B, sa, sb, out);
    const double scale = detail::cost_scale(A, B, sa, sb);
    if (detail::common_birth(A, B, sa, sb)) {
        detail::match_common_birth(A, B, sa.finite, sb.finite, p, false, scale, out);
        return out;
    }
    // For large p the powered costs span too many magnitudes for the dual
    // updates. W_p <= N^(1/p) d_B, so larger costs never appear in an optimum.
    const double db = p > 1.0 ? detail::bottleneck_generic(A, B, sa.finite, sb.finite) : 0.0;
    if (db > 0.0) {
        const double cap = db * std::pow(double(sa.finite.size() + sb.finite.size()), 1.0 / p) * (1.0 + 1e-12);
        detail::match_generic(A, B, sa.finite, sb.finite, p, cap, out, cap);
    } else {
        detail::match_generic(A, B, sa.finite, sb.finite, p, scale, out);
    }
    return out;
}

inline double wasserstein(const std::vector<DiagramPoint>& A, const std::vector<DiagramPoint>& B, double p = 1.0) {
    return optimal_matching(A, B, p).cost(p);
}

inline double bottleneck(const std::vector<DiagramPoint>& A, const std::vector<DiagramPoint>& B) {
    detail::check_single_dim(A, B);
    auto sa = detail::split(A), sb = detail::split(B);
    Matching ess;
    detail::match_essential(A, B, sa, sb, ess);
    double finite;
    if (detail::common_birth(A, B, sa, sb)) {
        Matching m;
        detail::match_common_birth(A, B, sa.finite, sb.finite, 1.0, true, 1.0, m);
        finite = m.max_cost();
    } else {
        finite = detail::bottleneck_generic(A, B, sa.finite, sb.finite);
    }
    return std::max(ess.max_cost(), finite);
}

/// Symmetric Hausdorff distance with the diagonal as a candidate target.
/// Infinite when an essential point has no essential counterpart.
inline double hausdorff(const std::vector<DiagramPoint>& A, const std::vector<DiagramPoint>& B) {
    detail::check_single_dim(A, B);
    auto directed = [](const std::vector<DiagramPoint>& P, const std::vector<DiagramPoint>& Q) {
        double worst = 0.0;
        for (const auto& x : P) {
            double best = distance_to_diagonal(x);
            for (const auto& y : Q)
                if (x.essential() == y.essential()) best = std::min(best, ground_distance(x, y));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(A, B), directed(B, A));
}

inline double wasserstein(const PersistenceDiagram& A, const PersistenceDiagram& B, double p = 1.0) {
    return wasserstein(A.points, B.points, p);
}
inline double bottleneck(const PersistenceDiagram& A, const PersistenceDiagram& B) {
    return bottleneck(A.points, B.points);
}
inline double hausdorff(const PersistenceDiagram& A, const PersistenceDiagram& B) {
    return hausdorff(A.points, B.points);
}

/// Per-dimension distances (dims 0..2) with aggregates: the maximum of the
/// bottleneck values and (sum_k W_k^p)^(1/p).
struct DistanceReport {
    double p = 1.0;
    std::array<double, 3> bottleneck{};
    std::array<double, 3> wasserstein{};
    double bottleneck_max = 0.0;
    double wasserstein_total = 0.0;
};

inline DistanceReport compare_diagrams(const PersistenceDiagram& A, const PersistenceDiagram& B, double p = 1.0) {
    detail::check_order(p);
    for (const auto* d : {&A, &B})
        for (const auto& x : d->points)
            if (x.dim < 0 || x.dim > kMaxHomologyDim)
                fail(ErrorKind::DimensionMismatch, "dimension " + std::to_string(x.dim) + " is outside 0..2");
    std::string bad;
    for (int k = 0; k <= kMaxHomologyDim; ++k) {
        auto count = [k](const PersistenceDiagram& d) {
            return std::count_if(d.points.begin(), d.points.end(),
                                 [k](const DiagramPoint& x) { return x.dim == k && x.essential(); });
        };
        if (count(A) != count(B)) bad += (bad.empty() ? "" : ",") + std::to_string(k);
    }
    if (!bad.empty()) fail(ErrorKind::InfiniteMismatch, "essential point counts differ in dims " + bad);

    DistanceReport r;
    r.p = p;
    double sum = 0.0, top = 0.0;
    for (int k = 0; k <= kMaxHomologyDim; ++k) {
        const auto a = A.of_dim(k).points, b = B.of_dim(k).points;
        r.bottleneck[k] = bottleneck(a, b);
        r.wasserstein[k] = wasserstein(a, b, p);
        r.bottleneck_max = std::max(r.bottleneck_max, r.bottleneck[k]);
        top = std::max(top, r.wasserstein[k]);
    }
    if (top > 0.0) {
        for (double w : r.wasserstein) sum += std::pow(w / top, p);
        r.wasserstein_total = top * std::pow(sum, 1.0 / p);
    }
    return r;
}

}  // namespace topoguard

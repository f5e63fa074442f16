#pragma once

// Z/2 persistent homology by boundary-matrix column reduction.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "topoguard/complexes.hpp"
#include "topoguard/error.hpp"

namespace topoguard {

inline constexpr int kMaxHomologyDim = 2;

struct BoundaryMatrix {
    std::vector<std::vector<std::size_t>> columns;  // sorted row indices
    std::vector<int> dims;

    std::size_t size() const noexcept { return columns.size(); }
};

namespace detail {

struct SimplexHash {
    std::size_t operator()(const Simplex& s) const noexcept {
        std::uint64_t h = 0xcbf29ce484222325ULL ^ s.n;
        for (std::uint32_t x : s) h = (h ^ x) * 0x100000001b3ULL;
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

// Symmetric difference of two sorted columns, written into `a`.
inline void add_column(std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                       std::vector<std::size_t>& scratch) {
    scratch.clear();
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(scratch));
    a.swap(scratch);
}

}  // namespace detail

inline BoundaryMatrix boundary_matrix(const FilteredComplex& fc) {
    BoundaryMatrix bm;
    bm.columns.resize(fc.size());
    bm.dims.resize(fc.size());
    std::unordered_map<Simplex, std::size_t, detail::SimplexHash> index;
    index.reserve(fc.size() * 2);
    for (std::size_t j = 0; j < fc.size(); ++j) {
        const Simplex& s = fc.entries[j].simplex;
        bm.dims[j] = s.dim();
        if (s.n > 1) {
            auto& col = bm.columns[j];
            for (std::size_t k = 0; k < s.n; ++k) {
                auto it = index.find(s.facet(k));
                if (it == index.end())
                    fail(ErrorKind::InvalidFiltration,
                         "simplex " + std::to_string(j) + " has a face that is missing or comes later");
                col.push_back(it->second);
            }
            std::sort(col.begin(), col.end());
        }
        if (!index.emplace(s, j).second)
            fail(ErrorKind::InvalidFiltration, "duplicate simplex at position " + std::to_string(j));
    }
    return bm;
}

struct PersistencePair {
    std::size_t birth_index = 0;
    std::size_t death_index = kNone;  // kNone for an essential class
    int dim = 0;

    bool essential() const noexcept { return death_index == kNone; }
    friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

struct Reduction {
    std::vector<PersistencePair> pairs;  // sorted by birth index
    std::vector<std::vector<std::size_t>> reduced;
};

/// Standard left-to-right reduction. With `twist`, columns are processed by
/// decreasing dimension and the column of each pivot row is cleared.
inline Reduction reduce_matrix(const BoundaryMatrix& bm, bool twist = false) {
    const std::size_t n = bm.size();
    Reduction out;
    out.reduced = bm.columns;
    auto& cols = out.reduced;
    std::vector<std::size_t> owner(n, kNone);  // pivot row -> column
    std::vector<char> cleared(n, 0);
    std::vector<std::size_t> scratch;

    auto reduce_column = [&](std::size_t j) {
        auto& col = cols[j];
        while (!col.empty()) {
            const std::size_t low = col.back();
            const std::size_t k = owner[low];
            if (k == kNone) {
                owner[low] = j;
                if (twist) {
                    cleared[low] = 1;
                    cols[low].clear();
                }
                return;
            }
            detail::add_column(col, cols[k], scratch);
        }
    };

    if (twist) {
        int top = 0;
        for (int d : bm.dims) top = std::max(top, d);
        for (int d = top; d >= 1; --d)
            for (std::size_t j = 0; j < n; ++j)
                if (bm.dims[j] == d && !cleared[j]) reduce_column(j);
    } else {
        for (std::size_t j = 0; j < n; ++j) reduce_column(j);
    }

    std::vector<char> paired(n, 0);
    for (std::size_t j = 0; j < n; ++j)
        if (!cols[j].empty()) {
            const std::size_t b = cols[j].back();
            out.pairs.push_back({b, j, bm.dims[b]});
            paired[b] = paired[j] = 1;
        }
    for (std::size_t j = 0; j < n; ++j)
        if (!paired[j]) out.pairs.push_back({j, kNone, bm.dims[j]});
    std::sort(out.pairs.begin(), out.pairs.end(),
              [](const PersistencePair& a, const PersistencePair& b) { return a.birth_index < b.birth_index; });
    return out;
}

inline std::vector<PersistencePair> reduce(const BoundaryMatrix& bm, bool twist = false) {
    return reduce_matrix(bm, twist).pairs;
}

struct DiagramPoint {
    double birth = 0.0;
    double death = 0.0;
    int dim = 0;

    bool essential() const noexcept { return std::isinf(death); }
    double persistence() const noexcept { return death - birth; }
    friend bool operator==(const DiagramPoint&, const DiagramPoint&) = default;
};

struct DiagramMeta {
    std::string complex_kind;
    double r_max = kInf;
    std::size_t n_points = 0;
};

/// Multiset of (birth, death, dim); death may be +inf.
struct PersistenceDiagram {
    std::vector<DiagramPoint> points;
    DiagramMeta meta;

    std::size_t size() const noexcept { return points.size(); }

    PersistenceDiagram of_dim(int k) const {
        PersistenceDiagram d;
        d.meta = meta;
        for (const auto& p : points)
            if (p.dim == k) d.points.push_back(p);
        return d;
    }

    /// Canonical order: (dim, birth, death).
    void sort() {
        std::sort(points.begin(), points.end(), [](const DiagramPoint& a, const DiagramPoint& b) {
            if (a.dim != b.dim) return a.dim < b.dim;
            if (a.birth != b.birth) return a.birth < b.birth;
            return a.death < b.death;
        });
    }
};

/// Maps pairs of dimension k (or all dims 0..2 when k < 0) to filtration
/// values, dropping zero-persistence points.
inline PersistenceDiagram diagram(const std::vector<PersistencePair>& pairs, const FilteredComplex& fc, int k = -1) {
    PersistenceDiagram d;
    d.meta.complex_kind = std::string(to_string(fc.kind));
    d.meta.r_max = fc.r_max;
    d.meta.n_points = fc.vertex_ids.size();
    for (const auto& p : pairs) {
        if (p.dim > kMaxHomologyDim || (k >= 0 && p.dim != k)) continue;
        const double b = fc.entries[p.birth_index].value;
        const double de = p.essential() ? kInf : fc.entries[p.death_index].value;
        if (de == b) continue;
        d.points.push_back({b, de, p.dim});
    }
    d.sort();
    return d;
}

/// Full diagram (dims 0..2) of a filtration.
inline PersistenceDiagram compute_diagram(const FilteredComplex& fc, bool twist = true) {
    return diagram(reduce(boundary_matrix(fc), twist), fc);
}

inline std::array<std::size_t, 3> betti_numbers(const PersistenceDiagram& d, double r) {
    std::array<std::size_t, 3> beta{};
    for (const auto& p : d.points)
        if (p.dim >= 0 && p.dim <= kMaxHomologyDim && p.birth <= r && r < p.death) ++beta[p.dim];
    return beta;
}

inline std::array<std::size_t, 3> betti_numbers(const FilteredComplex& fc, double r) {
    return betti_numbers(compute_diagram(fc), r);
}

/// Number of dim-k points equal to (n, r).
inline std::size_t multiplicity(const PersistenceDiagram& d, double n, double r, int k) {
    return static_cast<std::size_t>(std::count_if(d.points.begin(), d.points.end(), [&](const DiagramPoint& p) {
        return p.dim == k && p.birth == n && p.death == r;
    }));
}

inline std::string format_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_diagram_csv(std::ostream& os, const PersistenceDiagram& d) {
    os << "dim,birth,death\n";
    for (const auto& p : d.points) os << p.dim << ',' << format_value(p.birth) << ',' << format_value(p.death) << '\n';
}

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

/// Parses a finite double or "inf"/"+inf"; nullopt-like false on failure.
inline bool parse_number(const std::string& s, double& out, bool allow_inf) {
    if (allow_inf && (s == "inf" || s == "+inf" || s == "Infinity" || s == "infinity")) {
        out = kInf;
        return true;
    }
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

inline PersistenceDiagram read_diagram_csv(std::istream& is, const std::string& name = "diagram") {
    PersistenceDiagram d;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(is, line)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto f = detail::split_csv(line);
        if (!header) {
            if (f.size() != 3 || f[0] != "dim" || f[1] != "birth" || f[2] != "death")
                fail(ErrorKind::ParseError, name + ":" + std::to_string(lineno) + ": expected header dim,birth,death");
            header = true;
            continue;
        }
        double dim = 0, b = 0, de = 0;
        if (f.size() != 3 || !detail::parse_number(f[0], dim, false) || dim != std::floor(dim) || dim < 0 ||
            !detail::parse_number(f[1], b, false) || !detail::parse_number(f[2], de, true) || de < b)
            fail(ErrorKind::ParseError, name + ":" + std::to_string(lineno) + ": malformed row '" + line + "'");
        d.points.push_back({b, de, static_cast<int>(dim)});
    }
    if (!header) fail(ErrorKind::ParseError, name + ": missing header");
    d.sort();
    return d;
}

}  // namespace topoguard

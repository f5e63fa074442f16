#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "topoguard/persistence.hpp"

using namespace topoguard;

namespace {

FilteredComplex manual(std::vector<FilteredSimplex> entries) {
    FilteredComplex fc;
    fc.entries = std::move(entries);
    return fc;
}

FilteredComplex four_cycle() {
    return manual({{Simplex{0}, 0}, {Simplex{1}, 0}, {Simplex{2}, 0}, {Simplex{3}, 0},
                   {Simplex{0, 1}, 1}, {Simplex{1, 2}, 1}, {Simplex{2, 3}, 1}, {Simplex{0, 3}, 2}});
}

// Z/2 product of boundary columns: every row must appear an even number of times.
bool boundary_squared_zero(const BoundaryMatrix& bm) {
    for (const auto& col : bm.columns) {
        std::map<std::size_t, int> parity;
        for (std::size_t f : col)
            for (std::size_t g : bm.columns[f]) parity[g] ^= 1;
        for (auto [row, p] : parity)
            if (p) return false;
    }
    return true;
}

std::vector<FilteredComplex> sample_filtrations() {
    std::vector<FilteredComplex> out;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto pts = oracle::random_points(14, seed);
        out.push_back(rips_filtration(pts, 0.5, 3));
        out.push_back(cech_filtration(pts, 0.4, 3));
        out.push_back(alpha_filtration(pts));
        out.push_back(witness_filtration(pts, maxmin_landmarks(pts, 7, seed), 1.0, 3));
    }
    return out;
}

}  // namespace

TEST(BoundaryMatrix, SmallComplexes) {
    EXPECT_TRUE(boundary_matrix(manual({{Simplex{0}, 0}})).columns[0].empty());
    const auto edge = boundary_matrix(manual({{Simplex{0}, 0}, {Simplex{1}, 0}, {Simplex{0, 1}, 1}}));
    EXPECT_EQ(edge.columns[2], (std::vector<std::size_t>{0, 1}));
    const auto tri = boundary_matrix(manual({{Simplex{0}, 0},
                                             {Simplex{1}, 0},
                                             {Simplex{2}, 0},
                                             {Simplex{0, 1}, 1},
                                             {Simplex{0, 2}, 1},
                                             {Simplex{1, 2}, 1},
                                             {Simplex{0, 1, 2}, 2}}));
    EXPECT_EQ(tri.columns[6], (std::vector<std::size_t>{3, 4, 5}));
}

TEST(BoundaryMatrix, MissingFaceRejected) {
    try {
        boundary_matrix(manual({{Simplex{0}, 0}, {Simplex{0, 1}, 1}}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidFiltration);
    }
}

TEST(BoundaryMatrix, BoundarySquaredIsZero) {
    for (const auto& fc : sample_filtrations()) EXPECT_TRUE(boundary_squared_zero(boundary_matrix(fc)));
}

TEST(Reduce, TwoIsolatedVertices) {
    const auto d = compute_diagram(manual({{Simplex{0}, 0}, {Simplex{1}, 0}}));
    ASSERT_EQ(d.size(), 2u);
    for (const auto& p : d.points) EXPECT_TRUE(p.essential());
}

TEST(Reduce, ElderRule) {
    const auto pairs = reduce(boundary_matrix(manual({{Simplex{0}, 0}, {Simplex{1}, 0}, {Simplex{0, 1}, 1}})));
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0], (PersistencePair{0, kNone, 0}));
    EXPECT_EQ(pairs[1], (PersistencePair{1, 2, 0}));
}

TEST(Reduce, FourCycle) {
    const auto fc = four_cycle();
    const auto pairs = reduce(boundary_matrix(fc));
    std::size_t essential_h1 = 0;
    for (const auto& p : pairs)
        if (p.dim == 1 && p.essential()) {
            ++essential_h1;
            EXPECT_EQ(p.birth_index, 7u);
        }
    EXPECT_EQ(essential_h1, 1u);
    const auto d1 = compute_diagram(fc).of_dim(1);
    ASSERT_EQ(d1.size(), 1u);
    EXPECT_EQ(d1.points[0].birth, 2.0);
    EXPECT_TRUE(d1.points[0].essential());
}

TEST(Reduce, FilledTriangleAtZeroHasNoH1) {
    const auto d = compute_diagram(manual({{Simplex{0}, 0},
                                           {Simplex{1}, 0},
                                           {Simplex{2}, 0},
                                           {Simplex{0, 1}, 0},
                                           {Simplex{0, 2}, 0},
                                           {Simplex{1, 2}, 0},
                                           {Simplex{0, 1, 2}, 0}}));
    EXPECT_EQ(d.of_dim(1).size(), 0u);
    EXPECT_EQ(d.size(), 1u);
}

TEST(Reduce, IsolatedPoints) {
    std::vector<FilteredSimplex> e;
    for (std::uint32_t i = 0; i < 6; ++i) e.push_back({Simplex{i}, 0});
    const auto d = compute_diagram(manual(e));
    EXPECT_EQ(multiplicity(d, 0.0, kInf, 0), 6u);
}

TEST(Reduce, PairingPartitionAndTwistEquivalence) {
    for (const auto& fc : sample_filtrations()) {
        const auto bm = boundary_matrix(fc);
        const auto plain = reduce(bm, false), twist = reduce(bm, true);
        EXPECT_EQ(plain, twist);
        std::vector<int> seen(fc.size(), 0);
        std::size_t essential = 0;
        for (const auto& p : plain) {
            ++seen[p.birth_index];
            if (p.essential()) ++essential;
            else {
                ++seen[p.death_index];
                EXPECT_EQ(bm.dims[p.death_index], p.dim + 1);
                EXPECT_LT(p.birth_index, p.death_index);
            }
        }
        for (int s : seen) EXPECT_EQ(s, 1);
        EXPECT_EQ(2 * (plain.size() - essential) + essential, fc.size());
    }
}

TEST(Reduce, BettiMatchesRankOracle) {
    for (const auto& fc : sample_filtrations()) {
        const auto d = compute_diagram(fc);
        std::set<double> values;
        for (const auto& e : fc.entries) values.insert(e.value);
        for (double r : values) EXPECT_EQ(betti_numbers(d, r), oracle::betti_by_rank(fc, r)) << "r=" << r;
    }
}

TEST(Betti, RegularOctagon) {
    std::vector<Point2> pts;
    for (int i = 0; i < 8; ++i) pts.push_back({std::cos(std::numbers::pi * i / 4), std::sin(std::numbers::pi * i / 4)});
    const auto fc = alpha_filtration(pts);
    const double edge = std::sin(std::numbers::pi / 8);  // half the side length
    const double r = 0.5 * (edge + 1.0);                  // between edge closing and filling at radius 1
    EXPECT_EQ(betti_numbers(fc, r), (std::array<std::size_t, 3>{1, 1, 0}));
    EXPECT_EQ(betti_numbers(fc, 1.0 + 1e-12), (std::array<std::size_t, 3>{1, 0, 0}));
}

TEST(Betti, AtZeroCountsPoints) {
    const auto pts = oracle::random_points(17, 3);
    EXPECT_EQ(betti_numbers(alpha_filtration(pts), 0.0), (std::array<std::size_t, 3>{17, 0, 0}));
}

TEST(Betti, UnitSquareAtOne) {
    const std::vector<Point2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    EXPECT_EQ(betti_numbers(alpha_filtration(sq), 1.0), (std::array<std::size_t, 3>{1, 0, 0}));
}

TEST(Multiplicity, Basic) {
    PersistenceDiagram d;
    d.points = {{1, 2, 0}};
    EXPECT_EQ(multiplicity(d, 1, 2, 0), 1u);
    EXPECT_EQ(multiplicity(d, 1, 3, 0), 0u);
}

TEST(Multiplicity, DuplicatedFeaturesAgreeWithBettiDifference) {
    // Two components born at 0.5 that both merge into an older one at 1.0.
    const auto fc = manual({{Simplex{0}, 0.0},
                            {Simplex{1}, 0.5},
                            {Simplex{2}, 0.5},
                            {Simplex{0, 1}, 1.0},
                            {Simplex{0, 2}, 1.0}});
    const auto d = compute_diagram(fc);
    EXPECT_EQ(multiplicity(d, 0.5, 1.0, 0), 2u);

    // Persistent H0 Betti numbers b(a, b): components of K_b containing a vertex of K_a.
    auto persistent_betti = [&](double a, double b) -> long {
        std::vector<int> parent(3);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
        for (const auto& e : fc.entries)
            if (e.simplex.n == 2 && e.value <= b) parent[find(e.simplex[0])] = find(e.simplex[1]);
        std::set<int> roots;
        for (const auto& e : fc.entries)
            if (e.simplex.n == 1 && e.value <= a) roots.insert(find(e.simplex[0]));
        return static_cast<long>(roots.size());
    };
    const double before = 0.0, birth = 0.5, just_before_death = 0.75, death = 1.0;
    const long mu = (persistent_betti(birth, just_before_death) - persistent_betti(birth, death)) -
                    (persistent_betti(before, just_before_death) - persistent_betti(before, death));
    EXPECT_EQ(mu, 2);
    EXPECT_EQ(oracle::betti_by_rank(fc, 0.5)[0], 3u);
    EXPECT_EQ(oracle::betti_by_rank(fc, 1.0)[0], 1u);
}

TEST(DiagramCsv, RoundTrip) {
    PersistenceDiagram d;
    d.points = {{0, 0.1234567890123, 0}, {0, kInf, 0}, {0.2, 0.7, 1}};
    d.sort();
    std::ostringstream os;
    write_diagram_csv(os, d);
    std::istringstream is(os.str());
    EXPECT_EQ(read_diagram_csv(is).points, d.points);
}

TEST(DiagramCsv, MalformedRows) {
    std::istringstream bad("dim,birth,death\n0,1,abc\n");
    try {
        read_diagram_csv(bad, "x.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ParseError);
        EXPECT_NE(std::string(e.what()).find("x.csv:2"), std::string::npos);
    }
    std::istringstream inverted("dim,birth,death\n0,2,1\n");
    EXPECT_THROW(read_diagram_csv(inverted), Error);
    std::istringstream noheader("0,1,2\n");
    EXPECT_THROW(read_diagram_csv(noheader), Error);
}

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "topoguard/diagram_distances.hpp"
#include "topoguard/pipeline.hpp"

using namespace topoguard;

namespace {

const std::string kData = TOPOGUARD_TEST_DATA;

std::vector<DiagramPoint> dgm(std::initializer_list<std::pair<double, double>> pts, int dim = 0) {
    std::vector<DiagramPoint> out;
    for (auto [b, d] : pts) out.push_back({b, d, dim});
    return out;
}

}  // namespace

TEST(GroundDistance, Examples) {
    EXPECT_EQ(ground_distance({1, 3, 0}, {2, 5, 0}), 2.0);
    EXPECT_EQ(ground_distance({0, kInf, 0}, {1, kInf, 0}), 1.0);
    EXPECT_EQ(distance_to_diagonal({0, 2, 0}), 1.0);
    EXPECT_THROW(ground_distance({0, kInf, 0}, {0, 1, 0}), Error);
}

TEST(Bottleneck, Examples) {
    const auto a = dgm({{0, 2}, {1, 3}});
    EXPECT_EQ(bottleneck(a, a), 0.0);
    EXPECT_EQ(bottleneck(dgm({{0, 2}}), {}), 1.0);
    const auto d1 = dgm({{0, 4}, {0, 1}}), d2 = dgm({{1, 4}});
    EXPECT_NEAR(bottleneck(d1, d2), oracle::brute_distances(d1, d2, 1).bottleneck, 1e-12);
}

TEST(Wasserstein, Examples) {
    const auto a = dgm({{0, 2}, {1, 3}});
    EXPECT_EQ(wasserstein(a, a), 0.0);
    EXPECT_EQ(wasserstein(dgm({{0, 2}}), {}, 1.0), 1.0);
}

TEST(Hausdorff, Examples) {
    const auto a = dgm({{0, 2}});
    EXPECT_EQ(hausdorff(a, a), 0.0);
    EXPECT_NEAR(hausdorff(a, dgm({{0, 2}, {0, 0.2}})), 0.1, 1e-15);
    EXPECT_EQ(hausdorff(dgm({{0, kInf}}), {}), kInf);
}

TEST(Distances, RandomAgainstBruteForce) {
    Rng rng(123);
    for (int trial = 0; trial < 300; ++trial) {
        const bool grid = trial % 2 == 0;
        const auto a = oracle::random_diagram(rng, 5, grid), b = oracle::random_diagram(rng, 5, grid);
        for (double p : {1.0, 2.0, 3.5, 64.0}) {
            const auto want = oracle::brute_distances(a, b, p);
            EXPECT_NEAR(wasserstein(a, b, p), want.wasserstein, 1e-9) << "trial " << trial << " p " << p;
            if (p == 1.0) {
                EXPECT_NEAR(bottleneck(a, b), want.bottleneck, 1e-9) << "trial " << trial;
                EXPECT_LE(hausdorff(a, b), bottleneck(a, b) + 1e-12);
            }
        }
    }
}

TEST(Distances, CommonBirthPathAgainstBruteForce) {
    // H0-like diagrams with every birth 0 take the dynamic-programming path.
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<DiagramPoint> a, b;
        for (std::size_t i = rng.index(6); i > 0; --i) a.push_back({0, std::round(rng.uniform(0.1, 3) * 4) / 4, 0});
        for (std::size_t i = rng.index(6); i > 0; --i) b.push_back({0, std::round(rng.uniform(0.1, 3) * 4) / 4, 0});
        for (double p : {1.0, 2.0, 64.0}) {
            const auto want = oracle::brute_distances(a, b, p);
            EXPECT_NEAR(wasserstein(a, b, p), want.wasserstein, 1e-9);
            EXPECT_NEAR(bottleneck(a, b), want.bottleneck, 1e-9);
        }
    }
}

TEST(Distances, EssentialPoints) {
    const auto a = dgm({{0, kInf}, {0.5, 1}}), b = dgm({{0.25, kInf}});
    EXPECT_DOUBLE_EQ(bottleneck(a, b), 0.25);
    EXPECT_DOUBLE_EQ(wasserstein(a, b, 1), 0.5);
    EXPECT_NEAR(wasserstein(a, b, 1), oracle::brute_distances(a, b, 1).wasserstein, 1e-12);
    try {
        wasserstein(dgm({{0, kInf}}), {}, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InfiniteMismatch);
    }
}

TEST(Distances, DimensionMismatch) {
    std::vector<DiagramPoint> a{{0, 1, 0}}, b{{0, 1, 1}};
    try {
        bottleneck(a, b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
}

TEST(Distances, MetricAxiomsAndOrdering) {
    Rng rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = oracle::random_diagram(rng, 6, false), b = oracle::random_diagram(rng, 6, false),
                   c = oracle::random_diagram(rng, 6, false);
        for (double p : {1.0, 2.0}) {
            EXPECT_NEAR(wasserstein(a, b, p), wasserstein(b, a, p), 1e-9);
            EXPECT_LE(wasserstein(a, c, p), wasserstein(a, b, p) + wasserstein(b, c, p) + 1e-9);
            EXPECT_LE(bottleneck(a, b), wasserstein(a, b, p) + 1e-9);
        }
        EXPECT_NEAR(bottleneck(a, b), bottleneck(b, a), 1e-12);
        EXPECT_LE(bottleneck(a, c), bottleneck(a, b) + bottleneck(b, c) + 1e-12);
        EXPECT_LE(wasserstein(a, b, 2.0), wasserstein(a, b, 1.0) + 1e-9);
        // d_B <= W_p <= N^(1/p) d_B with N the number of matched pairs
        const double n_pairs = std::max<double>(1.0, double(a.size() + b.size()));
        EXPECT_GE(wasserstein(a, b, 64.0), bottleneck(a, b) - 1e-9);
        EXPECT_LE(wasserstein(a, b, 64.0), std::pow(n_pairs, 1.0 / 64) * bottleneck(a, b) + 1e-9);
    }
}

TEST(Distances, MatchingIsAPartition) {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = oracle::random_diagram(rng, 8, false), b = oracle::random_diagram(rng, 8, false);
        const Matching m = optimal_matching(a, b, 1.0);
        std::vector<int> ua(a.size(), 0), ub(b.size(), 0);
        for (const auto& pr : m.pairs) {
            ASSERT_FALSE(pr.a == kDiagonal && pr.b == kDiagonal);
            if (pr.a != kDiagonal) ++ua[pr.a];
            if (pr.b != kDiagonal) ++ub[pr.b];
            const double want = pr.a == kDiagonal   ? distance_to_diagonal(b[pr.b])
                                : pr.b == kDiagonal ? distance_to_diagonal(a[pr.a])
                                                    : ground_distance(a[pr.a], b[pr.b]);
            EXPECT_DOUBLE_EQ(pr.cost, want);
        }
        for (int u : ua) EXPECT_EQ(u, 1);
        for (int u : ub) EXPECT_EQ(u, 1);
    }
}

TEST(Distances, LargerDiagramsMatchBetweenPaths) {
    // The generic assignment solver and the common-birth alignment agree when births coincide.
    Rng rng(4);
    std::vector<DiagramPoint> a, b;
    for (int i = 0; i < 60; ++i) a.push_back({0, rng.uniform(0.01, 1), 0});
    for (int i = 0; i < 45; ++i) b.push_back({0, rng.uniform(0.01, 1), 0});
    auto shifted = [](std::vector<DiagramPoint> d) {
        d.push_back({0.5, 0.5 + 1e-9, 0});  // breaks the common birth, costs at most 5e-10
        return d;
    };
    EXPECT_NEAR(wasserstein(a, b, 1), wasserstein(shifted(a), b, 1), 1e-9);
    EXPECT_NEAR(bottleneck(a, b), bottleneck(shifted(a), b), 1e-9);
}

TEST(CompareDiagrams, ListsMismatchedDims) {
    PersistenceDiagram a, b;
    a.points = {{0, kInf, 0}, {0, kInf, 1}};
    b.points = {{0, kInf, 0}};
    try {
        compare_diagrams(a, b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InfiniteMismatch);
        EXPECT_NE(std::string(e.what()).find("dims 1"), std::string::npos);
    }
}

TEST(CmdDistance, Fixtures) {
    std::ifstream f(kData + "/distance/expected.json");
    ASSERT_TRUE(f);
    const auto expected = nlohmann::json::parse(f);
    for (const auto& c : expected["cases"]) {
        const auto a = load_diagram(kData + "/distance/" + c["a"].get<std::string>());
        const auto b = load_diagram(kData + "/distance/" + c["b"].get<std::string>());
        for (int k = 0; k <= 2; ++k) {
            const auto& e = c["dims"][std::to_string(k)];
            const auto ak = a.of_dim(k), bk = b.of_dim(k);
            EXPECT_NEAR(bottleneck(ak, bk), e["bottleneck"].get<double>(), 1e-9);
            EXPECT_NEAR(wasserstein(ak, bk, 1), e["w1"].get<double>(), 1e-9);
            EXPECT_NEAR(wasserstein(ak, bk, 2), e["w2"].get<double>(), 1e-9);
        }
        std::ostringstream out, err;
        EXPECT_EQ(cmd_distance(kData + "/distance/" + c["a"].get<std::string>(),
                               kData + "/distance/" + c["b"].get<std::string>(), 1.0, out, err),
                  0);
        char want[64];
        std::snprintf(want, sizeof want, "0,%.9f,%.9f", c["dims"]["0"]["bottleneck"].get<double>(),
                      c["dims"]["0"]["w1"].get<double>());
        EXPECT_NE(out.str().find(want), std::string::npos) << out.str();
    }
}

TEST(CmdDistance, IdenticalAndSinglePoint) {
    const auto dir = std::filesystem::temp_directory_path() / "topoguard_cmd_distance";
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "a.csv", "dim,birth,death\n0,0,2\n");
    write_file_atomic(dir / "empty.csv", "dim,birth,death\n");
    std::ostringstream same, one, err;
    EXPECT_EQ(cmd_distance(dir / "a.csv", dir / "a.csv", 1.0, same, err), 0);
    EXPECT_EQ(same.str(), "dim,bottleneck,wasserstein\n0,0.000000000,0.000000000\n1,0.000000000,0.000000000\n"
                          "2,0.000000000,0.000000000\nall,0.000000000,0.000000000\n");
    EXPECT_EQ(cmd_distance(dir / "a.csv", dir / "empty.csv", 1.0, one, err), 0);
    EXPECT_NE(one.str().find("0,1.000000000,1.000000000"), std::string::npos) << one.str();
    std::filesystem::remove_all(dir);
}

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "moveband/errors.hpp"
#include "moveband/metric.hpp"
#include "test_util.hpp"

using namespace moveband;

namespace {

MetricSpace line3() {
    return validate_metric({{0, 0.5, 1}, {0.5, 0, 0.5}, {1, 0.5, 0}}, {"0", "0.5", "1"});
}

} // namespace

TEST_CASE("validate_metric accepts degenerate and simple spaces") {
    MetricSpace one = validate_metric({{0}}, {"p"});
    CHECK(one.size() == 1);
    CHECK(one.diameter() == 0.0);

    MetricSpace two = validate_metric({{0, 1}, {1, 0}}, {"a", "b"});
    CHECK(two.size() == 2);
    CHECK(two.dist(0, 1) == 1.0);
    CHECK(two.min_positive_dist() == 1.0);
}

TEST_CASE("validate_metric rejects bad matrices with witnesses") {
    CHECK_THROWS_AS(validate_metric({{0, 1, 0.3}, {1, 0, 0.3}, {0.3, 0.3, 0}}, {"a", "b", "c"}),
                    TriangleViolation);
    CHECK_THROWS_AS(validate_metric({{0, 0.2}, {0.3, 0}}, {"a", "b"}), AsymmetricMatrix);
    CHECK_THROWS_AS(validate_metric({{0.1, 1}, {1, 0}}, {"a", "b"}), NonzeroDiagonal);
    CHECK_THROWS_AS(validate_metric({{0, 1.5}, {1.5, 0}}, {"a", "b"}), EntryOutOfRange);
    CHECK_THROWS_AS(validate_metric({{0, -0.5}, {-0.5, 0}}, {"a", "b"}), EntryOutOfRange);
}

TEST_CASE("validate_metric normalization rescales by diameter") {
    // 0.5-diameter line becomes a unit-diameter line when normalized
    MetricSpace m = validate_metric({{0, 0.25, 0.5}, {0.25, 0, 0.25}, {0.5, 0.25, 0}},
                                    {"a", "b", "c"}, true);
    CHECK(m.diameter() == doctest::Approx(1.0));
    CHECK(m.dist(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("covering_number worked values") {
    MetricSpace u4 = make_uniform(4);
    CHECK(covering_number(u4, 0.5, CountMode::Exact) == 4);
    CHECK(covering_number(u4, 1.0, CountMode::Exact) == 1);

    MetricSpace l = line3();
    CHECK(covering_number(l, 0.5, CountMode::Exact) == 1);
    CHECK(covering_number(l, 0.4, CountMode::Exact) == 3); // adjacent gaps are 0.5
    CHECK(covering_number(l, 0.2, CountMode::Exact) == 3);
}

TEST_CASE("packing_number worked values") {
    MetricSpace u4 = make_uniform(4);
    CHECK(packing_number(u4, 0.4, CountMode::Exact) == 4);

    MetricSpace l = line3();
    CHECK(packing_number(l, 0.5, CountMode::Exact) == 1);
    CHECK(packing_number(l, 0.2, CountMode::Exact) == 3);
}

TEST_CASE("exact mode refuses large spaces") {
    MetricSpace big = make_uniform(kExactModeMaxPoints + 1);
    CHECK_THROWS_AS(covering_number(big, 0.5, CountMode::Exact), ExactTooLarge);
    CHECK_THROWS_AS(packing_number(big, 0.5, CountMode::Exact), ExactTooLarge);
    CHECK(covering_number(big, 0.5, CountMode::Greedy) == kExactModeMaxPoints + 1);
}

TEST_CASE("complexity worked values") {
    CHECK(covering_complexity(make_uniform(3)) == doctest::Approx(3.0));
    CHECK(covering_complexity(make_uniform(7)) == doctest::Approx(7.0));
    CHECK(packing_complexity(make_uniform(5)) == doctest::Approx(5.0));

    MetricSpace l = line3();
    CHECK(covering_complexity(l) == doctest::Approx(1.5));
    CHECK(packing_complexity(l) == doctest::Approx(1.5));

    // k=1 convention: counting functions identically 1, sup of eps*1 -> 1
    MetricSpace one = validate_metric({{0}}, {"p"});
    CHECK(covering_complexity(one) == doctest::Approx(1.0));
    CHECK(packing_complexity(one) == doctest::Approx(1.0));
}

TEST_CASE("counting functions match brute force on random spaces") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        int k = 3 + static_cast<int>(seed % 8);
        MetricSpace m = make_random(k, seed);
        for (double eps : complexity_breakpoints(m)) {
            CAPTURE(seed);
            CAPTURE(eps);
            CHECK(covering_number(m, eps, CountMode::Exact) == testutil::brute_cover(m, eps));
            CHECK(packing_number(m, eps, CountMode::Exact) == testutil::brute_packing(m, eps));
        }
    }
}

TEST_CASE("counting chain and monotonicity at every breakpoint") {
    for (std::uint64_t seed = 20; seed < 45; ++seed) {
        int k = 3 + static_cast<int>(seed % 10);
        MetricSpace m = make_random(k, seed);
        ComplexityReport rep = complexity_report(m, CountMode::Exact);
        int prev_cover = m.size() + 1;
        int prev_pack = m.size() + 1;
        for (std::size_t b = 0; b < rep.breakpoints.size(); ++b) {
            double eps = rep.breakpoints[b];
            CAPTURE(seed);
            CAPTURE(eps);
            // N^p_eps <= N^c_eps <= N^p_{eps/2}
            CHECK(rep.pack_nums[b] <= rep.cover_nums[b]);
            CHECK(rep.cover_nums[b] <= packing_number(m, eps / 2, CountMode::Exact));
            // non-increasing in the radius (breakpoints are sorted ascending)
            CHECK(rep.cover_nums[b] <= prev_cover);
            CHECK(rep.pack_nums[b] <= prev_pack);
            prev_cover = rep.cover_nums[b];
            prev_pack = rep.pack_nums[b];
        }
        CHECK(rep.pack_complexity <= rep.cover_complexity + 1e-12);
        CHECK(rep.cover_complexity <= 2 * rep.pack_complexity + 1e-12);
    }
}

TEST_CASE("greedy cover is bounded by (1 + ln k) times exact") {
    for (std::uint64_t seed = 50; seed < 70; ++seed) {
        int k = 4 + static_cast<int>(seed % 9);
        MetricSpace m = make_random(k, seed);
        for (double eps : complexity_breakpoints(m)) {
            int exact = covering_number(m, eps, CountMode::Exact);
            int greedy = covering_number(m, eps, CountMode::Greedy);
            CHECK(greedy >= exact);
            CHECK(greedy <= static_cast<int>(std::ceil(exact * (1.0 + std::log(k)))));
        }
    }
}

TEST_CASE("metric families") {
    MetricSpace u3 = make_metric("uniform:3");
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(u3.dist(i, j) == (i == j ? 0.0 : 1.0));

    MetricSpace g5 = make_metric("grid1d:5");
    CHECK(g5.size() == 5);
    CHECK(g5.dist(0, 1) == doctest::Approx(0.25));
    CHECK(g5.dist(0, 4) == doctest::Approx(1.0));

    MetricSpace gl = make_metric("gridlinf:2,3");
    CHECK(gl.size() == 9);
    CHECK(gl.diameter() == doctest::Approx(1.0));

    MetricSpace r = make_metric("random:6,7");
    CHECK(r.size() == 6);
    // survived construction, so it re-validates cleanly
    std::vector<std::vector<double>> mat(6, std::vector<double>(6));
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) mat[i][j] = r.dist(i, j);
    CHECK_NOTHROW(validate_metric(mat, r.labels()));

    CHECK_THROWS_AS(make_metric("nosuch:3"), BadSpec);
    CHECK_THROWS_AS(make_metric("uniform:0"), BadSpec);
}

TEST_CASE("metric csv round-trip") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "moveband_metric_test";
    fs::create_directories(dir);
    fs::path file = dir / "m.csv";

    MetricSpace m = make_random(7, 3);
    save_metric_csv(m, file.string());
    MetricSpace back = load_metric_csv(file.string());
    REQUIRE(back.size() == m.size());
    CHECK(back.labels() == m.labels());
    for (int i = 0; i < m.size(); ++i)
        for (int j = 0; j < m.size(); ++j) CHECK(back.dist(i, j) == m.dist(i, j));
    fs::remove_all(dir);
}

#include <doctest.h>

#include "rigidlab/lamination.hpp"

using namespace rigidlab;

TEST_SUITE("lamination") {

TEST_CASE("locate uses the half-open cell convention") {
    Chart chart(0, 4, LeafModel::circle(1.0));
    auto [plaque, fiber] = locate(chart, 0.37, Point(0.9));
    CHECK(plaque.cell == 1);
    CHECK(fiber.scalar() == doctest::Approx(0.9));

    CHECK(locate(chart, 0.25, Point(0.0)).first.cell == 1);
    CHECK(locate(chart, 0.0, Point(0.0)).first.cell == 0);
    CHECK_THROWS_AS(locate(chart, 1.0, Point(0.0)), std::domain_error);
    CHECK_THROWS_AS(locate(chart, -0.1, Point(0.0)), std::domain_error);
}

TEST_CASE("locate reduces circle fibers and rejects stray interval fibers") {
    Chart circle_chart(0, 2, LeafModel::circle(1.0));
    CHECK(locate(circle_chart, 0.1, Point(1.25)).second.scalar() == doctest::Approx(0.25));

    Chart interval_chart(0, 2, LeafModel::interval(1.0));
    CHECK_THROWS_AS(locate(interval_chart, 0.1, Point(1.25)), std::domain_error);
}

TEST_CASE("locate covers the chart domain bijectively up to boundaries") {
    Chart chart(0, 8, LeafModel::circle(1.0), 0.3);
    for (int i = 0; i < 512; ++i) {
        double base = (i + 0.5) / 512.0;
        auto [plaque, fiber] = locate(chart, base, Point(0.25));
        auto parts = cell_intervals(chart, plaque.cell);
        bool inside = false;
        for (auto [lo, hi] : parts) inside = inside || (base >= lo && base < hi);
        CHECK(inside);
    }
}

TEST_CASE("overlap pairs of identical charts are diagonal") {
    Chart chart(0, 4, LeafModel::circle(1.0));
    auto pairs = overlap_pairs(chart, chart);
    REQUIRE(pairs.size() == 4);
    for (const auto& p : pairs) {
        CHECK(p.cell1 == p.cell2);
        CHECK(p.length == doctest::Approx(0.25));
    }
}

TEST_CASE("coarse cells overlap two refined cells each") {
    Chart coarse(0, 2, LeafModel::circle(1.0));
    Chart fine(1, 4, LeafModel::circle(1.0));
    auto pairs = overlap_pairs(coarse, fine);
    REQUIRE(pairs.size() == 4);
    int per_coarse[2] = {0, 0};
    for (const auto& p : pairs) per_coarse[p.cell1]++;
    CHECK(per_coarse[0] == 2);
    CHECK(per_coarse[1] == 2);
}

TEST_CASE("shifted charts produce the full interval-intersection list") {
    Chart plain(0, 2, LeafModel::circle(1.0));
    Chart shifted(1, 2, LeafModel::circle(1.0), 0.25);
    auto pairs = overlap_pairs(plain, shifted);
    CHECK(pairs.size() == 4);
    double total = 0.0;
    for (const auto& p : pairs) total += p.length;
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("overlap pairs are symmetric up to transposition") {
    Chart a(0, 3, LeafModel::circle(1.0), 0.1);
    Chart b(1, 5, LeafModel::circle(1.0), 0.6);
    auto ab = overlap_pairs(a, b);
    auto ba = overlap_pairs(b, a);
    REQUIRE(ab.size() == ba.size());
    for (const auto& p : ab) {
        bool found = false;
        for (const auto& q : ba)
            if (q.cell1 == p.cell2 && q.cell2 == p.cell1 &&
                std::abs(q.length - p.length) < 1e-12)
                found = true;
        CHECK(found);
    }
}

TEST_CASE("mismatched fiber models are rejected") {
    Chart circle(0, 2, LeafModel::circle(1.0));
    Chart interval(1, 2, LeafModel::interval(1.0));
    CHECK_THROWS_AS(overlap_pairs(circle, interval), std::invalid_argument);
}

}  // TEST_SUITE

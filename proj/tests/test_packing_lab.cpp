#include <doctest.h>

#include <cmath>
#include <random>

#include "rigidlab/packing.hpp"
#include "rigidlab/systems.hpp"

using namespace rigidlab;

TEST_SUITE("packing_lab") {

TEST_CASE("1-d packing examples") {
    auto pack = greedy_pack(1, 1.0, 0.26);
    CHECK(pack.count == 3);  // floor(r/s) for open intervals sharing endpoints
    CHECK(verify_packing(pack).ok);

    CHECK(greedy_pack(1, 1.0, 0.51).count == 1);
    CHECK(greedy_pack(1, 1.0, 0.99).count == 1);

    SUBCASE("paper grid construction density") {
        for (int k : {1, 2, 4, 8, 16}) {
            auto result = greedy_pack(1, 1.0, 1.0 / (2.0 * k));
            CHECK(result.count >= 2 * k);
            CHECK(result.normalized_density >= 1.0 - 1e-12);  // n^{-n/2} = 1 in 1-d
        }
    }
}

TEST_CASE("pack argument errors") {
    CHECK_THROWS_AS(greedy_pack(1, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(greedy_pack(1, 1.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(greedy_pack(4, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(greedy_cover(2, 1.0, -0.1), std::invalid_argument);
}

TEST_CASE("1-d covering examples") {
    auto self_cover = greedy_cover(1, 1.0, 1.0);
    CHECK(self_cover.count == 1);
    CHECK(verify_covering(self_cover).ok);

    auto cover = greedy_cover(1, 1.0, 0.4);
    CHECK(cover.count <= 4);
    CHECK(verify_covering(cover).ok);
}

TEST_CASE("2-d covering density stays under the dyadic-box bound") {
    // U(r, r*sqrt(2)/k) <= (2k)^n gives normalized density 2^{3n/2} = 8.
    for (int k : {2, 4, 8, 16, 32}) {
        double s = std::sqrt(2.0) / k;
        auto cover = greedy_cover(2, 1.0, s);
        CHECK(cover.normalized_density <= 8.0);
        CHECK(verify_covering(cover).ok);
    }
}

TEST_CASE("packing counts match the exact interval oracle on random pairs") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> radius(0.02, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        double r = 0.2 + radius(rng);
        double s = radius(rng) * 0.45 * r;
        long expected = interval_pack_count(r, s);
        auto pack = greedy_pack(1, r, s);
        CAPTURE(r);
        CAPTURE(s);
        CHECK(pack.count == expected);
        // Maximality: one more ball cannot fit, since (k+1) open intervals of
        // length 2s need strictly more than 2r.
        CHECK(static_cast<long double>(expected + 1) * 2.0L * s > 2.0L * r);
        CHECK(verify_packing(pack).ok);

        long cover_expected = interval_cover_count(r, s);
        auto cover = greedy_cover(1, r, s);
        CHECK(cover.count >= cover_expected);
        CHECK(cover.count <= cover_expected + 1);
        CHECK(verify_covering(cover).ok);
    }
}

TEST_CASE("2-d and 3-d families pass geometric verification") {
    for (double s : {0.5, 0.22, 0.11}) {
        auto pack = greedy_pack(2, 1.0, s);
        CHECK(verify_packing(pack).ok);
        auto cover = greedy_cover(2, 1.0, s);
        CHECK(verify_covering(cover).ok);
    }
    auto pack3 = greedy_pack(3, 1.0, 0.26);
    CHECK(verify_packing(pack3).ok);
    CHECK(pack3.normalized_density >= std::pow(3.0, -1.5) * 0.8);
    auto cover3 = greedy_cover(3, 1.0, 0.26);
    CHECK(verify_covering(cover3).ok);
    CHECK(cover3.normalized_density <= std::pow(2.0, 4.5));
}

TEST_CASE("euclidean regularity certificates") {
    auto dyadic = [](double r, int depth) {
        std::vector<double> s;
        for (int j = 1; j <= depth; ++j) s.push_back(r * std::ldexp(1.0, -j));
        return s;
    };

    SUBCASE("n = 1") {
        LeafMetric metric = intrinsic_metric(LeafModel::box(1, 4.0));
        MeasureOracle lambda = [](const Ball& b) { return b.radius; };
        std::vector<double> r_ladder = {1.0, 0.5, 0.25};
        std::vector<std::vector<double>> s_ladders;
        for (double r : r_ladder) s_ladders.push_back(dyadic(r, 6));
        auto cert = certify_regularity(metric, lambda, Point(2.0), 1.0, r_ladder, s_ladders);
        CHECK(cert.verdict == CertVerdict::Certified);
        CHECK(cert.p_hat <= 0.05);
        CHECK(cert.C_hat <= std::pow(2.0, 1.5));
    }

    SUBCASE("n = 2") {
        LeafMetric metric = intrinsic_metric(LeafModel::box(2, 4.0));
        MeasureOracle lambda = [](const Ball& b) { return M_PI / 2.0 * b.radius * b.radius; };
        std::vector<double> r_ladder = {1.0, 0.5};
        std::vector<std::vector<double>> s_ladders;
        for (double r : r_ladder) s_ladders.push_back(dyadic(r, 6));
        auto cert =
            certify_regularity(metric, lambda, Point(2.0, 2.0), 1.0, r_ladder, s_ladders);
        CHECK(cert.verdict == CertVerdict::Certified);
        CHECK(cert.p_hat <= 0.5 + 0.05);
        CHECK(cert.C_hat <= 8.0);
    }

    SUBCASE("scaling invariance of the certificate") {
        // All certificate ratios are scale-free: the scaled metric reproduces
        // the intrinsic certificate.
        MeasureOracle lambda = [](const Ball& b) { return b.radius; };
        std::vector<double> r_ladder = {1.0, 0.5};
        std::vector<std::vector<double>> s_ladders = {dyadic(1.0, 6), dyadic(0.5, 6)};
        auto plain = certify_regularity(intrinsic_metric(LeafModel::interval(8.0)), lambda,
                                        Point(4.0), 1.0, r_ladder, s_ladders);
        auto scaled = certify_regularity(scaled_metric(LeafModel::interval(8.0), 3.0), lambda,
                                         Point(4.0), 1.0, r_ladder, s_ladders);
        REQUIRE(plain.verdict == CertVerdict::Certified);
        REQUIRE(scaled.verdict == CertVerdict::Certified);
        CHECK(scaled.p_hat == doctest::Approx(plain.p_hat).epsilon(1e-6));
        CHECK(scaled.C_hat == doctest::Approx(plain.C_hat).epsilon(1e-6));
        REQUIRE(plain.evidence.size() == scaled.evidence.size());
        for (size_t i = 0; i < plain.evidence.size(); ++i) {
            CHECK(plain.evidence[i].pack_count == scaled.evidence[i].pack_count);
            CHECK(plain.evidence[i].cover_count == scaled.evidence[i].cover_count);
        }
    }

    SUBCASE("oracle failure is inconclusive") {
        LeafMetric metric = intrinsic_metric(LeafModel::box(1, 4.0));
        MeasureOracle broken = [](const Ball&) { return 0.0; };
        auto cert = certify_regularity(metric, broken, Point(2.0), 1.0, {1.0}, {dyadic(1.0, 4)});
        CHECK(cert.verdict == CertVerdict::Inconclusive);
        CHECK(!cert.diagnostic.empty());
    }

    SUBCASE("short ladders are rejected") {
        LeafMetric metric = intrinsic_metric(LeafModel::box(1, 4.0));
        MeasureOracle lambda = [](const Ball& b) { return b.radius; };
        CHECK_THROWS_AS(
            certify_regularity(metric, lambda, Point(2.0), 1.0, {1.0}, {{0.5, 0.4, 0.3}}),
            std::invalid_argument);
    }
}

TEST_CASE("transfer constants formulas") {
    auto tc = transfer_constants(1.0, 2.0, 1, 2.0);
    CHECK(tc.l == 1);
    CHECK(tc.R == 8.0);
    CHECK(tc.alpha == 0.125);
    CHECK(tc.beta == 4.0);

    auto identity = transfer_constants(1.0, 1.0, 3, 2.0);
    CHECK(identity.l == 0);
    CHECK(identity.R == 2.0);
    CHECK(identity.alpha == 1.0);
    CHECK(identity.beta == 1.0);

    auto scaled = transfer_constants(3.0, 3.0, 1, 2.0);
    CHECK(scaled.l == 0);
    CHECK(scaled.R == 2.0);
    CHECK(scaled.alpha == 3.0);
    CHECK(scaled.beta == 3.0);

    CHECK_THROWS_AS(transfer_constants(0.0, 1.0, 1, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(transfer_constants(2.0, 1.0, 1, 2.0), std::invalid_argument);

    SUBCASE("invariants") {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> unit(0.1, 4.0);
        for (int i = 0; i < 100; ++i) {
            double a = unit(rng);
            double b = a * (1.0 + unit(rng));
            auto t = transfer_constants(a, b, 1 + i % 3, 1.0 + unit(rng));
            CHECK(t.l >= 0);
            CHECK(t.R >= t.Q - 1e-12);
            CHECK(t.alpha <= t.beta + 1e-12);
            // 2^{l-1} < B/A <= 2^l
            if (t.l > 0) CHECK(std::ldexp(1.0, t.l - 1) < b / a + 1e-12);
            CHECK(b / a <= std::ldexp(1.0, t.l) + 1e-12);
        }
    }
}

TEST_CASE("scaled 1-d metric respects the transfer bounds") {
    // rho = 3 d on the line: measured doubling of lambda_rho is 2 <= R and the
    // density ratio lambda_rho(E)/lambda(E) = 3 lies in [alpha, beta] = [3,3].
    auto tc = transfer_constants(3.0, 3.0, 1, 2.0);
    LeafModel leaf = LeafModel::interval(8.0);
    LeafMetric rho = scaled_metric(leaf, 3.0);
    LeafMetric plain = intrinsic_metric(leaf);

    MeasureOracle lambda_rho = [&](const Ball& b) {
        return hausdorff_ball_mass(rho, b.center, b.radius);
    };
    auto scan = doubling_constant(lambda_rho, {Point(4.0), Point(3.5)}, {0.5, 0.25, 0.125});
    CHECK(scan.omega == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(scan.omega <= tc.R + 1e-9);

    for (double t : {0.1, 0.3, 0.7}) {
        // Common set: the intrinsic ball of radius t.
        double ratio = hausdorff_ball_mass(rho, Point(4.0), 3.0 * t) /
                       hausdorff_ball_mass(plain, Point(4.0), t);
        CHECK(ratio >= tc.alpha - 0.01 * tc.alpha);
        CHECK(ratio <= tc.beta + 0.01 * tc.beta);
    }
}

TEST_CASE("pullback density ratios respect the transfer interval") {
    // rho = pullback of the circle metric through a sine conjugacy; A, B from
    // the derivative range of the inverse map.
    SineDiffeo h{0.5};
    auto fwd = [h](const Point& p) {
        double w = h.inverse(p.scalar());
        return Point(w - std::floor(w));
    };
    auto inv = [h](const Point& p) {
        double v = h.apply(p.scalar());
        return Point(v - std::floor(v));
    };
    LeafModel circle = LeafModel::circle(1.0);
    LeafMetric rho = pullback_metric(circle, fwd, inv);
    LeafMetric plain = intrinsic_metric(circle);

    double A = 1.0 / h.max_derivative();
    double B = 1.0 / h.min_derivative();
    auto tc = transfer_constants(A, B, 1, 2.0);

    MeasureOracle lambda_rho = [&](const Ball& b) {
        return hausdorff_ball_mass(rho, b.center, b.radius);
    };
    auto scan =
        doubling_constant(lambda_rho, {Point(0.1), Point(0.45), Point(0.8)}, {0.02, 0.01, 0.005});
    CHECK(scan.omega <= tc.R + 1e-6);

    for (double x : {0.05, 0.3, 0.6, 0.9}) {
        double t = 0.01;
        ArcSpan span = metric_ball_arc(plain, Point(x), t);
        double ratio = arc_metric_length(rho, span.lo, span.hi) /
                       arc_metric_length(plain, span.lo, span.hi);
        CHECK(ratio >= tc.alpha - 1e-6);
        CHECK(ratio <= tc.beta + 1e-6);
    }
}

}  // TEST_SUITE

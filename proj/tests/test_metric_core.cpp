#include <doctest.h>

#include <cmath>
#include <random>

#include "rigidlab/hausdorff.hpp"
#include "rigidlab/systems.hpp"

using namespace rigidlab;

namespace {

// Independent cover oracle for the 1-d premeasure rho(B) = r: k equal balls
// of radius L/(2k) cover a length-L arc at cost k * (L/2k) = L/2, and any
// ball cover satisfies sum r_i >= L/2 since each ball covers length <= 2r_i.
double equal_ball_cover_cost(double length, int balls) {
    return balls * (length / (2.0 * balls));
}

void check_metric_axioms(const LeafMetric& metric, int triples, unsigned seed) {
    std::mt19937 rng(seed);
    const LeafModel& leaf = metric.leaf;
    auto draw = [&]() {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Point p;
        p.dim = leaf.dim;
        for (int i = 0; i < leaf.dim; ++i) {
            double hi = leaf.kind == LeafKind::Circle ? std::nextafter(leaf.extent, 0.0)
                                                      : leaf.extent;
            p[i] = unit(rng) * hi;
        }
        return p;
    };
    for (int i = 0; i < triples; ++i) {
        Point a = draw(), b = draw(), c = draw();
        double ab = distance(metric, a, b);
        double ba = distance(metric, b, a);
        double ac = distance(metric, a, c);
        double bc = distance(metric, b, c);
        REQUIRE(distance(metric, a, a) == 0.0);
        REQUIRE(std::fabs(ab - ba) <= metric.tolerance);
        REQUIRE(ac <= ab + bc + metric.tolerance);
        REQUIRE(ab >= 0.0);
    }
}

}  // namespace

TEST_SUITE("metric_core") {

TEST_CASE("distance examples") {
    LeafMetric circle = intrinsic_metric(LeafModel::circle(1.0));
    CHECK(distance(circle, Point(0.1), Point(0.9)) == doctest::Approx(0.2).epsilon(1e-12));

    LeafMetric interval = intrinsic_metric(LeafModel::interval(1.0));
    CHECK(distance(interval, Point(0.25), Point(0.75)) == doctest::Approx(0.5).epsilon(1e-12));

    LeafMetric scaled = scaled_metric(LeafModel::circle(1.0), 3.0);
    CHECK(distance(scaled, Point(0.0), Point(0.25)) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("distance rejects points outside the fundamental domain") {
    LeafMetric interval = intrinsic_metric(LeafModel::interval(1.0));
    CHECK_THROWS_AS(distance(interval, Point(1.5), Point(0.5)), std::domain_error);
    LeafMetric circle = intrinsic_metric(LeafModel::circle(1.0));
    CHECK_THROWS_AS(distance(circle, Point(1.0), Point(0.5)), std::domain_error);
    CHECK_NOTHROW(distance(circle, circle.leaf.reduce(Point(1.0)), Point(0.5)));
}

TEST_CASE("metric axioms hold on random triples") {
    check_metric_axioms(intrinsic_metric(LeafModel::interval(1.0)), 10000, 11);
    check_metric_axioms(intrinsic_metric(LeafModel::circle(1.0)), 10000, 12);
    check_metric_axioms(intrinsic_metric(LeafModel::box(2, 1.0)), 10000, 13);
    check_metric_axioms(scaled_metric(LeafModel::circle(1.0), 3.0), 10000, 14);

    SineDiffeo h{0.5};
    auto fwd = [h](const Point& p) {
        double w = h.inverse(p.scalar());
        return Point(w - std::floor(w));
    };
    auto inv = [h](const Point& p) {
        double v = h.apply(p.scalar());
        return Point(v - std::floor(v));
    };
    check_metric_axioms(pullback_metric(LeafModel::circle(1.0), fwd, inv), 10000, 15);

    SystemSpec toy = SystemSpec::neutral_center_toy();
    check_metric_axioms(
        truncated_sup_metric(toy.fiber_model(), fiber_orbit_map(toy, 0.2137, 8), 8), 10000, 16);

    LeafMetric base = intrinsic_metric(LeafModel::circle(1.0));
    check_metric_axioms(tabulated_metric(LeafModel::circle(1.0),
                                         [base](const Point& a, const Point& b) {
                                             return distance(base, a, b);
                                         }),
                        10000, 17);
}

TEST_CASE("hausdorff estimate matches the equal-ball cover oracle") {
    double expected = equal_ball_cover_cost(1.0, 64);  // = 1/2 at every scale
    REQUIRE(expected == doctest::Approx(0.5));

    auto interval = hausdorff_estimate(intrinsic_metric(LeafModel::interval(1.0)), std::nullopt, 1,
                                       dyadic_ladder(3, 14));
    CHECK(interval.value == doctest::Approx(0.5).epsilon(0.01));
    CHECK(interval.converged);
    CHECK(interval.lower_bound == doctest::Approx(0.5).epsilon(1e-9));

    auto circle = hausdorff_estimate(intrinsic_metric(LeafModel::circle(1.0)), std::nullopt, 1,
                                     dyadic_ladder(3, 14));
    CHECK(circle.value == doctest::Approx(0.5).epsilon(0.01));
    CHECK(circle.converged);
}

TEST_CASE("hausdorff estimate is monotone along the delta ladder") {
    auto est = hausdorff_estimate(intrinsic_metric(LeafModel::box(2, 1.0)), std::nullopt, 2,
                                  dyadic_ladder(3, 9));
    for (size_t i = 1; i < est.per_delta_values.size(); ++i)
        CHECK(est.per_delta_values[i] >= est.per_delta_values[i - 1]);
}

TEST_CASE("hausdorff estimate degenerate and error cases") {
    LeafMetric metric = intrinsic_metric(LeafModel::interval(1.0));
    auto degenerate = hausdorff_estimate(metric, Ball{Point(0.5), 0.0}, 1, dyadic_ladder(3, 8));
    CHECK(degenerate.value == 0.0);

    CHECK_THROWS_AS(hausdorff_estimate(metric, std::nullopt, 1, {0.1, 0.2}),
                    std::invalid_argument);
    CHECK_THROWS_AS(hausdorff_estimate(metric, std::nullopt, 2, dyadic_ladder(3, 5)),
                    std::invalid_argument);
}

TEST_CASE("scaled metric homogeneity") {
    LeafMetric plain = intrinsic_metric(LeafModel::circle(1.0));
    LeafMetric scaled = scaled_metric(LeafModel::circle(1.0), 3.0);

    auto whole_plain = hausdorff_estimate(plain, std::nullopt, 1, dyadic_ladder(3, 12));
    auto whole_scaled = hausdorff_estimate(scaled, std::nullopt, 1, dyadic_ladder(3, 12));
    CHECK(whole_scaled.value == doctest::Approx(3.0 * whole_plain.value).epsilon(1e-6));

    // Same underlying set: a scaled ball of radius 3t is the intrinsic ball
    // of radius t, and its measure picks up the factor 3.
    double t = 0.05;
    CHECK(hausdorff_ball_mass(scaled, Point(0.4), 3.0 * t) ==
          doctest::Approx(3.0 * hausdorff_ball_mass(plain, Point(0.4), t)).epsilon(1e-9));
}

TEST_CASE("doubling constant of the 1-d leaf measure is exactly 2") {
    // lambda(B(x,r)) = r away from the endpoints under the r^m convention.
    MeasureOracle lambda = [](const Ball& b) { return b.radius; };
    std::vector<Point> centers = {Point(0.4), Point(0.5), Point(0.6)};
    std::vector<double> radii = {0.04, 0.02, 0.01};
    auto scan = doubling_constant(lambda, centers, radii);
    CHECK(scan.omega == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(scan.zero_denominators == 0);
}

TEST_CASE("doubling constant of an area measure is 4") {
    MeasureOracle area = [](const Ball& b) { return M_PI * b.radius * b.radius; };
    auto scan = doubling_constant(area, {Point(0.5, 0.5)}, {0.1, 0.05});
    CHECK(scan.omega == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("doubling constant of a dirac mass is 1") {
    MeasureOracle dirac = [](const Ball&) { return 1.0; };
    auto scan = doubling_constant(dirac, {Point(0.5)}, {0.1});
    CHECK(scan.omega == doctest::Approx(1.0));
}

TEST_CASE("doubling constant reports zero-mass denominators as infinite") {
    MeasureOracle vanish = [](const Ball& b) { return b.radius > 0.15 ? 1.0 : 0.0; };
    auto scan = doubling_constant(vanish, {Point(0.5)}, {0.1});
    CHECK(std::isinf(scan.omega));
    CHECK(scan.zero_denominators == 1);
}

TEST_CASE("annulus masses vanish linearly for the leaf measure") {
    // Independent oracle: the annulus {r-w < |y-x| < r+w} is two intervals of
    // length 2w each; the half-length convention gives total mass 2w.
    MeasureOracle lambda = [](const Ball& b) { return b.radius; };
    std::vector<double> widths = {0.02, 0.01, 0.005, 0.0025};
    auto masses = annulus_mass_profile(lambda, Ball{Point(0.5), 0.1}, widths);
    for (size_t i = 0; i < widths.size(); ++i)
        CHECK(masses[i] == doctest::Approx(2.0 * widths[i]).epsilon(1e-12));
    CHECK(masses.back() < masses.front());
}

TEST_CASE("annulus profile flags an atom sitting on the sphere") {
    // Atom of weight 0.3 at distance exactly r from the center: the profile
    // stays constant instead of vanishing.
    double r = 0.1, weight = 0.3;
    MeasureOracle atom = [r, weight](const Ball& b) { return b.radius > r ? weight : 0.0; };
    auto masses = annulus_mass_profile(atom, Ball{Point(0.5), r}, {0.02, 0.01, 0.005});
    for (double m : masses) CHECK(m == doctest::Approx(weight));

    MeasureOracle dirac_center = [](const Ball& b) { return b.radius > 0.0 ? 1.0 : 0.0; };
    auto zero = annulus_mass_profile(dirac_center, Ball{Point(0.5), r}, {0.02, 0.01});
    for (double m : zero) CHECK(m == doctest::Approx(0.0));
}

}  // TEST_SUITE

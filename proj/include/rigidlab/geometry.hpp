#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>

namespace rigidlab {

// Point on a model leaf. Leaves are at most 3-dimensional.
struct Point {
    std::array<double, 3> c{0.0, 0.0, 0.0};
    int dim = 1;

    Point() = default;
    explicit Point(double x) : c{x, 0.0, 0.0}, dim(1) {}
    Point(double x, double y) : c{x, y, 0.0}, dim(2) {}
    Point(double x, double y, double z) : c{x, y, z}, dim(3) {}

    double& operator[](int i) { return c[static_cast<size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<size_t>(i)]; }
    double scalar() const { return c[0]; }
};

enum class LeafKind { FlatInterval, Circle, EuclideanBox };

// Model leaf: flat interval [0,L], circle R/(L Z), or box [0,side]^n.
struct LeafModel {
    LeafKind kind = LeafKind::FlatInterval;
    double extent = 1.0;  // length / circumference / side
    int dim = 1;

    static LeafModel interval(double length);
    static LeafModel circle(double circumference);
    static LeafModel box(int dimension, double side);

    bool contains(const Point& p) const;
    // Reduces circle coordinates modulo the circumference. Identity for the
    // other kinds.
    Point reduce(const Point& p) const;
    double diameter() const;
};

// Metric rules on a model leaf.
struct IntrinsicRule {};

struct ScaledRule {
    double factor = 1.0;
};

// d(a,b) = d_intrinsic(map(a), map(b)) for an injective map with inverse.
struct PullbackRule {
    std::function<Point(const Point&)> map;
    std::function<Point(const Point&)> inverse;
};

// d(a,b) = max_{|n| <= window} d_intrinsic(orbit(a,n), orbit(b,n)), where
// orbit(p,n) is the fiber component of the n-th iterate over a fixed base
// point.
struct TruncatedSupRule {
    std::function<Point(const Point&, int)> fiber_orbit;
    int window = 64;
};

struct TabulatedRule {
    std::function<double(const Point&, const Point&)> fn;
};

using MetricRule =
    std::variant<IntrinsicRule, ScaledRule, PullbackRule, TruncatedSupRule, TabulatedRule>;

enum class MetricRuleKind { Intrinsic, Scaled, Pullback, TruncatedSup, Tabulated };

// A computable metric on a model leaf.
struct LeafMetric {
    LeafModel leaf;
    MetricRule rule = IntrinsicRule{};
    // Tolerance for the metric axioms on sampled triples. Exact rules use
    // 1e-12; rules built from orbit evaluations declare a looser one.
    double tolerance = 1e-12;

    MetricRuleKind rule_kind() const;
};

LeafMetric intrinsic_metric(const LeafModel& leaf);
LeafMetric scaled_metric(const LeafModel& leaf, double factor);
LeafMetric pullback_metric(const LeafModel& leaf, std::function<Point(const Point&)> map,
                           std::function<Point(const Point&)> inverse);
LeafMetric truncated_sup_metric(const LeafModel& leaf,
                                std::function<Point(const Point&, int)> fiber_orbit, int window,
                                double tolerance = 1e-9);
LeafMetric tabulated_metric(const LeafModel& leaf,
                            std::function<double(const Point&, const Point&)> fn,
                            double tolerance = 1e-12);

// Evaluates the metric. Throws std::domain_error if either point is outside
// the leaf's fundamental domain.
double distance(const LeafMetric& metric, const Point& a, const Point& b);

struct Ball {
    Point center;
    double radius = 0.0;
};

// Extent of a metric ball on a 1-d leaf, as a coordinate arc around the
// center: offsets to the left/right edge along the leaf. On an interval the
// arc is clipped to [0,L]; on a circle a ball of radius >= half the
// circumference is the whole circle (whole=true).
struct ArcSpan {
    double lo = 0.0;  // left endpoint coordinate
    double hi = 0.0;  // right endpoint coordinate (may exceed extent on a circle: wraps)
    bool whole = false;
    bool empty = false;
};

// Extracts the coordinate arc {y : d(x,y) < r} for a metric on a 1-d leaf.
// Built-in rules give arcs; the extraction bisects on each side of x.
ArcSpan metric_ball_arc(const LeafMetric& metric, const Point& center, double radius);

// Metric length of the coordinate arc [u,v] (v >= u; on a circle v may wrap
// past the circumference), computed by refining inscribed chains until the
// sum of chord distances stabilizes.
double arc_metric_length(const LeafMetric& metric, double u, double v);

}  // namespace rigidlab

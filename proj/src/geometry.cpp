#include "rigidlab/geometry.hpp"

#include <algorithm>

namespace rigidlab {

namespace {

double positive_fmod(double x, double m) {
    double r = std::fmod(x, m);
    if (r < 0.0) r += m;
    if (r >= m) r = 0.0;  // guard against fmod returning m after the +m
    return r;
}

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace

LeafModel LeafModel::interval(double length) {
    require(length > 0.0, "FlatInterval length must be > 0");
    return LeafModel{LeafKind::FlatInterval, length, 1};
}

LeafModel LeafModel::circle(double circumference) {
    require(circumference > 0.0, "Circle circumference must be > 0");
    return LeafModel{LeafKind::Circle, circumference, 1};
}

LeafModel LeafModel::box(int dimension, double side) {
    require(dimension >= 1 && dimension <= 3, "EuclideanBox dimension must be 1, 2 or 3");
    require(side > 0.0, "EuclideanBox side must be > 0");
    return LeafModel{LeafKind::EuclideanBox, side, dimension};
}

bool LeafModel::contains(const Point& p) const {
    if (p.dim != dim) return false;
    switch (kind) {
        case LeafKind::FlatInterval:
            return p[0] >= 0.0 && p[0] <= extent;
        case LeafKind::Circle:
            return p[0] >= 0.0 && p[0] < extent;
        case LeafKind::EuclideanBox:
            for (int i = 0; i < dim; ++i)
                if (p[i] < 0.0 || p[i] > extent) return false;
            return true;
    }
    return false;
}

Point LeafModel::reduce(const Point& p) const {
    if (kind != LeafKind::Circle) return p;
    Point q = p;
    q[0] = positive_fmod(p[0], extent);
    return q;
}

double LeafModel::diameter() const {
    switch (kind) {
        case LeafKind::FlatInterval:
            return extent;
        case LeafKind::Circle:
            return extent / 2.0;
        case LeafKind::EuclideanBox:
            return extent * std::sqrt(static_cast<double>(dim));
    }
    return extent;
}

MetricRuleKind LeafMetric::rule_kind() const {
    switch (rule.index()) {
        case 0: return MetricRuleKind::Intrinsic;
        case 1: return MetricRuleKind::Scaled;
        case 2: return MetricRuleKind::Pullback;
        case 3: return MetricRuleKind::TruncatedSup;
        default: return MetricRuleKind::Tabulated;
    }
}

LeafMetric intrinsic_metric(const LeafModel& leaf) { return LeafMetric{leaf, IntrinsicRule{}, 1e-12}; }

LeafMetric scaled_metric(const LeafModel& leaf, double factor) {
    require(factor > 0.0, "Scaled factor must be > 0");
    return LeafMetric{leaf, ScaledRule{factor}, 1e-12};
}

LeafMetric pullback_metric(const LeafModel& leaf, std::function<Point(const Point&)> map,
                           std::function<Point(const Point&)> inverse) {
    require(static_cast<bool>(map) && static_cast<bool>(inverse),
            "Pullback rule needs a map and its inverse");
    return LeafMetric{leaf, PullbackRule{std::move(map), std::move(inverse)}, 1e-12};
}

LeafMetric truncated_sup_metric(const LeafModel& leaf,
                                std::function<Point(const Point&, int)> fiber_orbit, int window,
                                double tolerance) {
    require(static_cast<bool>(fiber_orbit), "TruncatedSup rule needs a fiber orbit");
    require(window >= 0, "TruncatedSup window must be >= 0");
    return LeafMetric{leaf, TruncatedSupRule{std::move(fiber_orbit), window}, tolerance};
}

LeafMetric tabulated_metric(const LeafModel& leaf,
                            std::function<double(const Point&, const Point&)> fn,
                            double tolerance) {
    require(static_cast<bool>(fn), "Tabulated rule needs a distance oracle");
    return LeafMetric{leaf, TabulatedRule{std::move(fn)}, tolerance};
}

namespace {

double intrinsic_distance(const LeafModel& leaf, const Point& a, const Point& b) {
    switch (leaf.kind) {
        case LeafKind::FlatInterval:
            return std::fabs(a[0] - b[0]);
        case LeafKind::Circle: {
            double d = std::fabs(a[0] - b[0]);
            return std::min(d, leaf.extent - d);
        }
        case LeafKind::EuclideanBox: {
            double s = 0.0;
            for (int i = 0; i < leaf.dim; ++i) {
                double d = a[i] - b[i];
                s += d * d;
            }
            return std::sqrt(s);
        }
    }
    return 0.0;
}

}  // namespace

double distance(const LeafMetric& metric, const Point& a, const Point& b) {
    if (!metric.leaf.contains(a) || !metric.leaf.contains(b))
        throw std::domain_error("point outside the leaf's fundamental domain");
    const LeafModel& leaf = metric.leaf;
    return std::visit(
        [&](const auto& rule) -> double {
            using R = std::decay_t<decltype(rule)>;
            if constexpr (std::is_same_v<R, IntrinsicRule>) {
                return intrinsic_distance(leaf, a, b);
            } else if constexpr (std::is_same_v<R, ScaledRule>) {
                return rule.factor * intrinsic_distance(leaf, a, b);
            } else if constexpr (std::is_same_v<R, PullbackRule>) {
                return intrinsic_distance(leaf, leaf.reduce(rule.map(a)), leaf.reduce(rule.map(b)));
            } else if constexpr (std::is_same_v<R, TruncatedSupRule>) {
                double best = intrinsic_distance(leaf, a, b);
                for (int n = 1; n <= rule.window; ++n) {
                    for (int sgn : {+1, -1}) {
                        Point fa = leaf.reduce(rule.fiber_orbit(a, sgn * n));
                        Point fb = leaf.reduce(rule.fiber_orbit(b, sgn * n));
                        best = std::max(best, intrinsic_distance(leaf, fa, fb));
                    }
                }
                return best;
            } else {
                double d = rule.fn(a, b);
                if (!(d >= 0.0)) throw std::domain_error("tabulated metric returned a negative value");
                return d;
            }
        },
        metric.rule);
}

namespace {

// Largest offset t in (0, limit] with d(x, x +/- t) < r, by bisection.
// Assumes d(x, x + t) is nondecreasing in t over [0, limit], which holds for
// the built-in rules on small arcs.
double ball_edge_offset(const LeafMetric& metric, const Point& center, double radius, double limit,
                        int direction) {
    const LeafModel& leaf = metric.leaf;
    auto point_at = [&](double t) {
        Point p = center;
        p[0] = center[0] + direction * t;
        if (leaf.kind == LeafKind::Circle) p = leaf.reduce(p);
        return p;
    };
    if (limit <= 0.0) return 0.0;
    if (distance(metric, center, point_at(limit)) < radius) return limit;
    double lo = 0.0, hi = limit;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (distance(metric, center, point_at(mid)) < radius)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace

ArcSpan metric_ball_arc(const LeafMetric& metric, const Point& center, double radius) {
    if (metric.leaf.dim != 1)
        throw std::invalid_argument("metric_ball_arc requires a 1-d leaf");
    if (!metric.leaf.contains(center))
        throw std::domain_error("point outside the leaf's fundamental domain");
    ArcSpan span;
    if (radius <= 0.0) {
        span.empty = true;
        span.lo = span.hi = center[0];
        return span;
    }
    const LeafModel& leaf = metric.leaf;
    if (leaf.kind == LeafKind::Circle) {
        double half = leaf.extent / 2.0;
        Point opposite = leaf.reduce(Point(center[0] + half));
        if (distance(metric, center, opposite) < radius) {
            // Radius reaches the farthest point: the ball is the whole circle.
            span.whole = true;
            span.lo = 0.0;
            span.hi = leaf.extent;
            return span;
        }
        double right = ball_edge_offset(metric, center, radius, half, +1);
        double left = ball_edge_offset(metric, center, radius, half, -1);
        span.lo = center[0] - left;
        span.hi = center[0] + right;
        return span;
    }
    double right = ball_edge_offset(metric, center, radius, leaf.extent - center[0], +1);
    double left = ball_edge_offset(metric, center, radius, center[0], -1);
    span.lo = center[0] - left;
    span.hi = center[0] + right;
    return span;
}

double arc_metric_length(const LeafMetric& metric, double u, double v) {
    if (metric.leaf.dim != 1)
        throw std::invalid_argument("arc_metric_length requires a 1-d leaf");
    if (v < u) std::swap(u, v);
    const LeafModel& leaf = metric.leaf;
    auto point_at = [&](double t) {
        Point p(t);
        if (leaf.kind == LeafKind::Circle) p = leaf.reduce(p);
        return p;
    };
    double prev = -1.0;
    for (int pieces = 4;; pieces *= 2) {
        double sum = 0.0;
        double step = (v - u) / pieces;
        for (int i = 0; i < pieces; ++i)
            sum += distance(metric, point_at(u + i * step), point_at(u + (i + 1) * step));
        if (prev >= 0.0 && std::fabs(sum - prev) <= 1e-9 * std::max(1.0, sum)) return sum;
        if (pieces >= 1 << 16) return sum;
        prev = sum;
    }
}

}  // namespace rigidlab

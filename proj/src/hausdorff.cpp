#include "rigidlab/hausdorff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rigidlab {

namespace {

void check_ladder(const std::vector<double>& ladder) {
    if (ladder.empty()) throw std::invalid_argument("delta ladder must be nonempty");
    for (size_t i = 0; i < ladder.size(); ++i) {
        if (!(ladder[i] > 0.0)) throw std::invalid_argument("delta ladder entries must be positive");
        if (i > 0 && !(ladder[i] < ladder[i - 1]))
            throw std::invalid_argument("delta ladder must be strictly decreasing");
    }
}

double unit_ball_volume(int n) {
    switch (n) {
        case 1: return 2.0;
        case 2: return M_PI;
        default: return 4.0 * M_PI / 3.0;
    }
}

// Cover cost for a coordinate arc [u,v] on a 1-d leaf at scale delta:
// subdivide until every piece has metric diameter <= delta, cost = sum of
// (diam/2)^m over pieces.
double arc_cover_cost(const LeafMetric& metric, double u, double v, int m, double delta) {
    const LeafModel& leaf = metric.leaf;
    if (v <= u) return 0.0;
    auto point_at = [&](double t) {
        Point p(t);
        if (leaf.kind == LeafKind::Circle) p = leaf.reduce(p);
        return p;
    };
    int pieces = leaf.kind == LeafKind::Circle ? 4 : 1;
    for (;;) {
        double step = (v - u) / pieces;
        double cost = 0.0;
        double max_diam = 0.0;
        for (int i = 0; i < pieces; ++i) {
            double diam = distance(metric, point_at(u + i * step), point_at(u + (i + 1) * step));
            max_diam = std::max(max_diam, diam);
            cost += std::pow(diam / 2.0, m);
        }
        if (max_diam <= delta || pieces >= (1 << 22)) return cost;
        int grow = static_cast<int>(std::ceil(max_diam / delta));
        pieces *= std::clamp(grow, 2, 64);
    }
}

struct BoxRegion {
    Point center;       // Euclidean center of the ball region (box coords)
    double radius = 0;  // Euclidean radius; <0 means the whole box
};

// Grid cover of a box leaf (whole box or a Euclidean ball clipped to it):
// cells of side h, each inscribed in a metric ball of radius scale*h*sqrt(n)/2.
double box_cover_cost(const LeafModel& leaf, double scale, const BoxRegion& region, int m,
                      double delta) {
    const int n = leaf.dim;
    double h = 0.999 * delta / (scale * std::sqrt(static_cast<double>(n)));
    h = std::min(h, leaf.extent);
    long cells_per_axis = static_cast<long>(std::ceil(leaf.extent / h - 1e-12));
    h = leaf.extent / static_cast<double>(cells_per_axis);
    double cell_ball_radius = scale * h * std::sqrt(static_cast<double>(n)) / 2.0;

    long count = 0;
    if (region.radius < 0.0) {
        count = 1;
        for (int i = 0; i < n; ++i) count *= cells_per_axis;
    } else {
        // Count cells whose closest point to the center is inside the ball.
        auto axis_range = [&](double c) {
            long lo = static_cast<long>(std::floor((c - region.radius) / h));
            long hi = static_cast<long>(std::floor((c + region.radius) / h));
            lo = std::max(lo, 0L);
            hi = std::min(hi, cells_per_axis - 1);
            return std::pair<long, long>(lo, hi);
        };
        auto [ilo, ihi] = axis_range(region.center[0]);
        auto [jlo, jhi] = n >= 2 ? axis_range(region.center[1]) : std::pair<long, long>(0, 0);
        auto [klo, khi] = n >= 3 ? axis_range(region.center[2]) : std::pair<long, long>(0, 0);
        auto axis_gap = [&](long idx, double c) {
            double lo = idx * h, hi = (idx + 1) * h;
            if (c < lo) return lo - c;
            if (c > hi) return c - hi;
            return 0.0;
        };
        double r2 = region.radius * region.radius;
        for (long i = ilo; i <= ihi; ++i) {
            double gi = axis_gap(i, region.center[0]);
            for (long j = jlo; j <= jhi; ++j) {
                double gj = n >= 2 ? axis_gap(j, region.center[1]) : 0.0;
                for (long k = klo; k <= khi; ++k) {
                    double gk = n >= 3 ? axis_gap(k, region.center[2]) : 0.0;
                    if (gi * gi + gj * gj + gk * gk < r2) ++count;
                }
            }
        }
    }
    return static_cast<double>(count) * std::pow(cell_ball_radius, m);
}

}  // namespace

std::vector<double> dyadic_ladder(int j_min, int j_max) {
    std::vector<double> ladder;
    for (int j = j_min; j <= j_max; ++j) ladder.push_back(std::ldexp(1.0, -j));
    return ladder;
}

HausdorffEstimate hausdorff_estimate(const LeafMetric& metric, const std::optional<Ball>& region,
                                     int m, const std::vector<double>& delta_ladder,
                                     double convergence_tol) {
    check_ladder(delta_ladder);
    if (m != metric.leaf.dim)
        throw std::invalid_argument("premeasure dimension must match the leaf dimension");

    HausdorffEstimate est;
    est.m = m;
    est.delta_ladder = delta_ladder;

    std::vector<double> raw(delta_ladder.size(), 0.0);
    if (metric.leaf.dim == 1) {
        ArcSpan span;
        if (region) {
            span = metric_ball_arc(metric, region->center, region->radius);
        } else {
            span.lo = 0.0;
            span.hi = metric.leaf.extent;
            span.whole = metric.leaf.kind == LeafKind::Circle;
        }
        if (!span.empty) {
            for (size_t i = 0; i < delta_ladder.size(); ++i)
                raw[i] = arc_cover_cost(metric, span.lo, span.hi, m, delta_ladder[i]);
            est.lower_bound = arc_metric_length(metric, span.lo, span.hi) / 2.0;
        }
    } else {
        double scale = 1.0;
        if (metric.rule_kind() == MetricRuleKind::Scaled)
            scale = std::get<ScaledRule>(metric.rule).factor;
        else if (metric.rule_kind() != MetricRuleKind::Intrinsic)
            throw std::invalid_argument(
                "hausdorff_estimate on box leaves supports the intrinsic and scaled rules");
        BoxRegion br;
        br.radius = -1.0;
        double vol = std::pow(metric.leaf.extent, metric.leaf.dim);
        if (region) {
            if (region->radius <= 0.0) {
                est.per_delta_values.assign(delta_ladder.size(), 0.0);
                est.converged = true;
                return est;
            }
            br.center = region->center;
            br.radius = region->radius / scale;
            // Volume of the (unclipped) Euclidean ball, for the lower bound.
            vol = unit_ball_volume(metric.leaf.dim) *
                  std::pow(br.radius, metric.leaf.dim);
        }
        for (size_t i = 0; i < delta_ladder.size(); ++i)
            raw[i] = box_cover_cost(metric.leaf, scale, br, m, delta_ladder[i]);
        est.lower_bound = std::pow(scale, m) * vol / unit_ball_volume(metric.leaf.dim);
    }

    // A cover admissible at a fine rung is admissible at every coarser one,
    // so the best-known value at rung i is the min over rungs >= i.
    est.per_delta_values = raw;
    for (size_t i = est.per_delta_values.size(); i-- > 1;)
        est.per_delta_values[i - 1] = std::min(est.per_delta_values[i - 1], est.per_delta_values[i]);

    est.value = est.per_delta_values.back();
    if (est.per_delta_values.size() >= 2) {
        double prev = est.per_delta_values[est.per_delta_values.size() - 2];
        est.converged =
            std::fabs(est.value - prev) <= convergence_tol * std::max(est.value, 1e-300);
    } else {
        est.converged = false;
    }
    est.gap = est.lower_bound > 0.0 ? est.value / est.lower_bound : 1.0;
    return est;
}

DoublingScan doubling_constant(const MeasureOracle& mass, const std::vector<Point>& centers,
                               const std::vector<double>& radii) {
    if (centers.empty() || radii.empty())
        throw std::invalid_argument("doubling scan needs centers and radii");
    DoublingScan scan;
    for (const Point& x : centers) {
        for (double r : radii) {
            double denom = mass(Ball{x, r});
            double numer = mass(Ball{x, 2.0 * r});
            double ratio;
            if (denom > 0.0) {
                ratio = numer / denom;
            } else {
                ratio = std::numeric_limits<double>::infinity();
                ++scan.zero_denominators;
            }
            if (ratio > scan.omega) {
                scan.omega = ratio;
                scan.worst_center = x;
                scan.worst_radius = r;
            }
        }
    }
    return scan;
}

std::vector<double> annulus_mass_profile(const MeasureOracle& mass, const Ball& ball,
                                         const std::vector<double>& widths) {
    check_ladder(widths);
    std::vector<double> out;
    out.reserve(widths.size());
    for (double w : widths) {
        double outer = mass(Ball{ball.center, ball.radius + w});
        double inner = ball.radius - w > 0.0 ? mass(Ball{ball.center, ball.radius - w}) : 0.0;
        out.push_back(std::max(0.0, outer - inner));
    }
    return out;
}

double hausdorff_ball_mass(const LeafMetric& metric, const Point& center, double radius) {
    if (radius <= 0.0) return 0.0;
    if (metric.leaf.dim == 1) {
        ArcSpan span = metric_ball_arc(metric, center, radius);
        if (span.empty) return 0.0;
        switch (metric.rule_kind()) {
            case MetricRuleKind::Intrinsic:
                return (span.hi - span.lo) / 2.0;
            case MetricRuleKind::Scaled:
                return std::get<ScaledRule>(metric.rule).factor * (span.hi - span.lo) / 2.0;
            default:
                return arc_metric_length(metric, span.lo, span.hi) / 2.0;
        }
    }
    auto est = hausdorff_estimate(metric, Ball{center, radius}, metric.leaf.dim,
                                  dyadic_ladder(3, 11));
    return est.value;
}

}  // namespace rigidlab

#include "rigidlab/disintegration.hpp"

#include <algorithm>
#include <cmath>

namespace rigidlab {

namespace {

// Sorts, merges coordinates that agree at the quantum, and finalizes the
// conditional's derived fields.
void finalize_conditional(EmpiricalConditional& cond, std::vector<double>& raw_coords,
                          const DisintegrationOptions& options) {
    std::sort(raw_coords.begin(), raw_coords.end());
    cond.coords.clear();
    cond.weights.clear();
    long long prev_key = 0;
    for (double c : raw_coords) {
        long long key = std::llround(c / options.quantum);
        if (!cond.coords.empty() && key == prev_key) {
            cond.weights.back() += 1.0;
        } else {
            cond.coords.push_back(c);
            cond.weights.push_back(1.0);
            prev_key = key;
        }
    }
    cond.raw_count = static_cast<double>(raw_coords.size());
    cond.rebuild_cum();
    cond.qualifying = raw_coords.size() >= static_cast<size_t>(options.min_bin_count);
    // Mass-weighted median as the anchor: deterministic and inside the support.
    double half = cond.total_mass() / 2.0;
    for (size_t i = 0; i < cond.coords.size(); ++i) {
        if (cond.cum[i + 1] >= half) {
            cond.anchor = Point(cond.coords[i]);
            break;
        }
    }
}

}  // namespace

void EmpiricalConditional::rebuild_cum() {
    cum.assign(weights.size() + 1, 0.0);
    for (size_t i = 0; i < weights.size(); ++i) cum[i + 1] = cum[i] + weights[i];
}

double EmpiricalConditional::arc_mass(double lo, double hi) const {
    if (coords.empty() || hi <= lo) return 0.0;
    double extent = fiber.extent;
    auto range_mass = [&](double a, double b) {
        auto first = std::upper_bound(coords.begin(), coords.end(), a);
        auto last = std::lower_bound(coords.begin(), coords.end(), b);
        size_t i = static_cast<size_t>(first - coords.begin());
        size_t j = static_cast<size_t>(last - coords.begin());
        return cum[j] - cum[i];
    };
    if (fiber.kind != LeafKind::Circle) return range_mass(lo, hi);
    if (hi - lo >= extent) return total_mass();
    double a = lo, b = hi;
    if (a < 0.0) return range_mass(a + extent, extent) + range_mass(-1.0, b);
    if (b > extent) return range_mass(a, extent) + range_mass(-1.0, b - extent);
    return range_mass(a, b);
}

double EmpiricalConditional::ball_mass(const LeafMetric& metric, const Point& center,
                                       double radius) const {
    if (radius <= 0.0 || coords.empty()) return 0.0;
    ArcSpan span = metric_ball_arc(metric, center, radius);
    if (span.empty) return 0.0;
    if (span.whole) return total_mass();
    return arc_mass(span.lo, span.hi);
}

Disintegration disintegrate(OrbitStream& orbit, const Chart& chart,
                            const DisintegrationOptions& options) {
    Disintegration out;
    out.chart = chart;
    std::vector<std::vector<double>> bins(static_cast<size_t>(chart.cells));
    orbit.reset();
    State s;
    while (orbit.next(s)) {
        Point f = chart.fiber.reduce(Point(s.fiber));
        if (!chart.fiber.contains(f) || !(s.base >= 0.0 && s.base < 1.0)) {
            ++out.skipped;
            continue;
        }
        bins[static_cast<size_t>(cell_of(chart, s.base))].push_back(f.scalar());
        ++out.binned;
    }
    for (int cell = 0; cell < chart.cells; ++cell) {
        auto& raw = bins[static_cast<size_t>(cell)];
        if (raw.empty()) continue;
        EmpiricalConditional cond;
        cond.plaque = PlaqueId{chart.id, cell};
        cond.fiber = chart.fiber;
        finalize_conditional(cond, raw, options);
        out.by_cell.emplace(cell, std::move(cond));
        raw.clear();
        raw.shrink_to_fit();
    }
    if (out.by_cell.empty()) out.diagnostic = "orbit does not intersect the chart";
    return out;
}

std::vector<Disintegration> disintegrate_multi(OrbitStream& orbit,
                                               const std::vector<Chart>& charts,
                                               const DisintegrationOptions& options) {
    std::vector<Disintegration> out;
    out.reserve(charts.size());
    for (const Chart& chart : charts) out.push_back(disintegrate(orbit, chart, options));
    return out;
}

EmpiricalConditional normalize_unit_ball(EmpiricalConditional cond, const LeafMetric& metric) {
    double mass = cond.ball_mass(metric, cond.anchor, 1.0);
    if (!(mass > 0.0))
        throw std::domain_error("unit ball around the anchor carries no mass");
    double factor = 1.0 / mass;
    if (std::fabs(factor - 1.0) >= 1e-12) {
        for (double& w : cond.weights) w *= factor;
        cond.rebuild_cum();
        cond.normalization *= factor;
    }
    cond.normalized = true;
    return cond;
}

double proportionality(const EmpiricalConditional& cond, const Point& y,
                       const LeafMetric& metric) {
    double mass = cond.ball_mass(metric, y, 1.0);
    if (!(mass > 0.0)) throw std::domain_error("unit ball around y carries no mass");
    return 1.0 / mass;
}

OverlapReport overlap_consistency(const Disintegration& d1, const Disintegration& d2,
                                  const std::vector<OverlapPair>& overlaps, int bins,
                                  long min_samples) {
    OverlapReport report;
    const double extent = d1.chart.fiber.extent;
    auto histogram = [&](const EmpiricalConditional& cond) {
        std::vector<double> h(static_cast<size_t>(bins), 0.0);
        double total = cond.total_mass();
        for (size_t i = 0; i < cond.coords.size(); ++i) {
            int b = static_cast<int>(cond.coords[i] / extent * bins);
            b = std::clamp(b, 0, bins - 1);
            h[static_cast<size_t>(b)] += cond.weights[i] / total;
        }
        return h;
    };
    for (const OverlapPair& pair : overlaps) {
        OverlapDeviation dev;
        dev.cell1 = pair.cell1;
        dev.cell2 = pair.cell2;
        auto it1 = d1.by_cell.find(pair.cell1);
        auto it2 = d2.by_cell.find(pair.cell2);
        if (it1 == d1.by_cell.end() || it2 == d2.by_cell.end() ||
            it1->second.raw_count < static_cast<double>(min_samples) ||
            it2->second.raw_count < static_cast<double>(min_samples)) {
            dev.flagged = true;
            ++report.flagged;
            report.pairs.push_back(dev);
            continue;
        }
        auto h1 = histogram(it1->second);
        auto h2 = histogram(it2->second);
        double tv = 0.0;
        for (int b = 0; b < bins; ++b)
            tv += std::fabs(h1[static_cast<size_t>(b)] - h2[static_cast<size_t>(b)]);
        dev.deviation = tv / 2.0;
        report.max_deviation = std::max(report.max_deviation, dev.deviation);
        report.pairs.push_back(dev);
    }
    return report;
}

double ks_uniform(const EmpiricalConditional& cond) {
    double total = cond.total_mass();
    if (total <= 0.0) return 1.0;
    double extent = cond.fiber.extent;
    double d = 0.0;
    for (size_t i = 0; i < cond.coords.size(); ++i) {
        double u = cond.coords[i] / extent;
        d = std::max(d, std::fabs(cond.cum[i] / total - u));
        d = std::max(d, std::fabs(cond.cum[i + 1] / total - u));
    }
    return d;
}

EmpiricalConditional merge_conditionals(const EmpiricalConditional& a,
                                        const EmpiricalConditional& b,
                                        const DisintegrationOptions& options) {
    EmpiricalConditional merged;
    merged.plaque = a.plaque;
    merged.fiber = a.fiber;
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(a.coords.size() + b.coords.size());
    for (size_t i = 0; i < a.coords.size(); ++i) pairs.emplace_back(a.coords[i], a.weights[i]);
    for (size_t i = 0; i < b.coords.size(); ++i) pairs.emplace_back(b.coords[i], b.weights[i]);
    std::sort(pairs.begin(), pairs.end());
    long long prev_key = 0;
    for (const auto& [c, w] : pairs) {
        long long key = std::llround(c / options.quantum);
        if (!merged.coords.empty() && key == prev_key) {
            merged.weights.back() += w;
        } else {
            merged.coords.push_back(c);
            merged.weights.push_back(w);
            prev_key = key;
        }
    }
    merged.raw_count = a.raw_count + b.raw_count;
    merged.rebuild_cum();
    merged.qualifying =
        merged.raw_count >= static_cast<double>(options.min_bin_count);
    double half = merged.total_mass() / 2.0;
    for (size_t i = 0; i < merged.coords.size(); ++i) {
        if (merged.cum[i + 1] >= half) {
            merged.anchor = Point(merged.coords[i]);
            break;
        }
    }
    return merged;
}

}  // namespace rigidlab

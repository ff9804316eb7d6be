#include "rigidlab/metric_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rigidlab {

MetricSystem intrinsic_system(const LeafModel& fiber) {
    MetricSystem sys;
    sys.provenance = MetricProvenance::Intrinsic;
    sys.fiber = fiber;
    sys.metric_for_base = [fiber](double) { return intrinsic_metric(fiber); };
    return sys;
}

MetricSystem scaled_system(const LeafModel& fiber, double factor) {
    MetricSystem sys;
    sys.provenance = MetricProvenance::Supplied;
    sys.fiber = fiber;
    sys.metric_for_base = [fiber, factor](double) { return scaled_metric(fiber, factor); };
    return sys;
}

MetricSystem pullback_system(const SystemSpec& spec) {
    if (spec.kind != SystemKind::ConjugatedRotationCocycle &&
        spec.kind != SystemKind::NeutralCenterToy)
        throw std::invalid_argument("pullback system requires a conjugated cocycle");
    MetricSystem sys;
    sys.provenance = MetricProvenance::Pullback;
    sys.fiber = spec.fiber_model();
    SineDiffeo h = spec.conjugacy();
    LeafModel fiber = sys.fiber;
    sys.metric_for_base = [fiber, h](double) {
        auto fwd = [h](const Point& p) {
            double w = h.inverse(p.scalar());
            return Point(w - std::floor(w));
        };
        auto inv = [h](const Point& p) {
            double v = h.apply(p.scalar());
            return Point(v - std::floor(v));
        };
        return pullback_metric(fiber, fwd, inv);
    };
    return sys;
}

MetricSystem sup_truncated_system(const SystemSpec& spec, int window) {
    MetricSystem sys;
    sys.provenance = MetricProvenance::SupTruncated;
    sys.fiber = spec.fiber_model();
    sys.window = window;
    LeafModel fiber = sys.fiber;
    sys.metric_for_base = [spec, fiber, window](double base) {
        return truncated_sup_metric(fiber, fiber_orbit_map(spec, base, window), window);
    };
    return sys;
}

double sup_metric_truncated(const SystemSpec& spec, double base, const Point& a, const Point& b,
                            int window) {
    if (window < 0) throw std::invalid_argument("truncation level must be >= 0");
    LeafMetric metric =
        truncated_sup_metric(spec.fiber_model(), fiber_orbit_map(spec, base, window), window);
    return distance(metric, a, b);
}

DefectReport invariance_defect(const MetricSystem& system, const SystemSpec& spec,
                               const std::vector<SamplePair>& samples) {
    DefectReport report;
    for (const SamplePair& sample : samples) {
        LeafMetric here = system.metric_for_base(sample.base);
        double d0 = distance(here, sample.a, sample.b);
        State sa = step(spec, State{sample.base, sample.a.scalar()});
        State sb = step(spec, State{sample.base, sample.b.scalar()});
        LeafMetric there = system.metric_for_base(sa.base);
        double d1 = distance(there, system.fiber.reduce(Point(sa.fiber)),
                             system.fiber.reduce(Point(sb.fiber)));
        double defect = std::fabs(d1 - d0);
        ++report.samples;
        if (defect > report.max_defect) {
            report.max_defect = defect;
            report.worst = sample;
        }
    }
    return report;
}

BiLipschitzReport bilipschitz_constants(const MetricSystem& system, const MetricSystem& reference,
                                        const std::vector<SamplePair>& samples) {
    BiLipschitzReport report;
    report.A_hat = std::numeric_limits<double>::infinity();
    report.B_hat = 0.0;
    for (const SamplePair& sample : samples) {
        LeafMetric sys_metric = system.metric_for_base(sample.base);
        LeafMetric ref_metric = reference.metric_for_base(sample.base);
        double d_ref = distance(ref_metric, sample.a, sample.b);
        double d_sys = distance(sys_metric, sample.a, sample.b);
        if (d_ref <= 0.0) {
            ++report.skipped;
            report.max_violation = std::max(report.max_violation, d_sys);
            continue;
        }
        double ratio = d_sys / d_ref;
        report.A_hat = std::min(report.A_hat, ratio);
        report.B_hat = std::max(report.B_hat, ratio);
        ++report.sample_size;
    }
    if (report.sample_size == 0)
        throw std::invalid_argument("all sample pairs coincide under the reference metric");
    return report;
}

double derivative_ratio_bound(const SystemSpec& spec) {
    SineDiffeo h = spec.conjugacy();
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    const int grid = 1 << 16;
    for (int i = 0; i <= grid; ++i) {
        double d = h.derivative(static_cast<double>(i) / grid);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    // The cosine extremes sit on the grid (w = 0 and w = 1/2), so this ratio
    // is the exact sup of the iterate Lipschitz constants.
    return hi / lo;
}

}  // namespace rigidlab

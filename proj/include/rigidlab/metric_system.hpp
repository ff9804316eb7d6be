#pragma once

#include <vector>

#include "rigidlab/systems.hpp"

namespace rigidlab {

enum class MetricProvenance { Intrinsic, SupTruncated, Pullback, Supplied };

// Per-plaque metric assignment. Metrics may vary with the base point; the
// built-in product systems use plaque-constant families evaluated at a
// representative base point.
struct MetricSystem {
    MetricProvenance provenance = MetricProvenance::Intrinsic;
    LeafModel fiber;
    int window = 0;  // truncation level for SupTruncated
    std::function<LeafMetric(double base)> metric_for_base;

    MetricSystem() : fiber(LeafModel::circle(1.0)) {}
};

MetricSystem intrinsic_system(const LeafModel& fiber);
MetricSystem scaled_system(const LeafModel& fiber, double factor);
// Pullback of the intrinsic metric through the system's conjugacy:
// d(a,b) = d_c(h^{-1}(a), h^{-1}(b)).
MetricSystem pullback_system(const SystemSpec& spec);
MetricSystem sup_truncated_system(const SystemSpec& spec, int window);

// Truncated invariant sup metric over the fiber at `base`:
// max over |n| <= window of d_c(F^n-fiber(a), F^n-fiber(b)).
double sup_metric_truncated(const SystemSpec& spec, double base, const Point& a, const Point& b,
                            int window);

struct SamplePair {
    double base = 0.0;
    Point a;
    Point b;
};

struct DefectReport {
    double max_defect = 0.0;
    SamplePair worst;
    long samples = 0;
};

// Max of |d_{f(x)}(F a, F b) - d_x(a, b)| over the samples.
DefectReport invariance_defect(const MetricSystem& system, const SystemSpec& spec,
                               const std::vector<SamplePair>& samples);

struct BiLipschitzReport {
    double A_hat = 0.0;  // min ratio d_sys / d_ref over the samples
    double B_hat = 0.0;  // max ratio
    long sample_size = 0;
    long skipped = 0;            // coincident pairs
    double max_violation = 0.0;  // d_sys mass on pairs the reference collapses
};

BiLipschitzReport bilipschitz_constants(const MetricSystem& system, const MetricSystem& reference,
                                        const std::vector<SamplePair>& samples);

// Upper bound on the fiber-iterate Lipschitz constants measured from the
// derivative field of the fiber maps (max/min of h' over the circle).
double derivative_ratio_bound(const SystemSpec& spec);

}  // namespace rigidlab

#pragma once

#include <map>
#include <string>
#include <vector>

#include "rigidlab/hausdorff.hpp"
#include "rigidlab/lamination.hpp"
#include "rigidlab/systems.hpp"

namespace rigidlab {

// Weighted point cloud on one plaque approximating the conditional measure.
// Coordinates are sorted and merged at the atom quantum; weights start as
// sample counts and carry the unit-ball normalization afterwards.
struct EmpiricalConditional {
    PlaqueId plaque;
    LeafModel fiber;
    std::vector<double> coords;
    std::vector<double> weights;
    std::vector<double> cum;  // cum[i] = sum of weights[0..i-1]; cum.back() = total
    double raw_count = 0.0;
    Point anchor;  // mass-weighted fiber median
    double normalization = 1.0;
    bool normalized = false;
    bool qualifying = true;

    EmpiricalConditional() : fiber(LeafModel::circle(1.0)) {}

    double total_mass() const { return cum.empty() ? 0.0 : cum.back(); }
    // Mass of the open metric ball {y : d(center, y) < radius}.
    double ball_mass(const LeafMetric& metric, const Point& center, double radius) const;
    // Mass of an open coordinate arc (lo, hi); wraps on circle fibers.
    double arc_mass(double lo, double hi) const;
    void rebuild_cum();
};

struct DisintegrationOptions {
    long min_bin_count = 1000;
    double quantum = 1e-12;  // exact-coordinate merge quantization
};

struct Disintegration {
    Chart chart;
    std::map<int, EmpiricalConditional> by_cell;
    long binned = 0;
    long skipped = 0;
    std::string diagnostic;
};

// Bins the orbit by plaque and builds the raw fiber conditionals (weights =
// sample counts). States outside the fiber domain are skipped and counted.
Disintegration disintegrate(OrbitStream& orbit, const Chart& chart,
                            const DisintegrationOptions& options = {});

// Same orbit binned against several charts (the stream is replayed per chart).
std::vector<Disintegration> disintegrate_multi(OrbitStream& orbit,
                                               const std::vector<Chart>& charts,
                                               const DisintegrationOptions& options = {});

// Rescales so the unit ball around the anchor carries mass exactly one. A
// factor within 1e-12 of one is treated as already normalized, which makes
// the operation exactly idempotent.
EmpiricalConditional normalize_unit_ball(EmpiricalConditional cond, const LeafMetric& metric);

// Proportionality constant between the anchor-normalized conditional and its
// re-anchoring at y: beta = 1 / mass(B(y,1)).
double proportionality(const EmpiricalConditional& cond, const Point& y, const LeafMetric& metric);

struct OverlapDeviation {
    int cell1 = 0;
    int cell2 = 0;
    double deviation = 0.0;  // total variation over the common binning
    bool flagged = false;    // insufficient samples on either side
};

struct OverlapReport {
    double max_deviation = 0.0;
    std::vector<OverlapDeviation> pairs;
    long flagged = 0;
};

// Prop-style chart consistency: conditionals of base-overlapping plaques,
// rescaled to probability, compared in total variation over a common binning.
OverlapReport overlap_consistency(const Disintegration& d1, const Disintegration& d2,
                                  const std::vector<OverlapPair>& overlaps, int bins = 1024,
                                  long min_samples = 1000);

// Kolmogorov-Smirnov statistic of the conditional against the uniform law on
// its fiber model.
double ks_uniform(const EmpiricalConditional& cond);

// Mass-weighted merge of sibling conditionals (refinement coarsening).
EmpiricalConditional merge_conditionals(const EmpiricalConditional& a,
                                        const EmpiricalConditional& b,
                                        const DisintegrationOptions& options = {});

}  // namespace rigidlab

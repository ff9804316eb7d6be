#pragma once

#include <utility>
#include <vector>

#include "rigidlab/geometry.hpp"

namespace rigidlab {

// Product-type foliated chart: K half-open cells partitioning the base
// fundamental domain [0,1), optionally rotated by an offset, with a common
// fiber model. Each (chart, cell) names one plaque.
struct Chart {
    int id = 0;
    int cells = 1;
    double offset = 0.0;
    LeafModel fiber;

    Chart() : fiber(LeafModel::circle(1.0)) {}
    Chart(int id_, int cells_, LeafModel fiber_, double offset_ = 0.0);
};

struct PlaqueId {
    int chart_id = 0;
    int cell = 0;

    bool operator==(const PlaqueId&) const = default;
    bool operator<(const PlaqueId& o) const {
        return chart_id != o.chart_id ? chart_id < o.chart_id : cell < o.cell;
    }
};

// Cell index for a base coordinate in [0,1); half-open convention [a,b).
int cell_of(const Chart& chart, double base);

// Chart evaluation: splits a product point into its plaque and fiber
// coordinate (reduced to the fiber model's domain).
std::pair<PlaqueId, Point> locate(const Chart& chart, double base, const Point& fiber);

// The cell's footprint on [0,1): one interval, or two when it wraps.
std::vector<std::pair<double, double>> cell_intervals(const Chart& chart, int cell);

struct OverlapPair {
    int cell1 = 0;
    int cell2 = 0;
    double length = 0.0;  // base measure of the intersection
    std::vector<std::pair<double, double>> intervals;
};

// All pairs of cells with base intersection of positive length. Requires the
// same fiber model on both charts.
std::vector<OverlapPair> overlap_pairs(const Chart& chart1, const Chart& chart2);

}  // namespace rigidlab

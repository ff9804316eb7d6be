#include "rigidlab/lamination.hpp"

#include <algorithm>
#include <cmath>

namespace rigidlab {

Chart::Chart(int id_, int cells_, LeafModel fiber_, double offset_)
    : id(id_), cells(cells_), offset(offset_), fiber(fiber_) {
    if (cells < 1) throw std::invalid_argument("chart needs at least one cell");
    if (!(offset >= 0.0 && offset < 1.0)) throw std::invalid_argument("offset must lie in [0,1)");
}

int cell_of(const Chart& chart, double base) {
    if (!(base >= 0.0 && base < 1.0))
        throw std::domain_error("base coordinate outside the chart domain [0,1)");
    double t = base - chart.offset;
    if (t < 0.0) t += 1.0;
    int cell = static_cast<int>(std::floor(t * chart.cells));
    return std::min(cell, chart.cells - 1);
}

std::pair<PlaqueId, Point> locate(const Chart& chart, double base, const Point& fiber) {
    int cell = cell_of(chart, base);
    Point f = chart.fiber.reduce(fiber);
    if (!chart.fiber.contains(f))
        throw std::domain_error("fiber coordinate outside the fiber model's domain");
    return {PlaqueId{chart.id, cell}, f};
}

std::vector<std::pair<double, double>> cell_intervals(const Chart& chart, int cell) {
    if (cell < 0 || cell >= chart.cells) throw std::invalid_argument("cell index out of range");
    double a = chart.offset + static_cast<double>(cell) / chart.cells;
    double b = chart.offset + static_cast<double>(cell + 1) / chart.cells;
    std::vector<std::pair<double, double>> parts;
    if (b <= 1.0) {
        parts.emplace_back(a, b);
    } else if (a >= 1.0) {
        parts.emplace_back(a - 1.0, b - 1.0);
    } else {
        parts.emplace_back(a, 1.0);
        parts.emplace_back(0.0, b - 1.0);
    }
    return parts;
}

std::vector<OverlapPair> overlap_pairs(const Chart& chart1, const Chart& chart2) {
    if (chart1.fiber.kind != chart2.fiber.kind || chart1.fiber.dim != chart2.fiber.dim ||
        chart1.fiber.extent != chart2.fiber.extent)
        throw std::invalid_argument("charts must share the fiber model");
    std::vector<OverlapPair> out;
    for (int i = 0; i < chart1.cells; ++i) {
        auto parts1 = cell_intervals(chart1, i);
        for (int j = 0; j < chart2.cells; ++j) {
            auto parts2 = cell_intervals(chart2, j);
            OverlapPair pair{i, j, 0.0, {}};
            for (const auto& [a1, b1] : parts1) {
                for (const auto& [a2, b2] : parts2) {
                    double lo = std::max(a1, a2), hi = std::min(b1, b2);
                    if (hi > lo) {
                        pair.intervals.emplace_back(lo, hi);
                        pair.length += hi - lo;
                    }
                }
            }
            if (pair.length > 0.0) out.push_back(std::move(pair));
        }
    }
    return out;
}

}  // namespace rigidlab

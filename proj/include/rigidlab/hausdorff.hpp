#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rigidlab/geometry.hpp"

namespace rigidlab {

// Outcome of the cover-refinement estimator for the m-dimensional Hausdorff
// measure built from the premeasure rho(B(x,r)) = r^m. Under this convention
// the 1-d measure of an arc is half its metric length.
struct HausdorffEstimate {
    double value = 0.0;
    int m = 1;
    std::vector<double> delta_ladder;      // strictly decreasing
    std::vector<double> per_delta_values;  // nondecreasing as delta decreases
    bool converged = false;
    // Ball-volume lower bound on the true infimum; gap = value / lower_bound
    // reports how far the structured covers might sit above it.
    double lower_bound = 0.0;
    double gap = 1.0;
};

std::vector<double> dyadic_ladder(int j_min, int j_max);

// Estimates the m-dimensional Hausdorff measure of a region (a metric ball,
// or the whole leaf when region is empty) via structured covers refined down
// the delta ladder. Equal-arc chains on 1-d leaves, grid covers on boxes.
HausdorffEstimate hausdorff_estimate(const LeafMetric& metric, const std::optional<Ball>& region,
                                     int m, const std::vector<double>& delta_ladder,
                                     double convergence_tol = 1e-3);

using MeasureOracle = std::function<double(const Ball&)>;

struct DoublingScan {
    double omega = 0.0;  // max ratio nu(B(x,2r)) / nu(B(x,r)); +inf on zero mass
    Point worst_center;
    double worst_radius = 0.0;
    int zero_denominators = 0;
};

// Empirical doubling constant: max of nu(B(x,2r))/nu(B(x,r)) over the scan
// grid. Zero-mass denominators yield an infinite ratio and are counted.
DoublingScan doubling_constant(const MeasureOracle& mass, const std::vector<Point>& centers,
                               const std::vector<double>& radii);

// Masses of the annuli {y : r - w < d(x,y) < r + w} for each width w, in
// ladder order, computed as nu(B(x,r+w)) - nu(B(x,r-w)).
std::vector<double> annulus_mass_profile(const MeasureOracle& mass, const Ball& ball,
                                         const std::vector<double>& widths);

// Measure of a metric ball under the r^m-convention Hausdorff measure of the
// metric, with a closed form for the exact 1-d rules and cover refinement
// otherwise. Shared by the regularity and distortion machinery.
double hausdorff_ball_mass(const LeafMetric& metric, const Point& center, double radius);

}  // namespace rigidlab

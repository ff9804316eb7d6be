#pragma once

#include <string>
#include <vector>

#include "rigidlab/disintegration.hpp"

namespace rigidlab {

// Ratio sequence mu_x(B(x,eps_k)) / lambda_x(B(x,eps_k)) at one anchor.
struct DistortionLadder {
    PlaqueId plaque;
    int anchor_id = 0;
    Point anchor;
    std::vector<double> eps;
    std::vector<double> mu_mass;
    std::vector<double> lambda_mass;
    std::vector<double> ratios;
    long dropped_rungs = 0;  // rungs with vanishing lambda
    double upper_tail = 0.0;  // max ratio over the deepest three rungs
    double lower_tail = 0.0;  // min ratio over the deepest three rungs
};

std::vector<double> eps_ladder_default();  // 2^-k, k = 2..12

DistortionLadder distortion_ladder(const EmpiricalConditional& cond, const LeafMetric& metric,
                                   const std::vector<double>& eps_ladder, const Point& anchor,
                                   int anchor_id = 0);

// Ladders at `count` deterministic quantile anchors of the conditional.
std::vector<DistortionLadder> anchor_ladders(const EmpiricalConditional& cond,
                                             const LeafMetric& metric,
                                             const std::vector<double>& eps_ladder, int count);

struct UniformityCheck {
    double delta_bar = 0.0;  // median of deepest-rung ratios across anchors
    double cv = 0.0;         // coefficient of variation over the deepest three rungs
    long anchors = 0;
    bool sufficient = false;  // >= 2 anchors with >= 3 rungs each
    std::string flag;
};

UniformityCheck uniformity_check(const std::vector<DistortionLadder>& ladders);

struct AtomCluster {
    Point center;
    double mass = 0.0;  // fraction of the conditional's mass
};

// Greedy mass-concentration scan: repeatedly picks the heaviest ball of
// radius eps_min among maximally separated centers. Returns the clusters if
// they jointly cover >= theta of the mass and each carries >= theta / count,
// otherwise an empty list.
std::vector<AtomCluster> atom_detect(const EmpiricalConditional& cond, double eps_min,
                                     double theta, int max_clusters = 64);

enum class Verdict { Atomic, Hausdorff, Inconclusive };

struct ClassifierThresholds {
    double cv_max = 0.1;
    double theta = 0.9;
    double plaque_quorum = 0.9;
    double atom_eps = 1e-3;
    double tail_factor = 10.0;  // no rung may exceed tail_factor * delta_bar
    int max_clusters = 64;
};

struct PlaqueAtomScan {
    PlaqueId plaque;
    std::vector<AtomCluster> atoms;
    double covered = 0.0;  // mass fraction inside the returned clusters
};

PlaqueAtomScan scan_plaque_atoms(const EmpiricalConditional& cond,
                                 const ClassifierThresholds& thresholds);

struct DichotomyVerdict {
    Verdict verdict = Verdict::Inconclusive;
    double delta_bar = 0.0;
    double cv = 0.0;
    double atomic_fraction = 0.0;  // fraction of plaques whose scan succeeded
    double max_tail_ratio = 0.0;
    long plaques_used = 0;
    std::vector<PlaqueAtomScan> scans;
    ClassifierThresholds thresholds;
    std::string diagnostic;
};

// Theorem-style dichotomy: atomic when the atom scans succeed on a quorum of
// plaques; Hausdorff when the distortion ratios are uniform with bounded
// tails; inconclusive otherwise. The two positive verdicts are exclusive by
// construction.
DichotomyVerdict classify(const std::vector<DistortionLadder>& ladders,
                          const std::vector<PlaqueAtomScan>& scans,
                          const ClassifierThresholds& thresholds);

const char* verdict_name(Verdict verdict);

}  // namespace rigidlab

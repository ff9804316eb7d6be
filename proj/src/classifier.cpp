#include "rigidlab/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rigidlab {

std::vector<double> eps_ladder_default() { return dyadic_ladder(2, 12); }

DistortionLadder distortion_ladder(const EmpiricalConditional& cond, const LeafMetric& metric,
                                   const std::vector<double>& eps_ladder, const Point& anchor,
                                   int anchor_id) {
    if (eps_ladder.empty()) throw std::invalid_argument("eps ladder must be nonempty");
    for (size_t i = 1; i < eps_ladder.size(); ++i)
        if (!(eps_ladder[i] < eps_ladder[i - 1]))
            throw std::invalid_argument("eps ladder must be strictly decreasing");
    DistortionLadder ladder;
    ladder.plaque = cond.plaque;
    ladder.anchor = anchor;
    ladder.anchor_id = anchor_id;
    for (double eps : eps_ladder) {
        double lam = hausdorff_ball_mass(metric, anchor, eps);
        if (!(lam > 0.0)) {
            ++ladder.dropped_rungs;
            continue;
        }
        double mu = cond.ball_mass(metric, anchor, eps);
        ladder.eps.push_back(eps);
        ladder.lambda_mass.push_back(lam);
        ladder.mu_mass.push_back(mu);
        ladder.ratios.push_back(mu / lam);
    }
    size_t k = ladder.ratios.size();
    size_t deep = std::min<size_t>(3, k);
    if (deep > 0) {
        ladder.upper_tail = *std::max_element(ladder.ratios.end() - deep, ladder.ratios.end());
        ladder.lower_tail = *std::min_element(ladder.ratios.end() - deep, ladder.ratios.end());
    }
    return ladder;
}

std::vector<DistortionLadder> anchor_ladders(const EmpiricalConditional& cond,
                                             const LeafMetric& metric,
                                             const std::vector<double>& eps_ladder, int count) {
    std::vector<DistortionLadder> ladders;
    if (cond.coords.empty() || count < 1) return ladders;
    double total = cond.total_mass();
    for (int a = 0; a < count; ++a) {
        double target = total * (a + 0.5) / count;
        size_t idx = static_cast<size_t>(
            std::lower_bound(cond.cum.begin() + 1, cond.cum.end(), target) - cond.cum.begin() - 1);
        idx = std::min(idx, cond.coords.size() - 1);
        ladders.push_back(
            distortion_ladder(cond, metric, eps_ladder, Point(cond.coords[idx]), a));
    }
    return ladders;
}

UniformityCheck uniformity_check(const std::vector<DistortionLadder>& ladders) {
    UniformityCheck check;
    std::vector<double> deepest;
    std::vector<double> pool;
    long eligible = 0;
    for (const DistortionLadder& ladder : ladders) {
        if (ladder.ratios.empty()) continue;
        deepest.push_back(ladder.ratios.back());
        size_t deep = std::min<size_t>(3, ladder.ratios.size());
        for (size_t i = ladder.ratios.size() - deep; i < ladder.ratios.size(); ++i)
            pool.push_back(ladder.ratios[i]);
        if (ladder.ratios.size() >= 3) ++eligible;
    }
    check.anchors = eligible;
    if (deepest.empty()) {
        check.flag = "no usable rungs";
        return check;
    }
    std::sort(deepest.begin(), deepest.end());
    size_t n = deepest.size();
    check.delta_bar = n % 2 == 1 ? deepest[n / 2] : 0.5 * (deepest[n / 2 - 1] + deepest[n / 2]);
    check.sufficient = eligible >= 2;
    if (deepest.size() < 2) {
        check.flag = "insufficient anchors";
        check.cv = 0.0;  // single anchor: CV = 0 by convention
        return check;
    }
    if (!check.sufficient) check.flag = "insufficient anchors";
    double mean = std::accumulate(pool.begin(), pool.end(), 0.0) / pool.size();
    double var = 0.0;
    for (double r : pool) var += (r - mean) * (r - mean);
    var /= pool.size();
    check.cv = mean != 0.0 ? std::sqrt(var) / std::fabs(mean) : 0.0;
    return check;
}

std::vector<AtomCluster> atom_detect(const EmpiricalConditional& cond, double eps_min,
                                     double theta, int max_clusters) {
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0,1]");
    if (!(eps_min > 0.0)) throw std::invalid_argument("eps_min must be positive");
    std::vector<AtomCluster> clusters;
    double total = cond.total_mass();
    if (cond.coords.empty() || total <= 0.0) return clusters;

    const bool circular = cond.fiber.kind == LeafKind::Circle;
    const double extent = cond.fiber.extent;

    // Uncovered points, kept sorted by coordinate across rounds.
    std::vector<double> pts = cond.coords;
    std::vector<double> wts = cond.weights;

    double covered_mass = 0.0;
    for (int round = 0; round < max_clusters && !pts.empty(); ++round) {
        // Sliding window over the uncovered points: mass strictly within
        // eps_min of each candidate center (wrapping on circles).
        const size_t m = pts.size();
        std::vector<double> pref(m + 1, 0.0);
        for (size_t i = 0; i < m; ++i) pref[i + 1] = pref[i] + wts[i];
        auto window = [&](size_t i) {
            if (circular && 2.0 * eps_min >= extent) return pref[m];
            double c = pts[i];
            auto lo = std::upper_bound(pts.begin(), pts.end(), c - eps_min);
            auto hi = std::lower_bound(pts.begin(), pts.end(), c + eps_min);
            double mass = pref[static_cast<size_t>(hi - pts.begin())] -
                          pref[static_cast<size_t>(lo - pts.begin())];
            if (circular) {
                if (c - eps_min < 0.0) {
                    auto wlo = std::upper_bound(pts.begin(), pts.end(), c - eps_min + extent);
                    mass += pref[m] - pref[static_cast<size_t>(wlo - pts.begin())];
                }
                if (c + eps_min > extent) {
                    auto whi = std::lower_bound(pts.begin(), pts.end(), c + eps_min - extent);
                    mass += pref[static_cast<size_t>(whi - pts.begin())];
                }
            }
            return mass;
        };
        double best = 0.0;
        size_t best_idx = m;
        for (size_t i = 0; i < m; ++i) {
            double mass = window(i);
            if (mass > best) {
                best = mass;
                best_idx = i;
            }
        }
        if (best_idx == m || best <= 0.0) break;
        double c = pts[best_idx];
        std::vector<double> rest_p, rest_w;
        rest_p.reserve(m);
        rest_w.reserve(m);
        double gathered = 0.0;
        for (size_t j = 0; j < m; ++j) {
            double d = std::fabs(pts[j] - c);
            if (circular) d = std::min(d, extent - d);
            if (d < eps_min) {
                gathered += wts[j];
            } else {
                rest_p.push_back(pts[j]);
                rest_w.push_back(wts[j]);
            }
        }
        pts.swap(rest_p);
        wts.swap(rest_w);
        clusters.push_back(AtomCluster{Point(c), gathered / total});
        covered_mass += gathered;
        if (covered_mass >= theta * total) break;
        // Window masses only shrink as points are consumed, so remaining
        // rounds cannot gather more than the current best each.
        if (covered_mass + (max_clusters - round - 1) * best < theta * total) break;
    }
    if (covered_mass < theta * total) return {};
    double floor = theta / static_cast<double>(clusters.size());
    double kept_mass = 0.0;
    std::vector<AtomCluster> kept;
    for (const AtomCluster& cl : clusters) {
        if (cl.mass >= floor) {
            kept.push_back(cl);
            kept_mass += cl.mass;
        }
    }
    if (kept_mass < theta) return {};
    return kept;
}

PlaqueAtomScan scan_plaque_atoms(const EmpiricalConditional& cond,
                                 const ClassifierThresholds& thresholds) {
    PlaqueAtomScan scan;
    scan.plaque = cond.plaque;
    scan.atoms = atom_detect(cond, thresholds.atom_eps, thresholds.theta, thresholds.max_clusters);
    for (const AtomCluster& cl : scan.atoms) scan.covered += cl.mass;
    return scan;
}

DichotomyVerdict classify(const std::vector<DistortionLadder>& ladders,
                          const std::vector<PlaqueAtomScan>& scans,
                          const ClassifierThresholds& thresholds) {
    DichotomyVerdict verdict;
    verdict.thresholds = thresholds;
    verdict.scans = scans;
    verdict.plaques_used = static_cast<long>(scans.size());

    long atomic_plaques = 0;
    for (const PlaqueAtomScan& scan : scans)
        if (!scan.atoms.empty() && scan.covered >= thresholds.theta) ++atomic_plaques;
    verdict.atomic_fraction =
        scans.empty() ? 0.0 : static_cast<double>(atomic_plaques) / scans.size();

    UniformityCheck check = uniformity_check(ladders);
    verdict.delta_bar = check.delta_bar;
    verdict.cv = check.cv;
    for (const DistortionLadder& ladder : ladders)
        verdict.max_tail_ratio = std::max(verdict.max_tail_ratio, ladder.upper_tail);

    if (!scans.empty() && verdict.atomic_fraction >= thresholds.plaque_quorum) {
        verdict.verdict = Verdict::Atomic;
        verdict.diagnostic = "mass concentrates on separated clusters";
        return verdict;
    }
    bool tails_bounded = check.delta_bar > 0.0 && std::isfinite(check.delta_bar) &&
                         verdict.max_tail_ratio <= thresholds.tail_factor * check.delta_bar;
    if (check.sufficient && check.cv < thresholds.cv_max && tails_bounded) {
        verdict.verdict = Verdict::Hausdorff;
        verdict.diagnostic = "distortion ratios uniform across anchors and rungs";
        return verdict;
    }
    verdict.verdict = Verdict::Inconclusive;
    if (!check.sufficient)
        verdict.diagnostic = check.flag.empty() ? "insufficient ladder evidence" : check.flag;
    else if (!(check.cv < thresholds.cv_max))
        verdict.diagnostic = "distortion ratios disperse across anchors";
    else
        verdict.diagnostic = "ratio tails diverge";
    return verdict;
}

const char* verdict_name(Verdict verdict) {
    switch (verdict) {
        case Verdict::Atomic: return "Atomic";
        case Verdict::Hausdorff: return "Hausdorff";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

}  // namespace rigidlab

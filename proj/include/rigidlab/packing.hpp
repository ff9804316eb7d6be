#pragma once

#include <string>
#include <vector>

#include "rigidlab/hausdorff.hpp"

namespace rigidlab {

enum class PackingKind { Packing, Covering };

// A ball family in B(0,r) of R^n: disjoint balls (packing, count = L(r,s))
// or a cover of B(0,r) (covering, count = U(r,s)).
struct PackingResult {
    int n = 1;
    double r = 1.0;
    double s = 0.5;
    long count = 0;
    std::vector<Point> centers;
    double normalized_density = 0.0;  // count * s^n / r^n
    PackingKind kind = PackingKind::Packing;
};

struct PackingCheck {
    bool ok = false;
    double min_center_gap = 0.0;   // packing: smallest pairwise center distance
    double max_center_norm = 0.0;  // packing: largest |center|
    double worst_uncovered = 0.0;  // covering: largest gap from a grid point to all centers
};

// Maximal disjoint family of open s-balls in B(0,r): exact in 1-d, lattice
// seeding (hex / fcc, best of a deterministic offset sweep) plus greedy
// fine-grid extension in 2-d and 3-d.
PackingResult greedy_pack(int n, double r, double s);

// Ball cover of B(0,r): exact in 1-d, grid-cell circumballs otherwise.
PackingResult greedy_cover(int n, double r, double s);

// Geometric verification, independent of how the centers were found.
PackingCheck verify_packing(const PackingResult& result, double tol = 1e-9);
// Checks coverage on a grid of spacing s / grid_divisor over B(0,r).
PackingCheck verify_covering(const PackingResult& result, double grid_divisor = 8.0);

// Exact 1-d oracles: open intervals of radius s in (-r, r).
long interval_pack_count(double r, double s);
long interval_cover_count(double r, double s);

enum class CertVerdict { Certified, Refuted, Inconclusive };

struct PackCoverRecord {
    double r = 0.0;
    double s = 0.0;
    long pack_count = 0;
    long cover_count = 0;
    double packed_mass_fraction = 0.0;  // sum lambda(B(a_i,s)) / lambda(B(x,r))
    double cover_normalized = 0.0;      // U(r,s) * s^m / lambda(B(x,r))
};

struct RegularityCertificate {
    double r0 = 0.0;
    double C_hat = 0.0;  // covering constant, max over r of the per-r liminf proxy
    double p_hat = 0.0;  // residual mass fraction, max over r of the per-r proxy
    std::vector<PackCoverRecord> evidence;
    CertVerdict verdict = CertVerdict::Inconclusive;
    bool r_dependent = false;  // per-r constants spread beyond 2x
    std::string diagnostic;
};

// Certifies packing regularity of the metric around `center`: for every r in
// the ladder, packings must capture a mass fraction bounded away from zero
// and coverings must satisfy U(r,s) * s^m < C * lambda(B(x,r)). The liminf /
// limsup are approximated by the extremes of the last three s rungs; each s
// ladder must span at least three octaves.
RegularityCertificate certify_regularity(const LeafMetric& metric, const MeasureOracle& lambda,
                                         const Point& center, double r0,
                                         const std::vector<double>& r_ladder,
                                         const std::vector<std::vector<double>>& s_ladders);

// Constant-transfer formulas for a metric rho with A*d <= rho <= B*d over a
// metric d whose Hausdorff measure has doubling constant Q:
//   l = ceil(log2(B/A)), R = Q^(l+1) * (B/A)^m,
//   alpha = A^m * R^(-l) <= d(lambda_rho)/d(lambda) <= B^m * Q^l = beta.
struct TransferConstants {
    double A = 1.0;
    double B = 1.0;
    int m = 1;
    double Q = 1.0;
    int l = 0;
    double R = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
};

TransferConstants transfer_constants(double A, double B, int m, double Q);

}  // namespace rigidlab

#include "rigidlab/packing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace rigidlab {

namespace {

void check_pack_args(int n, double r, double s, bool allow_equal) {
    if (n < 1 || n > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
    if (!(r > 0.0) || !(s > 0.0)) throw std::invalid_argument("radii must be positive");
    if (allow_equal ? s > r : s >= r)
        throw std::invalid_argument("inner radius must be smaller than the outer radius");
}

double norm2(const Point& p, int n) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += p[i] * p[i];
    return v;
}

double dist2(const Point& a, const Point& b, int n) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        v += d * d;
    }
    return v;
}

// Uniform-cell spatial index over R^n for neighbor queries.
class CellIndex {
  public:
    CellIndex(int n, double cell) : n_(n), cell_(cell) {}

    void insert(const Point& p, int id) { buckets_[key(p)].push_back(id); }

    template <typename Fn>
    void for_neighbors(const Point& p, Fn&& fn) const {
        std::array<long, 3> base = coords(p);
        long k_lo = n_ >= 3 ? base[2] - 1 : 0, k_hi = n_ >= 3 ? base[2] + 1 : 0;
        long j_lo = n_ >= 2 ? base[1] - 1 : 0, j_hi = n_ >= 2 ? base[1] + 1 : 0;
        for (long i = base[0] - 1; i <= base[0] + 1; ++i)
            for (long j = j_lo; j <= j_hi; ++j)
                for (long k = k_lo; k <= k_hi; ++k) {
                    auto it = buckets_.find(pack_key(i, j, k));
                    if (it == buckets_.end()) continue;
                    for (int id : it->second) fn(id);
                }
    }

  private:
    std::array<long, 3> coords(const Point& p) const {
        std::array<long, 3> c{0, 0, 0};
        for (int i = 0; i < n_; ++i) c[static_cast<size_t>(i)] = static_cast<long>(std::floor(p[i] / cell_));
        return c;
    }
    static long long pack_key(long i, long j, long k) {
        return ((i + (1LL << 20)) << 42) ^ ((j + (1LL << 20)) << 21) ^ (k + (1LL << 20));
    }
    long long key(const Point& p) const {
        auto c = coords(p);
        return pack_key(c[0], c[1], c[2]);
    }

    int n_;
    double cell_;
    std::unordered_map<long long, std::vector<int>> buckets_;
};

// Largest k >= 0 with k * s <= r, exact for the given doubles.
long exact_floor_ratio(double r, double s) {
    long k = static_cast<long>(std::floor(r / s));
    while (static_cast<long double>(k + 1) * static_cast<long double>(s) <=
           static_cast<long double>(r))
        ++k;
    while (k > 0 && static_cast<long double>(k) * static_cast<long double>(s) >
                        static_cast<long double>(r))
        --k;
    return k;
}

std::vector<Point> lattice_candidates(int n, double r, double s) {
    const double keep2 = (r - s) * (r - s) * (1.0 + 1e-14);
    std::vector<Point> best;
    if (n == 2) {
        // Hex lattice with minimal distance 2s, best of an offset sweep.
        const double a = 2.0 * s;
        const double row = a * std::sqrt(3.0) / 2.0;
        const int sweeps = 8;
        for (int oi = 0; oi < sweeps; ++oi) {
            for (int oj = 0; oj < sweeps; ++oj) {
                double ox = (oi + 0.5) * a / sweeps - a / 2.0;
                double oy = (oj + 0.5) * row / sweeps - row / 2.0;
                std::vector<Point> pts;
                long jmax = static_cast<long>(std::ceil((r + row) / row));
                for (long j = -jmax; j <= jmax; ++j) {
                    double y = oy + j * row;
                    double shift = (j % 2 != 0) ? a / 2.0 : 0.0;
                    long imax = static_cast<long>(std::ceil((r + a) / a));
                    for (long i = -imax; i <= imax; ++i) {
                        Point p(ox + shift + i * a, y);
                        if (norm2(p, 2) <= keep2) pts.push_back(p);
                    }
                }
                if (pts.size() > best.size()) best = std::move(pts);
            }
        }
    } else {
        // FCC lattice: cubic cell of side 2*sqrt(2)*s, corner + face centers.
        const double cube = 2.0 * std::sqrt(2.0) * s;
        const double half = cube / 2.0;
        const std::array<Point, 4> motif = {Point(0, 0, 0), Point(half, half, 0),
                                            Point(half, 0, half), Point(0, half, half)};
        const int sweeps = 4;
        for (int oi = 0; oi < sweeps; ++oi)
            for (int oj = 0; oj < sweeps; ++oj)
                for (int ok = 0; ok < sweeps; ++ok) {
                    Point off((oi + 0.5) * cube / sweeps - half, (oj + 0.5) * cube / sweeps - half,
                              (ok + 0.5) * cube / sweeps - half);
                    std::vector<Point> pts;
                    long m = static_cast<long>(std::ceil((r + cube) / cube));
                    for (long i = -m; i <= m; ++i)
                        for (long j = -m; j <= m; ++j)
                            for (long k = -m; k <= m; ++k)
                                for (const Point& b : motif) {
                                    Point p(off[0] + i * cube + b[0], off[1] + j * cube + b[1],
                                            off[2] + k * cube + b[2]);
                                    if (norm2(p, 3) <= keep2) pts.push_back(p);
                                }
                    if (pts.size() > best.size()) best = std::move(pts);
                }
    }
    return best;
}

}  // namespace

long interval_pack_count(double r, double s) {
    // Open intervals of radius s may share endpoints: k * 2s <= 2r.
    return exact_floor_ratio(r, s);
}

long interval_cover_count(double r, double s) {
    if (s >= r) return 1;
    // Open intervals: a cover of (-r, r) needs total length strictly above 2r.
    return exact_floor_ratio(r, s) + 1;
}

PackingResult greedy_pack(int n, double r, double s) {
    check_pack_args(n, r, s, false);
    PackingResult result{n, r, s, 0, {}, 0.0, PackingKind::Packing};

    if (n == 1) {
        long k = interval_pack_count(r, s);
        for (long i = 0; i < k; ++i) result.centers.emplace_back(-r + s + 2.0 * s * i);
    } else {
        result.centers = lattice_candidates(n, r, s);
        // Greedy extension over a fine grid mops up boundary gaps.
        CellIndex index(n, 2.0 * s);
        for (size_t i = 0; i < result.centers.size(); ++i)
            index.insert(result.centers[i], static_cast<int>(i));
        const double step = s / 4.0;
        const double lim = r - s;
        const double min_gap2 = 4.0 * s * s * (1.0 - 1e-12);
        long cells = static_cast<long>(std::floor(lim / step));
        auto try_candidate = [&](const Point& p) {
            if (norm2(p, n) > lim * lim * (1.0 + 1e-14)) return;
            bool ok = true;
            index.for_neighbors(p, [&](int id) {
                if (ok && dist2(p, result.centers[static_cast<size_t>(id)], n) < min_gap2) ok = false;
            });
            if (!ok) return;
            index.insert(p, static_cast<int>(result.centers.size()));
            result.centers.push_back(p);
        };
        if (n == 2) {
            for (long i = -cells; i <= cells; ++i)
                for (long j = -cells; j <= cells; ++j) try_candidate(Point(i * step, j * step));
        } else {
            for (long i = -cells; i <= cells; ++i)
                for (long j = -cells; j <= cells; ++j)
                    for (long k = -cells; k <= cells; ++k)
                        try_candidate(Point(i * step, j * step, k * step));
        }
    }

    result.count = static_cast<long>(result.centers.size());
    result.normalized_density =
        static_cast<double>(result.count) * std::pow(s, n) / std::pow(r, n);
    return result;
}

PackingResult greedy_cover(int n, double r, double s) {
    check_pack_args(n, r, s, true);
    PackingResult result{n, r, s, 0, {}, 0.0, PackingKind::Covering};

    if (n == 1) {
        long u = interval_cover_count(r, s);
        for (long i = 0; i < u; ++i) result.centers.emplace_back(-r + (2.0 * i + 1.0) * r / u);
    } else {
        // Cells of side h tile the plane; each is inscribed in an s-ball around
        // its center, so every cell meeting B(0,r) contributes one center.
        const double h = 2.0 * 0.999 * s / std::sqrt(static_cast<double>(n));
        long m = static_cast<long>(std::ceil((r + h) / h));
        auto axis_gap = [&](long idx) {
            // Distance from 0 to the cell [idx*h - h/2, idx*h + h/2) along one axis.
            double lo = idx * h - h / 2.0, hi = idx * h + h / 2.0;
            if (hi < 0.0) return -hi;
            if (lo > 0.0) return lo;
            return 0.0;
        };
        double r2 = r * r;
        for (long i = -m; i <= m; ++i) {
            double gi = axis_gap(i);
            if (gi * gi >= r2) continue;
            for (long j = (n >= 2 ? -m : 0); j <= (n >= 2 ? m : 0); ++j) {
                double gj = n >= 2 ? axis_gap(j) : 0.0;
                for (long k = (n >= 3 ? -m : 0); k <= (n >= 3 ? m : 0); ++k) {
                    double gk = n >= 3 ? axis_gap(k) : 0.0;
                    if (gi * gi + gj * gj + gk * gk < r2)
                        result.centers.push_back(n == 2 ? Point(i * h, j * h)
                                                        : Point(i * h, j * h, k * h));
                }
            }
        }
    }

    result.count = static_cast<long>(result.centers.size());
    result.normalized_density =
        static_cast<double>(result.count) * std::pow(s, n) / std::pow(r, n);
    return result;
}

PackingCheck verify_packing(const PackingResult& result, double tol) {
    PackingCheck check;
    const int n = result.n;
    const double slack = tol * std::max(1.0, result.r);
    check.min_center_gap = std::numeric_limits<double>::infinity();
    check.max_center_norm = 0.0;
    CellIndex index(n, 2.0 * result.s);
    for (size_t i = 0; i < result.centers.size(); ++i)
        index.insert(result.centers[i], static_cast<int>(i));
    bool ok = true;
    for (size_t i = 0; i < result.centers.size(); ++i) {
        double nm = std::sqrt(norm2(result.centers[i], n));
        check.max_center_norm = std::max(check.max_center_norm, nm);
        if (nm > result.r - result.s + slack) ok = false;
        index.for_neighbors(result.centers[i], [&](int id) {
            if (static_cast<size_t>(id) == i) return;
            double d = std::sqrt(dist2(result.centers[i], result.centers[static_cast<size_t>(id)], n));
            check.min_center_gap = std::min(check.min_center_gap, d);
        });
    }
    if (result.centers.size() >= 2 && check.min_center_gap < 2.0 * result.s - slack) ok = false;
    check.ok = ok;
    return check;
}

PackingCheck verify_covering(const PackingResult& result, double grid_divisor) {
    PackingCheck check;
    const int n = result.n;
    const double s = result.s, r = result.r;
    CellIndex index(n, s);
    for (size_t i = 0; i < result.centers.size(); ++i)
        index.insert(result.centers[i], static_cast<int>(i));
    const double step = s / grid_divisor;
    long m = static_cast<long>(std::floor(r / step));
    double worst = 0.0;
    bool ok = true;
    auto probe = [&](const Point& p) {
        if (norm2(p, n) >= r * r) return;
        double best2 = std::numeric_limits<double>::infinity();
        index.for_neighbors(p, [&](int id) {
            best2 = std::min(best2, dist2(p, result.centers[static_cast<size_t>(id)], n));
        });
        double best = std::sqrt(best2);
        worst = std::max(worst, best);
        if (!(best < s)) ok = false;
    };
    for (long i = -m; i <= m; ++i) {
        if (n == 1) {
            probe(Point(i * step));
        } else if (n == 2) {
            for (long j = -m; j <= m; ++j) probe(Point(i * step, j * step));
        } else {
            for (long j = -m; j <= m; ++j)
                for (long k = -m; k <= m; ++k) probe(Point(i * step, j * step, k * step));
        }
    }
    check.worst_uncovered = worst;
    check.ok = ok && !result.centers.empty();
    return check;
}

namespace {

// Marching packing/covering on a 1-d leaf using only metric evaluations.
// Assumes the metric is order-compatible on the arcs involved (true for the
// built-in rules at the radii the certificate scans).
struct ArcWorld {
    const LeafMetric& metric;
    Point at(double t) const {
        Point p(t);
        if (metric.leaf.kind == LeafKind::Circle) p = metric.leaf.reduce(p);
        return p;
    }
    // Smallest t in [from, hi] with d(anchor, at(t)) >= target, or hi+1 if none.
    double march(const Point& anchor, double from, double hi, double target) const {
        double lo = from;
        if (distance(metric, anchor, at(hi)) < target) return hi + 1.0;
        double a = lo, b = hi;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (a + b);
            if (distance(metric, anchor, at(mid)) >= target)
                b = mid;
            else
                a = mid;
        }
        return b;
    }
};

long arc_pack_count(const LeafMetric& metric, const Point& x, double r, double s,
                    std::vector<Point>* centers) {
    ArcSpan allowed = metric_ball_arc(metric, x, r - s);
    if (allowed.empty) return 0;
    ArcWorld world{metric};
    double t = allowed.lo;
    long count = 0;
    Point prev;
    const double hi = allowed.whole ? allowed.lo + metric.leaf.extent : allowed.hi;
    while (t <= hi) {
        Point c = world.at(t);
        if (count > 0 && distance(metric, prev, c) < 2.0 * s * (1.0 - 1e-12)) break;
        ++count;
        if (centers) centers->push_back(c);
        prev = c;
        double next = world.march(c, t, hi, 2.0 * s);
        if (next > hi) break;
        t = next;
    }
    return count;
}

long arc_cover_count(const LeafMetric& metric, const Point& x, double r, double s) {
    ArcSpan ball = metric_ball_arc(metric, x, r);
    if (ball.empty) return 0;
    ArcWorld world{metric};
    const double hi = ball.whole ? ball.lo + metric.leaf.extent : ball.hi;
    double edge = ball.lo;
    long count = 0;
    while (edge < hi) {
        Point e = world.at(edge);
        // Center placed so the current edge sits strictly inside the new ball.
        double c = world.march(e, edge, hi, s * (1.0 - 1e-9));
        if (c > hi) c = hi;
        Point cp = world.at(c);
        ++count;
        double next = world.march(cp, c, hi, s);
        if (next > hi) break;
        edge = next;
        if (count > 100000000L) throw std::runtime_error("covering march failed to advance");
    }
    return count;
}

}  // namespace

RegularityCertificate certify_regularity(const LeafMetric& metric, const MeasureOracle& lambda,
                                         const Point& center, double r0,
                                         const std::vector<double>& r_ladder,
                                         const std::vector<std::vector<double>>& s_ladders) {
    if (!(r0 > 0.0)) throw std::invalid_argument("packing constant candidate must be positive");
    if (r_ladder.empty() || r_ladder.size() != s_ladders.size())
        throw std::invalid_argument("need one s ladder per r");
    RegularityCertificate cert;
    cert.r0 = r0;

    std::vector<double> per_r_C, per_r_p;
    try {
        for (size_t ri = 0; ri < r_ladder.size(); ++ri) {
            double r = r_ladder[ri];
            const auto& s_ladder = s_ladders[ri];
            if (!(r > 0.0) || r > r0) throw std::invalid_argument("r ladder must lie in (0, r0]");
            if (s_ladder.size() < 3 || !(s_ladder.front() / s_ladder.back() >= 8.0 - 1e-9))
                throw std::invalid_argument("each s ladder must span at least three octaves");
            double lam_r = lambda(Ball{center, r});
            if (!(lam_r > 0.0)) {
                cert.verdict = CertVerdict::Inconclusive;
                cert.diagnostic = "measure oracle vanished on B(x,r)";
                return cert;
            }
            std::vector<double> fractions, covers;
            for (double s : s_ladder) {
                if (!(s > 0.0 && s < r))
                    throw std::invalid_argument("s ladder entries must lie in (0, r)");
                PackCoverRecord rec;
                rec.r = r;
                rec.s = s;
                if (metric.leaf.dim == 1) {
                    std::vector<Point> centers;
                    rec.pack_count = arc_pack_count(metric, center, r, s, &centers);
                    rec.cover_count = arc_cover_count(metric, center, r, s);
                    double packed = 0.0;
                    for (const Point& a : centers) packed += lambda(Ball{a, s});
                    rec.packed_mass_fraction = packed / lam_r;
                } else {
                    // Euclidean box: counts are scale-invariant, reuse the R^n lab.
                    double scale = metric.rule_kind() == MetricRuleKind::Scaled
                                       ? std::get<ScaledRule>(metric.rule).factor
                                       : 1.0;
                    if (metric.rule_kind() != MetricRuleKind::Intrinsic &&
                        metric.rule_kind() != MetricRuleKind::Scaled)
                        throw std::invalid_argument(
                            "certificates on box leaves support intrinsic and scaled rules");
                    PackingResult pack = greedy_pack(metric.leaf.dim, r / scale, s / scale);
                    rec.pack_count = pack.count;
                    rec.cover_count = greedy_cover(metric.leaf.dim, r / scale, s / scale).count;
                    double packed = 0.0;
                    for (const Point& a : pack.centers) {
                        Point shifted = a;
                        for (int i = 0; i < metric.leaf.dim; ++i) shifted[i] += center[i];
                        packed += lambda(Ball{shifted, s});
                    }
                    rec.packed_mass_fraction = packed / lam_r;
                }
                rec.cover_normalized =
                    static_cast<double>(rec.cover_count) * std::pow(s, metric.leaf.dim) / lam_r;
                fractions.push_back(rec.packed_mass_fraction);
                covers.push_back(rec.cover_normalized);
                cert.evidence.push_back(rec);
            }
            // liminf/limsup proxies from the deepest three rungs.
            size_t k = fractions.size();
            double best_fraction = std::max({fractions[k - 1], fractions[k - 2], fractions[k - 3]});
            double best_cover = std::min({covers[k - 1], covers[k - 2], covers[k - 3]});
            per_r_p.push_back(1.0 - best_fraction);
            per_r_C.push_back(best_cover);
        }
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception& e) {
        cert.verdict = CertVerdict::Inconclusive;
        cert.diagnostic = e.what();
        return cert;
    }

    cert.p_hat = *std::max_element(per_r_p.begin(), per_r_p.end());
    cert.C_hat = *std::max_element(per_r_C.begin(), per_r_C.end());
    double c_min = *std::min_element(per_r_C.begin(), per_r_C.end());
    double p_min = *std::min_element(per_r_p.begin(), per_r_p.end());
    cert.r_dependent = cert.C_hat > 2.0 * c_min || cert.p_hat - p_min > 0.25;
    if (!std::isfinite(cert.C_hat)) {
        cert.verdict = CertVerdict::Inconclusive;
        cert.diagnostic = "covering constant diverged";
    } else if (cert.p_hat >= 1.0 - 1e-9) {
        cert.verdict = CertVerdict::Refuted;
        cert.diagnostic = "packings capture no definite mass fraction";
    } else {
        cert.verdict = CertVerdict::Certified;
    }
    return cert;
}

TransferConstants transfer_constants(double A, double B, int m, double Q) {
    if (!(A > 0.0)) throw std::invalid_argument("A must be positive");
    if (!(B >= A)) throw std::invalid_argument("need A <= B");
    if (!(Q >= 1.0)) throw std::invalid_argument("doubling constant Q must be >= 1");
    if (m < 1) throw std::invalid_argument("dimension must be >= 1");
    TransferConstants tc;
    tc.A = A;
    tc.B = B;
    tc.m = m;
    tc.Q = Q;
    double ratio = B / A;
    int l = 0;
    while (std::ldexp(1.0, l) < ratio) ++l;
    tc.l = l;
    auto ipow = [](double base, int e) {
        double v = 1.0;
        for (int i = 0; i < e; ++i) v *= base;
        return v;
    };
    tc.R = ipow(Q, l + 1) * ipow(ratio, m);
    tc.alpha = ipow(A, m) / ipow(tc.R, l);
    tc.beta = ipow(B, m) * ipow(Q, l);
    return tc;
}

}  // namespace rigidlab

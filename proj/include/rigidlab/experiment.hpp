#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rigidlab/classifier.hpp"
#include "rigidlab/packing.hpp"

namespace rigidlab {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Flat dotted-key config: `section.key = value`, '#' comments, blank lines.
struct ParsedConfig {
    std::map<std::string, std::string> values;
    std::map<std::string, int> lines;  // key -> 1-based source line

    std::string canonical_text() const;
};

ParsedConfig parse_config_text(const std::string& text);
ParsedConfig parse_config_file(const std::string& path);

std::uint64_t fnv1a_hash(const std::string& text);

// Fully resolved experiment parameters.
struct ExperimentConfig {
    std::string mode = "classify";  // classify | packing | hausdorff
    bool strict = false;
    int threads = 1;

    SystemSpec system;
    long orbit_length = 0;
    std::uint64_t seed = 0;
    bool x0_seeded = true;
    double x0_base = 0.0;
    double x0_fiber = 0.0;

    int cells = 1;
    double offset = 0.0;
    bool has_chart_b = false;
    int cells_b = 1;
    double offset_b = 0.0;

    std::string metric_rule = "intrinsic";  // intrinsic | scaled | pullback | sup_truncated
    double metric_scale = 1.0;
    int metric_window = 64;

    std::vector<double> eps_ladder;
    ClassifierThresholds thresholds;
    long min_bin = 1000;
    int anchors = 64;
    int overlap_bins = 1024;
    std::string orbit_dump = "none";  // none | csv | bin
    std::string formats = "json,csv";

    int packing_n = 2;
    double packing_r0 = 1.0;
    std::vector<double> packing_r_ladder;
    int packing_s_depth = 8;

    std::string hausdorff_model = "interval";  // interval | circle | box2 | box3
    double hausdorff_extent = 1.0;
    int hausdorff_m = 1;
    int hausdorff_j_min = 3;
    int hausdorff_j_max = 14;

    std::string canonical;
    std::uint64_t config_hash = 0;
};

ExperimentConfig resolve_config(const ParsedConfig& parsed);

struct PlaqueSummary {
    PlaqueId plaque;
    double raw_count = 0.0;
    double ks = 0.0;
    double anchor = 0.0;
    bool qualifying = false;
};

struct RunResult {
    int exit_code = 0;
    std::string out_dir;
    std::optional<DichotomyVerdict> verdict;
    std::vector<PlaqueSummary> plaques;
    std::optional<OverlapReport> overlap;
    std::optional<RegularityCertificate> certificate;
    std::vector<PackingResult> pack_ladder;
    std::vector<PackingResult> cover_ladder;
    std::optional<HausdorffEstimate> hausdorff;
};

// Executes the configured pipeline and writes the report files into out_dir.
RunResult run_experiment(const ExperimentConfig& config, const std::string& out_dir);

// Dry-run validation: resolved parameter echo plus a rough runtime estimate.
std::string verify_report(const ExperimentConfig& config);

// Half-of-structured-cover convention for Euclidean balls: the value the
// grid-cover estimator converges to, v_n * (sqrt(n)/2)^n * r^n.
double euclidean_ball_lambda(int n, double r);

}  // namespace rigidlab

#include "rigidlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <set>
#include <thread>

#include <json.hpp>

#include "rigidlab/metric_system.hpp"

namespace rigidlab {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

struct ConfigReader {
    const ParsedConfig& parsed;
    mutable std::set<std::string> seen;

    std::string where(const std::string& key) const {
        auto it = parsed.lines.find(key);
        return it == parsed.lines.end() ? "" : " (line " + std::to_string(it->second) + ")";
    }
    bool has(const std::string& key) const {
        if (parsed.values.count(key)) {
            seen.insert(key);
            return true;
        }
        return false;
    }
    std::string get(const std::string& key, const std::string& fallback) const {
        return has(key) ? parsed.values.at(key) : fallback;
    }
    std::string require(const std::string& key) const {
        if (!has(key)) throw ConfigError("missing required key '" + key + "'");
        return parsed.values.at(key);
    }
    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        return parse_number(key, parsed.values.at(key));
    }
    double parse_number(const std::string& key, const std::string& raw) const {
        try {
            size_t used = 0;
            double v = std::stod(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' expects a number, got '" + raw + "'" + where(key));
        }
    }
    long integer(const std::string& key, long fallback) const {
        if (!has(key)) return fallback;
        const std::string raw = parsed.values.at(key);
        try {
            size_t used = 0;
            double v = std::stod(raw, &used);
            if (used != raw.size() || v != std::floor(v)) throw std::invalid_argument(raw);
            return static_cast<long>(v);
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' expects an integer, got '" + raw + "'" + where(key));
        }
    }
};

// Rotation angles: "golden", an exact rational "p/q", or a decimal.
void parse_alpha(const ConfigReader& reader, const std::string& key, bool& rational, long& p,
                 long& q, double& value) {
    std::string raw = reader.get(key, "golden");
    rational = false;
    if (raw == "golden") {
        value = kGoldenMean;
        return;
    }
    auto slash = raw.find('/');
    if (slash != std::string::npos) {
        try {
            p = std::stol(raw.substr(0, slash));
            q = std::stol(raw.substr(slash + 1));
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' expects p/q, got '" + raw + "'" + reader.where(key));
        }
        if (q <= 0) throw ConfigError("key '" + key + "': denominator must be positive" + reader.where(key));
        rational = true;
        value = static_cast<double>(p) / static_cast<double>(q);
        return;
    }
    value = reader.parse_number(key, raw);
    if (!(value >= 0.0 && value < 1.0))
        throw ConfigError("key '" + key + "': angle must lie in [0,1)" + reader.where(key));
}

}  // namespace

std::string ParsedConfig::canonical_text() const {
    std::string out;
    for (const auto& [key, value] : values) out += key + " = " + value + "\n";
    return out;
}

ParsedConfig parse_config_text(const std::string& text) {
    ParsedConfig parsed;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        std::string stripped = trim(line);
        auto hash = stripped.find('#');
        if (hash != std::string::npos) stripped = trim(stripped.substr(0, hash));
        if (stripped.empty()) continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                              stripped + "'");
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        if (parsed.values.count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        parsed.values[key] = value;
        parsed.lines[key] = lineno;
    }
    return parsed;
}

ParsedConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

ExperimentConfig resolve_config(const ParsedConfig& parsed) {
    ConfigReader reader{parsed, {}};
    ExperimentConfig cfg;

    cfg.mode = reader.get("run.mode", "classify");
    if (cfg.mode != "classify" && cfg.mode != "packing" && cfg.mode != "hausdorff")
        throw ConfigError("key 'run.mode': unknown mode '" + cfg.mode + "'" + reader.where("run.mode"));
    cfg.strict = reader.get("run.strict", "false") == "true";
    cfg.threads = static_cast<int>(reader.integer("run.threads", 1));

    if (cfg.mode == "classify") {
        std::string kind = reader.require("system.kind");
        bool rational = false;
        long p = 0, q = 1;
        double alpha = kGoldenMean;
        if (kind == "rotation" || kind == "product_doubling_rotation" ||
            kind == "conjugated_rotation_cocycle" || kind == "neutral_center_toy")
            parse_alpha(reader, "system.alpha", rational, p, q, alpha);
        if (kind == "rotation") {
            cfg.system = rational ? SystemSpec::rotation(p, q) : SystemSpec::rotation(alpha);
        } else if (kind == "product_doubling_rotation") {
            if (rational)
                throw ConfigError("key 'system.alpha': the doubling product expects an irrational angle" +
                                  reader.where("system.alpha"));
            cfg.system = SystemSpec::product_doubling_rotation(alpha);
        } else if (kind == "conjugated_rotation_cocycle") {
            cfg.system = SystemSpec::conjugated_rotation_cocycle(
                alpha, reader.number("system.h_amplitude", 0.5));
            cfg.system.alpha_rational = rational;
            cfg.system.alpha_p = p;
            cfg.system.alpha_q = q;
        } else if (kind == "neutral_center_toy") {
            cfg.system = SystemSpec::neutral_center_toy(alpha, reader.number("system.h_amplitude", 0.4));
        } else if (kind == "contracting_fiber") {
            std::string drive = reader.get("system.drive", "step_graph");
            if (drive != "step_graph" && drive != "linear")
                throw ConfigError("key 'system.drive': unknown drive '" + drive + "'" +
                                  reader.where("system.drive"));
            cfg.system = SystemSpec::contracting_fiber(
                reader.number("system.rate", 0.5),
                drive == "linear" ? DriveKind::Linear : DriveKind::StepGraph);
            cfg.system.graph_levels = static_cast<int>(reader.integer("system.levels", 64));
            if (cfg.system.graph_levels < 1)
                throw ConfigError("key 'system.levels': must be >= 1" + reader.where("system.levels"));
        } else {
            throw ConfigError("key 'system.kind': unknown system '" + kind + "'" +
                              reader.where("system.kind"));
        }

        cfg.orbit_length = reader.integer("orbit.T", 0);
        if (cfg.orbit_length < 1000)
            throw ConfigError("key 'orbit.T': need T >= 1000, got " +
                              std::to_string(cfg.orbit_length) + reader.where("orbit.T"));
        if (!reader.has("orbit.seed")) throw ConfigError("missing required key 'orbit.seed'");
        cfg.seed = static_cast<std::uint64_t>(reader.integer("orbit.seed", 0));
        std::string x0 = reader.get("orbit.x0", "seeded");
        if (x0 == "seeded") {
            cfg.x0_seeded = true;
        } else {
            auto parts = split(x0, ',');
            if (parts.size() != 2)
                throw ConfigError("key 'orbit.x0': expected 'seeded' or 'base,fiber'" +
                                  reader.where("orbit.x0"));
            cfg.x0_seeded = false;
            cfg.x0_base = reader.parse_number("orbit.x0", parts[0]);
            cfg.x0_fiber = reader.parse_number("orbit.x0", parts[1]);
        }

        cfg.cells = static_cast<int>(reader.integer("chart.cells", 1));
        cfg.offset = reader.number("chart.offset", 0.0);
        if (cfg.cells < 1) throw ConfigError("key 'chart.cells': need at least one cell" +
                                             reader.where("chart.cells"));
        if (reader.has("chart.cells_b")) {
            cfg.has_chart_b = true;
            cfg.cells_b = static_cast<int>(reader.integer("chart.cells_b", 1));
            cfg.offset_b = reader.number("chart.offset_b", 0.0);
            if (cfg.cells_b < 1)
                throw ConfigError("key 'chart.cells_b': need at least one cell" +
                                  reader.where("chart.cells_b"));
        } else {
            reader.number("chart.offset_b", 0.0);  // tolerated but unused
        }

        cfg.metric_rule = reader.get("metric.rule", "intrinsic");
        if (cfg.metric_rule != "intrinsic" && cfg.metric_rule != "scaled" &&
            cfg.metric_rule != "pullback" && cfg.metric_rule != "sup_truncated")
            throw ConfigError("key 'metric.rule': unknown rule '" + cfg.metric_rule + "'" +
                              reader.where("metric.rule"));
        cfg.metric_scale = reader.number("metric.scale", 1.0);
        if (!(cfg.metric_scale > 0.0))
            throw ConfigError("key 'metric.scale': must be positive" + reader.where("metric.scale"));
        cfg.metric_window = static_cast<int>(reader.integer("metric.N", 64));
        if (cfg.metric_window < 0)
            throw ConfigError("key 'metric.N': must be >= 0" + reader.where("metric.N"));

        if (reader.has("ladder.eps")) {
            for (const std::string& item : split(parsed.values.at("ladder.eps"), ','))
                cfg.eps_ladder.push_back(reader.parse_number("ladder.eps", item));
        } else {
            int k_min = static_cast<int>(reader.integer("ladder.k_min", 2));
            int k_max = static_cast<int>(reader.integer("ladder.k_max", 12));
            if (k_min > k_max)
                throw ConfigError("key 'ladder.k_min': ladder bounds are inverted" +
                                  reader.where("ladder.k_min"));
            cfg.eps_ladder = dyadic_ladder(k_min, k_max);
        }

        cfg.thresholds.cv_max = reader.number("thresholds.cv", 0.1);
        cfg.thresholds.theta = reader.number("thresholds.theta", 0.9);
        cfg.thresholds.plaque_quorum = reader.number("thresholds.quorum", 0.9);
        cfg.thresholds.atom_eps = reader.number("thresholds.atom_eps", 1e-3);
        cfg.thresholds.tail_factor = reader.number("thresholds.tail_factor", 10.0);
        cfg.thresholds.max_clusters = static_cast<int>(reader.integer("thresholds.max_clusters", 64));
        cfg.min_bin = reader.integer("thresholds.min_bin", 1000);
        cfg.anchors = static_cast<int>(reader.integer("thresholds.anchors", 64));
        cfg.overlap_bins = static_cast<int>(reader.integer("thresholds.overlap_bins", 1024));
        cfg.orbit_dump = reader.get("outputs.orbit_dump", "none");
        if (cfg.orbit_dump != "none" && cfg.orbit_dump != "csv" && cfg.orbit_dump != "bin")
            throw ConfigError("key 'outputs.orbit_dump': expected none, csv or bin" +
                              reader.where("outputs.orbit_dump"));
    } else if (cfg.mode == "packing") {
        cfg.packing_n = static_cast<int>(reader.integer("packing.n", 2));
        if (cfg.packing_n < 1 || cfg.packing_n > 3)
            throw ConfigError("key 'packing.n': dimension must be 1, 2 or 3" +
                              reader.where("packing.n"));
        cfg.packing_r0 = reader.number("packing.r0", 1.0);
        if (!(cfg.packing_r0 > 0.0))
            throw ConfigError("key 'packing.r0': must be positive" + reader.where("packing.r0"));
        if (reader.has("packing.r_ladder")) {
            for (const std::string& item : split(parsed.values.at("packing.r_ladder"), ','))
                cfg.packing_r_ladder.push_back(reader.parse_number("packing.r_ladder", item));
        } else {
            cfg.packing_r_ladder = {cfg.packing_r0, cfg.packing_r0 / 2.0, cfg.packing_r0 / 4.0};
        }
        cfg.packing_s_depth = static_cast<int>(reader.integer("packing.s_depth", 8));
        if (cfg.packing_s_depth < 3)
            throw ConfigError("key 'packing.s_depth': ladder must span at least three octaves" +
                              reader.where("packing.s_depth"));
    } else {
        cfg.hausdorff_model = reader.get("hausdorff.model", "interval");
        if (cfg.hausdorff_model != "interval" && cfg.hausdorff_model != "circle" &&
            cfg.hausdorff_model != "box2" && cfg.hausdorff_model != "box3")
            throw ConfigError("key 'hausdorff.model': unknown model '" + cfg.hausdorff_model + "'" +
                              reader.where("hausdorff.model"));
        cfg.hausdorff_extent = reader.number("hausdorff.extent", 1.0);
        cfg.hausdorff_m = static_cast<int>(reader.integer("hausdorff.m", 1));
        cfg.hausdorff_j_min = static_cast<int>(reader.integer("hausdorff.j_min", 3));
        cfg.hausdorff_j_max = static_cast<int>(reader.integer("hausdorff.j_max", 14));
    }
    cfg.formats = reader.get("outputs.formats", "json,csv");

    for (const auto& [key, value] : parsed.values) {
        (void)value;
        if (!reader.seen.count(key))
            throw ConfigError("unknown key '" + key + "'" + reader.where(key));
    }

    cfg.canonical = parsed.canonical_text();
    cfg.config_hash = fnv1a_hash(cfg.canonical);
    return cfg;
}

double euclidean_ball_lambda(int n, double r) {
    double v = n == 1 ? 2.0 : (n == 2 ? M_PI : 4.0 * M_PI / 3.0);
    return v * std::pow(std::sqrt(static_cast<double>(n)) / 2.0, n) * std::pow(r, n);
}

namespace {

struct ClassifyArtifacts {
    std::vector<Disintegration> parts;
    std::vector<DistortionLadder> ladders;
    std::vector<PlaqueAtomScan> scans;
    DichotomyVerdict verdict;
    std::vector<PlaqueSummary> plaques;
    std::optional<OverlapReport> overlap;
    std::map<int, EmpiricalConditional> normalized;  // chart-A cells
};

State seeded_initial(const ExperimentConfig& cfg) {
    if (!cfg.x0_seeded) return State{cfg.x0_base, cfg.x0_fiber};
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double base = unit(rng);
    double fiber = unit(rng);
    return State{base, fiber};
}

MetricSystem build_metric_system(const ExperimentConfig& cfg) {
    LeafModel fiber = cfg.system.fiber_model();
    if (cfg.metric_rule == "intrinsic") return intrinsic_system(fiber);
    if (cfg.metric_rule == "scaled") return scaled_system(fiber, cfg.metric_scale);
    if (cfg.metric_rule == "pullback") return pullback_system(cfg.system);
    return sup_truncated_system(cfg.system, cfg.metric_window);
}

double plaque_representative_base(const Chart& chart, int cell) {
    double rep = chart.offset + (cell + 0.5) / chart.cells;
    return rep - std::floor(rep);
}

ClassifyArtifacts run_classify(const ExperimentConfig& cfg) {
    ClassifyArtifacts art;
    State initial = seeded_initial(cfg);
    OrbitStream orbit(cfg.system, initial, cfg.orbit_length, cfg.seed);
    LeafModel fiber = cfg.system.fiber_model();

    std::vector<Chart> charts;
    charts.emplace_back(0, cfg.cells, fiber, cfg.offset);
    if (cfg.has_chart_b) charts.emplace_back(1, cfg.cells_b, fiber, cfg.offset_b);

    DisintegrationOptions options;
    options.min_bin_count = cfg.min_bin;
    art.parts = disintegrate_multi(orbit, charts, options);

    MetricSystem metric_system = build_metric_system(cfg);

    const Disintegration& main = art.parts.front();
    std::vector<int> qualifying_cells;
    for (const auto& [cell, cond] : main.by_cell) {
        PlaqueSummary summary;
        summary.plaque = cond.plaque;
        summary.raw_count = cond.raw_count;
        summary.ks = ks_uniform(cond);
        summary.anchor = cond.anchor.scalar();
        summary.qualifying = cond.qualifying;
        art.plaques.push_back(summary);
        if (cond.qualifying) qualifying_cells.push_back(cell);
    }

    int per_plaque_anchors = 1;
    if (!qualifying_cells.empty())
        per_plaque_anchors =
            std::max<int>(1, cfg.anchors / static_cast<int>(qualifying_cells.size()));

    struct PlaqueWork {
        int cell;
        std::vector<DistortionLadder> ladders;
        PlaqueAtomScan scan;
        EmpiricalConditional normalized;
    };
    std::vector<PlaqueWork> work(qualifying_cells.size());

    auto process = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            int cell = qualifying_cells[i];
            const EmpiricalConditional& cond = main.by_cell.at(cell);
            LeafMetric metric =
                metric_system.metric_for_base(plaque_representative_base(main.chart, cell));
            EmpiricalConditional normalized = normalize_unit_ball(cond, metric);
            PlaqueWork& pw = work[i];
            pw.cell = cell;
            pw.ladders = anchor_ladders(normalized, metric, cfg.eps_ladder, per_plaque_anchors);
            pw.scan = scan_plaque_atoms(normalized, cfg.thresholds);
            pw.normalized = std::move(normalized);
        }
    };
    int threads = std::max(1, cfg.threads);
    if (threads == 1 || work.size() <= 1) {
        process(0, work.size());
    } else {
        std::vector<std::thread> pool;
        size_t chunk = (work.size() + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            size_t begin = t * chunk;
            size_t end = std::min(work.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(process, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    int anchor_id = 0;
    for (PlaqueWork& pw : work) {
        for (DistortionLadder& ladder : pw.ladders) {
            ladder.anchor_id = anchor_id++;
            art.ladders.push_back(std::move(ladder));
        }
        art.scans.push_back(std::move(pw.scan));
        art.normalized.emplace(pw.cell, std::move(pw.normalized));
    }

    art.verdict = classify(art.ladders, art.scans, cfg.thresholds);

    if (cfg.has_chart_b) {
        auto overlaps = overlap_pairs(charts[0], charts[1]);
        art.overlap = overlap_consistency(art.parts[0], art.parts[1], overlaps, cfg.overlap_bins,
                                          cfg.min_bin);
    }
    return art;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
}

std::string plaque_label(const PlaqueId& plaque) {
    return std::to_string(plaque.chart_id) + ":" + std::to_string(plaque.cell);
}

std::string hash_hex(std::uint64_t hash) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

ordered_json config_block(const ExperimentConfig& cfg) {
    ordered_json block;
    block["text"] = cfg.canonical;
    block["hash"] = hash_hex(cfg.config_hash);
    return block;
}

void write_classify_reports(const ExperimentConfig& cfg, const ClassifyArtifacts& art,
                            const std::filesystem::path& dir) {
    const DichotomyVerdict& verdict = art.verdict;
    ordered_json report;
    report["verdict"] = verdict_name(verdict.verdict);
    report["delta_bar"] = verdict.delta_bar;
    report["cv"] = verdict.cv;
    ordered_json atoms = ordered_json::array();
    for (const PlaqueAtomScan& scan : verdict.scans) {
        if (scan.atoms.empty()) continue;
        ordered_json entry;
        entry["plaque"] = plaque_label(scan.plaque);
        entry["covered"] = scan.covered;
        ordered_json list = ordered_json::array();
        for (const AtomCluster& atom : scan.atoms) {
            ordered_json a;
            a["center"] = atom.center.scalar();
            a["mass"] = atom.mass;
            list.push_back(a);
        }
        entry["atoms"] = list;
        atoms.push_back(entry);
    }
    report["atoms"] = atoms;
    report["plaques_used"] = verdict.plaques_used;
    ordered_json thresholds;
    thresholds["cv"] = cfg.thresholds.cv_max;
    thresholds["theta"] = cfg.thresholds.theta;
    thresholds["quorum"] = cfg.thresholds.plaque_quorum;
    thresholds["atom_eps"] = cfg.thresholds.atom_eps;
    thresholds["tail_factor"] = cfg.thresholds.tail_factor;
    thresholds["min_bin"] = cfg.min_bin;
    report["thresholds"] = thresholds;
    ordered_json diagnostics;
    diagnostics["atomic_fraction"] = verdict.atomic_fraction;
    diagnostics["max_tail_ratio"] = verdict.max_tail_ratio;
    diagnostics["note"] = verdict.diagnostic;
    ordered_json plaques = ordered_json::array();
    for (const PlaqueSummary& p : art.plaques) {
        ordered_json entry;
        entry["plaque"] = plaque_label(p.plaque);
        entry["samples"] = p.raw_count;
        entry["ks_uniform"] = p.ks;
        entry["anchor"] = p.anchor;
        entry["qualifying"] = p.qualifying;
        plaques.push_back(entry);
    }
    diagnostics["plaques"] = plaques;
    if (art.overlap) {
        ordered_json overlap;
        overlap["max_deviation"] = art.overlap->max_deviation;
        overlap["flagged_pairs"] = art.overlap->flagged;
        diagnostics["chart_overlap"] = overlap;
    }
    report["diagnostics"] = diagnostics;
    report["config"] = config_block(cfg);
    write_text_file(dir / "verdict.json", report.dump(2) + "\n");

    if (cfg.formats.find("csv") != std::string::npos) {
        std::string conditionals = "plaque_id,fiber_coord,weight\n";
        for (const auto& [cell, cond] : art.normalized) {
            (void)cell;
            for (size_t i = 0; i < cond.coords.size(); ++i)
                conditionals += plaque_label(cond.plaque) + "," + fmt_double(cond.coords[i]) + "," +
                                fmt_double(cond.weights[i]) + "\n";
        }
        write_text_file(dir / "conditionals.csv", conditionals);

        std::string ladder_csv = "anchor_id,eps,mu_ball,lambda_ball,ratio\n";
        for (const DistortionLadder& ladder : art.ladders) {
            for (size_t i = 0; i < ladder.eps.size(); ++i)
                ladder_csv += std::to_string(ladder.anchor_id) + "," + fmt_double(ladder.eps[i]) +
                              "," + fmt_double(ladder.mu_mass[i]) + "," +
                              fmt_double(ladder.lambda_mass[i]) + "," +
                              fmt_double(ladder.ratios[i]) + "\n";
        }
        write_text_file(dir / "ladder.csv", ladder_csv);
    }

    std::string summary;
    summary += "experiment: " + cfg.system.kind_name() + " (T = " +
               std::to_string(cfg.orbit_length) + ", seed = " + std::to_string(cfg.seed) + ")\n";
    summary += "config hash: " + hash_hex(cfg.config_hash) + "\n";
    summary += "verdict: " + std::string(verdict_name(verdict.verdict)) + "\n";
    summary += "delta_bar: " + fmt_double(verdict.delta_bar) + "\n";
    summary += "cv: " + fmt_double(verdict.cv) + "\n";
    summary += "plaques used: " + std::to_string(verdict.plaques_used) + "\n";
    summary += "atomic fraction: " + fmt_double(verdict.atomic_fraction) + "\n";
    if (art.overlap)
        summary += "chart overlap max deviation: " + fmt_double(art.overlap->max_deviation) + "\n";
    summary += "note: " + verdict.diagnostic + "\n";
    summary += "\nresolved config:\n" + cfg.canonical;
    write_text_file(dir / "summary.txt", summary);
}

void dump_orbit(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    if (cfg.orbit_dump == "none") return;
    State initial = seeded_initial(cfg);
    OrbitStream orbit(cfg.system, initial, cfg.orbit_length, cfg.seed);
    State s;
    if (cfg.orbit_dump == "csv") {
        std::ofstream out(dir / "orbit.csv", std::ios::binary);
        out << "step,base,fiber\n";
        long n = 0;
        while (orbit.next(s))
            out << n++ << "," << fmt_double(s.base) << "," << fmt_double(s.fiber) << "\n";
    } else {
        std::ofstream out(dir / "orbit.bin", std::ios::binary);
        while (orbit.next(s)) {
            out.write(reinterpret_cast<const char*>(&s.base), sizeof(double));
            out.write(reinterpret_cast<const char*>(&s.fiber), sizeof(double));
        }
    }
}

RunResult run_packing(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    RunResult result;
    const int n = cfg.packing_n;
    const double r0 = cfg.packing_r0;

    std::vector<std::vector<double>> s_ladders;
    for (double r : cfg.packing_r_ladder) {
        std::vector<double> ladder;
        for (int j = 1; j <= cfg.packing_s_depth; ++j) ladder.push_back(r * std::ldexp(1.0, -j));
        s_ladders.push_back(std::move(ladder));
    }
    for (int j = 1; j <= cfg.packing_s_depth; ++j) {
        double s = r0 * std::ldexp(1.0, -j);
        result.pack_ladder.push_back(greedy_pack(n, r0, s));
        result.cover_ladder.push_back(greedy_cover(n, r0, s));
    }

    LeafModel box = LeafModel::box(n, 4.0 * r0);
    Point center = n == 1 ? Point(2.0 * r0)
                          : (n == 2 ? Point(2.0 * r0, 2.0 * r0) : Point(2.0 * r0, 2.0 * r0, 2.0 * r0));
    MeasureOracle lambda = [n](const Ball& ball) { return euclidean_ball_lambda(n, ball.radius); };
    result.certificate = certify_regularity(intrinsic_metric(box), lambda, center, r0,
                                            cfg.packing_r_ladder, s_ladders);

    ordered_json report;
    report["mode"] = "packing";
    report["n"] = n;
    report["r0"] = r0;
    ordered_json ladder = ordered_json::array();
    for (size_t i = 0; i < result.pack_ladder.size(); ++i) {
        ordered_json entry;
        entry["s"] = result.pack_ladder[i].s;
        entry["pack_count"] = result.pack_ladder[i].count;
        entry["pack_density"] = result.pack_ladder[i].normalized_density;
        entry["cover_count"] = result.cover_ladder[i].count;
        entry["cover_density"] = result.cover_ladder[i].normalized_density;
        ladder.push_back(entry);
    }
    report["density_ladder"] = ladder;
    const RegularityCertificate& cert = *result.certificate;
    ordered_json certificate;
    certificate["verdict"] = cert.verdict == CertVerdict::Certified
                                 ? "certified"
                                 : (cert.verdict == CertVerdict::Refuted ? "refuted" : "inconclusive");
    certificate["r0"] = cert.r0;
    certificate["C_hat"] = cert.C_hat;
    certificate["p_hat"] = cert.p_hat;
    certificate["r_dependent"] = cert.r_dependent;
    certificate["diagnostic"] = cert.diagnostic;
    ordered_json evidence = ordered_json::array();
    for (const PackCoverRecord& rec : cert.evidence) {
        ordered_json e;
        e["r"] = rec.r;
        e["s"] = rec.s;
        e["pack_count"] = rec.pack_count;
        e["cover_count"] = rec.cover_count;
        e["packed_mass_fraction"] = rec.packed_mass_fraction;
        e["cover_normalized"] = rec.cover_normalized;
        evidence.push_back(e);
    }
    certificate["evidence"] = evidence;
    report["certificate"] = certificate;
    report["config"] = config_block(cfg);
    write_text_file(dir / "certificate.json", report.dump(2) + "\n");

    if (cfg.formats.find("csv") != std::string::npos) {
        auto centers_csv = [&](const PackingResult& pr) {
            std::string csv;
            for (const Point& c : pr.centers) {
                csv += fmt_double(c[0]);
                for (int i = 1; i < n; ++i) csv += "," + fmt_double(c[i]);
                csv += "\n";
            }
            return csv;
        };
        write_text_file(dir / "pack_centers.csv", centers_csv(result.pack_ladder.back()));
        write_text_file(dir / "cover_centers.csv", centers_csv(result.cover_ladder.back()));
    }

    std::string summary;
    summary += "packing lab: n = " + std::to_string(n) + ", r0 = " + fmt_double(r0) + "\n";
    summary += "config hash: " + hash_hex(cfg.config_hash) + "\n";
    summary += "certificate: " + std::string(certificate["verdict"].get<std::string>()) + "\n";
    summary += "C_hat: " + fmt_double(cert.C_hat) + ", p_hat: " + fmt_double(cert.p_hat) + "\n";
    summary += "\nresolved config:\n" + cfg.canonical;
    write_text_file(dir / "summary.txt", summary);

    result.exit_code = cert.verdict == CertVerdict::Inconclusive && cfg.strict ? 2 : 0;
    return result;
}

RunResult run_hausdorff(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    RunResult result;
    LeafModel model = LeafModel::interval(cfg.hausdorff_extent);
    if (cfg.hausdorff_model == "circle") model = LeafModel::circle(cfg.hausdorff_extent);
    if (cfg.hausdorff_model == "box2") model = LeafModel::box(2, cfg.hausdorff_extent);
    if (cfg.hausdorff_model == "box3") model = LeafModel::box(3, cfg.hausdorff_extent);
    auto estimate =
        hausdorff_estimate(intrinsic_metric(model), std::nullopt, cfg.hausdorff_m,
                           dyadic_ladder(cfg.hausdorff_j_min, cfg.hausdorff_j_max));
    result.hausdorff = estimate;

    ordered_json report;
    report["mode"] = "hausdorff";
    report["model"] = cfg.hausdorff_model;
    report["value"] = estimate.value;
    report["m"] = estimate.m;
    report["ladder"] = estimate.delta_ladder;
    report["per_delta_values"] = estimate.per_delta_values;
    report["converged"] = estimate.converged;
    report["lower_bound"] = estimate.lower_bound;
    report["gap"] = estimate.gap;
    report["config"] = config_block(cfg);
    write_text_file(dir / "hausdorff.json", report.dump(2) + "\n");

    if (cfg.formats.find("csv") != std::string::npos) {
        std::string csv = "delta,value\n";
        for (size_t i = 0; i < estimate.delta_ladder.size(); ++i)
            csv += fmt_double(estimate.delta_ladder[i]) + "," +
                   fmt_double(estimate.per_delta_values[i]) + "\n";
        write_text_file(dir / "hausdorff.csv", csv);
    }

    std::string summary;
    summary += "hausdorff estimate: model = " + cfg.hausdorff_model + "\n";
    summary += "config hash: " + hash_hex(cfg.config_hash) + "\n";
    summary += "value: " + fmt_double(estimate.value) + " (m = " + std::to_string(estimate.m) +
               ", converged = " + (estimate.converged ? "true" : "false") + ")\n";
    summary += "\nresolved config:\n" + cfg.canonical;
    write_text_file(dir / "summary.txt", summary);
    result.exit_code = 0;
    return result;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);

    if (cfg.mode == "packing") {
        RunResult result = run_packing(cfg, dir);
        result.out_dir = out_dir;
        return result;
    }
    if (cfg.mode == "hausdorff") {
        RunResult result = run_hausdorff(cfg, dir);
        result.out_dir = out_dir;
        return result;
    }

    ClassifyArtifacts art = run_classify(cfg);
    write_classify_reports(cfg, art, dir);
    dump_orbit(cfg, dir);

    RunResult result;
    result.out_dir = out_dir;
    result.verdict = art.verdict;
    result.plaques = art.plaques;
    result.overlap = art.overlap;
    result.exit_code =
        cfg.strict && art.verdict.verdict == Verdict::Inconclusive ? 2 : 0;
    return result;
}

std::string verify_report(const ExperimentConfig& cfg) {
    std::string out = "OK\n";
    out += "mode: " + cfg.mode + "\n";
    if (cfg.mode == "classify") {
        out += "system: " + cfg.system.kind_name() + "\n";
        out += "alpha: " + fmt_double(cfg.system.alpha) +
               (cfg.system.alpha_rational
                    ? " (= " + std::to_string(cfg.system.alpha_p) + "/" +
                          std::to_string(cfg.system.alpha_q) + ")"
                    : "") +
               "\n";
        out += "T: " + std::to_string(cfg.orbit_length) + "\n";
        out += "seed: " + std::to_string(cfg.seed) + "\n";
        out += "charts: " + std::to_string(cfg.cells) +
               (cfg.has_chart_b ? " + " + std::to_string(cfg.cells_b) : "") + " cells\n";
        out += "metric: " + cfg.metric_rule + "\n";
        out += "eps ladder rungs: " + std::to_string(cfg.eps_ladder.size()) + "\n";
        double ns_per_step = cfg.system.kind == SystemKind::ConjugatedRotationCocycle ||
                                     cfg.system.kind == SystemKind::NeutralCenterToy
                                 ? 250.0
                                 : 25.0;
        double charts = cfg.has_chart_b ? 2.0 : 1.0;
        double seconds = cfg.orbit_length * (ns_per_step + 60.0) * (charts + 1.0) * 1e-9 +
                         0.2 * cfg.eps_ladder.size();
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.1f", seconds);
        out += "estimated runtime: ~" + std::string(buf) + " s\n";
    } else if (cfg.mode == "packing") {
        out += "n: " + std::to_string(cfg.packing_n) + "\n";
        out += "r0: " + fmt_double(cfg.packing_r0) + "\n";
        out += "s depth: " + std::to_string(cfg.packing_s_depth) + "\n";
        out += "estimated runtime: ~30.0 s\n";
    } else {
        out += "model: " + cfg.hausdorff_model + "\n";
        out += "estimated runtime: ~1.0 s\n";
    }
    out += "config hash: " + hash_hex(cfg.config_hash) + "\n";
    return out;
}

}  // namespace rigidlab

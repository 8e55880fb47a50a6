#include "gridsim/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "gridsim/engine.hpp"
#include "gridsim/errors.hpp"
#include "gridsim/latency.hpp"
#include "gridsim/monoid.hpp"
#include "gridsim/percolation.hpp"
#include "gridsim/smallworld.hpp"
#include "gridsim/transport.hpp"
#include "gridsim/variance.hpp"
#include "gridsim/version.hpp"

namespace gridsim::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

class ConfigReader {
public:
    ConfigReader(std::string kind, const ConfigMap& values) : kind_(std::move(kind)), values_(values) {}

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string str(const std::string& key, const std::string& fallback = "") const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string required(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end() || trim(it->second).empty()) {
            throw InvalidParameter(key, "required for experiment '" + kind_ + "'");
        }
        return it->second;
    }

    long long integer(const std::string& key, long long fallback) const {
        if (!has(key)) return fallback;
        return parse_int(key, values_.at(key));
    }

    long long required_integer(const std::string& key) const {
        return parse_int(key, required(key));
    }

    double real(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        return parse_real(key, values_.at(key));
    }

    double required_real(const std::string& key) const { return parse_real(key, required(key)); }

    std::uint64_t seed() const {
        if (!has("seed")) return 0;
        const std::string raw = values_.at("seed");
        try {
            std::size_t used = 0;
            const std::uint64_t v = std::stoull(trim(raw), &used);
            if (used != trim(raw).size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw InvalidParameter("seed", "not an unsigned integer: '" + raw + "'");
        }
    }

    std::vector<long long> integer_list(const std::string& key) const {
        std::vector<long long> out;
        for (const std::string& piece : split(required(key), ',')) {
            out.push_back(parse_int(key, piece));
        }
        return out;
    }

    static long long parse_int(const std::string& key, const std::string& raw) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(trim(raw), &used);
            if (used != trim(raw).size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw InvalidParameter(key, "not an integer: '" + raw + "'");
        }
    }

    static double parse_real(const std::string& key, const std::string& raw) {
        try {
            std::size_t used = 0;
            const double v = std::stod(trim(raw), &used);
            if (used != trim(raw).size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw InvalidParameter(key, "not a number: '" + raw + "'");
        }
    }

private:
    std::string kind_;
    const ConfigMap& values_;
};

NodeId parse_node(const std::string& key, const std::string& raw) {
    const auto parts = split(trim(raw), ',');
    if (parts.size() != 2) {
        throw InvalidParameter(key, "expected 'x,y', got '" + raw + "'");
    }
    return NodeId{(int)ConfigReader::parse_int(key, parts[0]),
                  (int)ConfigReader::parse_int(key, parts[1])};
}

// "x,y[:mass];x,y[:mass];..." — either all atoms carry masses or none do.
DiscreteMeasure parse_measure(const ConfigReader& cfg, const GridGraph& g) {
    const std::string raw = cfg.required("atoms");
    const NodeId sink = cfg.has("sink") ? parse_node("sink", cfg.str("sink")) : NodeId{0, 0};
    if (!g.contains(sink)) throw InvalidParameter("sink", "outside grid");

    std::vector<NodeId> nodes;
    std::vector<double> masses;
    bool any_mass = false;
    for (const std::string& piece : split(raw, ';')) {
        const std::string entry = trim(piece);
        if (entry.empty()) continue;
        const auto colon = entry.find(':');
        if (colon == std::string::npos) {
            nodes.push_back(parse_node("atoms", entry));
            masses.push_back(-1.0);
        } else {
            nodes.push_back(parse_node("atoms", entry.substr(0, colon)));
            masses.push_back(ConfigReader::parse_real("atoms", entry.substr(colon + 1)));
            any_mass = true;
        }
    }
    if (nodes.empty()) throw InvalidParameter("atoms", "no atoms given");
    for (NodeId v : nodes) {
        if (!g.contains(v)) {
            throw InvalidParameter("atoms", "atom " + to_string(v) + " outside grid");
        }
    }
    if (!any_mass) {
        return DiscreteMeasure::uniform(nodes, sink);
    }
    std::vector<DiscreteMeasure::Atom> atoms;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (masses[i] < 0.0) {
            throw InvalidParameter("atoms", "either all atoms carry masses or none");
        }
        atoms.push_back({nodes[i], masses[i]});
    }
    return DiscreteMeasure::create(std::move(atoms), sink);
}

Rational parse_rational(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
        return Rational(ConfigReader::parse_int(key, s.substr(0, slash)),
                        ConfigReader::parse_int(key, s.substr(slash + 1)));
    }
    const auto dot = s.find('.');
    if (dot != std::string::npos) {
        const std::string frac = s.substr(dot + 1);
        if (frac.size() > 9) throw InvalidParameter(key, "at most 9 decimal places");
        long long den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        const long long whole = dot == 0 ? 0 : ConfigReader::parse_int(key, s.substr(0, dot));
        const long long part = frac.empty() ? 0 : ConfigReader::parse_int(key, frac);
        const bool neg = !s.empty() && s[0] == '-';
        const long long num = whole * den + (neg ? -part : part);
        return Rational(num, den);
    }
    return Rational(ConfigReader::parse_int(key, s));
}

GridGraph build_configured_graph(const ConfigReader& cfg) {
    const int side = (int)cfg.required_integer("L");
    GridGraph g = build_grid(side);
    const int k = (int)cfg.integer("k", 0);
    if (k > 0) {
        g = augment_smallworld(g, k, cfg.seed());
    } else if (k < 0) {
        throw InvalidParameter("k", "must be >= 0");
    }
    return g;
}

const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"bounds", {"L", "k", "seed", "atoms", "sink", "t_edge", "t_cycle", "out", "format"}},
        {"simulate",
         {"L", "k", "seed", "atoms", "sink", "contention", "t_edge", "t_merge", "t_cycle",
          "k_arch", "out", "format", "trace"}},
        {"treefold",
         {"L", "k", "seed", "origin", "monoid", "values", "t_edge", "t_merge", "t_cycle", "out",
          "format", "trace", "law_samples"}},
        {"variance", {"n_list", "f_act", "trials", "seed", "workers", "out", "format"}},
        {"percolation", {"L", "delta", "trials", "seed", "workers", "out", "format"}},
        {"smallworld", {"L_list", "k", "pairs", "seed", "out", "format"}},
        {"latency",
         {"mode", "c1", "c2", "ab_sum", "c_w", "t_edge", "P", "x_list", "N_list", "f_act",
          "alpha", "beta", "gamma", "m0", "out", "format", "seed"}},
    };
    return keys;
}

void reject_unknown_keys(const std::string& kind, const ConfigMap& config) {
    const auto it = allowed_keys().find(kind);
    if (it == allowed_keys().end()) {
        throw InvalidParameter("experiment", "unknown kind '" + kind + "'");
    }
    for (const auto& [key, value] : config) {
        (void)value;
        if (key == "experiment") continue;
        if (!it->second.count(key)) {
            throw InvalidParameter(key, "unknown key for experiment '" + kind + "'");
        }
    }
}

std::ofstream open_trace(const ConfigReader& cfg) {
    std::ofstream out;
    if (cfg.has("trace")) {
        out.open(cfg.str("trace"));
        if (!out) throw InvalidParameter("trace", "cannot open '" + cfg.str("trace") + "'");
    }
    return out;
}

nlohmann::ordered_json cell_value(const std::string& cell) {
    try {
        std::size_t used = 0;
        const long long i = std::stoll(cell, &used);
        if (used == cell.size()) return i;
    } catch (const std::exception&) {
    }
    try {
        std::size_t used = 0;
        const double d = std::stod(cell, &used);
        if (used == cell.size()) return d;
    } catch (const std::exception&) {
    }
    return cell;
}

// csv <-> json-lines conversion so every experiment honors the format flag.
std::string csv_to_jsonl(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) return "";
    const std::vector<std::string> header = split(line, ',');
    std::ostringstream out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = split(line, ',');
        nlohmann::ordered_json row;
        for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) {
            row[header[i]] = cell_value(cells[i]);
        }
        out << row.dump() << '\n';
    }
    return out.str();
}

std::string flatten_to_csv(const nlohmann::ordered_json& report) {
    std::ostringstream header;
    std::ostringstream row;
    row.precision(17);
    bool first = true;
    for (const auto& [key, value] : report.items()) {
        if (value.is_object() || value.is_array()) continue;
        if (!first) {
            header << ',';
            row << ',';
        }
        first = false;
        header << key;
        if (value.is_string()) {
            row << value.get<std::string>();
        } else {
            row << value.dump();
        }
    }
    return header.str() + "\n" + row.str() + "\n";
}

void apply_format(ExperimentOutcome& out, const ConfigReader& cfg) {
    const std::string format = cfg.str("format", "");
    if (format.empty()) return;
    if (format != "csv" && format != "json-lines") {
        throw InvalidParameter("format", "expected csv or json-lines");
    }
    if (format == "json-lines" && out.artifact_extension == "csv") {
        out.artifact = csv_to_jsonl(out.artifact);
        out.artifact_extension = "jsonl";
    } else if (format == "csv" && out.artifact_extension == "jsonl") {
        out.artifact = flatten_to_csv(nlohmann::ordered_json::parse(out.artifact));
        out.artifact_extension = "csv";
    }
}

// --- experiment bodies -------------------------------------------------------

ExperimentOutcome run_bounds(const ConfigReader& cfg) {
    const GridGraph g = build_configured_graph(cfg);
    const DiscreteMeasure m = parse_measure(cfg, g);
    const int t_edge = (int)cfg.integer("t_edge", 1);
    const double t_cycle = cfg.real("t_cycle", 1e-9);
    const BoundsReport report = bounds_report(m, g, t_edge, t_cycle);

    ExperimentOutcome out;
    out.artifact = nlohmann::ordered_json::parse(report.to_json()).dump() + "\n";
    out.artifact_extension = "jsonl";
    out.summary["w1"] = report.w1;
    out.summary["r_mu"] = report.r_mu;
    out.summary["steiner"] = report.steiner;
    out.summary["wallclock_lower_seconds"] = report.wallclock_lower_seconds;
    return out;
}

ExperimentOutcome run_simulate(const ConfigReader& cfg) {
    const GridGraph g = build_configured_graph(cfg);
    const DiscreteMeasure m = parse_measure(cfg, g);
    EngineConfig ec;
    const std::string contention = cfg.str("contention", "non_congesting");
    if (contention == "non_congesting") {
        ec.contention = Contention::non_congesting;
    } else if (contention == "capacity_one") {
        ec.contention = Contention::capacity_one;
    } else {
        throw InvalidParameter("contention", "expected non_congesting or capacity_one");
    }
    ec.t_edge = (int)cfg.integer("t_edge", 1);
    ec.t_merge = (int)cfg.integer("t_merge", 0);
    ec.t_cycle = cfg.real("t_cycle", 1e-9);
    ec.k_arch = (int)cfg.integer("k_arch", 0);

    std::ofstream trace = open_trace(cfg);
    if (trace.is_open()) {
        run_parallel_shortest(m, g, ec, &trace); // deterministic re-run below
    }
    const AttainmentReport report = measure_attainment(m, g, ec);

    ExperimentOutcome out;
    out.artifact = nlohmann::ordered_json::parse(report.to_json()).dump() + "\n";
    out.artifact_extension = "jsonl";
    out.summary["w1"] = report.w1;
    out.summary["transport_work"] = report.transport_work;
    out.summary["work_equals_w1"] = report.work_equals_w1;
    out.summary["r_mu"] = report.r_mu;
    out.summary["completion_cycles"] = report.completion_cycles;
    out.summary["depth_slack_cycles"] = report.depth_slack_cycles;

    if (!report.work_equals_w1) {
        out.exit_code = 2;
        out.message = "transport work did not match the W1 bound exactly";
    } else if (ec.contention == Contention::non_congesting && report.depth_slack_cycles != 0) {
        out.exit_code = 2;
        out.message = "non-congesting completion depth missed r_mu * t_edge";
    }
    return out;
}

ExperimentOutcome run_treefold_experiment(const ConfigReader& cfg) {
    const GridGraph g = build_configured_graph(cfg);
    const NodeId origin =
        cfg.has("origin") ? parse_node("origin", cfg.str("origin")) : NodeId{0, 0};
    if (!g.contains(origin)) throw InvalidParameter("origin", "outside grid");

    EngineConfig ec;
    ec.t_edge = (int)cfg.integer("t_edge", 1);
    ec.t_merge = (int)cfg.integer("t_merge", 1);
    ec.t_cycle = cfg.real("t_cycle", 1e-9);

    const std::string which = cfg.str("monoid", "i64-add");
    MonoidSpec<std::int64_t> monoid;
    if (which == "i64-add") {
        monoid = i64_add_monoid();
    } else if (which == "i64-max") {
        monoid = i64_max_monoid();
    } else if (which == "i64-min") {
        monoid = i64_min_monoid();
    } else if (which == "i64-mul") {
        monoid = i64_mul_monoid();
    } else if (which == "i64-gcd") {
        monoid = i64_gcd_monoid();
    } else if (which == "i64-sub") {
        monoid = i64_sub_op(); // negative example; law check will fail
    } else {
        throw InvalidParameter("monoid", "unknown operator '" + which + "'");
    }

    const auto laws = check_laws(monoid, cfg.integer("law_samples", 1000), cfg.seed());

    std::vector<std::int64_t> values(std::size_t(g.node_count()));
    const std::string scheme = cfg.str("values", "seq");
    for (int i = 0; i < g.node_count(); ++i) {
        if (scheme == "seq") {
            values[std::size_t(i)] = i + 1;
        } else if (scheme == "ones") {
            values[std::size_t(i)] = 1;
        } else {
            throw InvalidParameter("values", "expected seq or ones");
        }
    }

    ExperimentOutcome out;
    const nlohmann::ordered_json law_report = emit_law_report(monoid, laws);
    if (!laws.passed()) {
        out.exit_code = 2;
        out.message = "operator '" + which + "' failed the law check";
        out.artifact = law_report.dump() + "\n";
        out.artifact_extension = "jsonl";
        out.summary["laws"] = law_report;
        return out;
    }

    std::ofstream trace = open_trace(cfg);
    const auto fold_run = run_treefold(g, origin, monoid, values, ec, nullptr, nullptr,
                                       trace.is_open() ? &trace : nullptr);

    nlohmann::ordered_json body;
    body["folded"] = fold_run.folded;
    body["depth"] = fold_run.result.depth;
    body["completion_cycles"] = fold_run.result.completion_cycles;
    body["wallclock_seconds"] = fold_run.result.wallclock_seconds;
    body["used_edges"] = fold_run.result.used_edges;
    body["laws"] = law_report;
    out.artifact = body.dump() + "\n";
    out.artifact_extension = "jsonl";
    out.summary = body;

    const double bound =
        (double(diameter(g)) * (ec.t_edge + ec.t_merge)) * ec.t_cycle;
    if (fold_run.result.wallclock_seconds > bound + 1e-15) {
        out.exit_code = 2;
        out.message = "treefold wall clock exceeded the diameter bound";
    }
    return out;
}

ExperimentOutcome run_variance(const ConfigReader& cfg) {
    std::vector<int> n_list;
    for (long long v : cfg.integer_list("n_list")) n_list.push_back((int)v);
    const double f_act = cfg.required_real("f_act");
    const std::int64_t trials = cfg.required_integer("trials");
    const int workers = (int)cfg.integer("workers", 1);

    const ScalingTable table =
        scaling_experiment(n_list, f_act, trials, cfg.seed(), workers);

    ExperimentOutcome out;
    out.artifact = table.to_csv();
    out.artifact_extension = "csv";
    out.summary["rows"] = table.rows.size();
    out.summary["loglog_slope"] = table.loglog_slope;

    for (const ScalingRow& row : table.rows) {
        const double sigma = var_estimator_stddev(row.n, f_act, trials);
        if (std::abs(row.var_hat - row.var_exact) > 5.0 * sigma) {
            out.exit_code = 2;
            out.message = "variance estimate for n=" + std::to_string(row.n) +
                          " fell outside 5 standard errors of the exact value";
        }
    }
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        if (!(table.rows[i].var_over_p32 > table.rows[i - 1].var_over_p32)) {
            out.exit_code = 2;
            out.message = "var/P^(3/2) column failed to increase";
        }
    }
    return out;
}

ExperimentOutcome run_percolation(const ConfigReader& cfg) {
    const int side = (int)cfg.required_integer("L");
    const double delta = cfg.required_real("delta");
    if (delta < 0.0 || delta > 1.0) {
        throw InvalidParameter("delta", "must lie in [0,1]");
    }
    const std::int64_t trials = cfg.required_integer("trials");
    const int workers = (int)cfg.integer("workers", 1);

    const DetourExperimentResult result =
        detour_experiment(side, delta, trials, cfg.seed(), workers);

    ExperimentOutcome out;
    out.artifact = result.buckets_csv();
    out.artifact_extension = "csv";
    out.secondary = result.summary_json() + "\n";
    out.secondary_extension = "summary.json";
    out.summary["c_delta_hat"] = result.c_delta_hat;
    out.summary["tail_c_hat"] = result.ambient_tail.c_hat;
    out.summary["tail_ci_low"] = result.ambient_tail.ci_low;
    out.summary["exclusion_rate"] = result.exclusion_rate;
    out.summary["size_bias_zscore"] = result.size_bias_zscore;

    if (delta >= kSiteThresholdEstimate) {
        out.message = "warning: delta is at or above the subcritical threshold estimate";
    }
    if (delta > 0.0 && result.ambient_tail.clusters_total >= 1000 &&
        result.ambient_tail.ci_low <= 0.0) {
        out.exit_code = 2;
        out.message = "subcritical tail fit failed: decay-rate CI includes zero";
    }
    return out;
}

ExperimentOutcome run_smallworld(const ConfigReader& cfg) {
    std::vector<int> sides;
    for (long long v : cfg.integer_list("L_list")) sides.push_back((int)v);
    const int k = (int)cfg.integer("k", 1);
    const std::int64_t pairs = cfg.integer("pairs", 1000);
    if (pairs < 500) {
        throw InvalidParameter("pairs", "need >= 500 sampled pairs");
    }
    const SmallWorldTable table = smallworld_experiment(sides, k, pairs, cfg.seed());

    ExperimentOutcome out;
    out.artifact = table.to_csv();
    out.artifact_extension = "csv";
    out.summary["k"] = k;
    out.summary["rows"] = table.rows.size();
    if (!table.rows.empty()) {
        out.summary["mean_over_sqrtp_first"] = table.rows.front().mean_over_sqrtp;
        out.summary["mean_over_sqrtp_last"] = table.rows.back().mean_over_sqrtp;
    }
    // With shortcuts, distances collapse: mean/sqrt(P) must fall across the
    // sweep while mean/log2(P) stays within a factor-2 band.
    if (k >= 1 && table.rows.size() >= 2) {
        double band_lo = table.rows.front().mean_over_log2p;
        double band_hi = band_lo;
        bool decreasing = true;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            band_lo = std::min(band_lo, table.rows[i].mean_over_log2p);
            band_hi = std::max(band_hi, table.rows[i].mean_over_log2p);
            if (i > 0 &&
                !(table.rows[i].mean_over_sqrtp < table.rows[i - 1].mean_over_sqrtp)) {
                decreasing = false;
            }
        }
        if (!decreasing) {
            out.exit_code = 2;
            out.message = "mean distance / sqrt(P) failed to decrease across the sweep";
        } else if (band_hi > 2.0 * band_lo) {
            out.exit_code = 2;
            out.message = "mean distance / log2(P) left the factor-2 band";
        }
    }
    return out;
}

ExperimentOutcome run_latency(const ConfigReader& cfg) {
    const std::string mode = cfg.str("mode", "ratio");
    ExperimentOutcome out;
    if (mode == "ratio") {
        const Rational c1 = parse_rational("c1", cfg.required("c1"));
        const Rational c2 = parse_rational("c2", cfg.required("c2"));
        Rational m_p{0};
        if (cfg.has("P")) {
            GridLatencyParams gp;
            gp.c1 = c1;
            gp.c_w = parse_rational("c_w", cfg.str("c_w", "1"));
            gp.t_edge = parse_rational("t_edge", cfg.str("t_edge", "1"));
            gp.p = cfg.required_integer("P");
            m_p = gp.m_p();
        } else {
            throw InvalidParameter("P", "required to derive M_P = c_w * sqrt(P) * t_edge");
        }
        const Rational ab_sum = parse_rational("ab_sum", cfg.required("ab_sum"));
        std::vector<Rational> xs;
        for (const std::string& piece : split(cfg.str("x_list", "1,2,4,8,16,32,64"), ',')) {
            xs.push_back(parse_rational("x_list", piece));
        }
        const RatioCurve curve = ratio_curve(c1, c2, ab_sum, m_p, xs);
        out.artifact = curve.to_csv();
        out.artifact_extension = "csv";
        out.summary["monotone"] = curve.monotone;
        out.summary["limit"] = curve.limit.to_double();

        // Sampled monotonicity must agree with the exact criterion.
        bool strictly_up = true, strictly_down = true, constant = true;
        for (std::size_t i = 1; i < curve.samples.size(); ++i) {
            const auto& prev = curve.samples[i - 1].r;
            const auto& next = curve.samples[i].r;
            if (!(prev < next)) strictly_up = false;
            if (!(next < prev)) strictly_down = false;
            if (!(prev == next)) constant = false;
        }
        if (curve.samples.size() >= 2) {
            const bool criterion = curve.monotone;
            if ((criterion && !strictly_up) || (!criterion && strictly_up) ||
                (constant && criterion)) {
                out.exit_code = 2;
                out.message = "sampled ratio ordering disagreed with the exact criterion";
            }
            (void)strictly_down;
        }
    } else if (mode == "divergence") {
        std::vector<std::int64_t> n_list;
        for (long long v : cfg.integer_list("N_list")) n_list.push_back(v);
        ClusterLatencyParams cp;
        cp.alpha = cfg.real("alpha", 5e-6);
        cp.beta = cfg.real("beta", 1e-10);
        cp.gamma = cfg.real("gamma", 0.0);
        cp.m0 = cfg.real("m0", 1024.0);
        cp.c2 = cfg.real("c2", 0.0);
        const double f_act = cfg.required_real("f_act");
        const double c1 = cfg.real("c1", 0.0);
        double m_p = 0.0;
        {
            GridLatencyParams gp;
            gp.c_w = parse_rational("c_w", cfg.str("c_w", "1"));
            gp.t_edge = parse_rational("t_edge", cfg.str("t_edge", "1"));
            gp.p = cfg.required_integer("P");
            m_p = gp.m_p().to_double();
        }
        const DivergenceTable table = divergence_experiment(n_list, f_act, c1, m_p, cp);
        out.artifact = table.to_csv();
        out.artifact_extension = "csv";
        out.summary["diverges"] = table.diverges;
        out.summary["tail_rel_spread"] = table.tail_rel_spread;
        out.summary["fit_slope"] = table.fit_slope;
        out.summary["fit_r2"] = table.fit_r2;
        if (!table.diverges) {
            out.message = "alpha = 0: ratio stays bounded, no divergence expected";
        } else if (table.rows.size() >= 4 && table.tail_rel_spread >= 0.10) {
            out.exit_code = 2;
            out.message = "ratio/log2(N) tail failed to converge within 10%";
        }
    } else {
        throw InvalidParameter("mode", "expected ratio or divergence");
    }
    return out;
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

// Registered first-line schema per (kind, extension). Artifacts are checked
// against this table before anything reaches disk.
constexpr int kArtifactSchemaVersion = 1;

bool artifact_schema_ok(const std::string& kind, const std::string& ext,
                        const std::string& artifact) {
    if (ext == "jsonl") {
        return artifact.empty() || artifact.front() == '{' || artifact.front() == '[';
    }
    static const std::map<std::string, std::string> headers = {
        {"bounds", "w1,r_mu,steiner,wallclock_lower_seconds,steiner_exact"},
        {"variance", "n,P,f,trials,mean_hat,mean_exact,var_hat,var_exact,var_over_P2,"
                     "var_over_P32"},
        {"percolation", "k,count,mean_detour,stderr"},
        {"smallworld", "L,P,pairs,mean_dist,mean_over_log2P,mean_over_sqrtP"},
        {"latency", "x,R"},
    };
    const auto it = headers.find(kind);
    if (it == headers.end()) return true;
    std::string expected = it->second;
    if (kind == "latency" && artifact.rfind("N,", 0) == 0) {
        expected = "N,T_cluster,T_grid,ratio,ratio_over_log2N";
    }
    return artifact.rfind(expected + "\n", 0) == 0;
}

std::uint64_t config_digest(const std::string& kind, const ConfigMap& config) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&](const std::string& s) {
        for (const char c : s) {
            h ^= (unsigned char)c;
            h *= 1099511628211ull;
        }
        h ^= 0x1f;
        h *= 1099511628211ull;
    };
    mix(kind);
    for (const auto& [key, value] : config) {
        mix(key);
        mix(value);
    }
    return h;
}

} // namespace

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw InvalidParameter("config", "line " + std::to_string(line_no) +
                                                 ": expected 'key = value'");
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty()) {
            throw InvalidParameter("config", "line " + std::to_string(line_no) + ": empty key");
        }
        config[key] = value;
    }
    return config;
}

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidParameter("config", "cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

ExperimentOutcome execute(const std::string& kind, const ConfigMap& config) {
    reject_unknown_keys(kind, config);
    const ConfigReader cfg(kind, config);
    ExperimentOutcome out;
    if (kind == "bounds") {
        out = run_bounds(cfg);
    } else if (kind == "simulate") {
        out = run_simulate(cfg);
    } else if (kind == "treefold") {
        out = run_treefold_experiment(cfg);
    } else if (kind == "variance") {
        out = run_variance(cfg);
    } else if (kind == "percolation") {
        out = run_percolation(cfg);
    } else if (kind == "smallworld") {
        out = run_smallworld(cfg);
    } else if (kind == "latency") {
        out = run_latency(cfg);
    } else {
        throw InvalidParameter("experiment", "unknown kind '" + kind + "'");
    }
    apply_format(out, cfg);
    return out;
}

int run_to_files(const std::string& kind, const ConfigMap& config, const std::string& out_path) {
    const std::string started = iso_timestamp();
    ExperimentOutcome outcome;
    try {
        outcome = execute(kind, config);
    } catch (const InvalidParameter& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const BudgetError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const StatisticsError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    if (!artifact_schema_ok(kind, outcome.artifact_extension, outcome.artifact)) {
        std::fprintf(stderr, "error: %s artifact does not match its registered schema\n",
                     kind.c_str());
        return 1;
    }

    std::string base = out_path;
    const std::string ext = "." + outcome.artifact_extension;
    if (base.size() < ext.size() || base.compare(base.size() - ext.size(), ext.size(), ext) != 0) {
        base += ext;
    }
    {
        std::ofstream out(base, std::ios::binary);
        if (!out) {
            std::fprintf(stderr, "error: out: cannot write '%s'\n", base.c_str());
            return 1;
        }
        out << outcome.artifact;
    }
    if (!outcome.secondary.empty()) {
        std::ofstream out(base + "." + outcome.secondary_extension, std::ios::binary);
        out << outcome.secondary;
    }

    nlohmann::ordered_json manifest;
    manifest["schema_version"] = 1;
    manifest["tool"] = kToolName;
    manifest["version"] = kToolVersion;
    manifest["experiment"] = kind;
    {
        std::ostringstream hex;
        hex << std::hex << config_digest(kind, config);
        manifest["config_digest"] = hex.str();
    }
    manifest["seed"] = config.count("seed") ? config.at("seed") : "0";
    manifest["artifact_schema_version"] = kArtifactSchemaVersion;
    manifest["started_at"] = started;
    manifest["finished_at"] = iso_timestamp();
    manifest["exit_code"] = outcome.exit_code;
    if (!outcome.message.empty()) manifest["message"] = outcome.message;
    manifest["summary"] = outcome.summary;
    {
        std::ofstream out(base + ".manifest.json", std::ios::binary);
        out << manifest.dump(2) << '\n';
    }

    if (!outcome.message.empty()) {
        std::fprintf(stderr, "%s\n", outcome.message.c_str());
    }
    return outcome.exit_code;
}

} // namespace gridsim::cli

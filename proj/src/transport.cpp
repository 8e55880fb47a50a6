#include "gridsim/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gridsim/errors.hpp"

namespace gridsim {

namespace {

std::uint64_t fnv1a64_bytes(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

constexpr std::uint64_t kFnvBasis = 14695981039346656037ull;

} // namespace

DiscreteMeasure DiscreteMeasure::create(std::vector<Atom> atoms, NodeId sink) {
    double total = 0.0;
    std::set<std::pair<int, int>> seen;
    for (const Atom& a : atoms) {
        if (!(a.mass > 0.0)) {
            throw InvalidParameter("atoms", "mass at " + to_string(a.node) + " must be positive");
        }
        if (!seen.insert({a.node.x, a.node.y}).second) {
            throw InvalidParameter("atoms", "duplicate atom node " + to_string(a.node));
        }
        total += a.mass;
    }
    if (atoms.empty()) {
        throw InvalidParameter("atoms", "measure needs at least one atom");
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
        throw InvalidParameter("atoms", "masses sum to " + std::to_string(total) +
                                            ", expected 1 within 1e-12");
    }
    for (Atom& a : atoms) {
        a.mass /= total;
    }
    DiscreteMeasure m;
    m.atoms = std::move(atoms);
    m.sink = sink;
    return m;
}

DiscreteMeasure DiscreteMeasure::uniform(const std::vector<NodeId>& support, NodeId sink) {
    std::vector<Atom> atoms;
    atoms.reserve(support.size());
    const double w = 1.0 / double(support.size());
    for (NodeId v : support) {
        atoms.push_back({v, w});
    }
    return create(std::move(atoms), sink);
}

std::vector<NodeId> DiscreteMeasure::support() const {
    std::vector<NodeId> nodes;
    nodes.reserve(atoms.size());
    for (const Atom& a : atoms) {
        nodes.push_back(a.node);
    }
    return nodes;
}

std::uint64_t DiscreteMeasure::digest() const {
    std::uint64_t h = kFnvBasis;
    for (const Atom& a : atoms) {
        h = fnv1a64_bytes(h, &a.node.x, sizeof(a.node.x));
        h = fnv1a64_bytes(h, &a.node.y, sizeof(a.node.y));
        std::uint64_t bits = 0;
        std::memcpy(&bits, &a.mass, sizeof(bits));
        h = fnv1a64_bytes(h, &bits, sizeof(bits));
    }
    h = fnv1a64_bytes(h, &sink.x, sizeof(sink.x));
    h = fnv1a64_bytes(h, &sink.y, sizeof(sink.y));
    return h;
}

Metric manhattan_metric() {
    return [](NodeId u, NodeId v) { return manhattan(u, v); };
}

Metric bfs_metric(const GridGraph& g) {
    // Cache one distance field per queried source.
    auto cache = std::make_shared<std::vector<DistanceField>>(g.node_count());
    auto filled = std::make_shared<std::vector<char>>(g.node_count(), 0);
    return [&g, cache, filled](NodeId u, NodeId v) {
        const int src = g.index_of(u);
        if (!(*filled)[src]) {
            (*cache)[src] = bfs_distances(g, u);
            (*filled)[src] = 1;
        }
        return (*cache)[src].at(g.index_of(v));
    };
}

double w1_to_dirac(const DiscreteMeasure& m, const Metric& metric) {
    double work = 0.0;
    for (const auto& a : m.atoms) {
        work += a.mass * double(metric(a.node, m.sink));
    }
    return work;
}

int support_radius(const DiscreteMeasure& m, const Metric& metric) {
    int r = 0;
    for (const auto& a : m.atoms) {
        r = std::max(r, metric(a.node, m.sink));
    }
    return r;
}

namespace {

constexpr int kInf = std::numeric_limits<int>::max() / 4;

// Multi-source relaxation with unit edge weights: Dial buckets over the
// current labels.
void relax_over_graph(const GridGraph& g, std::vector<int>& labels) {
    int max_finite = 0;
    for (int d : labels) {
        if (d < kInf) max_finite = std::max(max_finite, d);
    }
    const int limit = max_finite + g.node_count() + 1;
    std::vector<std::vector<int>> buckets(limit + 1);
    for (int v = 0; v < (int)labels.size(); ++v) {
        if (labels[v] <= max_finite) buckets[labels[v]].push_back(v);
    }
    for (int d = 0; d <= limit; ++d) {
        for (std::size_t i = 0; i < buckets[d].size(); ++i) {
            const int u = buckets[d][i];
            if (labels[u] != d) continue;
            for (int v : g.neighbors(u)) {
                if (labels[v] > d + 1) {
                    labels[v] = d + 1;
                    if (d + 1 <= limit) buckets[d + 1].push_back(v);
                }
            }
        }
    }
}

int mst_metric_closure(const std::vector<std::vector<int>>& term_dist) {
    const int k = (int)term_dist.size();
    std::vector<int> best(k, kInf);
    std::vector<char> used(k, 0);
    best[0] = 0;
    int total = 0;
    for (int round = 0; round < k; ++round) {
        int pick = -1;
        for (int i = 0; i < k; ++i) {
            if (!used[i] && (pick < 0 || best[i] < best[pick])) pick = i;
        }
        used[pick] = 1;
        total += best[pick];
        for (int i = 0; i < k; ++i) {
            if (!used[i]) best[i] = std::min(best[i], term_dist[pick][i]);
        }
    }
    return total;
}

} // namespace

SteinerResult steiner_cost(const GridGraph& g, const std::vector<NodeId>& terminals,
                           bool allow_heuristic_only) {
    if (terminals.empty()) {
        throw InvalidParameter("terminals", "need at least one terminal");
    }
    for (NodeId t : terminals) {
        if (!g.contains(t)) {
            throw InvalidParameter("terminals", "terminal " + to_string(t) + " outside grid");
        }
    }
    // Dedup while preserving first occurrence.
    std::vector<NodeId> terms;
    for (NodeId t : terminals) {
        if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(t);
    }
    const int k = (int)terms.size();
    const int n = g.node_count();

    SteinerResult result;
    if (k == 1) {
        result.exact_available = true;
        return result;
    }

    // Per-terminal BFS fields: base case of the DP and the metric closure.
    std::vector<DistanceField> fields;
    fields.reserve(k);
    for (NodeId t : terms) {
        fields.push_back(bfs_distances(g, t));
    }
    std::vector<std::vector<int>> term_dist(k, std::vector<int>(k, 0));
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            const int d = fields[i].at(g.index_of(terms[j]));
            if (d == DistanceField::kUnreachable) {
                throw InvalidParameter("terminals", "terminal set not connected in graph");
            }
            term_dist[i][j] = d;
            result.max_pairwise_lower = std::max(result.max_pairwise_lower, d);
        }
    }
    result.mst_upper_bound = mst_metric_closure(term_dist);

    if (k > kSteinerTerminalBudget) {
        if (allow_heuristic_only) {
            result.exact_available = false;
            return result;
        }
        throw BudgetError("steiner terminal budget exceeded: " + std::to_string(k) + " > " +
                          std::to_string(kSteinerTerminalBudget));
    }

    // Dreyfus-Wagner over 2^k terminal subsets.
    const int full = (1 << k) - 1;
    std::vector<std::vector<int>> dp(full + 1, std::vector<int>(n, kInf));
    for (int i = 0; i < k; ++i) {
        for (int v = 0; v < n; ++v) {
            dp[1 << i][v] = fields[i].at(v);
        }
    }
    for (int mask = 1; mask <= full; ++mask) {
        if ((mask & (mask - 1)) == 0) continue; // singletons are the base case
        auto& row = dp[mask];
        const int low = mask & (-mask);
        // Merge two subtrees at a shared node; iterating submasks containing
        // the lowest set bit covers each split once.
        for (int sub = (mask - 1) & mask; sub > 0; sub = (sub - 1) & mask) {
            if (!(sub & low)) continue;
            const auto& a = dp[sub];
            const auto& b = dp[mask ^ sub];
            for (int v = 0; v < n; ++v) {
                const int joined = a[v] + b[v];
                if (joined < row[v]) row[v] = joined;
            }
        }
        relax_over_graph(g, row);
    }
    result.exact_edges = dp[full][g.index_of(terms[0])];
    result.exact_available = true;
    return result;
}

std::string BoundsReport::to_json() const {
    nlohmann::ordered_json j;
    j["w1"] = w1;
    j["r_mu"] = r_mu;
    j["steiner"] = steiner;
    j["wallclock_lower_seconds"] = wallclock_lower_seconds;
    j["steiner_exact"] = steiner_exact;
    nlohmann::ordered_json digest;
    digest["L"] = side;
    std::ostringstream hex;
    hex << std::hex << atoms_digest;
    digest["atoms_hash"] = hex.str();
    digest["seed"] = seed;
    j["input"] = digest;
    return j.dump(2);
}

BoundsReport bounds_report(const DiscreteMeasure& m, const GridGraph& g,
                           int t_edge, double t_cycle) {
    if (t_edge < 0) {
        throw InvalidParameter("t_edge", "must be >= 0");
    }
    if (!(t_cycle > 0.0)) {
        throw InvalidParameter("t_cycle", "must be > 0");
    }
    const Metric metric =
        g.shortcut_edges().empty() ? manhattan_metric() : bfs_metric(g);

    BoundsReport report;
    report.w1 = w1_to_dirac(m, metric);
    report.r_mu = support_radius(m, metric);

    std::vector<NodeId> terminals = m.support();
    if (std::find(terminals.begin(), terminals.end(), m.sink) == terminals.end()) {
        terminals.push_back(m.sink);
    }
    const SteinerResult st = steiner_cost(g, terminals, /*allow_heuristic_only=*/true);
    report.steiner = st.exact_available ? st.exact_edges : st.mst_upper_bound;
    report.steiner_exact = st.exact_available;
    report.wallclock_lower_seconds = double(report.r_mu) * double(t_edge) * t_cycle;
    report.side = g.side();
    report.atoms_digest = m.digest();
    report.seed = g.seed();
    return report;
}

} // namespace gridsim

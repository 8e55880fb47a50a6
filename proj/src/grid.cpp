#include "gridsim/grid.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "gridsim/errors.hpp"
#include "gridsim/rng.hpp"

namespace gridsim {

std::string to_string(NodeId v) {
    return "(" + std::to_string(v.x) + "," + std::to_string(v.y) + ")";
}

namespace {

Edge canonical(NodeId a, NodeId b) {
    return b < a ? Edge{b, a} : Edge{a, b};
}

} // namespace

bool GridGraph::has_grid_edge(NodeId a, NodeId b) const noexcept {
    return contains(a) && contains(b) && manhattan(a, b) == 1;
}

void GridGraph::rebuild_adjacency() {
    const int n = node_count();
    adjacency_.assign(n, {});
    for (int idx = 0; idx < n; ++idx) {
        const NodeId v = node_at(idx);
        // Fixed neighbor order: -x, +x, -y, +y, then shortcuts. BFS tie-breaks
        // inherit this order, which keeps traversals reproducible.
        if (v.x > 0) adjacency_[idx].push_back(idx - 1);
        if (v.x + 1 < side_) adjacency_[idx].push_back(idx + 1);
        if (v.y > 0) adjacency_[idx].push_back(idx - side_);
        if (v.y + 1 < side_) adjacency_[idx].push_back(idx + side_);
    }
    for (const Edge& e : shortcuts_) {
        adjacency_[index_of(e.first)].push_back(index_of(e.second));
        adjacency_[index_of(e.second)].push_back(index_of(e.first));
    }
}

GridGraph GridGraph::build(int side_length) {
    if (side_length < 1) {
        throw InvalidParameter("L", "side length must be >= 1");
    }
    GridGraph g;
    g.side_ = side_length;
    g.rebuild_adjacency();
    return g;
}

GridGraph build_grid(int side_length) { return GridGraph::build(side_length); }

GridGraph augment_smallworld(const GridGraph& g, int k, std::uint64_t seed) {
    if (k < 1) {
        throw InvalidParameter("k", "shortcut budget must be >= 1");
    }
    const int n = g.node_count();
    std::vector<Edge> pairs = g.shortcuts_;
    CounterRng rng(seed);
    for (int idx = 0; idx < n; ++idx) {
        const NodeId v = g.node_at(idx);
        for (int j = 0; j < k; ++j) {
            if (n < 2) break;
            // Uniform over V \ {v}: draw in [0, n-1) and skip past v.
            int partner = (int)rng.next_below((std::uint64_t)(n - 1));
            if (partner >= idx) ++partner;
            pairs.push_back(canonical(v, g.node_at(partner)));
        }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    // Collapse pairs that duplicate lattice edges; realized count is whatever
    // survives.
    pairs.erase(std::remove_if(pairs.begin(), pairs.end(),
                               [&](const Edge& e) { return manhattan(e.first, e.second) == 1; }),
                pairs.end());

    GridGraph out;
    out.side_ = g.side_;
    out.k_ = g.k_ + k;
    out.seed_ = seed;
    out.shortcuts_ = std::move(pairs);
    out.rebuild_adjacency();
    return out;
}

int DistanceField::max_finite() const noexcept {
    int best = 0;
    for (int d : dist) {
        if (d > best) best = d;
    }
    return best;
}

DistanceField bfs_distances(const GridGraph& g, NodeId source,
                            const std::vector<char>* blocked) {
    if (!g.contains(source)) {
        throw InvalidParameter("source", "node " + to_string(source) + " outside grid");
    }
    const int src = g.index_of(source);
    if (blocked && (*blocked)[src]) {
        throw InvalidParameter("source", "node " + to_string(source) + " is blocked");
    }
    DistanceField field;
    field.source = source;
    field.dist.assign(g.node_count(), DistanceField::kUnreachable);
    field.dist[src] = 0;
    std::queue<int> frontier;
    frontier.push(src);
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : g.neighbors(u)) {
            if (blocked && (*blocked)[v]) continue;
            if (field.dist[v] == DistanceField::kUnreachable) {
                field.dist[v] = field.dist[u] + 1;
                frontier.push(v);
            }
        }
    }
    return field;
}

int eccentricity(const GridGraph& g, NodeId v) {
    return bfs_distances(g, v).max_finite();
}

int diameter(const GridGraph& g) {
    int best = 0;
    for (int idx = 0; idx < g.node_count(); ++idx) {
        best = std::max(best, eccentricity(g, g.node_at(idx)));
    }
    return best;
}

int radius(const GridGraph& g) {
    int best = 0;
    bool first = true;
    for (int idx = 0; idx < g.node_count(); ++idx) {
        const int ecc = eccentricity(g, g.node_at(idx));
        if (first || ecc < best) {
            best = ecc;
            first = false;
        }
    }
    return best;
}

std::string dump_graph(const GridGraph& g) {
    std::ostringstream out;
    out << g.side() << ' ' << g.shortcuts_per_node() << ' ' << g.seed() << '\n';
    for (const Edge& e : g.shortcut_edges()) {
        out << e.first.x << ' ' << e.first.y << ' ' << e.second.x << ' ' << e.second.y << '\n';
    }
    return out.str();
}

GridGraph load_graph(const std::string& text) {
    std::istringstream in(text);
    int side = 0, k = 0;
    std::uint64_t seed = 0;
    if (!(in >> side >> k >> seed)) {
        throw InvalidParameter("graph", "malformed header, expected 'L k seed'");
    }
    if (side < 1) {
        throw InvalidParameter("L", "side length must be >= 1");
    }
    GridGraph g;
    g.side_ = side;
    g.k_ = k;
    g.seed_ = seed;
    int x1 = 0, y1 = 0, x2 = 0, y2 = 0;
    while (in >> x1 >> y1 >> x2 >> y2) {
        const NodeId a{x1, y1};
        const NodeId b{x2, y2};
        if (!g.contains(a) || !g.contains(b) || a == b || manhattan(a, b) == 1) {
            throw InvalidParameter("graph", "invalid shortcut pair " + to_string(a) + " " + to_string(b));
        }
        g.shortcuts_.push_back(canonical(a, b));
    }
    std::sort(g.shortcuts_.begin(), g.shortcuts_.end());
    g.shortcuts_.erase(std::unique(g.shortcuts_.begin(), g.shortcuts_.end()), g.shortcuts_.end());
    g.rebuild_adjacency();
    return g;
}

} // namespace gridsim

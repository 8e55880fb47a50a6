#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace gridsim {

// A lattice point of an L x L grid, 0 <= x,y < L.
struct NodeId {
    int x = 0;
    int y = 0;

    friend bool operator==(NodeId a, NodeId b) noexcept { return a.x == b.x && a.y == b.y; }
    friend bool operator!=(NodeId a, NodeId b) noexcept { return !(a == b); }
    // Row-major order: (y, x).
    friend bool operator<(NodeId a, NodeId b) noexcept {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    }
};

std::string to_string(NodeId v);

using Edge = std::pair<NodeId, NodeId>;

// L x L grid with 4-neighbor Manhattan edges plus optional undirected
// long-range shortcuts. Immutable after construction; safe to share across
// experiment workers.
class GridGraph {
public:
    static GridGraph build(int side_length);

    int side() const noexcept { return side_; }
    int node_count() const noexcept { return side_ * side_; }
    // 2L(L-1) lattice edges plus realized shortcuts.
    std::int64_t edge_count() const noexcept {
        return std::int64_t(2) * side_ * (side_ - 1) + std::int64_t(shortcuts_.size());
    }

    bool contains(NodeId v) const noexcept {
        return v.x >= 0 && v.x < side_ && v.y >= 0 && v.y < side_;
    }
    // Row-major: y*L + x.
    int index_of(NodeId v) const noexcept { return v.y * side_ + v.x; }
    NodeId node_at(int idx) const noexcept { return NodeId{idx % side_, idx / side_}; }

    const std::vector<int>& neighbors(int idx) const noexcept { return adjacency_[idx]; }
    const std::vector<int>& neighbors(NodeId v) const noexcept { return adjacency_[index_of(v)]; }

    // Canonically ordered, deduplicated shortcut pairs; empty on bare grids.
    const std::vector<Edge>& shortcut_edges() const noexcept { return shortcuts_; }
    int shortcuts_per_node() const noexcept { return k_; }
    std::uint64_t seed() const noexcept { return seed_; }

    bool has_grid_edge(NodeId a, NodeId b) const noexcept;

private:
    GridGraph() = default;
    void rebuild_adjacency();

    friend GridGraph augment_smallworld(const GridGraph&, int, std::uint64_t);
    friend GridGraph load_graph(const std::string&);

    int side_ = 0;
    int k_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<Edge> shortcuts_;
    std::vector<std::vector<int>> adjacency_;
};

// |dx| + |dy|; the bare grid's graph metric.
inline int manhattan(NodeId u, NodeId v) noexcept {
    const int dx = u.x > v.x ? u.x - v.x : v.x - u.x;
    const int dy = u.y > v.y ? u.y - v.y : v.y - u.y;
    return dx + dy;
}

GridGraph build_grid(int side_length);

// Each node contributes k partners drawn uniformly from V \ {v}; the edge set
// is the undirected union, deduplicated against itself and the grid edges.
// Deterministic for fixed (graph, k, seed).
GridGraph augment_smallworld(const GridGraph& g, int k, std::uint64_t seed);

// Hop counts from one source. Unreachable nodes carry the explicit sentinel,
// never a large finite value.
struct DistanceField {
    static constexpr int kUnreachable = -1;

    NodeId source{};
    std::vector<int> dist; // indexed row-major

    bool reachable(int idx) const noexcept { return dist[idx] != kUnreachable; }
    int at(int idx) const noexcept { return dist[idx]; }
    int max_finite() const noexcept;
};

// Exact hop distances in the subgraph induced on V minus `blocked`.
DistanceField bfs_distances(const GridGraph& g, NodeId source,
                            const std::vector<char>* blocked = nullptr);

int eccentricity(const GridGraph& g, NodeId v);
int diameter(const GridGraph& g);
int radius(const GridGraph& g);

// Line format: header "L k seed", then one shortcut pair "x1 y1 x2 y2" per
// line. Round-trips bit-exactly.
std::string dump_graph(const GridGraph& g);
GridGraph load_graph(const std::string& text);

} // namespace gridsim

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gridsim/grid.hpp"

namespace gridsim {

// Ordered directed edge sequence from source to dest.
struct Route {
    NodeId source{};
    NodeId dest{};
    std::vector<Edge> edges;

    int length() const noexcept { return (int)edges.size(); }
    // Node sequence source..dest, length()+1 entries.
    std::vector<NodeId> nodes() const;
    std::string to_json() const; // [[x,y],...] for plotting
};

// Directed-edge load counts keyed by packed coordinates.
class EdgeLoadMap {
public:
    static std::uint64_t key(NodeId from, NodeId to) noexcept {
        return (std::uint64_t(std::uint16_t(from.x)) << 48) |
               (std::uint64_t(std::uint16_t(from.y)) << 32) |
               (std::uint64_t(std::uint16_t(to.x)) << 16) |
               std::uint64_t(std::uint16_t(to.y));
    }

    void add_route(const Route& r);
    std::int64_t at(NodeId from, NodeId to) const;
    std::int64_t total() const noexcept { return total_; }
    std::size_t edge_count() const noexcept { return load_.size(); }

    struct MaxLoad {
        std::int64_t load = 0;
        NodeId from{};
        NodeId to{};
    };
    MaxLoad max_load() const;

    const std::unordered_map<std::uint64_t, std::int64_t>& raw() const noexcept { return load_; }

private:
    std::unordered_map<std::uint64_t, std::int64_t> load_;
    std::int64_t total_ = 0;
};

using RouteSet = std::vector<Route>;

// Horizontal leg to the destination column, then vertical. Length is always
// the Manhattan distance.
Route xy_route(const GridGraph& g, NodeId source, NodeId dest);

// Loads on the sink-column edges e_j = ((0,j),(0,j-1)) with every source
// active and XY-routed to the corner sink. Index j runs 1..n-1; slot 0 is
// unused. Measured by explicit route counting.
std::vector<std::int64_t> sink_trunk_loads(const GridGraph& g, NodeId x_star = NodeId{0, 0});

// View over a site-failure mask, row-major, 1 = failed.
struct FailureView {
    int side = 0;
    const std::vector<char>* failed = nullptr;

    bool is_failed(int idx) const noexcept { return (*failed)[idx] != 0; }
    bool is_failed(NodeId v) const noexcept { return (*failed)[v.y * side + v.x] != 0; }
};

struct DetourRecord {
    int nominal_len = 0;
    int actual_len = 0;
    int clusters_hit = 0;    // m: distinct failure clusters on the nominal route
    int failed_on_route = 0; // K_Gamma: failed nodes on the nominal route
};

struct DeflectResult {
    Route route;
    DetourRecord record;
};

// Follows the XY route; around each failure cluster it walks the cluster's
// healthy outer boundary until it can rejoin the nominal corridor. Lateral
// preference: +y first on horizontal legs (falling back to -y at the grid
// boundary), +x first on vertical legs. Returns nullopt when the destination
// is unreachable in the healthy subgraph.
std::optional<DeflectResult> deflect_route(const GridGraph& g, NodeId source, NodeId dest,
                                           const FailureView& failures);

struct CongestionReport {
    EdgeLoadMap loads;
    EdgeLoadMap::MaxLoad max;
};

CongestionReport edge_congestion(const RouteSet& routes);

} // namespace gridsim

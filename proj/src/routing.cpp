#include "gridsim/routing.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "gridsim/errors.hpp"

namespace gridsim {

std::vector<NodeId> Route::nodes() const {
    std::vector<NodeId> seq;
    seq.push_back(source);
    for (const Edge& e : edges) {
        seq.push_back(e.second);
    }
    return seq;
}

std::string Route::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (NodeId v : nodes()) {
        arr.push_back({v.x, v.y});
    }
    return arr.dump();
}

void EdgeLoadMap::add_route(const Route& r) {
    for (const Edge& e : r.edges) {
        ++load_[key(e.first, e.second)];
        ++total_;
    }
}

std::int64_t EdgeLoadMap::at(NodeId from, NodeId to) const {
    const auto it = load_.find(key(from, to));
    return it == load_.end() ? 0 : it->second;
}

EdgeLoadMap::MaxLoad EdgeLoadMap::max_load() const {
    MaxLoad best;
    std::uint64_t best_key = 0;
    for (const auto& [k, count] : load_) {
        if (count > best.load || (count == best.load && k < best_key) || best.load == 0) {
            best.load = count;
            best_key = k;
            best.from = NodeId{int(std::int16_t(k >> 48)), int(std::int16_t((k >> 32) & 0xffff))};
            best.to = NodeId{int(std::int16_t((k >> 16) & 0xffff)), int(std::int16_t(k & 0xffff))};
        }
    }
    return best;
}

Route xy_route(const GridGraph& g, NodeId source, NodeId dest) {
    if (!g.contains(source)) throw InvalidParameter("source", "outside grid");
    if (!g.contains(dest)) throw InvalidParameter("dest", "outside grid");
    Route r;
    r.source = source;
    r.dest = dest;
    NodeId cur = source;
    const int step_x = dest.x > cur.x ? 1 : -1;
    while (cur.x != dest.x) {
        const NodeId next{cur.x + step_x, cur.y};
        r.edges.push_back({cur, next});
        cur = next;
    }
    const int step_y = dest.y > cur.y ? 1 : -1;
    while (cur.y != dest.y) {
        const NodeId next{cur.x, cur.y + step_y};
        r.edges.push_back({cur, next});
        cur = next;
    }
    return r;
}

std::vector<std::int64_t> sink_trunk_loads(const GridGraph& g, NodeId x_star) {
    if (!(x_star == NodeId{0, 0})) {
        throw InvalidParameter("x_star", "sink-trunk analytics are defined for the corner sink only");
    }
    const int n = g.side();
    std::vector<std::int64_t> loads(std::size_t(n), 0);
    for (int idx = 0; idx < g.node_count(); ++idx) {
        const NodeId src = g.node_at(idx);
        if (src == x_star) continue;
        const Route r = xy_route(g, src, x_star);
        for (const Edge& e : r.edges) {
            if (e.first.x == 0 && e.second.x == 0 && e.second.y == e.first.y - 1) {
                loads[std::size_t(e.first.y)] += 1;
            }
        }
    }
    return loads;
}

CongestionReport edge_congestion(const RouteSet& routes) {
    CongestionReport report;
    for (const Route& r : routes) {
        report.loads.add_route(r);
    }
    report.max = report.loads.max_load();
    return report;
}

namespace {

struct Dir {
    int dx;
    int dy;
};

Dir rotate_left(Dir d) { return Dir{-d.dy, d.dx}; }
Dir rotate_right(Dir d) { return Dir{d.dy, -d.dx}; }
Dir reverse(Dir d) { return Dir{-d.dx, -d.dy}; }

bool walkable(const GridGraph& g, const FailureView& failures, NodeId v) {
    return g.contains(v) && !failures.is_failed(v);
}

// Distinct 4-connected failure clusters among the failed nodes of `route_nodes`.
int count_route_clusters(const GridGraph& g, const FailureView& failures,
                         const std::vector<NodeId>& route_nodes, int* failed_on_route) {
    std::unordered_set<int> assigned;
    int clusters = 0;
    int failed = 0;
    for (NodeId v : route_nodes) {
        if (!failures.is_failed(v)) continue;
        ++failed;
        const int start = g.index_of(v);
        if (assigned.count(start)) continue;
        ++clusters;
        // Flood the whole cluster so later route nodes in it don't recount.
        std::vector<int> stack{start};
        assigned.insert(start);
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int w : g.neighbors(u)) {
                if (failures.is_failed(w) && !assigned.count(w)) {
                    assigned.insert(w);
                    stack.push_back(w);
                }
            }
        }
    }
    *failed_on_route = failed;
    return clusters;
}

} // namespace

std::optional<DeflectResult> deflect_route(const GridGraph& g, NodeId source, NodeId dest,
                                           const FailureView& failures) {
    if (!g.contains(source) || failures.is_failed(source)) {
        throw InvalidParameter("source", "must be a healthy grid node");
    }
    if (!g.contains(dest) || failures.is_failed(dest)) {
        throw InvalidParameter("dest", "must be a healthy grid node");
    }

    const Route nominal = xy_route(g, source, dest);
    const std::vector<NodeId> path = nominal.nodes();
    std::unordered_map<int, int> path_index;
    for (int i = 0; i < (int)path.size(); ++i) {
        path_index[g.index_of(path[i])] = i;
    }

    DeflectResult out;
    out.route.source = source;
    out.route.dest = dest;
    out.record.nominal_len = nominal.length();
    out.record.clusters_hit =
        count_route_clusters(g, failures, path, &out.record.failed_on_route);

    NodeId pos = source;
    int consumed = 0; // highest nominal index reached so far
    auto step_to = [&](NodeId next) {
        out.route.edges.push_back({pos, next});
        pos = next;
    };

    while (!(pos == dest)) {
        const NodeId next_nominal = path[std::size_t(consumed + 1)];
        if (!failures.is_failed(next_nominal)) {
            step_to(next_nominal);
            ++consumed;
            continue;
        }

        // Boundary-walk episode around the blocking cluster.
        const Dir heading{next_nominal.x - pos.x, next_nominal.y - pos.y};
        Dir sidesteps[3];
        if (heading.dy == 0) {
            sidesteps[0] = Dir{0, 1}; // +y side first, per the fixed orientation
            sidesteps[1] = Dir{0, -1};
        } else {
            sidesteps[0] = Dir{1, 0};
            sidesteps[1] = Dir{-1, 0};
        }
        sidesteps[2] = reverse(heading);

        Dir facing{0, 0};
        bool wall_on_left = true;
        bool initiated = false;
        for (const Dir s : sidesteps) {
            const NodeId cand{pos.x + s.dx, pos.y + s.dy};
            if (!walkable(g, failures, cand)) continue;
            // The blocked cell sits on the left of s exactly when turning s
            // left yields the old heading; keep the wall on that hand.
            const Dir left_of_s = rotate_left(s);
            wall_on_left = (left_of_s.dx == heading.dx && left_of_s.dy == heading.dy);
            facing = s;
            step_to(cand);
            initiated = true;
            break;
        }
        if (!initiated) {
            return std::nullopt; // walled in at pos
        }

        std::set<std::pair<int, int>> episode_states; // (node index, facing id)
        auto facing_id = [](Dir d) { return (d.dx + 1) * 3 + (d.dy + 1); };
        bool rejoined = false;
        while (true) {
            const auto it = path_index.find(g.index_of(pos));
            if (it != path_index.end() && it->second > consumed) {
                consumed = it->second;
                rejoined = true;
                break;
            }
            if (!episode_states.insert({g.index_of(pos), facing_id(facing)}).second) {
                return std::nullopt; // circumnavigated without rejoining
            }
            const Dir order[4] = {
                wall_on_left ? rotate_left(facing) : rotate_right(facing),
                facing,
                wall_on_left ? rotate_right(facing) : rotate_left(facing),
                reverse(facing),
            };
            bool moved = false;
            for (const Dir d : order) {
                const NodeId cand{pos.x + d.dx, pos.y + d.dy};
                if (!walkable(g, failures, cand)) continue;
                facing = d;
                step_to(cand);
                moved = true;
                break;
            }
            if (!moved) {
                return std::nullopt;
            }
        }
        (void)rejoined;
    }

    out.record.actual_len = out.route.length();
    return out;
}

} // namespace gridsim

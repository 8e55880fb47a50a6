#include "gridsim/engine.hpp"

#include <algorithm>
#include <deque>
#include <queue>

namespace gridsim {

void EngineConfig::validate() const {
    if (t_edge < 0) throw InvalidParameter("t_edge", "must be >= 0");
    if (t_merge < 0) throw InvalidParameter("t_merge", "must be >= 0");
    if (k_arch < 0) throw InvalidParameter("k_arch", "must be >= 0");
    if (!(t_cycle > 0.0)) throw InvalidParameter("t_cycle", "must be > 0");
    if (contention == Contention::capacity_one && t_edge < 1) {
        throw InvalidParameter("t_edge", "capacity-one mode needs t_edge >= 1");
    }
}

namespace detail {

FoldSchedule build_fold_schedule(const GridGraph& g, NodeId origin) {
    const DistanceField field = bfs_distances(g, origin);
    const int n = g.node_count();
    FoldSchedule sched;
    sched.parent.assign(std::size_t(n), -1);
    sched.depth.assign(std::size_t(n), -1);
    sched.children.assign(std::size_t(n), {});

    for (int v = 0; v < n; ++v) {
        sched.depth[std::size_t(v)] = field.at(v);
        sched.max_depth = std::max(sched.max_depth, field.at(v));
    }
    // Parent = first neighbor one step closer, in adjacency order; BFS
    // tie-breaks and this choice agree, so the tree is reproducible.
    for (int v = 0; v < n; ++v) {
        if (field.at(v) <= 0) continue;
        for (int u : g.neighbors(v)) {
            if (field.at(u) == field.at(v) - 1) {
                sched.parent[std::size_t(v)] = u;
                sched.children[std::size_t(u)].push_back(v);
                break;
            }
        }
    }
    for (auto& kids : sched.children) {
        std::sort(kids.begin(), kids.end());
    }
    sched.order.resize(std::size_t(n));
    for (int v = 0; v < n; ++v) sched.order[std::size_t(v)] = v;
    std::sort(sched.order.begin(), sched.order.end(), [&](int a, int b) {
        if (sched.depth[std::size_t(a)] != sched.depth[std::size_t(b)]) {
            return sched.depth[std::size_t(a)] > sched.depth[std::size_t(b)];
        }
        return a < b;
    });
    return sched;
}

} // namespace detail

namespace {

struct Payload {
    int atom_index = 0;
    std::vector<NodeId> path; // node sequence, path[0] = source
    std::size_t at = 0;       // index of current node when not crossing
    std::int64_t crossing_until = -1;

    bool done() const { return at + 1 >= path.size(); }
};

void trace_cycle(TraceSink* trace, std::int64_t cycle,
                 const std::vector<std::pair<int, Edge>>& moves) {
    if (!trace || moves.empty()) return;
    nlohmann::ordered_json line;
    line["cycle"] = cycle;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& [payload, edge] : moves) {
        arr.push_back({payload,
                       {edge.first.x, edge.first.y},
                       {edge.second.x, edge.second.y}});
    }
    line["moves"] = arr;
    (*trace) << line.dump() << '\n';
}

} // namespace

RunResult run_parallel_shortest(const DiscreteMeasure& m, const GridGraph& g,
                                const EngineConfig& cfg, TraceSink* trace) {
    cfg.validate();
    RunResult result;
    result.per_payload_hops.reserve(m.atoms.size());

    std::vector<Payload> payloads;
    payloads.reserve(m.atoms.size());
    int r_mu = 0;
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
        if (!g.contains(m.atoms[i].node)) {
            throw InvalidParameter("atoms", "atom outside grid");
        }
        Payload p;
        p.atom_index = (int)i;
        p.path = xy_route(g, m.atoms[i].node, m.sink).nodes();
        payloads.push_back(std::move(p));
        const int hops = (int)payloads.back().path.size() - 1;
        result.per_payload_hops.push_back(hops);
        r_mu = std::max(r_mu, hops);
    }

    std::int64_t completion = 0;
    if (cfg.contention == Contention::non_congesting) {
        // Every payload advances one hop per t_edge cycles, unconditionally.
        completion = std::int64_t(r_mu) * cfg.t_edge;
        if (trace) {
            for (int round = 1; round <= r_mu; ++round) {
                std::vector<std::pair<int, Edge>> moves;
                for (const Payload& p : payloads) {
                    const int hops = (int)p.path.size() - 1;
                    if (round <= hops) {
                        moves.push_back({p.atom_index,
                                         Edge{p.path[std::size_t(round - 1)],
                                              p.path[std::size_t(round)]}});
                    }
                }
                trace_cycle(trace, std::int64_t(round) * cfg.t_edge, moves);
            }
        }
    } else {
        // Per-edge FIFO, ties broken by source index. An edge admits one
        // payload per t_edge-cycle crossing window.
        std::unordered_map<std::uint64_t, std::int64_t> busy_until;
        std::unordered_map<std::uint64_t, std::deque<int>> waiting;
        std::vector<std::int64_t> enqueued_at(payloads.size(), 0);

        auto edge_key = [&](const Payload& p) {
            return EdgeLoadMap::key(p.path[p.at], p.path[p.at + 1]);
        };
        std::size_t remaining = 0;
        for (std::size_t i = 0; i < payloads.size(); ++i) {
            if (!payloads[i].done()) {
                waiting[edge_key(payloads[i])].push_back((int)i);
                ++remaining;
            }
        }
        std::int64_t cycle = 0;
        while (remaining > 0) {
            std::vector<std::pair<int, Edge>> moves;
            // Arrivals first, so a freed payload may queue for its next edge
            // this cycle.
            for (Payload& p : payloads) {
                if (p.crossing_until == cycle) {
                    p.crossing_until = -1;
                    p.at += 1;
                    if (p.done()) {
                        --remaining;
                        completion = std::max(completion, cycle);
                    } else {
                        waiting[edge_key(p)].push_back(p.atom_index);
                        enqueued_at[std::size_t(p.atom_index)] = cycle;
                    }
                }
            }
            // Grant each free edge to its FIFO head.
            std::vector<std::uint64_t> keys;
            keys.reserve(waiting.size());
            for (const auto& [k, q] : waiting) {
                if (!q.empty()) keys.push_back(k);
            }
            std::sort(keys.begin(), keys.end());
            for (const std::uint64_t k : keys) {
                auto& q = waiting[k];
                auto busy = busy_until.find(k);
                if (busy != busy_until.end() && busy->second > cycle) continue;
                // FIFO head: earliest enqueue cycle, then smallest source index.
                auto head = q.begin();
                for (auto it = q.begin(); it != q.end(); ++it) {
                    if (enqueued_at[std::size_t(*it)] < enqueued_at[std::size_t(*head)] ||
                        (enqueued_at[std::size_t(*it)] == enqueued_at[std::size_t(*head)] &&
                         *it < *head)) {
                        head = it;
                    }
                }
                const int idx = *head;
                q.erase(head);
                Payload& p = payloads[std::size_t(idx)];
                busy_until[k] = cycle + cfg.t_edge;
                p.crossing_until = cycle + cfg.t_edge;
                moves.push_back({idx, Edge{p.path[p.at], p.path[p.at + 1]}});
            }
            trace_cycle(trace, cycle, moves);
            ++cycle;
            if (cycle > std::int64_t(g.node_count()) * 8 * std::max(1, cfg.t_edge) *
                            std::max<std::int64_t>(1, (std::int64_t)payloads.size())) {
                throw std::logic_error("capacity-one schedule failed to drain");
            }
        }
    }

    result.completion_cycles = completion;
    result.wallclock_seconds = double(completion + cfg.k_arch) * cfg.t_cycle;
    double work = 0.0;
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
        work += m.atoms[i].mass * double(result.per_payload_hops[i]);
    }
    result.transport_work = work;
    return result;
}

std::string AttainmentReport::to_json() const {
    nlohmann::ordered_json j;
    j["w1"] = w1;
    j["transport_work"] = transport_work;
    j["work_equals_w1"] = work_equals_w1;
    j["r_mu"] = r_mu;
    j["completion_cycles"] = completion_cycles;
    j["depth_lower_cycles"] = depth_lower_cycles;
    j["depth_slack_cycles"] = depth_slack_cycles;
    return j.dump(2);
}

AttainmentReport measure_attainment(const DiscreteMeasure& m, const GridGraph& g,
                                    const EngineConfig& cfg) {
    const RunResult run = run_parallel_shortest(m, g, cfg);
    AttainmentReport report;
    // XY paths realize Manhattan lengths, so the comparison metric is the
    // same one the schedule walks.
    const Metric metric = manhattan_metric();
    report.w1 = w1_to_dirac(m, metric);
    report.r_mu = support_radius(m, metric);
    report.transport_work = run.transport_work;
    report.work_equals_w1 = (run.transport_work == report.w1);
    report.completion_cycles = run.completion_cycles;
    report.depth_lower_cycles = std::int64_t(report.r_mu) * cfg.t_edge;
    report.depth_slack_cycles = run.completion_cycles - report.depth_lower_cycles;
    return report;
}

} // namespace gridsim

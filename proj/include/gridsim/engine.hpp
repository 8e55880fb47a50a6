#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridsim/errors.hpp"
#include "gridsim/grid.hpp"
#include "gridsim/monoid.hpp"
#include "gridsim/routing.hpp"
#include "gridsim/transport.hpp"

namespace gridsim {

enum class Contention {
    non_congesting, // shortest paths share edges freely
    capacity_one,   // one payload per directed edge per crossing window
};

struct EngineConfig {
    Contention contention = Contention::non_congesting;
    int t_edge = 1;        // cycles per hop
    int t_merge = 1;       // cycles per merge
    double t_cycle = 1.0;  // seconds per cycle
    int k_arch = 0;        // fixed cycle overhead added to transport runs

    void validate() const;
};

struct MergeEvent {
    std::int64_t cycle = 0;
    NodeId node{};
    std::vector<int> payloads; // contributing node/payload ids
};

// Optional JSON-lines trace, one record per simulated cycle.
using TraceSink = std::ostream;

struct RunResult {
    std::int64_t completion_cycles = 0; // D
    double wallclock_seconds = 0.0;
    std::vector<int> per_payload_hops;  // by atom index
    double transport_work = 0.0;        // sum a_i * hops_i
    std::vector<MergeEvent> merge_log;
};

// Every atom dispatches simultaneously along its own XY shortest path.
// Non-congesting mode completes in exactly r_mu hop-rounds; capacity-one mode
// queues per directed edge, FIFO with stable source-index tie-break.
RunResult run_parallel_shortest(const DiscreteMeasure& m, const GridGraph& g,
                                const EngineConfig& cfg, TraceSink* trace = nullptr);

struct TreefoldResult {
    int depth = 0; // wavefront rounds = eccentricity of the origin
    std::int64_t completion_cycles = 0;
    double wallclock_seconds = 0.0;
    std::int64_t used_edges = 0; // distinct edges that carried active data
    std::vector<MergeEvent> merge_log;
};

template <typename T>
struct TreefoldOutcome {
    TreefoldResult result;
    T folded{};
};

namespace detail {

struct FoldSchedule {
    std::vector<int> parent;   // -1 at origin / unreachable
    std::vector<int> depth;    // -1 unreachable
    std::vector<std::vector<int>> children;
    std::vector<int> order; // nodes sorted deepest-first
    int max_depth = 0;
};

FoldSchedule build_fold_schedule(const GridGraph& g, NodeId origin);

} // namespace detail

// Reduce all node values toward the origin along a breadth-first wavefront.
// Wavefront depth equals the origin's eccentricity. Aborts with a witness if
// a merge violates the operator's laws on live data. `active`, when given,
// marks which nodes carry non-identity payloads for used-edge accounting.
template <typename T>
TreefoldOutcome<T> run_treefold(const GridGraph& g, NodeId origin, const MonoidSpec<T>& monoid,
                                const std::vector<T>& values, const EngineConfig& cfg,
                                const std::vector<int>* t_local_cycles = nullptr,
                                const std::vector<char>* active = nullptr,
                                TraceSink* trace = nullptr) {
    cfg.validate();
    if ((int)values.size() != g.node_count()) {
        throw InvalidParameter("values", "need one value per node");
    }
    if (!g.contains(origin)) {
        throw InvalidParameter("origin", "outside grid");
    }
    const detail::FoldSchedule sched = detail::build_fold_schedule(g, origin);

    int max_local = 0;
    if (t_local_cycles) {
        if ((int)t_local_cycles->size() != g.node_count()) {
            throw InvalidParameter("t_local", "need one entry per node");
        }
        for (int c : *t_local_cycles) {
            if (c < 0) throw InvalidParameter("t_local", "cycle counts must be >= 0");
            max_local = std::max(max_local, c);
        }
    }

    std::vector<T> agg = values;
    std::vector<char> subtree_active(values.size(), 1);
    if (active) {
        if (active->size() != values.size()) {
            throw InvalidParameter("active", "mask size mismatch");
        }
        subtree_active.assign(active->begin(), active->end());
    }

    TreefoldOutcome<T> out;
    out.result.depth = sched.max_depth;

    // Deepest wavefront first; each level costs one hop plus one merge.
    for (const int node : sched.order) {
        const auto& kids = sched.children[std::size_t(node)];
        if (kids.empty()) continue;
        const std::int64_t round = sched.max_depth - sched.depth[std::size_t(node)];
        const std::int64_t cycle =
            max_local + round * (std::int64_t(cfg.t_edge) + cfg.t_merge);

        // Left fold in child order, re-checked against the reversed order;
        // a mismatch is a live law violation.
        T forward = agg[std::size_t(node)];
        for (const int c : kids) {
            forward = monoid.op(forward, agg[std::size_t(c)]);
        }
        T backward = monoid.identity;
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
            backward = monoid.op(backward, agg[std::size_t(*it)]);
        }
        backward = monoid.op(backward, agg[std::size_t(node)]);
        if (!(forward == backward)) {
            std::string detail = "merge at " + to_string(g.node_at(node)) + " for op '" +
                                 monoid.name + "': child-order fold != reversed fold";
            if (monoid.format) {
                detail += " (" + monoid.format(forward) + " vs " + monoid.format(backward) + ")";
            }
            throw MonoidLawViolation(detail);
        }
        agg[std::size_t(node)] = forward;

        MergeEvent ev;
        ev.cycle = cycle;
        ev.node = g.node_at(node);
        ev.payloads = kids;
        out.result.merge_log.push_back(ev);

        for (const int c : kids) {
            if (subtree_active[std::size_t(c)]) {
                subtree_active[std::size_t(node)] = 1;
                ++out.result.used_edges;
            }
        }
        if (trace) {
            nlohmann::ordered_json line;
            line["cycle"] = cycle;
            line["node"] = {ev.node.x, ev.node.y};
            line["merged_from"] = kids;
            (*trace) << line.dump() << '\n';
        }
    }

    out.result.completion_cycles =
        max_local + std::int64_t(sched.max_depth) * (std::int64_t(cfg.t_edge) + cfg.t_merge);
    out.result.wallclock_seconds = double(out.result.completion_cycles) * cfg.t_cycle;
    out.folded = agg[std::size_t(g.index_of(origin))];
    return out;
}

struct AttainmentReport {
    double w1 = 0.0;
    double transport_work = 0.0;
    bool work_equals_w1 = false; // exact, not approximate
    int r_mu = 0;
    std::int64_t completion_cycles = 0;
    std::int64_t depth_lower_cycles = 0; // r_mu * t_edge
    std::int64_t depth_slack_cycles = 0; // D - r_mu * t_edge

    std::string to_json() const;
};

// Runs the parallel shortest-path schedule and compares it against the
// transport-work and completion-depth bounds.
AttainmentReport measure_attainment(const DiscreteMeasure& m, const GridGraph& g,
                                    const EngineConfig& cfg);

} // namespace gridsim

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "gridsim/engine.hpp"
#include "gridsim/errors.hpp"
#include "gridsim/rng.hpp"
#include "oracles.hpp"

using namespace gridsim;

namespace {

DiscreteMeasure random_measure(const GridGraph& g, int max_atoms, CounterRng& rng) {
    const int cap = std::min(max_atoms, g.node_count());
    const int n_atoms = 1 + (int)rng.next_below((std::uint64_t)cap);
    std::vector<NodeId> support;
    std::vector<char> used(std::size_t(g.node_count()), 0);
    while ((int)support.size() < n_atoms) {
        const int idx = (int)rng.next_below((std::uint64_t)g.node_count());
        if (used[std::size_t(idx)]) continue;
        used[std::size_t(idx)] = 1;
        support.push_back(g.node_at(idx));
    }
    return DiscreteMeasure::uniform(support, {0, 0});
}

} // namespace

TEST_CASE("engine config validation") {
    EngineConfig cfg;
    cfg.t_cycle = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
    cfg = EngineConfig{};
    cfg.t_edge = -1;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
    cfg = EngineConfig{};
    cfg.contention = Contention::capacity_one;
    cfg.t_edge = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
}

TEST_CASE("non-congesting completion depth") {
    const GridGraph g = build_grid(4);
    const DiscreteMeasure three = DiscreteMeasure::uniform({{3, 3}, {2, 3}, {3, 1}}, {0, 0});

    EngineConfig cfg;
    cfg.t_edge = 1;
    const RunResult run = run_parallel_shortest(three, g, cfg);
    CHECK(run.completion_cycles == 6);
    CHECK(run.transport_work == doctest::Approx(5.0));

    cfg.t_edge = 3;
    const RunResult scaled = run_parallel_shortest(three, g, cfg);
    CHECK(scaled.completion_cycles == 18);

    cfg.t_edge = 1;
    cfg.k_arch = 4;
    cfg.t_cycle = 2.0;
    const RunResult overhead = run_parallel_shortest(three, g, cfg);
    CHECK(overhead.wallclock_seconds == doctest::Approx((6 + 4) * 2.0));
}

TEST_CASE("single atom adjacent to sink") {
    const GridGraph g = build_grid(4);
    const DiscreteMeasure one = DiscreteMeasure::uniform({{1, 0}}, {0, 0});
    EngineConfig cfg;
    const RunResult run = run_parallel_shortest(one, g, cfg);
    CHECK(run.completion_cycles == 1);
    CHECK(run.per_payload_hops == std::vector<int>{1});
}

TEST_CASE("measure at the sink does not move") {
    const GridGraph g = build_grid(4);
    const DiscreteMeasure still = DiscreteMeasure::uniform({{0, 0}}, {0, 0});
    for (const Contention mode : {Contention::non_congesting, Contention::capacity_one}) {
        EngineConfig cfg;
        cfg.contention = mode;
        const RunResult run = run_parallel_shortest(still, g, cfg);
        CHECK(run.completion_cycles == 0);
        CHECK(run.transport_work == 0.0);
    }
}

TEST_CASE("capacity-one all-to-one exceeds the depth bound") {
    const GridGraph g = build_grid(4);
    std::vector<NodeId> everyone;
    for (int i = 0; i < g.node_count(); ++i) {
        if (g.node_at(i) == NodeId{0, 0}) continue;
        everyone.push_back(g.node_at(i));
    }
    const DiscreteMeasure m = DiscreteMeasure::uniform(everyone, {0, 0});

    EngineConfig free_cfg;
    const RunResult free_run = run_parallel_shortest(m, g, free_cfg);
    CHECK(free_run.completion_cycles == 6); // r_mu

    EngineConfig cap_cfg;
    cap_cfg.contention = Contention::capacity_one;
    const RunResult cap_run = run_parallel_shortest(m, g, cap_cfg);
    CHECK(cap_run.completion_cycles > free_run.completion_cycles);
    // Paths unchanged: per-payload hops and work identical.
    CHECK(cap_run.per_payload_hops == free_run.per_payload_hops);
    CHECK(cap_run.transport_work == free_run.transport_work);
    // Trunk arbitration cannot finish before the last-edge serialization:
    // e_1 carries 12 payloads plus the sink-row feeder carries 3.
    CHECK(cap_run.completion_cycles >= 12);
}

TEST_CASE("non-congesting attainment on random measures") {
    CounterRng rng(404);
    for (int trial = 0; trial < 60; ++trial) {
        const int side = 2 + (int)rng.next_below(15); // L <= 16
        const GridGraph g = build_grid(side);
        const DiscreteMeasure m = random_measure(g, 8, rng);
        EngineConfig cfg;
        cfg.t_edge = 1 + (int)rng.next_below(3);
        const AttainmentReport report = measure_attainment(m, g, cfg);
        REQUIRE(report.work_equals_w1);
        REQUIRE(report.depth_slack_cycles == 0);
        REQUIRE(report.completion_cycles == std::int64_t(report.r_mu) * cfg.t_edge);
    }
}

TEST_CASE("capacity-one keeps work but adds depth slack on all-to-one") {
    const GridGraph g = build_grid(5);
    std::vector<NodeId> everyone;
    for (int i = 1; i < g.node_count(); ++i) everyone.push_back(g.node_at(i));
    const DiscreteMeasure m = DiscreteMeasure::uniform(everyone, {0, 0});
    EngineConfig cfg;
    cfg.contention = Contention::capacity_one;
    const AttainmentReport report = measure_attainment(m, g, cfg);
    CHECK(report.work_equals_w1);
    CHECK(report.depth_slack_cycles > 0);
}

TEST_CASE("trace stream emits one record per active cycle") {
    const GridGraph g = build_grid(3);
    const DiscreteMeasure m = DiscreteMeasure::uniform({{2, 2}, {1, 0}}, {0, 0});
    EngineConfig cfg;
    std::ostringstream trace;
    run_parallel_shortest(m, g, cfg, &trace);
    std::istringstream lines(trace.str());
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.contains("cycle"));
        CHECK(j.contains("moves"));
        ++count;
    }
    CHECK(count == 4); // r_mu rounds
}

TEST_CASE("capacity-one trace shows each directed edge at most once per cycle") {
    const GridGraph g = build_grid(4);
    std::vector<NodeId> everyone;
    for (int i = 1; i < g.node_count(); ++i) everyone.push_back(g.node_at(i));
    const DiscreteMeasure m = DiscreteMeasure::uniform(everyone, {0, 0});
    EngineConfig cfg;
    cfg.contention = Contention::capacity_one;
    std::ostringstream trace;
    run_parallel_shortest(m, g, cfg, &trace);
    std::istringstream lines(trace.str());
    std::string line;
    int cycles_seen = 0;
    while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        std::set<std::string> edges_this_cycle;
        for (const auto& move : j["moves"]) {
            const std::string key = move[1].dump() + "->" + move[2].dump();
            REQUIRE(edges_this_cycle.insert(key).second);
        }
        ++cycles_seen;
    }
    CHECK(cycles_seen > 6);
}

TEST_CASE("treefold trace emits merge records") {
    const GridGraph g = build_grid(3);
    const MonoidSpec<std::int64_t> add = i64_add_monoid();
    std::vector<std::int64_t> values(9, 1);
    std::ostringstream trace;
    run_treefold(g, {1, 1}, add, values, EngineConfig{}, nullptr, nullptr, &trace);
    std::istringstream lines(trace.str());
    std::string line;
    int merges = 0;
    while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.contains("cycle"));
        CHECK(j.contains("merged_from"));
        ++merges;
    }
    CHECK(merges > 0);
}

TEST_CASE("treefold folds the integer sum on the 3x3 grid") {
    const GridGraph g = build_grid(3);
    const MonoidSpec<std::int64_t> add = i64_add_monoid();
    std::vector<std::int64_t> values(9);
    for (int i = 0; i < 9; ++i) values[std::size_t(i)] = i + 1;
    EngineConfig cfg;
    const auto out = run_treefold(g, {1, 1}, add, values, cfg);
    CHECK(out.folded == 45);
    CHECK(out.result.depth == 2); // eccentricity of the center
    CHECK(out.result.completion_cycles == 2 * (cfg.t_edge + cfg.t_merge));
}

TEST_CASE("treefold on a single node") {
    const GridGraph g = build_grid(1);
    const MonoidSpec<std::int64_t> add = i64_add_monoid();
    const auto out = run_treefold(g, {0, 0}, add, {7}, EngineConfig{});
    CHECK(out.folded == 7);
    CHECK(out.result.depth == 0);
    CHECK(out.result.completion_cycles == 0);
}

TEST_CASE("treefold max over equal values") {
    const GridGraph g = build_grid(4);
    const MonoidSpec<std::int64_t> mx = i64_max_monoid();
    std::vector<std::int64_t> values(std::size_t(g.node_count()), 5);
    for (NodeId origin : {NodeId{0, 0}, NodeId{2, 1}, NodeId{3, 3}}) {
        const auto out = run_treefold(g, origin, mx, values, EngineConfig{});
        CHECK(out.folded == 5);
        CHECK(out.result.depth == eccentricity(g, origin));
    }
}

TEST_CASE("treefold wall clock respects the diameter bound") {
    CounterRng rng(606);
    const MonoidSpec<std::int64_t> add = i64_add_monoid();
    for (int trial = 0; trial < 20; ++trial) {
        const int side = 2 + (int)rng.next_below(7);
        GridGraph g = build_grid(side);
        if (trial % 2 == 0) g = augment_smallworld(g, 1, rng.next_u64());
        const NodeId origin = g.node_at((int)rng.next_below((std::uint64_t)g.node_count()));
        std::vector<std::int64_t> values(std::size_t(g.node_count()));
        for (auto& v : values) v = (std::int64_t)rng.next_below(100);
        EngineConfig cfg;
        cfg.t_edge = 1 + (int)rng.next_below(3);
        cfg.t_merge = (int)rng.next_below(3);
        cfg.t_cycle = 0.5;
        std::vector<int> local(std::size_t(g.node_count()), 0);
        for (auto& v : local) v = (int)rng.next_below(4);
        int max_local = 0;
        for (int v : local) max_local = std::max(max_local, v);

        const auto out = run_treefold(g, origin, add, values, cfg, &local);
        std::int64_t plain_sum = 0;
        for (auto v : values) plain_sum += v;
        REQUIRE(out.folded == plain_sum);
        const double bound =
            (double(diameter(g)) * (cfg.t_edge + cfg.t_merge) + max_local) * cfg.t_cycle;
        REQUIRE(out.result.wallclock_seconds <= bound + 1e-12);
    }
}

TEST_CASE("treefold merge log is deterministic") {
    const GridGraph g = build_grid(5);
    const MonoidSpec<std::int64_t> add = i64_add_monoid();
    std::vector<std::int64_t> values(std::size_t(g.node_count()));
    for (int i = 0; i < g.node_count(); ++i) values[std::size_t(i)] = i;
    EngineConfig cfg;
    const auto a = run_treefold(g, {2, 2}, add, values, cfg);
    const auto b = run_treefold(g, {2, 2}, add, values, cfg);
    REQUIRE(a.result.merge_log.size() == b.result.merge_log.size());
    for (std::size_t i = 0; i < a.result.merge_log.size(); ++i) {
        CHECK(a.result.merge_log[i].cycle == b.result.merge_log[i].cycle);
        CHECK(a.result.merge_log[i].node == b.result.merge_log[i].node);
        CHECK(a.result.merge_log[i].payloads == b.result.merge_log[i].payloads);
    }
    // Log is ordered by cycle.
    for (std::size_t i = 1; i < a.result.merge_log.size(); ++i) {
        CHECK(a.result.merge_log[i - 1].cycle <= a.result.merge_log[i].cycle);
    }
}

TEST_CASE("treefold aborts on a law-violating operator") {
    const GridGraph g = build_grid(3);
    const MonoidSpec<std::int64_t> sub = i64_sub_op();
    std::vector<std::int64_t> values(9);
    for (int i = 0; i < 9; ++i) values[std::size_t(i)] = i + 1;
    CHECK_THROWS_AS(run_treefold(g, {1, 1}, sub, values, EngineConfig{}), MonoidLawViolation);
}

TEST_CASE("treefold used edges cover the active support and respect Steiner") {
    const GridGraph g = build_grid(4);
    const MonoidSpec<std::int64_t> add = i64_add_monoid();
    const std::vector<NodeId> support{{3, 3}, {2, 3}, {3, 1}};
    const NodeId origin{0, 0};

    std::vector<std::int64_t> values(std::size_t(g.node_count()), 0);
    std::vector<char> active(std::size_t(g.node_count()), 0);
    for (NodeId v : support) {
        values[std::size_t(g.index_of(v))] = 1;
        active[std::size_t(g.index_of(v))] = 1;
    }
    const auto out = run_treefold(g, origin, add, values, EngineConfig{}, nullptr, &active);
    CHECK(out.folded == 3);

    std::vector<NodeId> terminals = support;
    terminals.push_back(origin);
    const SteinerResult st = steiner_cost(g, terminals);
    CHECK(out.result.used_edges >= st.exact_edges);
    // All active data reaches the origin through counted edges: at least the
    // farthest terminal's path length.
    CHECK(out.result.used_edges >= 6);
}

TEST_CASE("treefold validates inputs") {
    const GridGraph g = build_grid(3);
    const MonoidSpec<std::int64_t> add = i64_add_monoid();
    CHECK_THROWS_AS(run_treefold(g, {1, 1}, add, {1, 2}, EngineConfig{}), InvalidParameter);
    std::vector<std::int64_t> values(9, 0);
    CHECK_THROWS_AS(run_treefold(g, {5, 5}, add, values, EngineConfig{}), InvalidParameter);
}

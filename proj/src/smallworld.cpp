#include "gridsim/smallworld.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "gridsim/errors.hpp"
#include "gridsim/rng.hpp"

namespace gridsim {

SmallWorldTable smallworld_experiment(const std::vector<int>& side_list, int k,
                                      std::int64_t pairs, std::uint64_t seed) {
    if (pairs < 1) throw InvalidParameter("pairs", "must be >= 1");
    if (k < 0) throw InvalidParameter("k", "must be >= 0");

    SmallWorldTable table;
    table.k = k;
    for (std::size_t i = 0; i < side_list.size(); ++i) {
        const int side = side_list[i];
        GridGraph g = build_grid(side);
        if (k >= 1) {
            g = augment_smallworld(g, k, derive_seed(seed, (std::uint64_t)i));
        }
        const int total = g.node_count();
        if (total < 2) throw InvalidParameter("L", "pair sampling needs >= 2 nodes");

        // Draw the pair list first, then BFS once per distinct source.
        CounterRng rng(derive_seed(seed, (std::uint64_t)i), 7);
        std::map<int, std::vector<int>> dests_by_source;
        for (std::int64_t s = 0; s < pairs; ++s) {
            const int u = (int)rng.next_below((std::uint64_t)total);
            int v = (int)rng.next_below((std::uint64_t)(total - 1));
            if (v >= u) ++v;
            dests_by_source[u].push_back(v);
        }
        std::int64_t dist_sum = 0;
        for (const auto& [src, dests] : dests_by_source) {
            const DistanceField field = bfs_distances(g, g.node_at(src));
            for (const int dst : dests) {
                dist_sum += field.at(dst);
            }
        }

        SmallWorldRow row;
        row.side = side;
        row.p = std::int64_t(total);
        row.pairs = pairs;
        row.mean_dist = double(dist_sum) / double(pairs);
        row.mean_over_log2p = row.mean_dist / std::log2(double(total));
        row.mean_over_sqrtp = row.mean_dist / std::sqrt(double(total));
        table.rows.push_back(row);
    }
    return table;
}

std::string SmallWorldTable::to_csv() const {
    std::ostringstream out;
    out << "L,P,pairs,mean_dist,mean_over_log2P,mean_over_sqrtP\n";
    out.precision(10);
    for (const SmallWorldRow& r : rows) {
        out << r.side << ',' << r.p << ',' << r.pairs << ',' << r.mean_dist << ','
            << r.mean_over_log2p << ',' << r.mean_over_sqrtp << '\n';
    }
    return out.str();
}

} // namespace gridsim

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridsim/grid.hpp"

namespace gridsim {

// Mean-field percolation exponents for sparsely shortcut graphs; recorded as
// named constants, used only for labeling scaling fits.
struct MeanFieldExponents {
    static constexpr double nu = 0.5;
    static constexpr double gamma = 1.0;
    static constexpr double beta = 1.0;
    static constexpr double tau = 2.5;
    static constexpr double sigma = 0.5;
};

struct SmallWorldRow {
    int side = 0;
    std::int64_t p = 0;
    std::int64_t pairs = 0;
    double mean_dist = 0.0;
    double mean_over_log2p = 0.0;
    double mean_over_sqrtp = 0.0;
};

struct SmallWorldTable {
    int k = 0;
    std::vector<SmallWorldRow> rows;

    std::string to_csv() const;
};

// Mean shortest-path distance over sampled uniform node pairs, per grid side.
// k = 0 runs the bare-grid control; k >= 1 augments with k shortcuts per
// node. Distances come from BFS; sums are integers, so results are identical
// for any worker split.
SmallWorldTable smallworld_experiment(const std::vector<int>& side_list, int k,
                                      std::int64_t pairs, std::uint64_t seed);

} // namespace gridsim

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gridsim/grid.hpp"

namespace gridsim {

// Weighted source atoms plus a Dirac sink. Masses must arrive within 1e-12 of
// a unit total; they are then normalized exactly. Off-total inputs are
// rejected, not silently rescaled.
struct DiscreteMeasure {
    struct Atom {
        NodeId node;
        double mass = 0.0;
    };

    std::vector<Atom> atoms;
    NodeId sink{};

    static constexpr double kMassTolerance = 1e-12;

    static DiscreteMeasure create(std::vector<Atom> atoms, NodeId sink);
    // Equal masses 1/|support|.
    static DiscreteMeasure uniform(const std::vector<NodeId>& support, NodeId sink);

    std::vector<NodeId> support() const;
    std::uint64_t digest() const; // FNV-1a over atom coordinates and mass bits
};

// Point-to-point hop distance; bare-grid Manhattan or BFS on augmented graphs.
using Metric = std::function<int(NodeId, NodeId)>;

Metric manhattan_metric();
Metric bfs_metric(const GridGraph& g);

// Sum_i a_i * d(x_i, sink). The coupling to a Dirac target is forced, so this
// is the exact 1-Wasserstein transport cost.
double w1_to_dirac(const DiscreteMeasure& m, const Metric& metric);

// max_i d(x_i, sink) over the support.
int support_radius(const DiscreteMeasure& m, const Metric& metric);

struct SteinerResult {
    int exact_edges = 0;        // valid when exact_available
    int mst_upper_bound = 0;    // metric-closure MST, always computed
    int max_pairwise_lower = 0; // max terminal-pair distance
    bool exact_available = false;
};

constexpr int kSteinerTerminalBudget = 12;

// Minimum edge count of a connected subgraph of g spanning `terminals`.
// Exact via the Dreyfus-Wagner subset dynamic program up to the terminal
// budget; beyond it, throws BudgetError unless heuristic-only mode is
// requested, in which case only the MST bound is returned and labeled.
SteinerResult steiner_cost(const GridGraph& g, const std::vector<NodeId>& terminals,
                           bool allow_heuristic_only = false);

struct BoundsReport {
    double w1 = 0.0;
    int r_mu = 0;
    int steiner = 0;
    double wallclock_lower_seconds = 0.0;
    bool steiner_exact = true;
    // input digest
    int side = 0;
    std::uint64_t atoms_digest = 0;
    std::uint64_t seed = 0;

    std::string to_json() const;
};

// All three lower bounds plus the wall-clock floor r_mu * t_edge * t_cycle.
// Distances use BFS when the graph carries shortcuts, Manhattan otherwise.
BoundsReport bounds_report(const DiscreteMeasure& m, const GridGraph& g,
                           int t_edge, double t_cycle);

} // namespace gridsim

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gridsim/routing.hpp"

namespace gridsim {

// Numerical estimate of the square-lattice site threshold; used only to warn
// when an experiment is configured outside the subcritical regime.
constexpr double kSiteThresholdEstimate = 0.593;

// I.i.d. site failures over an L x L grid, row-major mask.
struct FailureField {
    int side = 0;
    double delta = 0.0;
    std::vector<char> failed;
    std::uint64_t seed = 0;

    static FailureField sample(int side, double delta, std::uint64_t seed);

    FailureView view() const { return FailureView{side, &failed}; }
    std::int64_t failed_count() const;
};

struct Cluster {
    std::vector<int> members; // node indices
    int size = 0;
    int perimeter = 0; // lattice edges from cluster sites to healthy on-grid sites
};

struct ClusterDecomposition {
    std::vector<Cluster> clusters;
    std::vector<int> label; // node -> cluster index, -1 for healthy
};

// Maximal 4-connected components of the failed set, with exact sizes and
// perimeters. Perimeter counts lattice edges from cluster sites to healthy
// on-grid sites; off-grid sides do not contribute.
ClusterDecomposition decompose_clusters(const FailureField& field);

struct TailFit {
    double c_hat = 0.0;   // decay rate of log Pr[|C| >= s] per unit size
    double std_error = 0.0;
    double ci_low = 0.0;  // c_hat -/+ 1.96 std_error
    double ci_high = 0.0;
    std::int64_t clusters_total = 0;
    int fit_points = 0;
};

// Least-squares fit of log Pr[|C| >= s] against s, over sizes >= 2 with at
// least 30 surviving clusters per point. Histogram is indexed by size.
TailFit tail_fit(const std::vector<std::int64_t>& size_histogram);

struct DetourBucket {
    int k = 0; // K_Gamma value
    std::int64_t count = 0;
    double mean_detour = 0.0;
    double std_error = 0.0;
};

struct DetourExperimentResult {
    int side = 0;
    double delta = 0.0;
    std::int64_t trials_requested = 0;
    std::int64_t trials_routed = 0;
    std::int64_t trials_unreachable = 0;
    double exclusion_rate = 0.0;

    std::vector<DetourBucket> buckets;  // ascending k, k >= 1
    double c_delta_hat = 0.0;           // through-origin slope of detour vs k
    double c_delta_stderr = 0.0;

    TailFit ambient_tail;
    double ambient_mean_size = 0.0;
    double route_mean_size = 0.0; // size-biased: clusters hit by nominal routes
    double size_bias_zscore = 0.0;

    // Realized detour-to-perimeter ratio on single-cluster routes; an
    // empirical stand-in for the unpinned proportionality constant.
    std::int64_t single_cluster_routes = 0;
    double detour_per_perimeter_mean = 0.0;
    double detour_per_perimeter_max = 0.0;

    std::string buckets_csv() const;
    std::string summary_json() const;
};

// Samples a fresh failure field and a healthy source/dest pair per trial,
// routes with deflection, and aggregates detour-vs-K buckets, the ambient
// cluster-size tail, and the size-biased cluster comparison. Worker count
// never changes the output.
DetourExperimentResult detour_experiment(int side, double delta, std::int64_t trials,
                                         std::uint64_t seed, int workers = 1);

} // namespace gridsim

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gridsim {

// Bernoulli activation indicators over an n x n source grid, row-major.
struct ActivationField {
    int n = 0;
    double f_act = 0.0;
    std::vector<char> mask; // X_{a,b} at index b*n + a
    std::uint64_t seed = 0;

    static ActivationField sample(int n, double f_act, std::uint64_t seed);
};

// Y = sum_a sum_{b>=1} b * X_{a,b}: total trunk load seen by the top-column
// route. Row b = 0 carries weight zero and is excluded.
std::int64_t y_functional(const ActivationField& field);

// Same quantity accumulated edge-wise over the sink-column loads
// Lambda_{e_j} = sum_a sum_{b>=j} X_{a,b}; equals y_functional exactly by
// interchanging the summation order.
std::int64_t y_functional_edgewise(const ActivationField& field);

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

// Closed forms: mean = f * n^2 (n-1) / 2,
// var = f(1-f) * n * (n-1) n (2n-1) / 6.
Moments exact_moments(int n, double f_act);

// Exact probability-weighted enumeration over all 2^{n(n-1)} weight-carrying
// indicator masks. Budget: n(n-1) <= 20.
Moments enumerate_oracle(int n, double f_act);

struct ScalingRow {
    int n = 0;
    std::int64_t p = 0; // n^2
    double f_act = 0.0;
    std::int64_t trials = 0;
    double mean_hat = 0.0;
    double mean_exact = 0.0;
    double var_hat = 0.0;
    double var_exact = 0.0;
    double var_over_p2 = 0.0;   // var_hat / P^2, approximately constant
    double var_over_p32 = 0.0;  // var_hat / P^{3/2}, strictly increasing in P
};

struct ScalingTable {
    std::vector<ScalingRow> rows;
    double loglog_slope = 0.0; // fit of log var_hat vs log P

    std::string to_csv() const;
};

// Monte Carlo over explicit activation masks with per-trial derived seeds;
// the worker count cannot change any emitted number.
ScalingTable scaling_experiment(const std::vector<int>& n_list, double f_act,
                                std::int64_t trials, std::uint64_t seed, int workers = 1);

// Standard error of the sample variance of Y over `trials` draws, from the
// exact fourth central moment (Y is a sum of independent scaled Bernoullis).
double var_estimator_stddev(int n, double f_act, std::int64_t trials);

} // namespace gridsim

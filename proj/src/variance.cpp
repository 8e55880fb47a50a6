#include "gridsim/variance.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "gridsim/errors.hpp"
#include "gridsim/rng.hpp"

namespace gridsim {

ActivationField ActivationField::sample(int n, double f_act, std::uint64_t seed) {
    if (n < 2) throw InvalidParameter("n", "grid side must be >= 2");
    if (!(f_act > 0.0 && f_act < 1.0)) {
        throw InvalidParameter("f_act", "activation fraction must lie in (0,1)");
    }
    ActivationField field;
    field.n = n;
    field.f_act = f_act;
    field.seed = seed;
    field.mask.assign(std::size_t(n) * std::size_t(n), 0);
    CounterRng rng(seed);
    for (auto& cell : field.mask) {
        cell = rng.bernoulli(f_act) ? 1 : 0;
    }
    return field;
}

std::int64_t y_functional(const ActivationField& field) {
    const int n = field.n;
    std::int64_t y = 0;
    for (int b = 1; b < n; ++b) {
        for (int a = 0; a < n; ++a) {
            if (field.mask[std::size_t(b) * n + a]) y += b;
        }
    }
    return y;
}

std::int64_t y_functional_edgewise(const ActivationField& field) {
    const int n = field.n;
    std::int64_t y = 0;
    for (int j = 1; j < n; ++j) {
        // Lambda_{e_j}: sources at rows b >= j.
        std::int64_t lambda = 0;
        for (int b = j; b < n; ++b) {
            for (int a = 0; a < n; ++a) {
                if (field.mask[std::size_t(b) * n + a]) ++lambda;
            }
        }
        y += lambda;
    }
    return y;
}

Moments exact_moments(int n, double f_act) {
    if (n < 2) throw InvalidParameter("n", "grid side must be >= 2");
    if (!(f_act > 0.0 && f_act < 1.0)) {
        throw InvalidParameter("f_act", "activation fraction must lie in (0,1)");
    }
    const double nn = double(n);
    Moments m;
    m.mean = f_act * nn * nn * (nn - 1.0) / 2.0;
    m.var = f_act * (1.0 - f_act) * nn * ((nn - 1.0) * nn * (2.0 * nn - 1.0)) / 6.0;
    return m;
}

Moments enumerate_oracle(int n, double f_act) {
    if (n < 2) throw InvalidParameter("n", "grid side must be >= 2");
    if (!(f_act > 0.0 && f_act < 1.0)) {
        throw InvalidParameter("f_act", "activation fraction must lie in (0,1)");
    }
    const int indicators = n * (n - 1); // rows 1..n-1, all columns
    if (indicators > 20) {
        throw BudgetError("enumeration over " + std::to_string(indicators) +
                          " indicators exceeds the 2^20 budget");
    }
    // Weight of indicator i: row index b = 1 + i / n.
    std::vector<int> weight(static_cast<std::size_t>(indicators));
    for (int i = 0; i < indicators; ++i) {
        weight[std::size_t(i)] = 1 + i / n;
    }
    // Power tables built by repeated multiplication in extended precision;
    // the sum over 2^20 masks must stay well inside the 1e-12 agreement band.
    std::vector<long double> pow_f(std::size_t(indicators) + 1, 1.0L);
    std::vector<long double> pow_g(std::size_t(indicators) + 1, 1.0L);
    for (int i = 1; i <= indicators; ++i) {
        pow_f[std::size_t(i)] = pow_f[std::size_t(i - 1)] * (long double)f_act;
        pow_g[std::size_t(i)] = pow_g[std::size_t(i - 1)] * (long double)(1.0 - f_act);
    }
    const std::uint64_t total = 1ull << indicators;
    long double ey = 0.0L;
    long double ey2 = 0.0L;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        std::int64_t y = 0;
        for (int i = 0; i < indicators; ++i) {
            if (mask & (1ull << i)) y += weight[std::size_t(i)];
        }
        const int ones = __builtin_popcountll(mask);
        const long double prob =
            pow_f[std::size_t(ones)] * pow_g[std::size_t(indicators - ones)];
        ey += prob * (long double)y;
        ey2 += prob * (long double)y * (long double)y;
    }
    Moments m;
    m.mean = double(ey);
    m.var = double(ey2 - ey * ey);
    return m;
}

double var_estimator_stddev(int n, double f_act, std::int64_t trials) {
    // Fourth cumulant is additive over the independent terms b*X_{a,b}.
    const double q = f_act * (1.0 - f_act);
    double kappa4 = 0.0;
    double sigma2 = 0.0;
    for (int b = 1; b < n; ++b) {
        const double w2 = double(b) * double(b);
        sigma2 += double(n) * w2 * q;
        kappa4 += double(n) * w2 * w2 * q * (1.0 - 6.0 * q);
    }
    const double mu4 = kappa4 + 3.0 * sigma2 * sigma2;
    const double t = double(trials);
    const double var_of_s2 = mu4 / t - sigma2 * sigma2 * (t - 3.0) / (t * (t - 1.0));
    return std::sqrt(std::max(0.0, var_of_s2));
}

namespace {

struct TrialSums {
    std::int64_t sum = 0;
    // Y < n^3 <= 2^18 at n=64, so squares fit comfortably in 64 bits even
    // summed over 10^5 trials; use 128-bit anyway.
    unsigned __int128 sum_sq = 0;
};

TrialSums run_block(int n, double f_act, std::uint64_t seed, std::int64_t first,
                    std::int64_t last) {
    TrialSums sums;
    for (std::int64_t t = first; t < last; ++t) {
        const ActivationField field = ActivationField::sample(n, f_act, derive_seed(seed, (std::uint64_t)t));
        const std::int64_t y = y_functional(field);
        sums.sum += y;
        sums.sum_sq += (unsigned __int128)(y) * (unsigned __int128)(y);
    }
    return sums;
}

} // namespace

ScalingTable scaling_experiment(const std::vector<int>& n_list, double f_act,
                                std::int64_t trials, std::uint64_t seed, int workers) {
    if (trials < 2) throw InvalidParameter("trials", "need at least 2 trials");
    if (workers < 1) throw InvalidParameter("workers", "must be >= 1");

    ScalingTable table;
    for (std::size_t row_idx = 0; row_idx < n_list.size(); ++row_idx) {
        const int n = n_list[row_idx];
        const std::uint64_t row_seed = derive_seed(seed, (std::uint64_t)row_idx);

        // Fixed-size blocks with per-trial derived seeds: integer partial
        // sums merge associatively, so the schedule cannot leak into results.
        const std::int64_t block = 1024;
        const std::int64_t n_blocks = (trials + block - 1) / block;
        std::vector<TrialSums> partials(static_cast<std::size_t>(n_blocks));
        if (workers == 1) {
            for (std::int64_t bi = 0; bi < n_blocks; ++bi) {
                partials[std::size_t(bi)] =
                    run_block(n, f_act, row_seed, bi * block, std::min(trials, (bi + 1) * block));
            }
        } else {
            std::atomic<std::int64_t> next_block{0};
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) {
                pool.emplace_back([&]() {
                    while (true) {
                        const std::int64_t bi = next_block.fetch_add(1);
                        if (bi >= n_blocks) break;
                        partials[std::size_t(bi)] = run_block(n, f_act, row_seed, bi * block,
                                                              std::min(trials, (bi + 1) * block));
                    }
                });
            }
            for (auto& th : pool) th.join();
        }

        std::int64_t sum = 0;
        unsigned __int128 sum_sq = 0;
        for (const TrialSums& p : partials) {
            sum += p.sum;
            sum_sq += p.sum_sq;
        }

        const double t = double(trials);
        const double mean_hat = double(sum) / t;
        const double ex2 = double((long double)sum_sq / (long double)trials);
        const double var_hat = (ex2 - mean_hat * mean_hat) * t / (t - 1.0);

        const Moments exact = exact_moments(n, f_act);
        ScalingRow row;
        row.n = n;
        row.p = std::int64_t(n) * n;
        row.f_act = f_act;
        row.trials = trials;
        row.mean_hat = mean_hat;
        row.mean_exact = exact.mean;
        row.var_hat = var_hat;
        row.var_exact = exact.var;
        row.var_over_p2 = var_hat / (double(row.p) * double(row.p));
        row.var_over_p32 = var_hat / std::pow(double(row.p), 1.5);
        table.rows.push_back(row);
    }

    // Log-log slope of the empirical variance against P.
    if (table.rows.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = double(table.rows.size());
        for (const ScalingRow& r : table.rows) {
            const double x = std::log(double(r.p));
            const double y = std::log(r.var_hat);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        table.loglog_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    return table;
}

std::string ScalingTable::to_csv() const {
    std::ostringstream out;
    out << "n,P,f,trials,mean_hat,mean_exact,var_hat,var_exact,var_over_P2,var_over_P32\n";
    out.precision(12);
    for (const ScalingRow& r : rows) {
        out << r.n << ',' << r.p << ',' << r.f_act << ',' << r.trials << ',' << r.mean_hat << ','
            << r.mean_exact << ',' << r.var_hat << ',' << r.var_exact << ',' << r.var_over_p2
            << ',' << r.var_over_p32 << '\n';
    }
    return out.str();
}

} // namespace gridsim

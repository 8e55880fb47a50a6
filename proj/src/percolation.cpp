#include "gridsim/percolation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "gridsim/errors.hpp"
#include "gridsim/rng.hpp"

namespace gridsim {

FailureField FailureField::sample(int side, double delta, std::uint64_t seed) {
    if (side < 1) throw InvalidParameter("L", "side must be >= 1");
    if (delta < 0.0 || delta > 1.0) {
        throw InvalidParameter("delta", "failure probability must lie in [0,1]");
    }
    FailureField field;
    field.side = side;
    field.delta = delta;
    field.seed = seed;
    field.failed.assign(std::size_t(side) * std::size_t(side), 0);
    CounterRng rng(seed);
    for (auto& cell : field.failed) {
        cell = rng.bernoulli(delta) ? 1 : 0;
    }
    return field;
}

std::int64_t FailureField::failed_count() const {
    std::int64_t c = 0;
    for (char v : failed) c += v;
    return c;
}

ClusterDecomposition decompose_clusters(const FailureField& field) {
    const int n = field.side;
    const int total = n * n;
    ClusterDecomposition out;
    out.label.assign(std::size_t(total), -1);

    std::vector<int> stack;
    for (int start = 0; start < total; ++start) {
        if (!field.failed[std::size_t(start)] || out.label[std::size_t(start)] != -1) continue;
        const int id = (int)out.clusters.size();
        out.clusters.push_back({});
        Cluster& cluster = out.clusters.back();
        stack.assign(1, start);
        out.label[std::size_t(start)] = id;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            cluster.members.push_back(v);
            const int x = v % n;
            const int y = v / n;
            const int neighbors[4] = {x > 0 ? v - 1 : -1, x + 1 < n ? v + 1 : -1,
                                      y > 0 ? v - n : -1, y + 1 < n ? v + n : -1};
            for (const int u : neighbors) {
                if (u < 0) continue; // off-grid side: no perimeter edge
                if (field.failed[std::size_t(u)]) {
                    if (out.label[std::size_t(u)] == -1) {
                        out.label[std::size_t(u)] = id;
                        stack.push_back(u);
                    }
                } else {
                    cluster.perimeter += 1;
                }
            }
        }
        cluster.size = (int)cluster.members.size();
    }
    return out;
}

TailFit tail_fit(const std::vector<std::int64_t>& size_histogram) {
    std::int64_t total = 0;
    for (std::int64_t c : size_histogram) total += c;
    if (total < 1000) {
        throw StatisticsError("tail fit needs >= 1000 clusters, got " + std::to_string(total));
    }

    // Survival counts N(>= s) for s >= 2; keep points with >= 30 survivors so
    // the log is stable.
    std::vector<std::pair<double, double>> pts; // (s, log survival prob)
    std::int64_t survivors = total;
    for (std::size_t s = 1; s < size_histogram.size(); ++s) {
        if (s >= 2) {
            if (survivors < 30) break;
            pts.push_back({double(s), std::log(double(survivors) / double(total))});
        }
        survivors -= size_histogram[s];
    }
    if (pts.size() < 3) {
        throw StatisticsError("tail fit needs >= 3 usable points, got " +
                              std::to_string(pts.size()));
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = double(pts.size());
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / m;
    double ss_res = 0.0;
    for (const auto& [x, y] : pts) {
        const double r = y - (slope * x + intercept);
        ss_res += r * r;
    }
    const double se_slope =
        std::sqrt(ss_res / (m - 2.0)) / std::sqrt(sxx - sx * sx / m);

    TailFit fit;
    fit.c_hat = -slope;
    fit.std_error = se_slope;
    fit.ci_low = fit.c_hat - 1.96 * se_slope;
    fit.ci_high = fit.c_hat + 1.96 * se_slope;
    fit.clusters_total = total;
    fit.fit_points = (int)pts.size();
    return fit;
}

namespace {

struct BlockStats {
    std::int64_t routed = 0;
    std::int64_t unreachable = 0;
    // detour sums bucketed by K_Gamma
    std::map<int, std::int64_t> bucket_count;
    std::map<int, std::int64_t> bucket_detour_sum;
    std::map<int, std::int64_t> bucket_detour_sumsq;
    // ambient cluster-size histogram and moments
    std::vector<std::int64_t> size_hist;
    std::int64_t ambient_clusters = 0;
    std::int64_t ambient_size_sum = 0;
    unsigned __int128 ambient_size_sumsq = 0;
    // size-biased: clusters intersected by the nominal route
    std::int64_t route_clusters = 0;
    std::int64_t route_size_sum = 0;
    unsigned __int128 route_size_sumsq = 0;
    // single-cluster routes: realized detour against the cluster perimeter
    std::int64_t single_hits = 0;
    std::int64_t single_detour_sum = 0;
    std::int64_t single_perimeter_sum = 0;
    std::int64_t max_ratio_detour = 0; // argmax of detour/perimeter
    std::int64_t max_ratio_perimeter = 1;

    void merge(const BlockStats& other) {
        routed += other.routed;
        unreachable += other.unreachable;
        for (const auto& [k, v] : other.bucket_count) bucket_count[k] += v;
        for (const auto& [k, v] : other.bucket_detour_sum) bucket_detour_sum[k] += v;
        for (const auto& [k, v] : other.bucket_detour_sumsq) bucket_detour_sumsq[k] += v;
        if (size_hist.size() < other.size_hist.size()) size_hist.resize(other.size_hist.size());
        for (std::size_t i = 0; i < other.size_hist.size(); ++i) size_hist[i] += other.size_hist[i];
        ambient_clusters += other.ambient_clusters;
        ambient_size_sum += other.ambient_size_sum;
        ambient_size_sumsq += other.ambient_size_sumsq;
        route_clusters += other.route_clusters;
        route_size_sum += other.route_size_sum;
        route_size_sumsq += other.route_size_sumsq;
        single_hits += other.single_hits;
        single_detour_sum += other.single_detour_sum;
        single_perimeter_sum += other.single_perimeter_sum;
        if ((__int128)other.max_ratio_detour * max_ratio_perimeter >
            (__int128)max_ratio_detour * other.max_ratio_perimeter) {
            max_ratio_detour = other.max_ratio_detour;
            max_ratio_perimeter = other.max_ratio_perimeter;
        }
    }
};

BlockStats run_trial_block(int side, double delta, std::uint64_t seed, std::int64_t first,
                           std::int64_t last) {
    BlockStats stats;
    const GridGraph g = build_grid(side);
    const int total = side * side;
    for (std::int64_t t = first; t < last; ++t) {
        CounterRng pick(derive_seed(seed, (std::uint64_t)t), 1);
        const FailureField field =
            FailureField::sample(side, delta, derive_seed(seed, (std::uint64_t)t));

        const ClusterDecomposition clusters = decompose_clusters(field);
        if (stats.size_hist.empty()) stats.size_hist.resize(64);
        for (const Cluster& c : clusters.clusters) {
            if ((std::size_t)c.size >= stats.size_hist.size()) {
                stats.size_hist.resize(std::size_t(c.size) + 1);
            }
            stats.size_hist[std::size_t(c.size)] += 1;
            stats.ambient_clusters += 1;
            stats.ambient_size_sum += c.size;
            stats.ambient_size_sumsq += (unsigned __int128)c.size * (unsigned __int128)c.size;
        }

        // Healthy source and destination, rejection-sampled deterministically.
        int src = -1, dst = -1;
        for (int attempt = 0; attempt < 4 * total; ++attempt) {
            const int cand = (int)pick.next_below((std::uint64_t)total);
            if (field.failed[std::size_t(cand)]) continue;
            if (src < 0) {
                src = cand;
            } else if (cand != src) {
                dst = cand;
                break;
            }
        }
        if (src < 0 || dst < 0) {
            ++stats.unreachable;
            continue;
        }

        const auto deflected =
            deflect_route(g, g.node_at(src), g.node_at(dst), field.view());
        if (!deflected) {
            ++stats.unreachable;
            continue;
        }
        ++stats.routed;
        const DetourRecord& rec = deflected->record;
        const int k = rec.failed_on_route;
        const std::int64_t detour = rec.actual_len - rec.nominal_len;
        if (k >= 1) {
            stats.bucket_count[k] += 1;
            stats.bucket_detour_sum[k] += detour;
            stats.bucket_detour_sumsq[k] += detour * detour;
        }

        // Size-biased sample: distinct clusters intersected by this nominal
        // route.
        std::unordered_set<int> seen;
        int single_label = -1;
        const Route nominal = xy_route(g, g.node_at(src), g.node_at(dst));
        for (NodeId v : nominal.nodes()) {
            const int idx = g.index_of(v);
            const int label = clusters.label[std::size_t(idx)];
            if (label >= 0 && seen.insert(label).second) {
                const int size = clusters.clusters[std::size_t(label)].size;
                stats.route_clusters += 1;
                stats.route_size_sum += size;
                stats.route_size_sumsq += (unsigned __int128)size * (unsigned __int128)size;
                single_label = label;
            }
        }
        // Realized detour against perimeter, for routes that met exactly one
        // cluster; the proportionality constant is measured, never asserted.
        if (rec.clusters_hit == 1 && seen.size() == 1 && single_label >= 0) {
            const int perimeter = clusters.clusters[std::size_t(single_label)].perimeter;
            stats.single_hits += 1;
            stats.single_detour_sum += detour;
            stats.single_perimeter_sum += perimeter;
            if ((__int128)detour * stats.max_ratio_perimeter >
                (__int128)stats.max_ratio_detour * perimeter) {
                stats.max_ratio_detour = detour;
                stats.max_ratio_perimeter = perimeter;
            }
        }
    }
    return stats;
}

} // namespace

DetourExperimentResult detour_experiment(int side, double delta, std::int64_t trials,
                                         std::uint64_t seed, int workers) {
    if (side < 2) throw InvalidParameter("L", "side must be >= 2");
    if (delta < 0.0 || delta > 1.0) throw InvalidParameter("delta", "must lie in [0,1]");
    if (trials < 1) throw InvalidParameter("trials", "must be >= 1");
    if (workers < 1) throw InvalidParameter("workers", "must be >= 1");

    const std::int64_t block = 256;
    const std::int64_t n_blocks = (trials + block - 1) / block;
    std::vector<BlockStats> partials(static_cast<std::size_t>(n_blocks));
    if (workers == 1) {
        for (std::int64_t bi = 0; bi < n_blocks; ++bi) {
            partials[std::size_t(bi)] =
                run_trial_block(side, delta, seed, bi * block, std::min(trials, (bi + 1) * block));
        }
    } else {
        std::atomic<std::int64_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                while (true) {
                    const std::int64_t bi = next.fetch_add(1);
                    if (bi >= n_blocks) break;
                    partials[std::size_t(bi)] = run_trial_block(side, delta, seed, bi * block,
                                                                std::min(trials, (bi + 1) * block));
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    BlockStats stats;
    for (const BlockStats& p : partials) stats.merge(p);

    DetourExperimentResult result;
    result.side = side;
    result.delta = delta;
    result.trials_requested = trials;
    result.trials_routed = stats.routed;
    result.trials_unreachable = stats.unreachable;
    result.exclusion_rate =
        trials > 0 ? double(stats.unreachable) / double(trials) : 0.0;

    for (const auto& [k, count] : stats.bucket_count) {
        DetourBucket b;
        b.k = k;
        b.count = count;
        const double mean = double(stats.bucket_detour_sum.at(k)) / double(count);
        b.mean_detour = mean;
        if (count >= 2) {
            const double ex2 = double(stats.bucket_detour_sumsq.at(k)) / double(count);
            const double var = std::max(0.0, (ex2 - mean * mean) * double(count) / double(count - 1));
            b.std_error = std::sqrt(var / double(count));
        }
        result.buckets.push_back(b);
    }

    // Through-origin weighted least squares of bucket mean detour against k.
    double num = 0.0, den = 0.0;
    for (const DetourBucket& b : result.buckets) {
        num += double(b.count) * double(b.k) * b.mean_detour;
        den += double(b.count) * double(b.k) * double(b.k);
    }
    if (den > 0.0) {
        result.c_delta_hat = num / den;
        double ss = 0.0;
        std::int64_t n_obs = 0;
        for (const DetourBucket& b : result.buckets) {
            const double resid = b.mean_detour - result.c_delta_hat * b.k;
            ss += double(b.count) * resid * resid;
            n_obs += b.count;
        }
        if (n_obs > 1) {
            result.c_delta_stderr = std::sqrt(ss / double(n_obs - 1) / den);
        }
    }

    if (delta > 0.0 && stats.ambient_clusters >= 1000) {
        try {
            result.ambient_tail = tail_fit(stats.size_hist);
        } catch (const StatisticsError&) {
            // Tail too thin at this density/sample size; fit stays empty.
        }
    }
    if (stats.ambient_clusters > 0) {
        result.ambient_mean_size = double(stats.ambient_size_sum) / double(stats.ambient_clusters);
    }
    if (stats.route_clusters > 0) {
        result.route_mean_size = double(stats.route_size_sum) / double(stats.route_clusters);
    }
    result.single_cluster_routes = stats.single_hits;
    if (stats.single_perimeter_sum > 0) {
        result.detour_per_perimeter_mean =
            double(stats.single_detour_sum) / double(stats.single_perimeter_sum);
        result.detour_per_perimeter_max =
            double(stats.max_ratio_detour) / double(stats.max_ratio_perimeter);
    }
    if (stats.ambient_clusters > 1 && stats.route_clusters > 1) {
        const double ma = result.ambient_mean_size;
        const double mr = result.route_mean_size;
        const double va =
            (double((long double)stats.ambient_size_sumsq / (long double)stats.ambient_clusters) -
             ma * ma);
        const double vr =
            (double((long double)stats.route_size_sumsq / (long double)stats.route_clusters) -
             mr * mr);
        const double se = std::sqrt(va / double(stats.ambient_clusters) +
                                    vr / double(stats.route_clusters));
        result.size_bias_zscore = se > 0.0 ? (mr - ma) / se : 0.0;
    }
    return result;
}

std::string DetourExperimentResult::buckets_csv() const {
    std::ostringstream out;
    out << "k,count,mean_detour,stderr\n";
    out.precision(10);
    for (const DetourBucket& b : buckets) {
        out << b.k << ',' << b.count << ',' << b.mean_detour << ',' << b.std_error << '\n';
    }
    return out.str();
}

std::string DetourExperimentResult::summary_json() const {
    nlohmann::ordered_json j;
    j["L"] = side;
    j["delta"] = delta;
    j["trials_requested"] = trials_requested;
    j["trials_routed"] = trials_routed;
    j["trials_unreachable"] = trials_unreachable;
    j["exclusion_rate"] = exclusion_rate;
    j["c_delta_hat"] = c_delta_hat;
    j["c_delta_stderr"] = c_delta_stderr;
    j["tail_c_hat"] = ambient_tail.c_hat;
    j["tail_ci_low"] = ambient_tail.ci_low;
    j["tail_ci_high"] = ambient_tail.ci_high;
    j["ambient_mean_cluster_size"] = ambient_mean_size;
    j["route_mean_cluster_size"] = route_mean_size;
    j["size_bias_zscore"] = size_bias_zscore;
    j["single_cluster_routes"] = single_cluster_routes;
    j["detour_per_perimeter_mean"] = detour_per_perimeter_mean;
    j["detour_per_perimeter_max"] = detour_per_perimeter_max;
    return j.dump(2);
}

} // namespace gridsim

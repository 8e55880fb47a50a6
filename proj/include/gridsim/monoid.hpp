#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridsim/errors.hpp"
#include "gridsim/rng.hpp"

namespace gridsim {

// A candidate merge operator: carrier sampler, binary op, identity element.
// Whether it actually satisfies the abelian-monoid laws is the law checker's
// job; the tri-state lives in LawCheckResult, not here.
template <typename T>
struct MonoidSpec {
    std::string name;
    std::string carrier; // human-readable carrier description
    T identity{};
    std::function<T(const T&, const T&)> op;
    std::function<T(CounterRng&)> sample;
    std::function<std::string(const T&)> format;
    // Optional: candidate replacements for witness shrinking, smaller first.
    std::function<std::vector<T>(const T&)> shrink;
};

enum class LawStatus { unchecked, passed, failed };

template <typename T>
struct LawWitness {
    std::string law; // "associativity" | "commutativity" | "identity"
    std::vector<T> operands;
    T lhs{};
    T rhs{};
};

template <typename T>
struct LawCheckResult {
    LawStatus status = LawStatus::unchecked;
    std::int64_t associativity_samples = 0;
    std::int64_t commutativity_samples = 0;
    std::int64_t identity_samples = 0;
    std::optional<LawWitness<T>> witness;

    bool passed() const { return status == LawStatus::passed; }
};

namespace detail {

// Greedy shrink: keep replacing operands with shrink candidates while the
// violation persists.
template <typename T, typename Fails>
void shrink_witness(const MonoidSpec<T>& m, std::vector<T>& operands, Fails fails) {
    if (!m.shrink) return;
    bool improved = true;
    int guard = 0;
    while (improved && guard++ < 1000) {
        improved = false;
        for (std::size_t i = 0; i < operands.size() && !improved; ++i) {
            for (const T& candidate : m.shrink(operands[i])) {
                std::vector<T> trial = operands;
                trial[i] = candidate;
                if (fails(trial)) {
                    operands = trial;
                    improved = true;
                    break;
                }
            }
        }
    }
}

} // namespace detail

// Randomized check of associativity, commutativity, and the two-sided
// identity. Failure is a value, not an exception, and carries a concrete
// (shrunk, when a shrinker exists) witness.
template <typename T>
LawCheckResult<T> check_laws(const MonoidSpec<T>& m, std::int64_t n_samples, std::uint64_t seed) {
    CounterRng rng(seed);
    LawCheckResult<T> result;

    auto fail = [&](std::string law, std::vector<T> operands, T lhs, T rhs) {
        LawWitness<T> w;
        w.law = std::move(law);
        w.operands = std::move(operands);
        w.lhs = lhs;
        w.rhs = rhs;
        result.witness = std::move(w);
        result.status = LawStatus::failed;
    };

    for (std::int64_t i = 0; i < n_samples; ++i) {
        const T a = m.sample(rng);
        const T b = m.sample(rng);
        const T c = m.sample(rng);
        ++result.associativity_samples;
        const T lhs = m.op(m.op(a, b), c);
        const T rhs = m.op(a, m.op(b, c));
        if (!(lhs == rhs)) {
            std::vector<T> ops{a, b, c};
            detail::shrink_witness(m, ops, [&](const std::vector<T>& t) {
                return !(m.op(m.op(t[0], t[1]), t[2]) == m.op(t[0], m.op(t[1], t[2])));
            });
            fail("associativity", ops, m.op(m.op(ops[0], ops[1]), ops[2]),
                 m.op(ops[0], m.op(ops[1], ops[2])));
            return result;
        }
    }
    for (std::int64_t i = 0; i < n_samples; ++i) {
        const T a = m.sample(rng);
        const T b = m.sample(rng);
        ++result.commutativity_samples;
        const T lhs = m.op(a, b);
        const T rhs = m.op(b, a);
        if (!(lhs == rhs)) {
            std::vector<T> ops{a, b};
            detail::shrink_witness(m, ops, [&](const std::vector<T>& t) {
                return !(m.op(t[0], t[1]) == m.op(t[1], t[0]));
            });
            fail("commutativity", ops, m.op(ops[0], ops[1]), m.op(ops[1], ops[0]));
            return result;
        }
    }
    for (std::int64_t i = 0; i < n_samples; ++i) {
        const T a = m.sample(rng);
        ++result.identity_samples;
        const T left = m.op(m.identity, a);
        const T right = m.op(a, m.identity);
        if (!(left == a) || !(right == a)) {
            std::vector<T> ops{a};
            detail::shrink_witness(m, ops, [&](const std::vector<T>& t) {
                return !(m.op(m.identity, t[0]) == t[0]) || !(m.op(t[0], m.identity) == t[0]);
            });
            fail("identity", ops, m.op(m.identity, ops[0]), ops[0]);
            return result;
        }
    }
    result.status = LawStatus::passed;
    return result;
}

// Full binary tree over a permutation of the leaf multiset. Children with
// index < n_leaves are leaf slots; index >= n_leaves refers to
// internal[index - n_leaves]. Internal nodes are stored children-first, so
// bottom-up evaluation is a single pass; the root is the last internal node.
struct FoldTree {
    struct Node {
        int left = 0;
        int right = 0;
    };

    int n_leaves = 0;
    std::vector<int> perm; // slot -> leaf index
    std::vector<Node> internal;

    std::string describe() const {
        nlohmann::json j;
        j["perm"] = perm;
        nlohmann::json nodes = nlohmann::json::array();
        for (const Node& nd : internal) {
            nodes.push_back({nd.left, nd.right});
        }
        j["internal"] = nodes;
        return j.dump();
    }
};

namespace detail {

inline int build_balanced(FoldTree& t, int lo, int hi) {
    if (hi - lo == 1) return lo;
    const int mid = lo + (hi - lo) / 2;
    const int left = build_balanced(t, lo, mid);
    const int right = build_balanced(t, mid, hi);
    t.internal.push_back({left, right});
    return t.n_leaves + int(t.internal.size()) - 1;
}

inline int build_random(FoldTree& t, int lo, int hi, CounterRng& rng) {
    if (hi - lo == 1) return lo;
    const int split = lo + 1 + int(rng.next_below(std::uint64_t(hi - lo - 1)));
    const int left = build_random(t, lo, split, rng);
    const int right = build_random(t, split, hi, rng);
    t.internal.push_back({left, right});
    return t.n_leaves + int(t.internal.size()) - 1;
}

} // namespace detail

inline FoldTree balanced_tree(int n_leaves) {
    FoldTree t;
    t.n_leaves = n_leaves;
    t.perm.resize(std::size_t(n_leaves));
    std::iota(t.perm.begin(), t.perm.end(), 0);
    if (n_leaves >= 2) detail::build_balanced(t, 0, n_leaves);
    return t;
}

// Random shape and random leaf permutation.
inline FoldTree random_tree(int n_leaves, CounterRng& rng) {
    FoldTree t;
    t.n_leaves = n_leaves;
    t.perm.resize(std::size_t(n_leaves));
    std::iota(t.perm.begin(), t.perm.end(), 0);
    for (int i = n_leaves - 1; i > 0; --i) {
        std::swap(t.perm[std::size_t(i)], t.perm[rng.next_below(std::uint64_t(i + 1))]);
    }
    if (n_leaves >= 2) detail::build_random(t, 0, n_leaves, rng);
    return t;
}

inline int tree_depth(const FoldTree& t) {
    if (t.n_leaves <= 1) return 0;
    std::vector<int> depth(t.internal.size(), 0);
    auto depth_of = [&](int child) {
        return child < t.n_leaves ? 0 : depth[std::size_t(child - t.n_leaves)];
    };
    for (std::size_t i = 0; i < t.internal.size(); ++i) {
        depth[i] = 1 + std::max(depth_of(t.internal[i].left), depth_of(t.internal[i].right));
    }
    return depth.back();
}

// All shape variants over n ordered slots (Catalan(n-1) of them); combine
// with leaf permutations for the exhaustive schedule sweep.
std::vector<FoldTree> all_tree_shapes(int n_leaves);

template <typename T>
T fold(const MonoidSpec<T>& m, const FoldTree& tree, const std::vector<T>& leaves) {
    if (tree.n_leaves != (int)leaves.size()) {
        throw InvalidParameter("leaves", "leaf count does not match tree");
    }
    if (leaves.empty()) return m.identity;
    if (leaves.size() == 1) return leaves[std::size_t(tree.perm[0])];
    std::vector<T> values;
    values.reserve(tree.internal.size());
    auto value_of = [&](int child) -> const T& {
        return child < tree.n_leaves ? leaves[std::size_t(tree.perm[std::size_t(child)])]
                                     : values[std::size_t(child - tree.n_leaves)];
    };
    for (const auto& node : tree.internal) {
        values.push_back(m.op(value_of(node.left), value_of(node.right)));
    }
    return values.back();
}

template <typename T>
struct IndependenceResult {
    bool pass = true;
    std::int64_t trees_checked = 0;
    std::string tree_a;
    std::string tree_b;
    std::optional<std::pair<T, T>> outputs;
};

// Random full binary trees over random permutations; pass iff every output
// equals the first (exact carrier equality).
template <typename T>
IndependenceResult<T> fuzz_schedule_independence(const MonoidSpec<T>& m,
                                                 const std::vector<T>& leaves,
                                                 std::int64_t n_trees, std::uint64_t seed) {
    IndependenceResult<T> result;
    if (leaves.empty() || n_trees <= 0) return result;
    CounterRng rng(seed);
    const FoldTree reference = random_tree((int)leaves.size(), rng);
    const T expected = fold(m, reference, leaves);
    result.trees_checked = 1;
    for (std::int64_t i = 1; i < n_trees; ++i) {
        const FoldTree tree = random_tree((int)leaves.size(), rng);
        const T out = fold(m, tree, leaves);
        ++result.trees_checked;
        if (!(out == expected)) {
            result.pass = false;
            result.tree_a = reference.describe();
            result.tree_b = tree.describe();
            result.outputs = {expected, out};
            return result;
        }
    }
    return result;
}

// Every shape over every permutation; feasible for small leaf sets only.
template <typename T>
IndependenceResult<T> exhaustive_schedule_independence(const MonoidSpec<T>& m,
                                                       const std::vector<T>& leaves) {
    const int n = (int)leaves.size();
    if (n > 6) {
        throw BudgetError("exhaustive tree sweep limited to 6 leaves, got " + std::to_string(n));
    }
    IndependenceResult<T> result;
    if (n == 0) return result;
    std::vector<FoldTree> shapes = all_tree_shapes(n);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    bool have_expected = false;
    T expected{};
    FoldTree first_tree;
    do {
        for (FoldTree shape : shapes) {
            shape.perm = perm;
            const T out = fold(m, shape, leaves);
            ++result.trees_checked;
            if (!have_expected) {
                expected = out;
                first_tree = shape;
                have_expected = true;
            } else if (!(out == expected)) {
                result.pass = false;
                result.tree_a = first_tree.describe();
                result.tree_b = shape.describe();
                result.outputs = {expected, out};
                return result;
            }
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return result;
}

// Machine-readable certificate. Explicitly labeled as empirical evidence:
// this replaces, not implements, a proof-term pipeline.
template <typename T>
nlohmann::ordered_json emit_law_report(const MonoidSpec<T>& m, const LawCheckResult<T>& laws,
                                       const IndependenceResult<T>* independence = nullptr) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["kind"] = "monoid-law-report";
    j["evidence"] = "empirical evidence, not a proof term";
    j["carrier"] = m.carrier;
    j["op"] = m.name;
    const char* status = laws.status == LawStatus::passed   ? "passed"
                         : laws.status == LawStatus::failed ? "failed"
                                                            : "unchecked";
    j["status"] = status;
    nlohmann::ordered_json law_entries = nlohmann::ordered_json::array();
    auto entry = [&](const char* law, std::int64_t samples) {
        nlohmann::ordered_json e;
        e["law"] = law;
        e["samples"] = samples;
        if (laws.witness && laws.witness->law == law) {
            e["status"] = "failed";
            nlohmann::ordered_json w;
            nlohmann::ordered_json operands = nlohmann::ordered_json::array();
            for (const T& v : laws.witness->operands) {
                operands.push_back(m.format ? m.format(v) : std::string("<value>"));
            }
            w["operands"] = operands;
            w["lhs"] = m.format ? m.format(laws.witness->lhs) : std::string("<value>");
            w["rhs"] = m.format ? m.format(laws.witness->rhs) : std::string("<value>");
            e["witness"] = w;
        } else {
            e["status"] = laws.status == LawStatus::unchecked ? "unchecked"
                          : samples > 0                       ? "passed"
                                                              : "skipped";
        }
        law_entries.push_back(e);
    };
    entry("associativity", laws.associativity_samples);
    entry("commutativity", laws.commutativity_samples);
    entry("identity", laws.identity_samples);
    j["laws"] = law_entries;
    if (independence) {
        nlohmann::ordered_json ind;
        ind["trees_checked"] = independence->trees_checked;
        ind["pass"] = independence->pass;
        if (!independence->pass) {
            ind["tree_a"] = independence->tree_a;
            ind["tree_b"] = independence->tree_b;
        }
        j["schedule_independence"] = ind;
    }
    return j;
}

// --- Stock operator library ------------------------------------------------

MonoidSpec<std::int64_t> i64_add_monoid();
MonoidSpec<std::int64_t> i64_mul_monoid(); // small sampled values, stays in range
MonoidSpec<std::int64_t> i64_min_monoid();
MonoidSpec<std::int64_t> i64_max_monoid();
MonoidSpec<std::int64_t> i64_gcd_monoid();
MonoidSpec<std::uint64_t> u64_xor_monoid();
MonoidSpec<std::uint64_t> u64_or_monoid();
MonoidSpec<std::uint64_t> u64_and_monoid();
MonoidSpec<std::int64_t> mod_add_monoid(std::int64_t modulus);
MonoidSpec<std::uint8_t> bool_or_monoid();
// Negative examples: fail the law check with concrete witnesses.
MonoidSpec<std::int64_t> i64_sub_op();
MonoidSpec<double> double_add_op();

} // namespace gridsim

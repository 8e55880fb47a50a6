#include "gridsim/monoid.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace gridsim {

namespace {

std::string format_i64(const std::int64_t& v) { return std::to_string(v); }
std::string format_u64(const std::uint64_t& v) { return std::to_string(v); }

std::vector<std::int64_t> shrink_i64(const std::int64_t& v) {
    std::vector<std::int64_t> out;
    if (v != 0) out.push_back(0);
    if (v > 1 || v < -1) out.push_back(v / 2);
    if (v > 0) out.push_back(v - 1);
    if (v < 0) out.push_back(v + 1);
    return out;
}

} // namespace

// Recursive shape enumeration: all binary bracketings of slots [lo, hi).
namespace {

struct ShapeBuilder {
    int n = 0;

    // Returns, for the range, a list of (tree fragment, root id). Fragments
    // are merged by re-numbering internal nodes.
    struct Fragment {
        std::vector<FoldTree::Node> nodes;
        int root = 0; // < n is a slot; >= n indexes nodes + n
    };

    std::vector<Fragment> enumerate(int lo, int hi) {
        std::vector<Fragment> result;
        if (hi - lo == 1) {
            result.push_back({{}, lo});
            return result;
        }
        for (int split = lo + 1; split < hi; ++split) {
            const auto lefts = enumerate(lo, split);
            const auto rights = enumerate(split, hi);
            for (const auto& lf : lefts) {
                for (const auto& rf : rights) {
                    Fragment merged;
                    merged.nodes = lf.nodes;
                    const int shift = (int)lf.nodes.size();
                    for (FoldTree::Node node : rf.nodes) {
                        if (node.left >= n) node.left += shift;
                        if (node.right >= n) node.right += shift;
                        merged.nodes.push_back(node);
                    }
                    int right_root = rf.root;
                    if (right_root >= n) right_root += shift;
                    merged.nodes.push_back({lf.root, right_root});
                    merged.root = n + (int)merged.nodes.size() - 1;
                    result.push_back(std::move(merged));
                }
            }
        }
        return result;
    }
};

} // namespace

std::vector<FoldTree> all_tree_shapes(int n_leaves) {
    std::vector<FoldTree> trees;
    if (n_leaves <= 0) return trees;
    if (n_leaves == 1) {
        FoldTree t;
        t.n_leaves = 1;
        t.perm = {0};
        trees.push_back(t);
        return trees;
    }
    ShapeBuilder builder{n_leaves};
    for (auto& fragment : builder.enumerate(0, n_leaves)) {
        FoldTree t;
        t.n_leaves = n_leaves;
        t.perm.resize(std::size_t(n_leaves));
        std::iota(t.perm.begin(), t.perm.end(), 0);
        t.internal = std::move(fragment.nodes);
        trees.push_back(std::move(t));
    }
    return trees;
}

MonoidSpec<std::int64_t> i64_add_monoid() {
    MonoidSpec<std::int64_t> m;
    m.name = "i64-add";
    m.carrier = "int64";
    m.identity = 0;
    m.op = [](const std::int64_t& a, const std::int64_t& b) { return a + b; };
    m.sample = [](CounterRng& rng) { return std::int64_t(rng.next_below(2001)) - 1000; };
    m.format = format_i64;
    m.shrink = shrink_i64;
    return m;
}

MonoidSpec<std::int64_t> i64_mul_monoid() {
    MonoidSpec<std::int64_t> m;
    m.name = "i64-mul";
    m.carrier = "int64";
    m.identity = 1;
    m.op = [](const std::int64_t& a, const std::int64_t& b) { return a * b; };
    // Magnitude <= 6 so products of dozens of leaves stay far from overflow.
    m.sample = [](CounterRng& rng) { return std::int64_t(rng.next_below(13)) - 6; };
    m.format = format_i64;
    m.shrink = shrink_i64;
    return m;
}

MonoidSpec<std::int64_t> i64_min_monoid() {
    MonoidSpec<std::int64_t> m;
    m.name = "i64-min";
    m.carrier = "int64";
    m.identity = std::numeric_limits<std::int64_t>::max();
    m.op = [](const std::int64_t& a, const std::int64_t& b) { return a < b ? a : b; };
    m.sample = [](CounterRng& rng) { return std::int64_t(rng.next_below(2001)) - 1000; };
    m.format = format_i64;
    m.shrink = shrink_i64;
    return m;
}

MonoidSpec<std::int64_t> i64_max_monoid() {
    MonoidSpec<std::int64_t> m;
    m.name = "i64-max";
    m.carrier = "int64";
    m.identity = std::numeric_limits<std::int64_t>::min();
    m.op = [](const std::int64_t& a, const std::int64_t& b) { return a > b ? a : b; };
    m.sample = [](CounterRng& rng) { return std::int64_t(rng.next_below(2001)) - 1000; };
    m.format = format_i64;
    m.shrink = shrink_i64;
    return m;
}

MonoidSpec<std::int64_t> i64_gcd_monoid() {
    MonoidSpec<std::int64_t> m;
    m.name = "i64-gcd";
    m.carrier = "int64 (non-negative)";
    m.identity = 0;
    m.op = [](const std::int64_t& a, const std::int64_t& b) { return std::gcd(a, b); };
    m.sample = [](CounterRng& rng) { return std::int64_t(rng.next_below(10000)); };
    m.format = format_i64;
    m.shrink = shrink_i64;
    return m;
}

MonoidSpec<std::uint64_t> u64_xor_monoid() {
    MonoidSpec<std::uint64_t> m;
    m.name = "u64-xor";
    m.carrier = "uint64";
    m.identity = 0;
    m.op = [](const std::uint64_t& a, const std::uint64_t& b) { return a ^ b; };
    m.sample = [](CounterRng& rng) { return rng.next_u64(); };
    m.format = format_u64;
    return m;
}

MonoidSpec<std::uint64_t> u64_or_monoid() {
    MonoidSpec<std::uint64_t> m;
    m.name = "u64-or";
    m.carrier = "uint64";
    m.identity = 0;
    m.op = [](const std::uint64_t& a, const std::uint64_t& b) { return a | b; };
    m.sample = [](CounterRng& rng) { return rng.next_u64(); };
    m.format = format_u64;
    return m;
}

MonoidSpec<std::uint64_t> u64_and_monoid() {
    MonoidSpec<std::uint64_t> m;
    m.name = "u64-and";
    m.carrier = "uint64";
    m.identity = ~std::uint64_t(0);
    m.op = [](const std::uint64_t& a, const std::uint64_t& b) { return a & b; };
    m.sample = [](CounterRng& rng) { return rng.next_u64(); };
    m.format = format_u64;
    return m;
}

MonoidSpec<std::int64_t> mod_add_monoid(std::int64_t modulus) {
    MonoidSpec<std::int64_t> m;
    m.name = "mod-add-" + std::to_string(modulus);
    m.carrier = "int64 mod " + std::to_string(modulus);
    m.identity = 0;
    m.op = [modulus](const std::int64_t& a, const std::int64_t& b) { return (a + b) % modulus; };
    m.sample = [modulus](CounterRng& rng) {
        return std::int64_t(rng.next_below(std::uint64_t(modulus)));
    };
    m.format = format_i64;
    m.shrink = shrink_i64;
    return m;
}

MonoidSpec<std::uint8_t> bool_or_monoid() {
    MonoidSpec<std::uint8_t> m;
    m.name = "bool-or";
    m.carrier = "bool";
    m.identity = 0;
    m.op = [](const std::uint8_t& a, const std::uint8_t& b) { return std::uint8_t(a | b); };
    m.sample = [](CounterRng& rng) { return std::uint8_t(rng.next_below(2)); };
    m.format = [](const std::uint8_t& v) { return std::string(v ? "true" : "false"); };
    return m;
}

MonoidSpec<std::int64_t> i64_sub_op() {
    MonoidSpec<std::int64_t> m;
    m.name = "i64-sub";
    m.carrier = "int64";
    m.identity = 0;
    m.op = [](const std::int64_t& a, const std::int64_t& b) { return a - b; };
    m.sample = [](CounterRng& rng) { return std::int64_t(rng.next_below(2001)) - 1000; };
    m.format = format_i64;
    m.shrink = shrink_i64;
    return m;
}

MonoidSpec<double> double_add_op() {
    MonoidSpec<double> m;
    m.name = "f64-add";
    m.carrier = "double";
    m.identity = 0.0;
    m.op = [](const double& a, const double& b) { return a + b; };
    // Spread magnitudes so rounding breaks associativity quickly.
    m.sample = [](CounterRng& rng) {
        const double mantissa = rng.next_unit() * 2.0 - 1.0;
        const int exponent = int(rng.next_below(41)) - 20;
        return std::ldexp(mantissa, exponent);
    };
    m.format = [](const double& v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    return m;
}

} // namespace gridsim

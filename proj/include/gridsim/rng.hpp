#pragma once

#include <cstdint>

namespace gridsim {

// Counter-based generator: output i is the splitmix64 finalizer applied to
// key + i * phi64. Substreams are derived by key, not by jumping, so every
// draw is attributable to (seed, stream, counter) and trial/worker
// partitioning cannot change any sampled value.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(mix(mix(seed) + stream)), counter_(0) {}

    std::uint64_t next_u64() noexcept {
        counter_ += 0x9E3779B97F4A7C15ull;
        return mix(key_ + counter_);
    }

    // Uniform in [0,1), 53-bit resolution.
    double next_unit() noexcept {
        return double(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, n), n > 0. Multiply-shift map; bias is < 2^-64 per draw.
    std::uint64_t next_below(std::uint64_t n) noexcept {
        const unsigned __int128 wide = (unsigned __int128)next_u64() * n;
        return (std::uint64_t)(wide >> 64);
    }

    bool bernoulli(double p) noexcept { return next_unit() < p; }

    static std::uint64_t mix(std::uint64_t z) noexcept {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

// Deterministic sub-seed for trial or worker `index` under a master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return CounterRng::mix(CounterRng::mix(seed) + 0x9E3779B97F4A7C15ull * (index + 1));
}

} // namespace gridsim

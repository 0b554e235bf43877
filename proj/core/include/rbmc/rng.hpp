#pragma once

#include <cstdint>
#include <string_view>
#include <random>
#include <vector>

namespace rbmc {

/// Deterministic random source. Every draw is fully specified here so that
/// test oracles can replay the exact stream: the engine is std::mt19937_64
/// (bit-exact per the C++ standard) and all mappings from raw 64-bit words
/// to doubles/indices are implemented in this class rather than delegated
/// to the implementation-defined <random> distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1): top 53 bits of one engine word.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller. Consumes exactly two engine words
    /// per call (the sine half is discarded, keeping the stream position
    /// independent of call history).
    double next_gaussian();

    /// Uniform index in [0, bound) by rejection; bound must be >= 1.
    std::size_t next_index(std::size_t bound);

    /// Fisher-Yates shuffle driven by next_index, high index down to 1.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        if (items.size() < 2) return;
        for (std::size_t i = items.size() - 1; i >= 1; --i) {
            const std::size_t j = next_index(i + 1);
            std::swap(items[i], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// Stable per-item seed derivation: FNV-1a over the base seed bytes and the
/// tag, finished with a splitmix64 mix. Platform-independent, so items can
/// be processed in any order or thread count with identical results.
std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view tag);

}  // namespace rbmc

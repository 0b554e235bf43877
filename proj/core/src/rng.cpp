#include "rbmc/rng.hpp"

#include <cmath>

namespace rbmc {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double Rng::next_gaussian() {
    // u1 in (0, 1] so the log is finite; u2 in [0, 1).
    const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::size_t Rng::next_index(std::size_t bound) {
    const std::uint64_t b = bound;
    // Rejection sampling keeps the draw unbiased for any bound.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % b;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % b);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view tag) {
    std::uint64_t h = 14695981039346656037ULL;
    for (int shift = 0; shift < 64; shift += 8) {
        h ^= (base_seed >> shift) & 0xffULL;
        h *= 1099511628211ULL;
    }
    for (const char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    // splitmix64 finalizer
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

}  // namespace rbmc

#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <initializer_list>
#include <random>
#include <string_view>

namespace qf {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. All seed derivation in the project goes through this.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Folds a sequence of words into one seed: h = mix64(h ^ word) per word.
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) noexcept {
    std::uint64_t h = 0x6A09E667F3BCC908ULL;
    for (auto w : words) h = mix64(h ^ w);
    return h;
}

/// FNV-1a over the bytes of a string; stable across platforms, unlike std::hash.
constexpr std::uint64_t hash_string(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Stream tags keep sub-seeds of one master seed disjoint.
namespace stream {
inline constexpr std::uint64_t topology = 0x746F706FULL;
inline constexpr std::uint64_t errors = 0x6572726FULL;
inline constexpr std::uint64_t circuits = 0x63697263ULL;
inline constexpr std::uint64_t drift = 0x64726966ULL;
inline constexpr std::uint64_t split = 0x73706C69ULL;
inline constexpr std::uint64_t init = 0x696E6974ULL;
inline constexpr std::uint64_t dropout = 0x64726F70ULL;
inline constexpr std::uint64_t selection = 0x73656C65ULL;
}  // namespace stream

/// Uniform double in [0,1) from the top 53 bits; independent of libstdc++ distribution details.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [lo, hi] (inclusive) by rejection sampling.
inline std::uint64_t uniform_int(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo;
    if (span == ~std::uint64_t{0}) return rng();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range);
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return lo + draw % range;
}

/// Fisher-Yates shuffle with the draws above, so orderings are stable across standard libraries.
template <class Vec>
void shuffle_in_place(Vec& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_int(rng, 0, i - 1));
        using std::swap;
        swap(v[i - 1], v[j]);
    }
}

/// Standard normal via Box-Muller (one value per call, the sine branch is discarded).
double standard_normal(Rng& rng);

}  // namespace qf

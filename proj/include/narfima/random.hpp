#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace narfima {

using Rng = std::mt19937_64;

// 64-bit FNV-1a. Stable across platforms, used for sub-seeds and config hashes.
constexpr std::uint64_t fnv1a(std::string_view bytes,
                              std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive a named sub-seed from a global seed.
constexpr std::uint64_t sub_seed(std::uint64_t seed, std::string_view purpose) {
    return mix64(fnv1a(purpose, mix64(seed)));
}

constexpr std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// Gaussian draws via Box-Muller on the raw engine output, so sequences do not
// depend on the standard library's distribution implementation.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

    double operator()();
    double uniform();  // (0, 1)
    Rng& engine() { return rng_; }

private:
    Rng rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace narfima

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace cotkd {

/// SplitMix64 (Steele, Lea, Flood 2014). Used to expand seeds.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();

private:
    std::uint64_t state_;
};

/// xoshiro256** 1.0 (Blackman, Vigna), state filled from SplitMix64(seed).
/// All sampling in the project goes through this generator so results are
/// reproducible from the seed in any language.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    /// Independent stream: seed mixed with a stream id before expansion.
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next();
    /// Uniform in [0, bound) by rejection: draws r until r >= (2^64 - bound) % bound,
    /// then returns r % bound. bound must be > 0.
    std::uint64_t below(std::uint64_t bound);
    /// True with probability 1/2 (top bit of next()).
    bool coin();

private:
    std::uint64_t s_[4];
};

/// m distinct values from [0, n) via partial Fisher-Yates over the identity
/// permutation: for i in [0, m): j = i + below(n - i); swap(a[i], a[j]).
/// Returned in draw order (not sorted).
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t m);

/// FNV-1a 64 of a string, for deriving stream ids from names.
std::uint64_t fnv1a64(std::string_view s);

}  // namespace cotkd

#pragma once

// Portable, reproducible randomness.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are not (libstdc++, libc++ and MSVC
// differ), so bounded integers are drawn here by rejection sampling on the raw
// 64-bit output and shuffles are an explicit Fisher-Yates. Child seeds are
// derived with the SplitMix64 finalizer so that every stream of a run is a
// pure function of the master seed.

#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace pml3er {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// FNV-1a, used to turn stream names into stream ids.
constexpr std::uint64_t stream_id(std::string_view name) noexcept
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Seed of child stream `index` under `name`, derived from `parent`.
inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view name,
                                 std::uint64_t index = 0) noexcept
{
    return splitmix64(splitmix64(parent ^ stream_id(name)) + index);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, bound). `bound` must be positive.
    std::uint64_t below(std::uint64_t bound)
    {
        // Reject the top partial block so every residue is equally likely.
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % bound;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::span<T> items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Random permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n)
    {
        std::vector<std::size_t> p(n);
        std::iota(p.begin(), p.end(), std::size_t{0});
        shuffle(std::span<std::size_t>(p));
        return p;
    }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace pml3er

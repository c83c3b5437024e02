#pragma once

#include <cstdint>

namespace emuprob {

/// SplitMix64 (Steele, Lea, Flood 2014): the stream is a fixed function of
/// the seed on every platform.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// One fair bit, taken from the high end of the next output.
    int bit() noexcept { return static_cast<int>((*this)() >> 63); }

    /// Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = max() - max() % bound;
        std::uint64_t r;
        do {
            r = (*this)();
        } while (r >= limit);
        return r % bound;
    }

private:
    std::uint64_t state_;
};

/// Independent stream for (seed, index): two rounds of the SplitMix finalizer
/// over the pair. Used to split Monte-Carlo work into fixed chunks.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    SplitMix64 outer(seed);
    std::uint64_t a = outer();
    SplitMix64 inner(a ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
    return inner();
}

} // namespace emuprob

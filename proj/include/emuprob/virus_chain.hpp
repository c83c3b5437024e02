#pragma once

#include <cstddef>

#include "emuprob/error.hpp"
#include "emuprob/scalar.hpp"

namespace emuprob {

/// Abstract form of the virus family M_1, M_2, ...: the walk at M_i reads a
/// block of i bits, moves on to M_{i+1} unless the block is 0^i, and exits
/// to the reference computer otherwise.
struct VirusChain {
    std::size_t max_index = 2;

    /// Length of the block read at M_i.
    [[nodiscard]] static std::size_t block_length(std::size_t i) { return i; }

    /// Probability 1 - 2^-i of moving from M_i to M_{i+1}.
    [[nodiscard]] static Rational advance_probability(std::size_t i) { return Rational(1) - pow2_inverse(i); }

    /// prod_{i=1}^{horizon-1} (1 - 2^-i): probability of reaching M_horizon
    /// from M_1 without ever leaving the chain.
    [[nodiscard]] static Rational survival_product(std::size_t horizon) {
        Rational p = 1;
        for (std::size_t i = 1; i < horizon; ++i) p *= advance_probability(i);
        return p;
    }
};

inline VirusChain virus_chain(std::size_t max_index) {
    if (max_index < 2) throw DomainError("virus chain needs max_index >= 2");
    return VirusChain{max_index};
}

} // namespace emuprob

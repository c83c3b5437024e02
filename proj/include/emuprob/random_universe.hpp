#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <numeric>
#include <vector>

#include "emuprob/constructions.hpp"
#include "emuprob/emulation.hpp"
#include "emuprob/markov.hpp"
#include "emuprob/rng.hpp"
#include "emuprob/universe.hpp"

namespace emuprob::random {

/// Outputs drawn by the generators; closed under bitwise complement.
inline std::vector<Output> output_pool(bool with_undefined = true) {
    std::vector<Output> pool;
    for (const char* s : {"0", "1", "00", "01", "10", "11"}) pool.push_back(Output::parse(s));
    if (with_undefined) pool.push_back(Output::undefined());
    return pool;
}

inline std::vector<StateId> shuffled(std::size_t n, SplitMix64& rng) {
    std::vector<StateId> order(n);
    std::iota(order.begin(), order.end(), StateId{0});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    return order;
}

/// Random total graph with a Hamiltonian cycle through all states (so every
/// state reaches every other), random second edges and random outputs.
/// cycle_bit[q] is the bit of q's cycle edge.
struct RandomGraph {
    std::vector<State> states;
    std::vector<int> cycle_bit;
};

inline RandomGraph strongly_connected_graph(std::size_t n, SplitMix64& rng, bool with_undefined = true) {
    auto pool = output_pool(with_undefined);
    auto order = shuffled(n, rng);
    RandomGraph g{std::vector<State>(n), std::vector<int>(n)};
    for (std::size_t k = 0; k < n; ++k) {
        const StateId q = order[k];
        State& s = g.states[q];
        g.cycle_bit[q] = rng.bit();
        s.next[g.cycle_bit[q]] = order[(k + 1) % n];
        s.next[1 - g.cycle_bit[q]] = rng.below(n);
        s.out = pool[rng.below(pool.size())];
    }
    return g;
}

/// Minimized strongly connected universe with Phi = all states.
inline ComputerSet strongly_connected(std::size_t n, SplitMix64& rng, bool with_undefined = true) {
    Minimized m = minimize(Universe(strongly_connected_graph(n, rng, with_undefined).states));
    return ComputerSet::all(std::make_shared<const Universe>(std::move(m.universe)));
}

/// Strongly connected core plus an Undefined sink outside Phi: each non-cycle
/// edge goes to the sink with probability 1/2, so the matrix mixes 1/2 and 1
/// entries.
inline ComputerSet core_with_sink(std::size_t n, SplitMix64& rng) {
    RandomGraph g = strongly_connected_graph(n, rng);
    g.states[0].out = Output::parse("0"); // keeps the core distinct from the sink
    const StateId sink = n;
    for (StateId q = 0; q < n; ++q) {
        if (rng.bit()) g.states[q].next[1 - g.cycle_bit[q]] = sink;
    }
    g.states.push_back({Output::undefined(), {sink, sink}});
    Minimized m = minimize(Universe(std::move(g.states)));
    std::vector<StateId> members;
    for (StateId q = 0; q < n; ++q) members.push_back(m.map[q]);
    return ComputerSet(std::make_shared<const Universe>(std::move(m.universe)), members);
}

/// Strongly connected, aperiodic universe (retries until classify agrees).
inline ComputerSet positive_recurrent(std::size_t n, SplitMix64& rng, bool with_undefined = true) {
    for (;;) {
        ComputerSet phi = strongly_connected(n, rng, with_undefined);
        if (classify(phi).chain_class == ChainClass::PositiveRecurrentFinite) return phi;
    }
}

/// Two copies (q, f) of a random universe, the f = 1 copy with complemented
/// outputs; each edge flips f with probability 1/2. The complement of (q, f)
/// is (q, 1 - f), so the set is closed under output complement. Retries
/// until the result is positive recurrent.
inline ComputerSet twisted_double(std::size_t n, SplitMix64& rng) {
    for (;;) {
        auto base = strongly_connected_graph(n, rng).states;
        std::vector<State> states(2 * n);
        for (StateId q = 0; q < n; ++q) {
            for (int f = 0; f < 2; ++f) {
                State& s = states[2 * q + f];
                const Output& o = base[q].out;
                s.out = (f && o.defined()) ? Output(o.value().complement()) : o;
            }
            for (int b = 0; b < 2; ++b) {
                const int twist = rng.bit();
                for (int f = 0; f < 2; ++f) states[2 * q + f].next[b] = 2 * base[q].next[b] + (f ^ twist);
            }
        }
        Minimized m = minimize(Universe(std::move(states)));
        ComputerSet phi = ComputerSet::all(std::make_shared<const Universe>(std::move(m.universe)));
        if (classify(phi).chain_class == ChainClass::PositiveRecurrentFinite) return phi;
    }
}

/// Random prefix-free table with programs of length <= max_depth: each
/// trie node becomes a program, an unused branch, or an internal node.
inline PrefixProgramTable prefix_table(std::size_t max_depth, SplitMix64& rng) {
    auto pool = output_pool(false);
    std::vector<std::pair<BitString, BitString>> entries;
    std::function<void(const BitString&)> grow = [&](const BitString& node) {
        const auto roll = rng.below(8);
        if (node.size() == max_depth || roll < 3) {
            if (roll % 2 == 0 || node.size() == max_depth) entries.emplace_back(node, pool[rng.below(pool.size())].value());
            return;
        }
        if (roll == 3) return;
        for (int b = 0; b < 2; ++b) {
            BitString child = node;
            child.push_back(b);
            grow(child);
        }
    };
    grow(BitString());
    return PrefixProgramTable(std::move(entries));
}

} // namespace emuprob::random

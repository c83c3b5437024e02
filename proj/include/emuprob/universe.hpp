#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "emuprob/bits.hpp"
#include "emuprob/error.hpp"

namespace emuprob {

/// Dense index of a computer inside one universe; also its matrix row order.
using StateId = std::size_t;

inline constexpr std::size_t kDefaultMaxOutputBits = 64;

struct State {
    Output out;
    std::array<StateId, 2> next{};

    friend bool operator==(const State&, const State&) = default;
};

/// A finitely-presented family of computers: a total bit-transition system
/// with one output per state. State q denotes the computer
/// x -> out(step*(q, x)).
///
/// Universes are immutable once built. The `minimized` flag is only ever set
/// by minimize() (directly or through load), so every flagged universe has no
/// two states denoting the same function.
class Universe {
public:
    Universe() = default;

    explicit Universe(std::vector<State> states) : states_(std::move(states)) {
        std::vector<std::string> violations;
        for (std::size_t q = 0; q < states_.size(); ++q) {
            for (int b = 0; b < 2; ++b) {
                if (states_[q].next[b] >= states_.size()) {
                    violations.push_back("state " + std::to_string(q) + ": t" + std::to_string(b) +
                                         " target " + std::to_string(states_[q].next[b]) +
                                         " is not a state");
                }
            }
        }
        if (!violations.empty()) throw ValidationError(std::move(violations));
    }

    [[nodiscard]] std::size_t size() const noexcept { return states_.size(); }
    [[nodiscard]] bool minimized() const noexcept { return minimized_; }
    [[nodiscard]] const std::vector<State>& states() const noexcept { return states_; }

    [[nodiscard]] StateId step(StateId q, int bit) const { return states_[q].next[bit ? 1 : 0]; }
    [[nodiscard]] const Output& out(StateId q) const { return states_[q].out; }

    /// step*(q, x)
    [[nodiscard]] StateId run(StateId q, const BitString& x) const {
        check_state(q);
        for (std::size_t i = 0; i < x.size(); ++i) q = states_[q].next[x[i]];
        return q;
    }

    void check_state(StateId q) const {
        if (q >= states_.size()) {
            throw DomainError("unknown state " + std::to_string(q) + " (universe has " +
                              std::to_string(states_.size()) + " states)");
        }
    }

    void require_minimized(const char* operation) const {
        if (!minimized_) throw ContractError(std::string(operation) + " requires a minimized universe");
    }

    /// Distinct outputs occurring in the universe, in Output order.
    [[nodiscard]] std::vector<Output> output_alphabet() const {
        std::set<Output> seen;
        for (const auto& s : states_) seen.insert(s.out);
        return {seen.begin(), seen.end()};
    }

    friend bool operator==(const Universe& a, const Universe& b) { return a.states_ == b.states_; }

private:
    friend struct MinimizeAccess;
    std::vector<State> states_;
    bool minimized_ = false;
};

inline Output evaluate(const Universe& u, StateId c, const BitString& x) { return u.out(u.run(c, x)); }

struct Minimized {
    Universe universe;
    std::vector<StateId> map; // original state -> minimized state
};

struct MinimizeAccess {
    static void mark(Universe& u) { u.minimized_ = true; }
};

/// Moore partition refinement: start from the partition induced by `out`,
/// split blocks by the blocks of both successors until nothing changes.
/// Blocks are numbered by first occurrence, so the minimized order follows
/// the original order and a minimal input maps by identity.
inline Minimized minimize(const Universe& u) {
    const std::size_t n = u.size();
    std::vector<StateId> block(n);
    std::size_t count = 0;
    {
        std::map<Output, StateId> ids;
        for (StateId q = 0; q < n; ++q) {
            auto [it, inserted] = ids.try_emplace(u.out(q), ids.size());
            block[q] = it->second;
        }
        count = ids.size();
    }
    while (true) {
        std::map<std::array<StateId, 3>, StateId> ids;
        std::vector<StateId> next(n);
        for (StateId q = 0; q < n; ++q) {
            std::array<StateId, 3> signature{block[q], block[u.step(q, 0)], block[u.step(q, 1)]};
            auto [it, inserted] = ids.try_emplace(signature, ids.size());
            next[q] = it->second;
        }
        block = std::move(next);
        if (ids.size() == count) break;
        count = ids.size();
    }
    std::vector<State> states(count);
    std::vector<bool> filled(count, false);
    for (StateId q = 0; q < n; ++q) {
        if (filled[block[q]]) continue;
        filled[block[q]] = true;
        states[block[q]] = State{u.out(q), {block[u.step(q, 0)], block[u.step(q, 1)]}};
    }
    Minimized result{Universe(std::move(states)), std::move(block)};
    MinimizeAccess::mark(result.universe);
    return result;
}

/// True iff step*(c, x) = step*(d, x) for every |x| = k. On a minimized
/// universe this is exactly "C(x) = D(x) for all |x| >= k".
inline bool k_equivalent(const Universe& u, StateId c, StateId d, std::size_t k) {
    u.require_minimized("k_equivalent");
    u.check_state(c);
    u.check_state(d);
    std::set<std::pair<StateId, StateId>> frontier;
    if (c != d) frontier.emplace(std::min(c, d), std::max(c, d));
    for (std::size_t i = 0; i < k && !frontier.empty(); ++i) {
        std::set<std::pair<StateId, StateId>> next;
        for (auto [a, b] : frontier) {
            for (int bit = 0; bit < 2; ++bit) {
                StateId x = u.step(a, bit);
                StateId y = u.step(b, bit);
                if (x != y) next.emplace(std::min(x, y), std::max(x, y));
            }
        }
        if (next == frontier) return false; // a non-diagonal cycle: never merges
        frontier = std::move(next);
    }
    return frontier.empty();
}

/// k large enough that k_equivalent at this k decides "k-equivalent for
/// some k": the non-diagonal part of the pair graph has fewer nodes.
inline std::size_t eventual_equivalence_depth(const Universe& u) {
    return u.size() * (u.size() + 1) / 2 + 1;
}

/// Minimized disjoint union of two universes, with both embeddings. Two
/// states (from either side) denote the same function iff they map to the
/// same state.
struct Embedding {
    Universe universe;
    std::vector<StateId> left;
    std::vector<StateId> right;
};

inline Embedding embed(const Universe& a, const Universe& b) {
    std::vector<State> states = a.states();
    const std::size_t offset = a.size();
    for (const State& s : b.states()) {
        states.push_back(State{s.out, {s.next[0] + offset, s.next[1] + offset}});
    }
    Minimized m = minimize(Universe(std::move(states)));
    Embedding e{std::move(m.universe), {}, {}};
    e.left.assign(m.map.begin(), m.map.begin() + static_cast<std::ptrdiff_t>(offset));
    e.right.assign(m.map.begin() + static_cast<std::ptrdiff_t>(offset), m.map.end());
    return e;
}

inline bool functionally_equal(const Universe& a, StateId c, const Universe& b, StateId d) {
    a.check_state(c);
    b.check_state(d);
    Embedding e = embed(a, b);
    return e.left[c] == e.right[d];
}

/// States reachable from q (q itself included, via the empty input).
inline std::vector<bool> reachable_from(const Universe& u, StateId q) {
    std::vector<bool> seen(u.size(), false);
    std::vector<StateId> stack{q};
    seen[q] = true;
    while (!stack.empty()) {
        StateId s = stack.back();
        stack.pop_back();
        for (int b = 0; b < 2; ++b) {
            StateId t = u.step(s, b);
            if (!seen[t]) {
                seen[t] = true;
                stack.push_back(t);
            }
        }
    }
    return seen;
}

struct Restriction {
    Universe universe;
    std::vector<std::optional<StateId>> map; // old -> new, nullopt if dropped
};

/// The forward-closed sub-universe generated by `roots`, in original order.
/// Forward-closed subsets of a minimized universe stay minimized.
inline Restriction restrict_to_reachable(const Universe& u, std::span<const StateId> roots) {
    std::vector<bool> keep(u.size(), false);
    for (StateId r : roots) {
        auto seen = reachable_from(u, r);
        for (std::size_t i = 0; i < seen.size(); ++i) keep[i] = keep[i] || seen[i];
    }
    Restriction result;
    result.map.assign(u.size(), std::nullopt);
    StateId next = 0;
    for (StateId q = 0; q < u.size(); ++q) {
        if (keep[q]) result.map[q] = next++;
    }
    std::vector<State> states;
    for (StateId q = 0; q < u.size(); ++q) {
        if (!keep[q]) continue;
        states.push_back(State{u.out(q), {*result.map[u.step(q, 0)], *result.map[u.step(q, 1)]}});
    }
    result.universe = Universe(std::move(states));
    if (u.minimized()) MinimizeAccess::mark(result.universe);
    return result;
}

} // namespace emuprob

#pragma once

#include <algorithm>
#include <deque>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "emuprob/universe.hpp"

namespace emuprob {

namespace detail {

/// Strongly connected components of the graph restricted to `inside`
/// (Tarjan, iterative). Returns component id per state, -1 outside.
inline std::vector<long> restricted_scc(const Universe& u, const std::vector<bool>& inside) {
    const std::size_t n = u.size();
    std::vector<long> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<StateId> stack;
    long counter = 0, components = 0;
    for (StateId root = 0; root < n; ++root) {
        if (!inside[root] || index[root] != -1) continue;
        std::vector<std::pair<StateId, int>> work{{root, 0}};
        while (!work.empty()) {
            auto& [v, edge] = work.back();
            if (edge == 0 && index[v] == -1) {
                index[v] = low[v] = counter++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            if (edge < 2) {
                StateId w = u.step(v, edge);
                ++edge;
                if (!inside[w]) continue;
                if (index[w] == -1) {
                    work.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                StateId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = components;
                } while (w != v);
                ++components;
            }
            StateId finished = v;
            work.pop_back();
            if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[finished]);
        }
    }
    return comp;
}

/// Period of q in the graph restricted to `inside`: gcd of the lengths of
/// closed walks through q, nullopt if q has none.
inline std::optional<std::size_t> restricted_period(const Universe& u, const std::vector<bool>& inside, StateId q) {
    auto comp = restricted_scc(u, inside);
    const long c = comp[q];
    std::vector<long> level(u.size(), -1);
    std::deque<StateId> queue{q};
    level[q] = 0;
    std::size_t g = 0;
    bool has_cycle = false;
    while (!queue.empty()) {
        StateId v = queue.front();
        queue.pop_front();
        for (int b = 0; b < 2; ++b) {
            StateId w = u.step(v, b);
            if (!inside[w] || comp[w] != c) continue;
            if (level[w] == -1) {
                level[w] = level[v] + 1;
                queue.push_back(w);
            } else {
                has_cycle = true;
                long diff = level[v] + 1 - level[w];
                g = std::gcd(g, static_cast<std::size_t>(diff < 0 ? -diff : diff));
            }
        }
    }
    if (!has_cycle) return std::nullopt;
    return g;
}

} // namespace detail

/// An explicit computer set Phi inside a minimized universe. Structural flags
/// are computed once at construction; the set is immutable afterwards.
class ComputerSet {
public:
    ComputerSet(std::shared_ptr<const Universe> universe, std::vector<StateId> members)
        : universe_(std::move(universe)), members_(std::move(members)) {
        universe_->require_minimized("ComputerSet");
        std::sort(members_.begin(), members_.end());
        members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
        inside_.assign(universe_->size(), false);
        position_.assign(universe_->size(), std::nullopt);
        for (std::size_t i = 0; i < members_.size(); ++i) {
            universe_->check_state(members_[i]);
            inside_[members_[i]] = true;
            position_[members_[i]] = i;
        }
        compute_flags();
    }

    ComputerSet(const Universe& universe, std::vector<StateId> members)
        : ComputerSet(std::make_shared<const Universe>(universe), std::move(members)) {}

    static ComputerSet all(std::shared_ptr<const Universe> universe) {
        std::vector<StateId> members(universe->size());
        std::iota(members.begin(), members.end(), StateId{0});
        return ComputerSet(std::move(universe), std::move(members));
    }
    static ComputerSet all(const Universe& universe) { return all(std::make_shared<const Universe>(universe)); }

    [[nodiscard]] const Universe& universe() const noexcept { return *universe_; }
    [[nodiscard]] const std::shared_ptr<const Universe>& universe_ptr() const noexcept { return universe_; }
    [[nodiscard]] std::span<const StateId> members() const noexcept { return members_; }
    [[nodiscard]] std::size_t size() const noexcept { return members_.size(); }
    [[nodiscard]] bool empty() const noexcept { return members_.empty(); }
    [[nodiscard]] bool contains(StateId q) const { return q < inside_.size() && inside_[q]; }
    [[nodiscard]] const std::vector<bool>& indicator() const noexcept { return inside_; }

    /// Row/column index of q in the member order.
    [[nodiscard]] std::size_t index_of(StateId q) const {
        if (!contains(q)) throw DomainError("state " + std::to_string(q) + " is not a member of the set");
        return *position_[q];
    }

    /// Both branching conditions hold (see is_branching).
    [[nodiscard]] bool branching() const noexcept { return branching_; }
    /// Phi has at least one Phi-universal member.
    [[nodiscard]] bool connected() const noexcept { return connected_; }
    /// Every member emulates every member.
    [[nodiscard]] bool irreducible() const noexcept { return irreducible_; }
    /// Common period of the members when irreducible; nullopt otherwise or
    /// when no member can return to itself.
    [[nodiscard]] std::optional<std::size_t> period() const noexcept { return period_; }
    [[nodiscard]] bool aperiodic() const noexcept { return irreducible_ && period_ == std::size_t{1}; }

    friend bool operator==(const ComputerSet& a, const ComputerSet& b) {
        return a.members_ == b.members_ && *a.universe_ == *b.universe_;
    }

private:
    void compute_flags();

    std::shared_ptr<const Universe> universe_;
    std::vector<StateId> members_;
    std::vector<bool> inside_;
    std::vector<std::optional<std::size_t>> position_;
    bool branching_ = false;
    bool connected_ = false;
    bool irreducible_ = false;
    std::optional<std::size_t> period_;
};

/// step*(c, x); on a minimized universe this is the computer C emulates via x.
inline StateId emulate_via(const Universe& u, StateId c, const BitString& x) {
    u.require_minimized("emulate_via");
    return u.run(c, x);
}

/// reach[a][b]: some input (possibly empty) takes a to b.
inline std::vector<std::vector<bool>> reachability(const Universe& u) {
    std::vector<std::vector<bool>> reach(u.size());
    for (StateId q = 0; q < u.size(); ++q) reach[q] = reachable_from(u, q);
    return reach;
}

/// Phi^U: members that emulate every member.
inline ComputerSet universal_members(const ComputerSet& phi) {
    const Universe& u = phi.universe();
    std::vector<StateId> result;
    for (StateId c : phi.members()) {
        auto seen = reachable_from(u, c);
        if (std::all_of(phi.members().begin(), phi.members().end(), [&](StateId d) { return seen[d]; })) {
            result.push_back(c);
        }
    }
    return ComputerSet(phi.universe_ptr(), std::move(result));
}

/// The closure of Phi^U: every universe state that emulates all of Phi and is
/// emulated by some member of Phi.
inline ComputerSet closure_universal(const ComputerSet& phi) {
    const Universe& u = phi.universe();
    std::vector<bool> from_phi(u.size(), false);
    for (StateId x : phi.members()) {
        auto seen = reachable_from(u, x);
        for (StateId q = 0; q < u.size(); ++q) from_phi[q] = from_phi[q] || seen[q];
    }
    std::vector<StateId> result;
    for (StateId c = 0; c < u.size(); ++c) {
        if (!from_phi[c]) continue;
        auto seen = reachable_from(u, c);
        if (std::all_of(phi.members().begin(), phi.members().end(), [&](StateId d) { return seen[d]; })) {
            result.push_back(c);
        }
    }
    return ComputerSet(phi.universe_ptr(), std::move(result));
}

/// (i) no member reaches a member through a non-member state, and
/// (ii) every member reaches some member by a non-empty input.
inline bool is_branching(const Universe& u, const std::vector<bool>& inside, std::span<const StateId> members) {
    // (i): flood the outside region entered directly from members; touching
    // a member again is a violation.
    std::vector<bool> seen(u.size(), false);
    std::vector<StateId> stack;
    for (StateId c : members) {
        for (int b = 0; b < 2; ++b) {
            StateId t = u.step(c, b);
            if (!inside[t] && !seen[t]) {
                seen[t] = true;
                stack.push_back(t);
            }
        }
    }
    while (!stack.empty()) {
        StateId s = stack.back();
        stack.pop_back();
        for (int b = 0; b < 2; ++b) {
            StateId t = u.step(s, b);
            if (inside[t]) return false;
            if (!seen[t]) {
                seen[t] = true;
                stack.push_back(t);
            }
        }
    }
    // (ii)
    for (StateId c : members) {
        bool found = false;
        std::vector<bool> visited(u.size(), false);
        std::vector<StateId> todo{u.step(c, 0), u.step(c, 1)};
        while (!todo.empty() && !found) {
            StateId s = todo.back();
            todo.pop_back();
            if (visited[s]) continue;
            visited[s] = true;
            if (inside[s]) found = true;
            todo.push_back(u.step(s, 0));
            todo.push_back(u.step(s, 1));
        }
        if (!found) return false;
    }
    return true;
}

inline bool is_branching(const ComputerSet& phi) {
    return is_branching(phi.universe(), phi.indicator(), phi.members());
}

inline void ComputerSet::compute_flags() {
    const Universe& u = *universe_;
    branching_ = is_branching(u, inside_, members_);
    connected_ = false;
    irreducible_ = !members_.empty();
    for (StateId c : members_) {
        auto seen = reachable_from(u, c);
        bool universal = std::all_of(members_.begin(), members_.end(), [&](StateId d) { return seen[d]; });
        connected_ = connected_ || universal;
        irreducible_ = irreducible_ && universal;
    }
    period_.reset();
    if (irreducible_) period_ = detail::restricted_period(u, inside_, members_.front());
}

/// The Phi-tree of c truncated at `depth`: all x with |x| <= depth and
/// step*(c, x) in Phi, in shortlex order, with the state each one reaches.
struct PhiTree {
    StateId root = 0;
    std::size_t depth = 0;
    std::vector<BitString> nodes;
    std::vector<StateId> states;

    [[nodiscard]] std::vector<BitString> level(std::size_t d) const {
        std::vector<BitString> result;
        for (const auto& x : nodes) {
            if (x.size() == d) result.push_back(x);
        }
        return result;
    }
};

inline constexpr std::size_t kDefaultEnumerationCap = 20;

inline PhiTree phi_tree(StateId c, const ComputerSet& phi, std::size_t depth,
                        std::size_t cap = kDefaultEnumerationCap) {
    if (!phi.branching()) throw ContractError("phi_tree requires a branching set");
    if (!phi.contains(c)) throw DomainError("phi_tree root " + std::to_string(c) + " is not a member");
    if (depth > cap) throw ResourceError("phi_tree depth " + std::to_string(depth) + " exceeds cap " + std::to_string(cap));
    const Universe& u = phi.universe();
    PhiTree tree{c, depth, {BitString()}, {c}};
    std::size_t begin = 0;
    for (std::size_t d = 0; d < depth; ++d) {
        const std::size_t end = tree.nodes.size();
        for (std::size_t i = begin; i < end; ++i) {
            for (int b = 0; b < 2; ++b) {
                StateId next = u.step(tree.states[i], b);
                if (!phi.contains(next)) continue;
                BitString x = tree.nodes[i];
                x.push_back(b);
                tree.nodes.push_back(std::move(x));
                tree.states.push_back(next);
            }
        }
        begin = end;
    }
    return tree;
}

/// Shortest x with step*(c, x) = target(state); breadth first with bit 0
/// expanded before bit 1, so the witness is lexicographically least among
/// the shortest ones.
template <typename Target>
std::optional<BitString> shortest_witness(const Universe& u, StateId c, Target&& target,
                                          std::optional<std::size_t> max_len = std::nullopt) {
    u.check_state(c);
    std::vector<std::optional<std::pair<StateId, int>>> parent(u.size());
    std::vector<bool> seen(u.size(), false);
    std::vector<std::size_t> dist(u.size(), 0);
    std::deque<StateId> queue{c};
    seen[c] = true;
    auto witness = [&](StateId q) {
        BitString x;
        std::vector<int> bits;
        while (parent[q]) {
            bits.push_back(parent[q]->second);
            q = parent[q]->first;
        }
        for (auto it = bits.rbegin(); it != bits.rend(); ++it) x.push_back(*it);
        return x;
    };
    while (!queue.empty()) {
        StateId q = queue.front();
        queue.pop_front();
        if (target(q)) return witness(q);
        if (max_len && dist[q] >= *max_len) continue;
        for (int b = 0; b < 2; ++b) {
            StateId t = u.step(q, b);
            if (seen[t]) continue;
            seen[t] = true;
            parent[t] = std::make_pair(q, b);
            dist[t] = dist[q] + 1;
            queue.push_back(t);
        }
    }
    return std::nullopt;
}

/// Lexicographically least shortest x with C ->x D; nullopt = unreachable.
inline std::optional<BitString> emulation_witness(const Universe& u, StateId c, StateId d) {
    u.require_minimized("emulation_complexity");
    u.check_state(d);
    return shortest_witness(u, c, [d](StateId q) { return q == d; });
}

/// K_C(D); nullopt when C does not emulate D.
inline std::optional<std::size_t> emulation_complexity(const Universe& u, StateId c, StateId d) {
    auto w = emulation_witness(u, c, d);
    if (!w) return std::nullopt;
    return w->size();
}

inline std::optional<BitString> kolmogorov_witness(const Universe& u, StateId c, const Output& s, std::size_t max_len) {
    u.require_minimized("kolmogorov_complexity");
    return shortest_witness(u, c, [&](StateId q) { return u.out(q) == s; }, max_len);
}

/// K_C(s) = min |x| with C(x) = s, searched up to max_len; nullopt = not found.
inline std::optional<std::size_t> kolmogorov_complexity(const Universe& u, StateId c, const Output& s,
                                                        std::size_t max_len) {
    auto w = kolmogorov_witness(u, c, s, max_len);
    if (!w) return std::nullopt;
    return w->size();
}

} // namespace emuprob

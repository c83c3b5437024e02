#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "emuprob/emulation.hpp"
#include "emuprob/markov.hpp"
#include "emuprob/universe.hpp"
#include "emuprob/virus_chain.hpp"

namespace emuprob {

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

/// A computer set together with its distinguished starting computer.
struct Fixture {
    ComputerSet phi;
    StateId root = 0;
};

namespace detail {

inline std::shared_ptr<const Universe> minimal(std::vector<State> states) {
    Minimized m = minimize(Universe(std::move(states)));
    if (m.universe.size() != m.map.size()) throw InternalError("fixture is not minimal");
    return std::make_shared<const Universe>(std::move(m.universe));
}

inline Output bits(const char* s) { return Output::parse(s); }

} // namespace detail

/// A(out "0"): 0 -> A, 1 -> B;  B(out "1"): both bits -> A.
inline Fixture two_state_fixture() {
    auto u = detail::minimal({{detail::bits("0"), {0, 1}}, {detail::bits("1"), {0, 0}}});
    return {ComputerSet::all(u), 0};
}

/// Seven states: C branches to C0 and D = C1; C0 branches to C00 and C01;
/// D reaches only E = C10 inside Phi. C11 and the other dead ends fall into
/// an Undefined sink outside Phi, and every depth-3 node returns to C.
inline Fixture figure3_fixture() {
    const Output undef = Output::undefined();
    auto u = detail::minimal({
        {detail::bits(""), {1, 2}},    // 0: C
        {detail::bits("0"), {3, 4}},   // 1: C->0
        {detail::bits("1"), {5, 6}},   // 2: D = C->1
        {detail::bits("00"), {6, 0}},  // 3: C->00
        {detail::bits("01"), {0, 6}},  // 4: C->01
        {detail::bits("10"), {0, 0}},  // 5: E = C->10
        {undef, {6, 6}},               // 6: C->11, outside Phi
    });
    return {ComputerSet(u, {0, 1, 2, 3, 4, 5}), 0};
}

/// States (f, w) for the two labelings f of the last bit read (identity and
/// swapped) and the last bit w: 0 keeps f, 1 swaps it, out(f, w) = f(w).
/// Ids: (id,0)=0, (id,1)=1, (sw,0)=2, (sw,1)=3.
inline Fixture toggle_universe() {
    auto u = detail::minimal({
        {detail::bits("0"), {0, 3}},
        {detail::bits("1"), {0, 3}},
        {detail::bits("1"), {2, 1}},
        {detail::bits("0"), {2, 1}},
    });
    return {ComputerSet::all(u), 0};
}

/// Single state looping on both bits.
inline Fixture self_loop_fixture(Output out = Output::parse("0")) {
    auto u = detail::minimal({{std::move(out), {0, 0}}});
    return {ComputerSet::all(u), 0};
}

/// P <-> Q on every bit: period 2.
inline Fixture two_cycle_fixture() {
    auto u = detail::minimal({{detail::bits("0"), {1, 1}}, {detail::bits("1"), {0, 0}}});
    return {ComputerSet::all(u), 0};
}

// ---------------------------------------------------------------------------
// Prefix-constant computers and U_bad
// ---------------------------------------------------------------------------

/// Finite prefix-free list of (program, output) pairs.
class PrefixProgramTable {
public:
    PrefixProgramTable() = default;
    explicit PrefixProgramTable(std::vector<std::pair<BitString, BitString>> entries) : entries_(std::move(entries)) {
        std::vector<std::string> violations;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            for (std::size_t j = i + 1; j < entries_.size(); ++j) {
                const BitString& a = entries_[i].first;
                const BitString& b = entries_[j].first;
                if (b.starts_with(a) || a.starts_with(b)) {
                    const bool a_first = a.size() <= b.size();
                    violations.push_back("program \"" + (a_first ? a : b).str() + "\" is a prefix of \"" +
                                         (a_first ? b : a).str() + "\"");
                }
            }
        }
        if (!violations.empty()) throw ValidationError(std::move(violations));
    }

    [[nodiscard]] const std::vector<std::pair<BitString, BitString>>& entries() const noexcept { return entries_; }

    /// sum over programs of 2^-|p|
    [[nodiscard]] Dyadic kraft_sum() const {
        Dyadic sum;
        for (const auto& [p, out] : entries_) sum += Dyadic::pow2_inverse(p.size());
        return sum;
    }

private:
    std::vector<std::pair<BitString, BitString>> entries_;
};

struct ConstructedComputer {
    std::shared_ptr<const Universe> universe;
    StateId root = 0;
};

/// Tree machine for a prefix table: Undefined until a program has been read
/// completely, then that program's output forever; inputs leaving the table
/// fall into an Undefined sink.
inline ConstructedComputer prefix_constant(const PrefixProgramTable& table) {
    std::map<BitString, StateId> node;   // proper prefixes of programs
    std::map<BitString, BitString> leaf; // program -> output
    for (const auto& [p, out] : table.entries()) {
        leaf[p] = out;
        for (std::size_t k = 0; k < p.size(); ++k) node.try_emplace(p.prefix(k), 0);
    }
    std::vector<State> states;
    const StateId sink = 0;
    states.push_back({Output::undefined(), {sink, sink}});
    std::map<BitString, StateId> leaf_state;
    for (const auto& [p, out] : leaf) {
        StateId id = states.size();
        leaf_state[p] = id;
        states.push_back({Output(out), {id, id}});
    }
    for (auto& [prefix, id] : node) id = states.size(), states.push_back({Output::undefined(), {sink, sink}});
    for (const auto& [prefix, id] : node) {
        for (int b = 0; b < 2; ++b) {
            BitString child = prefix;
            child.push_back(b);
            if (auto it = leaf_state.find(child); it != leaf_state.end()) {
                states[id].next[b] = it->second;
            } else if (auto jt = node.find(child); jt != node.end()) {
                states[id].next[b] = jt->second;
            }
        }
    }
    StateId root = sink;
    if (auto it = leaf_state.find(BitString()); it != leaf_state.end()) root = it->second;
    if (auto it = node.find(BitString()); it != node.end()) root = it->second;
    Minimized m = minimize(Universe(std::move(states)));
    return {std::make_shared<const Universe>(std::move(m.universe)), m.map[root]};
}

struct AdjoinedBad {
    std::shared_ptr<const Universe> universe;
    StateId bad = 0;
    std::vector<StateId> map; // states of the input universe -> new universe
};

/// U_bad: Undefined on the empty input and on 0y (y non-empty), s on "0",
/// and U_nice(y) on 1y.
inline AdjoinedBad adjoin_bad(const Universe& u, StateId nice, const BitString& s) {
    u.check_state(nice);
    std::vector<State> states = u.states();
    const StateId bad = states.size();
    const StateId emit = bad + 1;
    const StateId sink = bad + 2;
    states.push_back({Output::undefined(), {emit, nice}});
    states.push_back({Output(s), {sink, sink}});
    states.push_back({Output::undefined(), {sink, sink}});
    Minimized m = minimize(Universe(std::move(states)));
    AdjoinedBad result{std::make_shared<const Universe>(std::move(m.universe)), m.map[bad], {}};
    result.map.assign(m.map.begin(), m.map.begin() + static_cast<std::ptrdiff_t>(u.size()));
    return result;
}

// ---------------------------------------------------------------------------
// Virus machines
// ---------------------------------------------------------------------------

struct VirusMachines {
    std::shared_ptr<const Universe> universe;
    std::vector<StateId> machines;         // machines[i-1] is M_i
    std::vector<StateId> reference_map;    // reference universe -> combined
    StateId reference = 0;

    [[nodiscard]] StateId machine(std::size_t i) const { return machines.at(i - 1); }
};

/// Concrete M_1..M_max: M_i reads a block of i bits (counter states
/// remember position and whether the block is still all zeros), goes to the
/// reference computer on 0^i and to M_{i+1} otherwise. M_max's blocks lead
/// back to M_max. out(M_i) = 1^{i-1}, as do its counter states.
inline VirusMachines virus_machines(std::size_t max_index, const Universe& reference_universe, StateId reference) {
    virus_chain(max_index);
    reference_universe.check_state(reference);
    // Layout: for block i, position 0 is M_i; positions j in [1, i) come in
    // pairs (still zero, not zero).
    std::vector<StateId> block_start(max_index + 2, 0);
    StateId next_id = 0;
    for (std::size_t i = 1; i <= max_index; ++i) {
        block_start[i] = next_id;
        next_id += 1 + 2 * (i - 1);
    }
    const StateId offset = next_id;
    auto counter = [&](std::size_t i, std::size_t j, bool zero) -> StateId {
        if (j == 0) return block_start[i];
        return block_start[i] + 1 + 2 * (j - 1) + (zero ? 0 : 1);
    };
    const StateId ref = offset + reference;
    std::vector<State> states(offset);
    for (std::size_t i = 1; i <= max_index; ++i) {
        const Output out(BitString::repeat(1, i - 1));
        const StateId after = i < max_index ? block_start[i + 1] : block_start[max_index];
        for (std::size_t j = 0; j < i; ++j) {
            for (int zero = 0; zero < 2; ++zero) {
                if (j == 0 && !zero) continue;
                StateId id = counter(i, j, zero != 0);
                states[id].out = out;
                for (int b = 0; b < 2; ++b) {
                    const bool still_zero = zero && b == 0;
                    if (j + 1 == i) {
                        states[id].next[b] = still_zero ? ref : after;
                    } else {
                        states[id].next[b] = counter(i, j + 1, still_zero);
                    }
                }
            }
        }
    }
    for (const State& s : reference_universe.states()) {
        states.push_back({s.out, {s.next[0] + offset, s.next[1] + offset}});
    }
    Minimized m = minimize(Universe(std::move(states)));
    VirusMachines result;
    result.universe = std::make_shared<const Universe>(std::move(m.universe));
    for (std::size_t i = 1; i <= max_index; ++i) result.machines.push_back(m.map[block_start[i]]);
    for (StateId q = 0; q < reference_universe.size(); ++q) result.reference_map.push_back(m.map[offset + q]);
    result.reference = m.map[ref];
    return result;
}

// ---------------------------------------------------------------------------
// Synchronizing words
// ---------------------------------------------------------------------------

struct SynchronizedSet {
    ComputerSet phi;
    StateId reference = 0; // V: the state every occurrence of the word resets to
    BitString word;
};

/// Product of `base` with a window of the last |word|-1 input bits. Whenever
/// the last |word| bits equal the word, the base component resets to the
/// base's first universal computer; the reset state is V. Phi is the set of
/// states V emulates (all of which emulate V).
inline SynchronizedSet synchronizing_universe(const BitString& word, const Universe& base) {
    if (word.size() < 2) throw DomainError("synchronizing word needs length >= 2");
    base.require_minimized("synchronizing_universe");
    if (base.size() == 0) throw DomainError("empty base universe");
    ComputerSet everything = ComputerSet::all(base);
    ComputerSet universal = universal_members(everything);
    if (universal.empty()) throw DomainError("base universe has no universal computer");
    const StateId reset_to = universal.members().front();
    const std::size_t window = word.size() - 1;

    std::map<std::pair<StateId, BitString>, StateId> ids;
    std::vector<std::pair<StateId, BitString>> order;
    auto intern = [&](StateId q, const BitString& h) {
        auto [it, inserted] = ids.try_emplace({q, h}, order.size());
        if (inserted) order.emplace_back(q, h);
        return it->second;
    };
    for (StateId q = 0; q < base.size(); ++q) intern(q, BitString());
    std::vector<State> states;
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto [q, h] = order[i];
        State s{base.out(q), {}};
        for (int b = 0; b < 2; ++b) {
            BitString w = h;
            w.push_back(b);
            StateId target = (w.size() >= word.size() && w.ends_with(word)) ? reset_to : base.step(q, b);
            s.next[b] = intern(target, w.suffix(window));
        }
        states.push_back(s);
    }
    const StateId v_raw = ids.at({reset_to, word.suffix(window)});
    Minimized m = minimize(Universe(std::move(states)));
    auto u = std::make_shared<const Universe>(std::move(m.universe));
    const StateId v = m.map[v_raw];
    ComputerSet phi = closure_universal(ComputerSet(u, {v}));
    return {std::move(phi), v, word};
}

// ---------------------------------------------------------------------------
// Output and input transformations
// ---------------------------------------------------------------------------

/// Bijection on a finite output alphabet. Undefined is always fixed.
class OutputPermutation {
public:
    OutputPermutation() = default;
    explicit OutputPermutation(std::map<Output, Output> mapping) : map_(std::move(mapping)) {
        std::vector<std::string> violations;
        std::set<Output> images;
        for (const auto& [from, to] : map_) {
            images.insert(to);
            if (!from.defined() && to.defined()) violations.push_back("Undefined must map to Undefined");
            if (from.defined() && !to.defined()) violations.push_back(from.to_string() + " maps to Undefined");
            if (!map_.count(to)) violations.push_back("image " + to.to_string() + " is outside the alphabet");
        }
        if (images.size() != map_.size()) violations.push_back("mapping is not injective");
        if (!violations.empty()) throw ValidationError(std::move(violations));
        map_.try_emplace(Output::undefined(), Output::undefined());
    }

    /// Bitwise complement, on the given outputs and their complements.
    static OutputPermutation complement(const std::vector<Output>& outputs) {
        std::map<Output, Output> m;
        for (const Output& o : outputs) {
            if (!o.defined()) continue;
            m[o] = Output(o.value().complement());
            m[Output(o.value().complement())] = o;
        }
        return OutputPermutation(std::move(m));
    }

    static OutputPermutation identity(const std::vector<Output>& outputs) {
        std::map<Output, Output> m;
        for (const Output& o : outputs) m[o] = o;
        return OutputPermutation(std::move(m));
    }

    [[nodiscard]] bool covers(const Output& o) const { return map_.count(o) != 0; }

    [[nodiscard]] const Output& operator()(const Output& o) const {
        auto it = map_.find(o);
        if (it == map_.end()) throw DomainError("output " + o.to_string() + " is outside the permutation's alphabet");
        return it->second;
    }

    [[nodiscard]] OutputPermutation inverse() const {
        std::map<Output, Output> m;
        for (const auto& [from, to] : map_) m[to] = from;
        return OutputPermutation(std::move(m));
    }

    [[nodiscard]] std::vector<Output> alphabet() const {
        std::vector<Output> a;
        for (const auto& [from, to] : map_) a.push_back(from);
        return a;
    }

    /// Length of the orbit of o under repeated application.
    [[nodiscard]] std::size_t orbit_size(const Output& o) const {
        std::size_t n = 1;
        for (Output x = (*this)(o); !(x == o); x = (*this)(x)) ++n;
        return n;
    }

    [[nodiscard]] const std::map<Output, Output>& mapping() const noexcept { return map_; }

private:
    std::map<Output, Output> map_;
};

/// Permutation of {0,1}^n, stored as the images of the inputs in
/// lexicographic order.
class InputPermutationTable {
public:
    InputPermutationTable() = default;
    InputPermutationTable(std::size_t order, std::vector<BitString> table) : order_(order), table_(std::move(table)) {
        std::vector<std::string> violations;
        if (order_ == 0) violations.push_back("order must be at least 1");
        if (order_ > 16) throw UnsupportedError("input permutation order " + std::to_string(order_) + " is too large");
        const std::size_t count = std::size_t{1} << order_;
        if (table_.size() != count) {
            violations.push_back("table has " + std::to_string(table_.size()) + " entries, expected " + std::to_string(count));
        }
        std::set<BitString> images;
        for (const auto& t : table_) {
            if (t.size() != order_) violations.push_back("entry \"" + t.str() + "\" has the wrong length");
            images.insert(t);
        }
        if (images.size() != table_.size()) violations.push_back("table is not a bijection");
        if (!violations.empty()) throw ValidationError(std::move(violations));
    }

    static InputPermutationTable identity(std::size_t order) {
        std::vector<BitString> t;
        for_each_string(order, [&](const BitString& x) { t.push_back(x); });
        return {order, std::move(t)};
    }

    /// The order-1 bit flip.
    static InputPermutationTable flip() { return {1, {BitString::parse("1"), BitString::parse("0")}}; }

    [[nodiscard]] std::size_t order() const noexcept { return order_; }
    [[nodiscard]] const std::vector<BitString>& table() const noexcept { return table_; }

    [[nodiscard]] const BitString& operator()(const BitString& x) const {
        if (x.size() != order_) throw DomainError("input permutation applied to a string of the wrong length");
        return table_[x.to_index()];
    }

    /// Some input has its first bit changed (required of a genuine input
    /// transformation; the identity is not proper).
    [[nodiscard]] bool proper() const {
        for (std::size_t i = 0; i < table_.size(); ++i) {
            if (BitString::from_index(i, order_)[0] != table_[i][0]) return true;
        }
        return false;
    }

    [[nodiscard]] bool is_identity() const {
        for (std::size_t i = 0; i < table_.size(); ++i) {
            if (table_[i].to_index() != i) return false;
        }
        return true;
    }

    /// I_sigma on a whole string: permute its last `order` bits.
    [[nodiscard]] BitString apply_to_input(const BitString& s) const {
        if (s.size() < order_) return s;
        return s.prefix(s.size() - order_) + (*this)(s.suffix(order_));
    }

    [[nodiscard]] std::string describe() const {
        std::string text = "input[";
        for (std::size_t i = 0; i < table_.size(); ++i) text += (i ? "," : "") + table_[i].str();
        return text + "]";
    }

    friend bool operator==(const InputPermutationTable&, const InputPermutationTable&) = default;

private:
    std::size_t order_ = 0;
    std::vector<BitString> table_;
};

/// Every bijection of {0,1}^n in lexicographic order of tables.
inline std::vector<InputPermutationTable> all_input_permutations(std::size_t order) {
    if (order > 3) throw UnsupportedError("enumerating permutations of {0,1}^" + std::to_string(order));
    std::vector<std::uint64_t> perm(std::size_t{1} << order);
    std::iota(perm.begin(), perm.end(), std::uint64_t{0});
    std::vector<InputPermutationTable> result;
    do {
        std::vector<BitString> t;
        for (auto v : perm) t.push_back(BitString::from_index(v, order));
        result.emplace_back(order, std::move(t));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return result;
}

struct TransformedUniverse {
    std::shared_ptr<const Universe> universe;
    std::vector<StateId> map; // state C -> state of the transformed computer
};

/// sigma o C for every state: outputs relabelled, transitions untouched.
inline TransformedUniverse output_transform(const Universe& u, const OutputPermutation& sigma) {
    std::vector<State> states = u.states();
    for (State& s : states) s.out = sigma(s.out);
    Universe result(std::move(states));
    if (u.minimized()) MinimizeAccess::mark(result); // bijective relabelling keeps states distinct
    std::vector<StateId> map(u.size());
    std::iota(map.begin(), map.end(), StateId{0});
    return {std::make_shared<const Universe>(std::move(result)), std::move(map)};
}

/// I_sigma(C) realized as a delay line: a state (q, buf) has fed every bit
/// except the last |buf| <= n raw into q. Its output is q's output after
/// sigma(buf) when the buffer is full and after buf itself otherwise. The
/// result is minimized; map sends C to (C, empty buffer).
inline TransformedUniverse input_transform(const Universe& u, const InputPermutationTable& sigma) {
    const std::size_t n = sigma.order();
    const std::size_t buffers = (std::size_t{1} << (n + 1)) - 1;
    auto buffer_index = [](const BitString& buf) { return (std::size_t{1} << buf.size()) - 1 + buf.to_index(); };
    std::vector<BitString> buffer_of(buffers);
    for (std::size_t len = 0; len <= n; ++len) {
        for_each_string(len, [&](const BitString& b) { buffer_of[buffer_index(b)] = b; });
    }
    std::vector<State> states(u.size() * buffers);
    for (StateId q = 0; q < u.size(); ++q) {
        for (std::size_t k = 0; k < buffers; ++k) {
            const BitString& buf = buffer_of[k];
            State& s = states[q * buffers + k];
            s.out = buf.size() == n ? u.out(u.run(q, sigma(buf))) : u.out(u.run(q, buf));
            for (int b = 0; b < 2; ++b) {
                if (buf.size() < n) {
                    BitString next = buf;
                    next.push_back(b);
                    s.next[b] = q * buffers + buffer_index(next);
                } else {
                    BitString next = buf.suffix(n - 1);
                    next.push_back(b);
                    s.next[b] = u.step(q, buf[0]) * buffers + buffer_index(next);
                }
            }
        }
    }
    Minimized m = minimize(Universe(std::move(states)));
    std::vector<StateId> map(u.size());
    for (StateId q = 0; q < u.size(); ++q) map[q] = m.map[q * buffers];
    return {std::make_shared<const Universe>(std::move(m.universe)), std::move(map)};
}

/// I_sigma(C) = C, checked exactly: for every state q reachable from c and
/// every t in {0,1}^n, q's output after t equals its output after sigma(t).
inline bool input_symmetric(const Universe& u, StateId c, const InputPermutationTable& sigma) {
    auto reach = reachable_from(u, c);
    for (StateId q = 0; q < u.size(); ++q) {
        if (!reach[q]) continue;
        for (std::size_t i = 0; i < sigma.table().size(); ++i) {
            BitString t = BitString::from_index(i, sigma.order());
            if (!(u.out(u.run(q, t)) == u.out(u.run(q, sigma(t))))) return false;
        }
    }
    return true;
}

using Transform = std::variant<OutputPermutation, InputPermutationTable>;

inline std::string describe(const Transform& t) {
    if (const auto* sigma = std::get_if<OutputPermutation>(&t)) {
        std::string text = "output{";
        bool first = true;
        for (const auto& [from, to] : sigma->mapping()) {
            if (from == to) continue;
            text += (first ? "" : ",") + from.to_string() + "->" + to.to_string();
            first = false;
        }
        return text + "}";
    }
    return std::get<InputPermutationTable>(t).describe();
}

inline TransformedUniverse apply_transform(const Universe& u, const Transform& t) {
    if (const auto* sigma = std::get_if<OutputPermutation>(&t)) return output_transform(u, *sigma);
    return input_transform(u, std::get<InputPermutationTable>(t));
}

/// For each member C of Phi, a member k-equivalent to the transformed
/// computer T(C), if there is one (k = 0: functional equality). When several
/// qualify the smallest id is reported.
inline std::vector<std::optional<StateId>> locate_images(const ComputerSet& phi, const Transform& t, std::size_t k = 0) {
    const Universe& u = phi.universe();
    TransformedUniverse tu = apply_transform(u, t);
    Embedding e = embed(u, *tu.universe);
    std::vector<std::optional<StateId>> images;
    for (StateId c : phi.members()) {
        const StateId image = e.right[tu.map[c]];
        std::optional<StateId> found;
        for (StateId d : phi.members()) {
            if (k == 0 ? e.left[d] == image : k_equivalent(e.universe, e.left[d], image, k)) {
                found = d;
                break;
            }
        }
        images.push_back(found);
    }
    return images;
}

/// Phi contains T(C), up to k-equivalence, for every member C.
inline bool closed_under(const ComputerSet& phi, const Transform& t, std::size_t k = 0) {
    auto images = locate_images(phi, t, k);
    return std::all_of(images.begin(), images.end(), [](const auto& x) { return x.has_value(); });
}

struct ClosureResult {
    ComputerSet set;
    std::vector<bool> already_closed; // per transform, for the input set
    std::size_t rounds = 0;
};

/// Smallest superset of Phi closed under every transform (functional
/// equality), built by embedding transformed members into a growing
/// universe. Throws ResourceError naming the transform that pushed the
/// universe past `max_states`.
inline ClosureResult close_under(const ComputerSet& phi, const std::vector<Transform>& transforms,
                                 std::size_t max_states = 4096) {
    ClosureResult result{phi, {}, 0};
    for (const auto& t : transforms) result.already_closed.push_back(closed_under(phi, t));
    if (std::all_of(result.already_closed.begin(), result.already_closed.end(), [](bool b) { return b; })) {
        return result;
    }
    std::vector<StateId> members(phi.members().begin(), phi.members().end());
    Restriction start = restrict_to_reachable(phi.universe(), members);
    Universe u = start.universe;
    for (auto& m : members) m = *start.map[m];
    bool changed = true;
    while (changed) {
        changed = false;
        ++result.rounds;
        for (const auto& t : transforms) {
            TransformedUniverse tu = apply_transform(u, t);
            std::vector<StateId> roots;
            for (StateId m : members) roots.push_back(tu.map[m]);
            Restriction images = restrict_to_reachable(*tu.universe, roots);
            Embedding e = embed(u, images.universe);
            if (e.universe.size() > max_states) {
                throw ResourceError("closure exceeded " + std::to_string(max_states) + " states under " + describe(t));
            }
            std::set<StateId> next;
            for (StateId m : members) next.insert(e.left[m]);
            for (StateId m : members) next.insert(e.right[*images.map[tu.map[m]]]);
            if (next.size() != members.size()) changed = true;
            u = e.universe;
            members.assign(next.begin(), next.end());
        }
    }
    Restriction final_u = restrict_to_reachable(u, members);
    for (auto& m : members) m = *final_u.map[m];
    result.set = ComputerSet(std::make_shared<const Universe>(std::move(final_u.universe)), members);
    return result;
}

/// Every universe state that is eventually equivalent (k-equivalent for
/// some k) to a member is itself a member.
inline bool is_complete(const ComputerSet& phi) {
    const Universe& u = phi.universe();
    const std::size_t depth = eventual_equivalence_depth(u);
    for (StateId d = 0; d < u.size(); ++d) {
        if (phi.contains(d)) continue;
        for (StateId c : phi.members()) {
            if (k_equivalent(u, c, d, depth)) return false;
        }
    }
    return true;
}

/// Partition of Phi into k-equivalence classes and the class emulation matrix.
struct Quotient {
    std::size_t k = 0;
    std::vector<std::vector<StateId>> classes; // ordered by smallest member
    std::vector<std::size_t> class_of;         // member index -> class index
    Matrix matrix;

    [[nodiscard]] std::size_t class_of_state(const ComputerSet& phi, StateId q) const { return class_of[phi.index_of(q)]; }
};

inline Quotient quotient_k(const ComputerSet& phi, std::size_t k) {
    if (!phi.branching()) throw ContractError("quotient_k requires a branching set");
    const Universe& u = phi.universe();
    for (StateId d = 0; d < u.size(); ++d) {
        if (phi.contains(d)) continue;
        for (StateId c : phi.members()) {
            if (k_equivalent(u, c, d, k)) {
                throw ContractError("set is not complete: non-member " + std::to_string(d) + " is " + std::to_string(k) +
                                    "-equivalent to member " + std::to_string(c));
            }
        }
    }
    Quotient q;
    q.k = k;
    q.class_of.assign(phi.size(), phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (q.class_of[i] != phi.size()) continue;
        q.class_of[i] = q.classes.size();
        q.classes.push_back({phi.members()[i]});
        for (std::size_t j = i + 1; j < phi.size(); ++j) {
            if (q.class_of[j] == phi.size() && k_equivalent(u, phi.members()[i], phi.members()[j], k)) {
                q.class_of[j] = q.classes.size() - 1;
                q.classes.back().push_back(phi.members()[j]);
            }
        }
    }
    EmulationMatrix e = emulation_matrix(phi);
    const std::size_t m = q.classes.size();
    q.matrix.assign(m, std::vector<Rational>(m, Rational(0)));
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t r = 0; r < q.classes[a].size(); ++r) {
            std::vector<Rational> row(m, Rational(0));
            const std::size_t i = phi.index_of(q.classes[a][r]);
            for (std::size_t j = 0; j < phi.size(); ++j) row[q.class_of[j]] += e.at(i, j);
            if (r == 0) {
                q.matrix[a] = row;
            } else if (row != q.matrix[a]) {
                throw ContractError("class transition probabilities depend on the representative of class " +
                                    std::to_string(a));
            }
        }
    }
    return q;
}

/// Class stationary vector: sums of member stationary probabilities.
inline std::vector<Rational> class_stationary(const Quotient& q, const ComputerSet& phi, const std::vector<Rational>& pi) {
    std::vector<Rational> result(q.classes.size(), Rational(0));
    for (std::size_t i = 0; i < phi.size(); ++i) result[q.class_of[i]] += pi[i];
    return result;
}

/// All input permutations of order 1..n that leave the first member's
/// function unchanged. On an irreducible set the group is the same for every
/// member.
inline std::vector<InputPermutationTable> input_symmetry_group(const ComputerSet& phi, std::size_t n) {
    if (n > 3) throw UnsupportedError("input symmetry group beyond order 3");
    if (!phi.irreducible()) throw ContractError("input_symmetry_group requires an irreducible set");
    std::vector<InputPermutationTable> group;
    const StateId c = phi.members().front();
    for (std::size_t order = 1; order <= n; ++order) {
        for (auto& sigma : all_input_permutations(order)) {
            if (input_symmetric(phi.universe(), c, sigma)) group.push_back(std::move(sigma));
        }
    }
    return group;
}

} // namespace emuprob

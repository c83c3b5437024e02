#include <catch_amalgamated.hpp>

#include "emuprob/constructions.hpp"
#include "emuprob/random_universe.hpp"
#include "oracles.hpp"

using namespace emuprob;

namespace {

BitString B(const char* s) { return BitString::parse(s); }

std::vector<StateId> ids(const ComputerSet& phi) { return {phi.members().begin(), phi.members().end()}; }

// A loops into an absorbing constant z; z never returns.
std::shared_ptr<const Universe> funnel() {
    Minimized m = minimize(Universe({{Output::parse("0"), {0, 1}}, {Output::parse("1"), {1, 1}}}));
    return std::make_shared<const Universe>(m.universe);
}

} // namespace

TEST_CASE("emulate_via follows inputs") {
    auto f = two_state_fixture();
    const Universe& u = f.phi.universe();
    CHECK(emulate_via(u, 0, B("")) == 0);
    CHECK(emulate_via(u, 1, B("")) == 1);
    CHECK(emulate_via(u, 0, B("1")) == 1);
    CHECK(emulate_via(u, 1, B("1")) == 0);
    SplitMix64 rng(1);
    for (int t = 0; t < 200; ++t) {
        BitString x = BitString::from_index(rng.below(64), 6), y = BitString::from_index(rng.below(32), 5);
        for (StateId c = 0; c < 2; ++c) CHECK(emulate_via(u, c, x + y) == emulate_via(u, emulate_via(u, c, x), y));
    }
    Universe raw({{Output::parse("0"), {0, 0}}});
    CHECK_THROWS_AS(emulate_via(Universe(raw.states()), 0, B("1")), ContractError);
}

TEST_CASE("universal members") {
    auto loop = self_loop_fixture();
    CHECK(ids(universal_members(loop.phi)) == std::vector<StateId>{0});
    auto two = two_state_fixture();
    CHECK(ids(universal_members(two.phi)) == std::vector<StateId>{0, 1});
    auto u = funnel();
    CHECK(ids(universal_members(ComputerSet(u, {0, 1}))) == std::vector<StateId>{0});
}

TEST_CASE("closure of the universal members") {
    auto two = two_state_fixture();
    CHECK(ids(closure_universal(ComputerSet(two.phi.universe_ptr(), {0}))) == std::vector<StateId>{0, 1});
    auto u = funnel();
    // z is reachable but cannot emulate A
    CHECK(ids(closure_universal(ComputerSet(u, {0}))) == std::vector<StateId>{0});
    auto fig = figure3_fixture();
    auto closure = closure_universal(fig.phi);
    CHECK(ids(closure) == ids(fig.phi));
}

TEST_CASE("branching predicate") {
    auto two = two_state_fixture();
    CHECK(two.phi.branching());
    CHECK_FALSE(ComputerSet(two.phi.universe_ptr(), {0}).branching());
    CHECK(self_loop_fixture().phi.branching());
    CHECK(figure3_fixture().phi.branching());
    auto u = funnel();
    // leaving {A} through z is a dead end, never a detour back into the set
    CHECK(ComputerSet(u, {0}).branching());
    CHECK(ComputerSet(u, {1}).branching());
}

TEST_CASE("Phi-tree of the seven-state fixture") {
    auto fig = figure3_fixture();
    PhiTree t = phi_tree(fig.root, fig.phi, 3);
    CHECK(phi_tree(fig.root, fig.phi, 0).nodes == std::vector<BitString>{B("")});
    CHECK(t.level(1) == std::vector<BitString>{B("0"), B("1")});
    CHECK(t.level(2) == std::vector<BitString>{B("00"), B("01"), B("10")});
    CHECK(t.level(3) == std::vector<BitString>{B("001"), B("010"), B("100"), B("101")});
    CHECK_THROWS_AS(phi_tree(0, ComputerSet(two_state_fixture().phi.universe_ptr(), {0}), 2), ContractError);
    CHECK_THROWS_AS(phi_tree(6, fig.phi, 2), DomainError);
    CHECK_THROWS_AS(phi_tree(0, fig.phi, 21), ResourceError);
}

TEST_CASE("Phi-trees agree with brute force and are prefix closed") {
    SplitMix64 rng(17);
    for (int t = 0; t < 20; ++t) {
        ComputerSet phi = t % 2 ? random::core_with_sink(2 + rng.below(8), rng) : random::strongly_connected(2 + rng.below(8), rng);
        const Universe& u = phi.universe();
        for (StateId c : phi.members()) {
            PhiTree tree = phi_tree(c, phi, 6);
            std::set<BitString> nodes(tree.nodes.begin(), tree.nodes.end());
            std::size_t expected = 0;
            for (std::size_t len = 0; len <= 6; ++len) {
                for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
                    auto x = oracle::bits_of(v, len);
                    bool inside = oracle::in_tree(u, phi.indicator(), c, x);
                    CHECK(nodes.count(x) == (inside ? 1u : 0u));
                    expected += inside;
                }
            }
            CHECK(nodes.size() == expected);
            for (const auto& x : tree.nodes) {
                if (!x.empty()) CHECK(nodes.count(x.prefix(x.size() - 1)) == 1);
            }
            if (phi.size() == u.size()) CHECK(tree.nodes.size() == (std::size_t{1} << 7) - 1);
        }
    }
}

TEST_CASE("emulation complexity") {
    auto two = two_state_fixture();
    const Universe& u = two.phi.universe();
    CHECK(emulation_complexity(u, 0, 0) == 0u);
    CHECK(emulation_complexity(u, 0, 1) == 1u);
    CHECK(emulation_witness(u, 0, 1) == B("1"));
    auto f = funnel();
    CHECK_FALSE(emulation_complexity(*f, 1, 0).has_value());
}

TEST_CASE("Kolmogorov complexity") {
    const Universe u = two_state_fixture().phi.universe();
    CHECK(kolmogorov_complexity(u, 0, Output::parse("0"), 5) == 0u);
    CHECK(kolmogorov_complexity(u, 0, Output::parse("1"), 5) == 1u);
    CHECK_FALSE(kolmogorov_complexity(u, 0, Output::parse("11"), 5).has_value());
    CHECK_FALSE(kolmogorov_complexity(u, 0, Output::undefined(), 5).has_value());
}

TEST_CASE("shortest witnesses are the lexicographically least of their length") {
    auto fig = figure3_fixture();
    const Universe& u = fig.phi.universe();
    // C reaches C in 3 steps via 001, 010, 100, 101; the least is 001
    CHECK(kolmogorov_witness(u, 1, Output::parse(""), 4) == B("01"));
    CHECK(emulation_witness(u, 3, 0) == B("1"));
    CHECK(emulation_witness(u, 5, 0) == B("0"));
}

TEST_CASE("complexities agree with brute force and satisfy invariance") {
    SplitMix64 rng(23);
    for (int t = 0; t < 15; ++t) {
        ComputerSet phi = random::strongly_connected(2 + rng.below(7), rng);
        const Universe& u = phi.universe();
        const std::size_t n = u.size();
        for (StateId a = 0; a < n; ++a) {
            for (StateId b = 0; b < n; ++b) {
                auto k = emulation_complexity(u, a, b);
                REQUIRE(k.has_value());
                CHECK(k == oracle::shortest_to(u, a, b, n));
                for (StateId v = 0; v < n; ++v) CHECK(*k <= *emulation_complexity(u, a, v) + *emulation_complexity(u, v, b));
            }
            for (const Output& s : u.output_alphabet()) {
                auto ks = kolmogorov_complexity(u, a, s, n);
                CHECK(ks == oracle::shortest_output(u, a, s, n));
                for (StateId v = 0; v < n; ++v) {
                    CHECK(*ks <= *emulation_complexity(u, a, v) + *kolmogorov_complexity(u, v, s, n));
                }
            }
        }
    }
}

TEST_CASE("irreducibility matches universality and the closure of a connected set branches") {
    SplitMix64 rng(31);
    for (int t = 0; t < 40; ++t) {
        ComputerSet all = t % 2 ? random::core_with_sink(2 + rng.below(8), rng) : random::strongly_connected(2 + rng.below(8), rng);
        const Universe& u = all.universe();
        // random subset of states
        std::vector<StateId> pick;
        for (StateId q = 0; q < u.size(); ++q) {
            if (rng.bit()) pick.push_back(q);
        }
        if (pick.empty()) pick.push_back(0);
        ComputerSet phi(all.universe_ptr(), pick);
        ComputerSet universal = universal_members(phi);
        ComputerSet closure = closure_universal(phi);
        const bool equals_universal = ids(universal) == ids(phi);
        bool within_closure = true;
        for (StateId q : phi.members()) within_closure = within_closure && closure.contains(q);
        CHECK(phi.irreducible() == equals_universal);
        CHECK(phi.irreducible() == within_closure);
        for (StateId q : universal.members()) CHECK(closure.contains(q));
        if (phi.connected() && closure.size() >= 2) CHECK(closure.branching());
    }
}

TEST_CASE("cached flags match recomputation") {
    SplitMix64 rng(37);
    for (int t = 0; t < 30; ++t) {
        ComputerSet all = random::core_with_sink(2 + rng.below(8), rng);
        std::vector<StateId> pick;
        for (StateId q = 0; q < all.universe().size(); ++q) {
            if (rng.below(3)) pick.push_back(q);
        }
        if (pick.empty()) continue;
        ComputerSet phi(all.universe_ptr(), pick);
        CHECK(phi.branching() == is_branching(phi));
        CHECK(phi.connected() == !universal_members(phi).empty());
    }
}

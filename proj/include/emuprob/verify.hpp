#pragma once

#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "emuprob/constructions.hpp"
#include "emuprob/probability.hpp"
#include "emuprob/random_universe.hpp"
#include "emuprob/universe_io.hpp"

namespace emuprob::verify {

struct CheckResult {
    std::string suite;
    std::string name;
    bool passed = false;
    std::string detail;
};

struct Check {
    std::string name;
    std::function<std::string()> run; // empty string = pass, otherwise the violation
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"universe", "emulation", "markov", "constructions", "probability"};
    return names;
}

namespace detail {

inline std::vector<ComputerSet> sample_sets(std::uint64_t seed, std::size_t count, std::size_t max_states) {
    SplitMix64 rng(seed);
    std::vector<ComputerSet> sets;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t n = 2 + rng.below(max_states - 1);
        sets.push_back(i % 2 ? random::core_with_sink(n, rng) : random::strongly_connected(n, rng));
    }
    return sets;
}

inline std::vector<ComputerSet> positive_sets(std::uint64_t seed, std::size_t count, std::size_t max_states) {
    SplitMix64 rng(seed);
    std::vector<ComputerSet> sets;
    for (std::size_t i = 0; i < count; ++i) sets.push_back(random::positive_recurrent(2 + rng.below(max_states - 1), rng));
    return sets;
}

template <typename T>
std::string describe_mismatch(const std::string& what, const T& lhs, const T& rhs) {
    std::ostringstream os;
    os << what << ": " << lhs << " != " << rhs;
    return os.str();
}

inline std::vector<Check> universe_checks(std::uint64_t seed) {
    std::vector<Check> checks;
    checks.push_back({"minimize preserves functions and is idempotent", [seed] {
        SplitMix64 rng(seed);
        for (int t = 0; t < 30; ++t) {
            Universe raw(random::strongly_connected_graph(2 + rng.below(10), rng).states);
            Minimized m = minimize(raw);
            if (minimize(m.universe).universe.size() != m.universe.size()) return std::string("second pass shrank");
            for (StateId q = 0; q < raw.size(); ++q) {
                for (std::size_t len = 0; len <= 6; ++len) {
                    std::string bad;
                    for_each_string(len, [&](const BitString& x) {
                        if (!(evaluate(raw, q, x) == evaluate(m.universe, m.map[q], x))) bad = x.str();
                    });
                    if (!bad.empty()) return "state " + std::to_string(q) + " differs on " + bad;
                }
            }
        }
        return std::string();
    }});
    checks.push_back({"serialize/load round trip", [seed] {
        for (const auto& phi : sample_sets(seed, 10, 10)) {
            std::string text = serialize(phi.universe());
            if (!(load(text).universe == phi.universe())) return std::string("round trip changed the universe");
        }
        return std::string();
    }});
    checks.push_back({"k-equivalence is monotone in k", [seed] {
        for (const auto& phi : sample_sets(seed, 10, 8)) {
            const Universe& u = phi.universe();
            for (StateId c = 0; c < u.size(); ++c) {
                for (StateId d = 0; d < u.size(); ++d) {
                    for (std::size_t k = 0; k < 4; ++k) {
                        if (k_equivalent(u, c, d, k) && !k_equivalent(u, c, d, k + 1)) return std::string("lost equivalence");
                    }
                }
            }
        }
        return std::string();
    }});
    return checks;
}

inline std::vector<Check> emulation_checks(std::uint64_t seed) {
    std::vector<Check> checks;
    checks.push_back({"Phi-tree levels carry probability 1", [seed] {
        for (const auto& phi : sample_sets(seed, 10, 8)) {
            for (StateId c : phi.members()) {
                PhiTree tree = phi_tree(c, phi, 6);
                for (std::size_t d = 0; d <= 6; ++d) {
                    Dyadic sum;
                    for (const auto& x : tree.level(d)) sum += path_probability(c, phi, x);
                    if (!(sum == Dyadic::one())) return "level " + std::to_string(d) + " sums to " + sum.to_string();
                }
            }
        }
        return std::string();
    }});
    checks.push_back({"witnesses realize their targets", [seed] {
        for (const auto& phi : sample_sets(seed, 10, 8)) {
            const Universe& u = phi.universe();
            for (StateId c = 0; c < u.size(); ++c) {
                for (StateId d = 0; d < u.size(); ++d) {
                    auto w = emulation_witness(u, c, d);
                    if (w && u.run(c, *w) != d) return std::string("emulation witness misses its target");
                }
                for (const Output& s : u.output_alphabet()) {
                    auto w = kolmogorov_witness(u, c, s, 16);
                    if (w && !(evaluate(u, c, *w) == s)) return std::string("Kolmogorov witness misses its output");
                }
            }
        }
        return std::string();
    }});
    return checks;
}

inline std::vector<Check> markov_checks(std::uint64_t seed) {
    std::vector<Check> checks;
    checks.push_back({"tree and matrix n-step distributions agree", [seed] {
        for (const auto& phi : sample_sets(seed, 10, 8)) {
            for (StateId c : phi.members()) {
                for (std::size_t n = 0; n <= 6; ++n) {
                    auto tree = n_step_by_tree(c, phi, n);
                    auto matrix = n_step_computer(c, phi, n);
                    for (std::size_t i = 0; i < phi.size(); ++i) {
                        if (tree[i].to_rational() != matrix[i]) return describe_mismatch("n-step", tree[i].to_rational(), matrix[i]);
                    }
                }
            }
        }
        return std::string();
    }});
    checks.push_back({"stationary vector is fixed by the matrix", [seed] {
        for (const auto& phi : positive_sets(seed, 10, 10)) {
            auto st = stationary_exact(phi);
            if (row_times(st.pi, emulation_matrix(phi).entries) != st.pi) return std::string("pi E != pi");
            auto power = stationary_power(phi, Rational(1, 1000000000000000LL), 20000);
            for (std::size_t i = 0; i < phi.size(); ++i) {
                if (abs(power.values[i] - st.pi[i]) > Rational(1, 1000000000000LL)) return std::string("power iteration off");
            }
        }
        return std::string();
    }});
    checks.push_back({"walk traces depend only on the seed", [] {
        auto f = two_state_fixture();
        auto a = sample_walks(f.root, f.phi, 8, 64, 11, 1);
        auto b = sample_walks(f.root, f.phi, 8, 64, 11, 4);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (format_trace(a[i]) != format_trace(b[i])) return "trace " + std::to_string(i) + " differs";
        }
        return std::string();
    }});
    return checks;
}

inline std::vector<Check> construction_checks(std::uint64_t seed) {
    std::vector<Check> checks;
    checks.push_back({"virus blocks advance with probability 1 - 2^-i", [] {
        auto base = two_state_fixture();
        auto vm = virus_machines(6, base.phi.universe(), base.root);
        auto all = ComputerSet::all(vm.universe);
        for (std::size_t i = 1; i < 6; ++i) {
            auto d = n_step_by_tree(vm.machine(i), all, i);
            const Rational expected = Rational(1) - pow2_inverse(i);
            if (d[all.index_of(vm.machine(i + 1))].to_rational() != expected) return "block " + std::to_string(i);
        }
        return std::string();
    }});
    checks.push_back({"synchronizing words pin the reset state", [] {
        auto base = two_state_fixture();
        for (const char* w : {"01", "11", "101"}) {
            auto word = BitString::parse(w);
            auto sync = synchronizing_universe(word, base.phi.universe());
            auto st = stationary_exact(sync.phi);
            if (st.pi[sync.phi.index_of(sync.reference)] < pow2_inverse(word.size())) return std::string("pi(V) too small for ") + w;
        }
        return std::string();
    }});
    checks.push_back({"complement symmetry on closed sets", [seed] {
        SplitMix64 rng(seed);
        for (int t = 0; t < 10; ++t) {
            ComputerSet phi = random::twisted_double(2 + rng.below(5), rng);
            auto sigma = OutputPermutation::complement(phi.universe().output_alphabet());
            auto images = locate_images(phi, sigma);
            auto st = stationary_exact(phi);
            for (std::size_t i = 0; i < phi.size(); ++i) {
                if (!images[i]) return std::string("set not closed");
                if (st.pi[i] != st.pi[phi.index_of(*images[i])]) return std::string("mu(C) != mu(sigma C)");
            }
        }
        return std::string();
    }});
    checks.push_back({"toggle class probabilities are flip invariant", [] {
        auto f = toggle_universe();
        auto q = quotient_k(f.phi, 1);
        auto cls = class_stationary(q, f.phi, stationary_exact(f.phi).pi);
        auto images = locate_images(f.phi, InputPermutationTable::flip(), 1);
        for (std::size_t i = 0; i < f.phi.size(); ++i) {
            if (!images[i]) return std::string("flip image missing");
            if (cls[q.class_of[i]] != cls[q.class_of[f.phi.index_of(*images[i])]]) return std::string("class mass moved");
        }
        return std::string();
    }});
    return checks;
}

inline std::vector<Check> probability_checks(std::uint64_t seed) {
    std::vector<Check> checks;
    checks.push_back({"string distributions: mass 1, two routes agree", [seed] {
        for (const auto& phi : sample_sets(seed, 10, 8)) {
            for (StateId c : phi.members()) {
                for (std::size_t n = 0; n <= 5; ++n) {
                    auto tree = string_distribution_n(c, phi, n);
                    if (total_mass(tree) != 1) return std::string("mass is not 1");
                    if (tree != string_distribution_via_computers(c, phi, n)) return std::string("routes disagree");
                }
                if (string_ck_check(phi, c, 2, 3).max_discrepancy != 0) return std::string("string Chapman-Kolmogorov");
            }
        }
        return std::string();
    }});
    checks.push_back({"prefix-constant frequencies match program weights", [seed] {
        SplitMix64 rng(seed);
        for (int t = 0; t < 10; ++t) {
            auto table = random::prefix_table(6, rng);
            auto pc = prefix_constant(table);
            for (std::size_t n = 0; n <= 8; ++n) {
                for (const auto& [s, f] : output_frequencies(*pc.universe, pc.root, n)) {
                    if (!s.defined()) continue;
                    Dyadic expected;
                    for (const auto& [p, out] : table.entries()) {
                        if (p.size() <= n && out == s.value()) expected += Dyadic::pow2_inverse(p.size());
                    }
                    if (!(expected == f)) return "frequency of " + s.to_string();
                }
            }
            if (!(halting_probability(*pc.universe, pc.root, 8) == table.kraft_sum())) return std::string("halting != Kraft");
        }
        return std::string();
    }});
    checks.push_back({"string probability dominates mu(C) 2^-K_C(s)", [seed] {
        for (const auto& phi : positive_sets(seed, 10, 8)) {
            auto st = stationary_exact(phi);
            auto dist = stationary_string_distribution(phi);
            for (std::size_t i = 0; i < phi.size(); ++i) {
                for (const auto& [s, mu] : dist) {
                    auto k = kolmogorov_complexity(phi.universe(), phi.members()[i], s, phi.universe().size());
                    if (k && mu < st.pi[i] * pow2_inverse(*k)) return "lemma fails at " + s.to_string();
                }
            }
        }
        return std::string();
    }});
    checks.push_back({"weighted-average identity on the toggle fixture", [] {
        auto report = weighted_average_identity(toggle_universe().phi, 1);
        if (!report.applicable) return "inapplicable: " + report.failed_hypothesis;
        return report.holds() ? std::string() : std::string("sides differ");
    }});
    return checks;
}

} // namespace detail

inline std::vector<Check> checks_for(const std::string& suite, std::uint64_t seed) {
    if (suite == "universe") return detail::universe_checks(seed);
    if (suite == "emulation") return detail::emulation_checks(seed);
    if (suite == "markov") return detail::markov_checks(seed);
    if (suite == "constructions") return detail::construction_checks(seed);
    if (suite == "probability") return detail::probability_checks(seed);
    throw DomainError("unknown suite \"" + suite + "\"");
}

/// Runs the named suite ("all" for every suite) and stops at the first
/// violation, which is the last entry of the result.
inline std::vector<CheckResult> run(const std::string& suite, std::uint64_t seed = 1) {
    std::vector<std::string> names = suite == "all" ? suite_names() : std::vector<std::string>{suite};
    std::vector<CheckResult> results;
    for (const auto& name : names) {
        for (const auto& check : checks_for(name, seed)) {
            std::string violation;
            try {
                violation = check.run();
            } catch (const Error& e) {
                violation = std::string(e.kind()) + ": " + e.what();
            }
            results.push_back({name, check.name, violation.empty(), violation});
            if (!violation.empty()) return results;
        }
    }
    return results;
}

} // namespace emuprob::verify
